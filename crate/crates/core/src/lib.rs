//! Coalition-game feature selection for multi-channel physiological records.
//!
//! The pipeline decomposes each channel with a multi-level Daubechies DWT
//! ([`wavelet`]), summarizes every detail band with a catalog of statistics
//! ([`features`]), and ranks the resulting columns either by Shapley values of
//! a classifier-accuracy game ([`game`], [`classifier`]) or by one of the
//! classic filter scores ([`baselines`]).

pub mod baselines;
pub mod classifier;
pub mod dataset;
pub mod error;
pub mod features;
pub mod game;
pub mod pipeline;
pub mod report;
pub mod wavelet;

pub use error::{Error, Result};
