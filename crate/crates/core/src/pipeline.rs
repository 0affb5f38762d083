//! Selector dispatch and evaluation shared by the CLI and the test suites.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{self, DiscretizationScheme, ReliefConfig};
use crate::classifier::{cv_accuracy, ClassifierConfig, EvalResult};
use crate::dataset::stratified_kfold;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::game::{multi_perturbation_shapley, AccuracyGame, CoalitionGame, EstimatorConfig, ShapleyEstimate};
use crate::report::RankingReport;
use crate::wavelet::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Selector {
    #[serde(rename = "shapley-mpe")]
    ShapleyMpe,
    #[serde(rename = "chi2")]
    Chi2,
    #[serde(rename = "info-gain")]
    InfoGain,
    #[serde(rename = "gain-ratio")]
    GainRatio,
    #[serde(rename = "relief")]
    Relief,
}

impl Selector {
    pub const ALL: [Selector; 5] = [
        Selector::ShapleyMpe,
        Selector::Chi2,
        Selector::InfoGain,
        Selector::GainRatio,
        Selector::Relief,
    ];

    pub const BASELINES: [Selector; 4] = [Selector::Chi2, Selector::InfoGain, Selector::GainRatio, Selector::Relief];

    pub fn name(self) -> &'static str {
        match self {
            Selector::ShapleyMpe => "shapley-mpe",
            Selector::Chi2 => "chi2",
            Selector::InfoGain => "info-gain",
            Selector::GainRatio => "gain-ratio",
            Selector::Relief => "relief",
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Selector::ALL
            .into_iter()
            .find(|sel| sel.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown selector {s:?}; expected one of shapley-mpe, chi2, info-gain, gain-ratio, relief"
                ))
            })
    }
}

fn default_group_size() -> usize {
    crate::game::DEFAULT_GROUP_SIZE
}
fn default_rounds() -> usize {
    crate::game::DEFAULT_ROUNDS
}
fn default_folds() -> usize {
    5
}
fn default_top_k() -> usize {
    30
}
fn default_bins() -> usize {
    baselines::DEFAULT_BINS
}
fn default_neighbors() -> usize {
    baselines::DEFAULT_RELIEF_NEIGHBORS
}

/// Parameters shared by every selector and by the evaluation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionParams {
    #[serde(rename = "L", default = "default_group_size")]
    pub group_size: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_neighbors")]
    pub relief_neighbors: usize,
    /// Relief instance draws; every instance when absent.
    #[serde(default)]
    pub relief_draws: Option<usize>,
    #[serde(default)]
    pub classifier: ClassifierConfig,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            group_size: default_group_size(),
            rounds: default_rounds(),
            seed: 0,
            folds: default_folds(),
            top_k: default_top_k(),
            bins: default_bins(),
            relief_neighbors: default_neighbors(),
            relief_draws: None,
            classifier: ClassifierConfig::default(),
        }
    }
}

impl SelectionParams {
    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            group_size: self.group_size,
            rounds: self.rounds,
            seed: self.seed,
            allow_singletons: false,
        }
    }
}

/// Multi-perturbation Shapley values of the accuracy game on `matrix`.
pub fn shapley_estimate(matrix: &FeatureMatrix, params: &SelectionParams) -> Result<ShapleyEstimate> {
    let plan = stratified_kfold(matrix.labels(), params.folds, params.seed)?;
    let game = CoalitionGame::new(AccuracyGame::new(matrix, &plan, params.classifier)?);
    multi_perturbation_shapley(&game, &params.estimator())
}

/// Ranking of every feature of `matrix` by `selector`.
pub fn run_selector(matrix: &FeatureMatrix, selector: Selector, params: &SelectionParams) -> Result<RankingReport> {
    match selector {
        Selector::ShapleyMpe => {
            let estimate = shapley_estimate(matrix, params)?;
            let mut report = RankingReport::from_scores(selector.name(), matrix.names(), &estimate.values)?;
            report.group_size = Some(estimate.group_size);
            report.rounds = Some(estimate.rounds_used);
            report.seed = Some(estimate.seed);
            report.evaluations = estimate.evaluations;
            Ok(report)
        }
        Selector::Chi2 | Selector::InfoGain | Selector::GainRatio => {
            let scheme = DiscretizationScheme::equal_frequency(matrix, params.bins)?;
            match selector {
                Selector::Chi2 => baselines::chi_square(matrix, &scheme),
                Selector::InfoGain => baselines::info_gain(matrix, &scheme),
                _ => baselines::gain_ratio(matrix, &scheme),
            }
        }
        Selector::Relief => baselines::relief(
            matrix,
            &ReliefConfig {
                draws: params.relief_draws,
                neighbors: params.relief_neighbors,
                seed: params.seed,
            },
        ),
    }
}

/// Cross-validated accuracy of the classifier on `columns`, using the fold
/// plan derived from `params.seed`.
pub fn evaluate_columns(matrix: &FeatureMatrix, columns: &[usize], params: &SelectionParams) -> Result<EvalResult> {
    let plan = stratified_kfold(matrix.labels(), params.folds, params.seed)?;
    cv_accuracy(matrix, columns, &plan, &params.classifier)
}

/// Accuracy of the `top_k` features of `report`.
pub fn evaluate_report(matrix: &FeatureMatrix, report: &RankingReport, params: &SelectionParams) -> Result<EvalResult> {
    let columns = report.top_indices(params.top_k.min(matrix.n_features()), matrix.names())?;
    evaluate_columns(matrix, &columns, params)
}

/// Occurrences of each (channel, level) among the first `top_k` features of
/// each report. Every channel x level cell is present, zero or not.
pub fn appearance_counts(
    reports: &[&RankingReport],
    top_k: usize,
    channels: &[Channel],
    depth: usize,
) -> Result<Vec<(Channel, usize, Vec<usize>)>> {
    let mut table: Vec<(Channel, usize, Vec<usize>)> = channels
        .iter()
        .flat_map(|c| (1..=depth).map(move |level| (c.clone(), level, vec![0; reports.len()])))
        .collect();
    for (r, report) in reports.iter().enumerate() {
        for name in report.top(top_k) {
            let descriptor: crate::features::FeatureDescriptor = name.parse()?;
            let cell = table
                .iter_mut()
                .find(|(c, l, _)| *c == descriptor.channel && *l == descriptor.level)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("feature {name} is outside the configured channels and levels"))
                })?;
            cell.2[r] += 1;
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_names_round_trip() {
        for s in Selector::ALL {
            assert_eq!(s.name().parse::<Selector>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("lasso".parse::<Selector>().is_err());
    }

    #[test]
    fn params_defaults_from_empty_json() {
        let p: SelectionParams = serde_json::from_str("{}").unwrap();
        assert_eq!(p, SelectionParams::default());
        assert_eq!((p.group_size, p.folds, p.top_k, p.bins), (4, 5, 30, 10));
        assert!(serde_json::from_str::<SelectionParams>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn appearance_counts_every_cell() {
        let names: Vec<String> = ["ECG_L1_mean", "ECG_L2_std", "ABP_L1_max", "ECG_L1_std"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let report = RankingReport::from_scores("chi2", &names, &[4.0, 3.0, 2.0, 1.0]).unwrap();
        let table = appearance_counts(&[&report], 3, &[Channel::Ecg, Channel::Abp], 2).unwrap();
        let counts: Vec<usize> = table.iter().map(|row| row.2[0]).collect();
        assert_eq!(counts, vec![1, 1, 1, 0]);
    }
}
