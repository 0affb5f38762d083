//! Transferable-utility coalition games over features.
//!
//! Players are feature indices and the payoff of a coalition is supplied by a
//! [`CharacteristicFunction`]. [`CoalitionGame`] adds the empty-coalition
//! convention `v(∅) = 0` and a concurrent memo of evaluated coalitions.
//!
//! Two solution routines are provided:
//!
//! * [`exact_shapley`] enumerates every coalition and weights each marginal
//!   contribution `v(S ∪ {i}) - v(S)` by `|S|! (n - |S| - 1)! / n!`.
//! * [`multi_perturbation_shapley`] repeatedly shuffles the players, cuts the
//!   shuffle into groups of `L`, solves each group exactly, and averages each
//!   player's within-group value over rounds. Cost per round is at most
//!   `ceil(n / L) * 2^L` payoff evaluations.

use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{cv_accuracy, majority_rate, ClassifierConfig};
use crate::dataset::SplitPlan;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Largest game solved by full enumeration unless the caller raises it.
pub const DEFAULT_EXACT_CEILING: usize = 20;

/// Default coalition group size for the estimator.
pub const DEFAULT_GROUP_SIZE: usize = 4;

/// Default number of estimator rounds.
pub const DEFAULT_ROUNDS: usize = 100;

/// Payoff of non-empty coalitions of players `0..n_players()`.
pub trait CharacteristicFunction: Sync {
    fn n_players(&self) -> usize;

    /// Payoff of `coalition`, given as strictly ascending player indices.
    /// Never called with the empty coalition.
    fn payoff(&self, coalition: &[usize]) -> Result<f64>;
}

/// Game defined by a closure.
pub struct FnGame<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[usize]) -> f64 + Sync> FnGame<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnGame { n, f }
    }
}

impl<F: Fn(&[usize]) -> f64 + Sync> CharacteristicFunction for FnGame<F> {
    fn n_players(&self) -> usize {
        self.n
    }

    fn payoff(&self, coalition: &[usize]) -> Result<f64> {
        Ok((self.f)(coalition))
    }
}

/// Game given by an explicit payoff for every coalition, indexed by bitmask.
/// Entry 0 is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGame {
    n: usize,
    payoffs: Vec<f64>,
}

impl TableGame {
    pub fn new(n: usize, payoffs: Vec<f64>) -> Result<Self> {
        if n >= usize::BITS as usize || payoffs.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "a {n}-player table needs 2^{n} payoffs, got {}",
                payoffs.len()
            )));
        }
        Ok(TableGame { n, payoffs })
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }
}

pub fn mask_of(coalition: &[usize]) -> usize {
    coalition.iter().fold(0, |m, &p| m | (1 << p))
}

impl CharacteristicFunction for TableGame {
    fn n_players(&self) -> usize {
        self.n
    }

    fn payoff(&self, coalition: &[usize]) -> Result<f64> {
        Ok(self.payoffs[mask_of(coalition)])
    }
}

/// Characteristic function for feature selection: cross-validated accuracy of
/// the classifier on the coalition's features, minus the majority-class rate.
pub struct AccuracyGame<'a> {
    matrix: &'a FeatureMatrix,
    plan: &'a SplitPlan,
    classifier: ClassifierConfig,
    baseline: f64,
}

impl<'a> AccuracyGame<'a> {
    pub fn new(matrix: &'a FeatureMatrix, plan: &'a SplitPlan, classifier: ClassifierConfig) -> Result<Self> {
        if plan.len() != matrix.n_rows() {
            return Err(Error::InvalidArgument(format!(
                "split plan covers {} rows, matrix has {}",
                plan.len(),
                matrix.n_rows()
            )));
        }
        Ok(AccuracyGame {
            matrix,
            plan,
            classifier,
            baseline: majority_rate(matrix.labels()),
        })
    }

    /// Majority-class rate subtracted from every accuracy.
    pub fn baseline(&self) -> f64 {
        self.baseline
    }
}

impl CharacteristicFunction for AccuracyGame<'_> {
    fn n_players(&self) -> usize {
        self.matrix.n_features()
    }

    fn payoff(&self, coalition: &[usize]) -> Result<f64> {
        Ok(cv_accuracy(self.matrix, coalition, self.plan, &self.classifier)?.accuracy - self.baseline)
    }
}

/// A characteristic function with `v(∅) = 0` and a memo of evaluated
/// coalitions that is safe to share between threads.
pub struct CoalitionGame<F> {
    function: F,
    cache: DashMap<Box<[u32]>, f64>,
    calls: AtomicU64,
    requests: AtomicU64,
}

impl<F: CharacteristicFunction> CoalitionGame<F> {
    pub fn new(function: F) -> Self {
        CoalitionGame {
            function,
            cache: DashMap::new(),
            calls: AtomicU64::new(0),
            requests: AtomicU64::new(0),
        }
    }

    pub fn n_players(&self) -> usize {
        self.function.n_players()
    }

    pub fn function(&self) -> &F {
        &self.function
    }

    fn check(&self, coalition: &[usize]) -> Result<()> {
        let n = self.n_players();
        if coalition.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "coalition must list players in strictly ascending order".into(),
            ));
        }
        if let Some(&p) = coalition.last().filter(|&&p| p >= n) {
            return Err(Error::InvalidArgument(format!("player {p} out of range for {n} players")));
        }
        Ok(())
    }

    /// `v(coalition)`, memoized. `coalition` must be strictly ascending.
    pub fn value(&self, coalition: &[usize]) -> Result<f64> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        if coalition.is_empty() {
            return Ok(0.0);
        }
        self.check(coalition)?;
        let key: Box<[u32]> = coalition.iter().map(|&p| p as u32).collect();
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let v = self.function.payoff(coalition)?;
        Ok(*self.cache.entry(key).or_insert(v))
    }

    /// Number of distinct non-empty coalitions evaluated so far.
    pub fn distinct_evaluations(&self) -> u64 {
        self.cache.len() as u64
    }

    /// Calls made to the characteristic function. Can exceed
    /// [`Self::distinct_evaluations`] when threads race on the same coalition.
    pub fn function_calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// Calls to [`Self::value`], including cache hits and the empty coalition.
    pub fn requests(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    /// Payoffs of every subset of `members` (ascending), indexed by local
    /// bitmask over `members`.
    fn subset_values(&self, members: &[usize]) -> Result<Vec<f64>> {
        let g = members.len();
        let mut coalition = Vec::with_capacity(g);
        (0..1usize << g)
            .map(|mask| {
                coalition.clear();
                coalition.extend((0..g).filter(|b| mask >> b & 1 == 1).map(|b| members[b]));
                self.value(&coalition)
            })
            .collect()
    }
}

/// `Δ_i(S) = v(S ∪ {i}) - v(S)`.
pub fn marginal_importance<F: CharacteristicFunction>(
    game: &CoalitionGame<F>,
    player: usize,
    coalition: &[usize],
) -> Result<f64> {
    if coalition.contains(&player) {
        return Err(Error::PlayerInCoalition { player });
    }
    let mut with: Vec<usize> = coalition.to_vec();
    with.sort_unstable();
    let without = with.clone();
    let pos = with.partition_point(|&p| p < player);
    with.insert(pos, player);
    Ok(game.value(&with)? - game.value(&without)?)
}

/// Shapley weights `s! (g - s - 1)! / g!` for `s = 0..g`, computed as
/// `1 / (g * C(g - 1, s))`.
fn shapley_weights(g: usize) -> Vec<f64> {
    let mut binom = 1.0f64;
    (0..g)
        .map(|s| {
            if s > 0 {
                binom = binom * (g - s) as f64 / s as f64;
            }
            1.0 / (g as f64 * binom)
        })
        .collect()
}

/// Shapley values of a `g`-player game given by `values[mask]`.
fn shapley_from_table(values: &[f64], g: usize) -> Vec<f64> {
    let weights = shapley_weights(g);
    (0..g)
        .map(|i| {
            let bit = 1usize << i;
            let mut total = 0.0;
            for mask in 0..values.len() {
                if mask & bit == 0 {
                    let size = mask.count_ones() as usize;
                    total += weights[size] * (values[mask | bit] - values[mask]);
                }
            }
            total
        })
        .collect()
}

/// Exact Shapley values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactShapley {
    pub values: Vec<f64>,
}

/// Exact Shapley values of a game with at most `ceiling` players.
pub fn exact_shapley_with_ceiling<F: CharacteristicFunction>(
    game: &CoalitionGame<F>,
    ceiling: usize,
) -> Result<ExactShapley> {
    let n = game.n_players();
    if n > ceiling || n >= usize::BITS as usize - 1 {
        return Err(Error::TooManyPlayers { players: n, ceiling });
    }
    let members: Vec<usize> = (0..n).collect();
    let values = (0..1usize << n)
        .into_par_iter()
        .map(|mask| {
            let coalition: Vec<usize> = members.iter().copied().filter(|b| mask >> b & 1 == 1).collect();
            game.value(&coalition)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ExactShapley {
        values: shapley_from_table(&values, n),
    })
}

/// Exact Shapley values, limited to [`DEFAULT_EXACT_CEILING`] players.
pub fn exact_shapley<F: CharacteristicFunction>(game: &CoalitionGame<F>) -> Result<ExactShapley> {
    exact_shapley_with_ceiling(game, DEFAULT_EXACT_CEILING)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub group_size: usize,
    pub rounds: usize,
    pub seed: u64,
    /// Permit `group_size == 1`, which reduces every value to `v({i})`.
    #[serde(default)]
    pub allow_singletons: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            group_size: DEFAULT_GROUP_SIZE,
            rounds: DEFAULT_ROUNDS,
            seed: 0,
            allow_singletons: false,
        }
    }
}

/// Output of [`multi_perturbation_shapley`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyEstimate {
    pub values: Vec<f64>,
    pub rounds_used: usize,
    pub group_size: usize,
    pub seed: u64,
    /// Marginal contributions computed per player over all rounds.
    pub player_evaluations: Vec<u64>,
    /// Distinct coalitions evaluated by the game when the estimate finished.
    pub evaluations: u64,
}

/// Random partition of `0..n` into consecutive blocks of `group_size` from a
/// uniform shuffle. The last block holds the remainder. Members of each block
/// are sorted.
pub fn round_partition(n: usize, group_size: usize, seed: u64, round: usize) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round as u64);
    let mut players: Vec<usize> = (0..n).collect();
    players.shuffle(&mut rng);
    players
        .chunks(group_size)
        .map(|chunk| {
            let mut group = chunk.to_vec();
            group.sort_unstable();
            group
        })
        .collect()
}

/// Within-group Shapley values of one round, scattered into a length-`n`
/// vector.
fn round_contribution<F: CharacteristicFunction>(
    game: &CoalitionGame<F>,
    config: &EstimatorConfig,
    round: usize,
) -> Result<Vec<f64>> {
    let n = game.n_players();
    let mut out = vec![0.0; n];
    for group in round_partition(n, config.group_size, config.seed, round) {
        let values = game.subset_values(&group)?;
        for (player, value) in group.iter().zip(shapley_from_table(&values, group.len())) {
            out[*player] = value;
        }
    }
    Ok(out)
}

/// Multi-perturbation Shapley estimate with coalitions confined to random
/// groups of `config.group_size` players.
///
/// Rounds run in parallel; each round's contribution is computed on its own
/// generator stream and the per-player sums are reduced in round order, so
/// the estimate does not depend on the thread count.
pub fn multi_perturbation_shapley<F: CharacteristicFunction>(
    game: &CoalitionGame<F>,
    config: &EstimatorConfig,
) -> Result<ShapleyEstimate> {
    let n = game.n_players();
    let l = config.group_size;
    if l > n {
        return Err(Error::InvalidArgument(format!("group size {l} exceeds player count {n}")));
    }
    if l < 2 && !(l == 1 && config.allow_singletons) {
        return Err(Error::InvalidArgument(format!(
            "group size must be >= 2 (got {l}); singleton groups need allow_singletons"
        )));
    }
    if config.rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be >= 1".into()));
    }
    let contributions = (0..config.rounds)
        .into_par_iter()
        .map(|round| round_contribution(game, config, round))
        .collect::<Result<Vec<_>>>()?;
    let mut sums = vec![0.0; n];
    for round in &contributions {
        for (s, v) in sums.iter_mut().zip(round) {
            *s += v;
        }
    }
    let rounds = config.rounds as f64;
    let mut player_evaluations = vec![0u64; n];
    for round in 0..config.rounds {
        for group in round_partition(n, l, config.seed, round) {
            let per_player = 1u64 << (group.len() - 1);
            for p in group {
                player_evaluations[p] += per_player;
            }
        }
    }
    Ok(ShapleyEstimate {
        values: sums.into_iter().map(|s| s / rounds).collect(),
        rounds_used: config.rounds,
        group_size: l,
        seed: config.seed,
        player_evaluations,
        evaluations: game.distinct_evaluations(),
    })
}

/// Player indices sorted by descending value; ties go to the lower index.
pub fn rank_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// The `top_k` highest-valued players, best first.
pub fn rank_features(values: &[f64], top_k: usize) -> Result<Vec<usize>> {
    if top_k > values.len() {
        return Err(Error::InvalidArgument(format!(
            "top_k {top_k} exceeds player count {}",
            values.len()
        )));
    }
    let mut order = rank_order(values);
    order.truncate(top_k);
    Ok(order)
}
