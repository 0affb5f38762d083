//! Filter selectors that score each feature on its own: information gain,
//! gain ratio, Pearson chi-square over equal-frequency bins, and ReliefF.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::report::RankingReport;

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_RELIEF_NEIGHBORS: usize = 10;

/// Equal-frequency bin boundaries per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationScheme {
    pub bins: usize,
    /// Interior cut points per feature, strictly increasing. A value falls in
    /// bin `b` when exactly `b` cut points are `<=` it.
    pub edges: Vec<Vec<f64>>,
}

impl DiscretizationScheme {
    /// Cut points at the sample quantiles `b / bins`, taken as observed values
    /// so that strictly monotone transforms of a feature leave the binning
    /// unchanged. Repeated cut points collapse.
    pub fn equal_frequency(matrix: &FeatureMatrix, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 bins, got {bins}")));
        }
        let n = matrix.n_rows();
        let edges = (0..matrix.n_features())
            .map(|f| {
                let mut col = matrix.column(f);
                col.sort_by(f64::total_cmp);
                let mut cuts: Vec<f64> = Vec::with_capacity(bins - 1);
                if n == 0 {
                    return cuts;
                }
                for b in 1..bins {
                    let cut = col[(b * n / bins).min(n - 1)];
                    // A cut at the minimum would leave bin 0 empty.
                    if cut > col[0] && cuts.last().is_none_or(|&last| cut > last) {
                        cuts.push(cut);
                    }
                }
                cuts
            })
            .collect();
        Ok(DiscretizationScheme { bins, edges })
    }

    pub fn bin(&self, feature: usize, value: f64) -> usize {
        self.edges[feature].partition_point(|&e| e <= value)
    }

    pub fn bin_count(&self, feature: usize) -> usize {
        self.edges[feature].len() + 1
    }

    /// `table[bin][class]` counts for one feature.
    pub fn contingency(&self, matrix: &FeatureMatrix, feature: usize) -> Vec<[u64; 2]> {
        let mut table = vec![[0u64; 2]; self.bin_count(feature)];
        for (r, label) in matrix.labels().iter().enumerate() {
            table[self.bin(feature, matrix.get(r, feature))][label.index()] += 1;
        }
        table
    }
}

fn entropy_bits(counts: impl IntoIterator<Item = u64>) -> f64 {
    let counts: Vec<u64> = counts.into_iter().collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

/// `H(Y) - H(Y | X)` in bits for a bins x classes table.
pub fn information_gain(table: &[[u64; 2]]) -> f64 {
    let total: u64 = table.iter().flatten().sum();
    if total == 0 {
        return 0.0;
    }
    let class_totals = [0, 1].map(|c| table.iter().map(|row| row[c]).sum::<u64>());
    let conditional: f64 = table
        .iter()
        .map(|row| {
            let n = row[0] + row[1];
            n as f64 / total as f64 * entropy_bits(*row)
        })
        .sum();
    (entropy_bits(class_totals) - conditional).max(0.0)
}

/// Information gain over the split information `H(X)`; 0 when `H(X) = 0`.
pub fn gain_ratio_of(table: &[[u64; 2]]) -> f64 {
    let split = entropy_bits(table.iter().map(|row| row[0] + row[1]));
    if split <= 0.0 {
        0.0
    } else {
        information_gain(table) / split
    }
}

/// Pearson chi-square statistic; empty rows and columns are dropped.
pub fn chi_square_of(table: &[[u64; 2]]) -> f64 {
    let rows: Vec<[u64; 2]> = table.iter().copied().filter(|r| r[0] + r[1] > 0).collect();
    let total: u64 = rows.iter().flatten().sum();
    let class_totals = [0, 1].map(|c| rows.iter().map(|row| row[c]).sum::<u64>());
    let mut chi = 0.0;
    for row in &rows {
        let row_total = (row[0] + row[1]) as f64;
        for c in 0..2 {
            if class_totals[c] == 0 {
                continue;
            }
            let expected = row_total * class_totals[c] as f64 / total as f64;
            chi += (row[c] as f64 - expected).powi(2) / expected;
        }
    }
    chi
}

fn require_both_classes(matrix: &FeatureMatrix) -> Result<()> {
    if Label::BOTH
        .iter()
        .any(|class| !matrix.labels().contains(class))
    {
        return Err(Error::SingleClass);
    }
    Ok(())
}

fn table_scores(
    method: &str,
    matrix: &FeatureMatrix,
    scheme: &DiscretizationScheme,
    score: fn(&[[u64; 2]]) -> f64,
) -> Result<RankingReport> {
    require_both_classes(matrix)?;
    if scheme.edges.len() != matrix.n_features() {
        return Err(Error::InvalidArgument(format!(
            "discretization covers {} features, matrix has {}",
            scheme.edges.len(),
            matrix.n_features()
        )));
    }
    let values: Vec<f64> = (0..matrix.n_features())
        .into_par_iter()
        .map(|f| score(&scheme.contingency(matrix, f)))
        .collect();
    RankingReport::from_scores(method, matrix.names(), &values)
}

pub fn info_gain(matrix: &FeatureMatrix, scheme: &DiscretizationScheme) -> Result<RankingReport> {
    table_scores("info-gain", matrix, scheme, information_gain)
}

pub fn gain_ratio(matrix: &FeatureMatrix, scheme: &DiscretizationScheme) -> Result<RankingReport> {
    table_scores("gain-ratio", matrix, scheme, gain_ratio_of)
}

pub fn chi_square(matrix: &FeatureMatrix, scheme: &DiscretizationScheme) -> Result<RankingReport> {
    table_scores("chi2", matrix, scheme, chi_square_of)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReliefConfig {
    /// Instances drawn; `None` uses every instance once, in order.
    pub draws: Option<usize>,
    pub neighbors: usize,
    pub seed: u64,
}

impl Default for ReliefConfig {
    fn default() -> Self {
        ReliefConfig {
            draws: None,
            neighbors: DEFAULT_RELIEF_NEIGHBORS,
            seed: 0,
        }
    }
}

/// ReliefF weights for two classes:
/// `W[f] = Σ diff(f, x, miss) / (m k) - Σ diff(f, x, hit) / (m k)` with
/// range-normalized `diff` and Euclidean neighbors on range-normalized
/// features. Distance ties go to the lower row index.
pub fn relief_weights(matrix: &FeatureMatrix, config: &ReliefConfig) -> Result<Vec<f64>> {
    require_both_classes(matrix)?;
    let n = matrix.n_rows();
    let w = matrix.n_features();
    let k = config.neighbors;
    if k == 0 {
        return Err(Error::InvalidArgument("relief needs at least one neighbor".into()));
    }
    for class in Label::BOTH {
        let count = matrix.labels().iter().filter(|&&l| l == class).count();
        if count <= k {
            return Err(Error::ClassTooSmall {
                label: class.to_string(),
                count,
                required: k + 1,
            });
        }
    }
    let ranges: Vec<(f64, f64)> = (0..w)
        .map(|f| {
            let col = matrix.column(f);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi - lo)
        })
        .collect();
    // Range-normalized copy; zero-range features become 0 everywhere.
    let scaled: Vec<f64> = (0..n)
        .flat_map(|r| {
            let ranges = &ranges;
            matrix.row(r).iter().enumerate().map(move |(f, &v)| {
                let (lo, span) = ranges[f];
                if span > 0.0 {
                    (v - lo) / span
                } else {
                    0.0
                }
            })
        })
        .collect();
    let row = |r: usize| &scaled[r * w..(r + 1) * w];
    let instances: Vec<usize> = match config.draws {
        None => (0..n).collect(),
        Some(m) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            if m <= n {
                sample(&mut rng, n, m).into_vec()
            } else {
                return Err(Error::InvalidArgument(format!("cannot draw {m} of {n} instances")));
            }
        }
    };
    let m = instances.len() as f64;
    let labels = matrix.labels();
    let per_instance: Vec<Vec<f64>> = instances
        .par_iter()
        .map(|&i| {
            let xi = row(i);
            let mut by_class: [Vec<(f64, usize)>; 2] = [Vec::new(), Vec::new()];
            for j in (0..n).filter(|&j| j != i) {
                let d: f64 = xi.iter().zip(row(j)).map(|(a, b)| (a - b).powi(2)).sum();
                by_class[labels[j].index()].push((d, j));
            }
            let mut delta = vec![0.0; w];
            for (class, candidates) in by_class.iter_mut().enumerate() {
                candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let sign = if class == labels[i].index() { -1.0 } else { 1.0 };
                for &(_, j) in candidates.iter().take(k) {
                    for (d, (a, b)) in delta.iter_mut().zip(xi.iter().zip(row(j))) {
                        *d += sign * (a - b).abs();
                    }
                }
            }
            delta
        })
        .collect();
    let mut weights = vec![0.0; w];
    for delta in per_instance {
        for (wf, d) in weights.iter_mut().zip(delta) {
            *wf += d / (m * k as f64);
        }
    }
    Ok(weights)
}

pub fn relief(matrix: &FeatureMatrix, config: &ReliefConfig) -> Result<RankingReport> {
    let weights = relief_weights(matrix, config)?;
    let mut report = RankingReport::from_scores("relief", matrix.names(), &weights)?;
    report.seed = Some(config.seed);
    Ok(report)
}
