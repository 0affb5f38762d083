//! Gaussian Bayes classifiers and cross-validated accuracy.
//!
//! Two class-conditional models are available. [`GaussianNbModel`] treats
//! features as independent given the class (diagonal covariance).
//! [`GaussianFullModel`] keeps the full class covariance, shrunk toward its
//! diagonal, and so can represent interactions such as a parity between two
//! features, which no per-feature model can.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{Label, SplitPlan};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Relative variance floor: `1e-9 * (global variance + 1e-12)`.
pub const RELATIVE_FLOOR: f64 = 1e-9;

/// Default shrinkage of class covariances toward their diagonal.
pub const DEFAULT_SHRINKAGE: f64 = 0.1;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VarianceFloor {
    /// `scale * (variance of the feature over all training rows + 1e-12)`.
    Relative(f64),
    Absolute(f64),
}

impl Default for VarianceFloor {
    fn default() -> Self {
        VarianceFloor::Relative(RELATIVE_FLOOR)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "naive-bayes")]
    NaiveBayes,
    #[default]
    #[serde(rename = "gaussian-full")]
    GaussianFull,
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive-bayes" => Ok(ClassifierKind::NaiveBayes),
            "gaussian-full" => Ok(ClassifierKind::GaussianFull),
            _ => Err(Error::InvalidArgument(format!(
                "unknown classifier {s:?}; expected naive-bayes or gaussian-full"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub floor: VarianceFloor,
    /// Weight of the diagonal in the shrunk class covariance, in `[0, 1]`.
    /// Only used by [`ClassifierKind::GaussianFull`].
    pub shrinkage: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::default(),
            floor: VarianceFloor::default(),
            shrinkage: DEFAULT_SHRINKAGE,
        }
    }
}

impl ClassifierConfig {
    pub fn naive_bayes() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::NaiveBayes,
            ..Self::default()
        }
    }
}

/// Row-major copy of `columns` for `rows`, with the matching labels.
struct Design {
    width: usize,
    values: Vec<f64>,
    labels: Vec<Label>,
}

impl Design {
    fn gather(matrix: &FeatureMatrix, columns: &[usize], rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * columns.len());
        for &r in rows {
            values.extend(columns.iter().map(|&c| matrix.get(r, c)));
        }
        Design {
            width: columns.len(),
            values,
            labels: rows.iter().map(|&r| matrix.labels()[r]).collect(),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    fn len(&self) -> usize {
        self.labels.len()
    }
}

fn check_subset(matrix: &FeatureMatrix, columns: &[usize]) -> Result<()> {
    if columns.is_empty() {
        return Err(Error::InvalidArgument("feature subset must be non-empty".into()));
    }
    if let Some(&c) = columns.iter().find(|&&c| c >= matrix.n_features()) {
        return Err(Error::InvalidArgument(format!(
            "feature index {c} out of range for {} features",
            matrix.n_features()
        )));
    }
    Ok(())
}

/// Class counts, per-class means and per-feature floors of a design.
struct Moments {
    counts: [usize; 2],
    means: [Vec<f64>; 2],
    floors: Vec<f64>,
}

impl Moments {
    fn compute(design: &Design, floor: VarianceFloor) -> Result<Self> {
        let w = design.width;
        let mut counts = [0usize; 2];
        let mut sums = [vec![0.0; w], vec![0.0; w]];
        for i in 0..design.len() {
            let c = design.labels[i].index();
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(design.row(i)) {
                *s += v;
            }
        }
        if counts.contains(&0) {
            return Err(Error::SingleClass);
        }
        let means = [0, 1].map(|c| sums[c].iter().map(|s| s / counts[c] as f64).collect::<Vec<_>>());
        let floors = match floor {
            VarianceFloor::Absolute(f) => vec![f; w],
            VarianceFloor::Relative(scale) => {
                let n = design.len() as f64;
                (0..w)
                    .map(|f| {
                        let mean = (sums[0][f] + sums[1][f]) / n;
                        let var = (0..design.len())
                            .map(|i| (design.row(i)[f] - mean).powi(2))
                            .sum::<f64>()
                            / n;
                        scale * (var + 1e-12)
                    })
                    .collect()
            }
        };
        Ok(Moments { counts, means, floors })
    }

    fn priors(&self) -> [f64; 2] {
        let n = (self.counts[0] + self.counts[1]) as f64;
        [self.counts[0] as f64 / n, self.counts[1] as f64 / n]
    }
}

/// Picks the larger score; exact ties go to the smaller label (`false`).
fn decide(scores: [f64; 2]) -> Label {
    if scores[1] > scores[0] {
        Label::True
    } else {
        Label::False
    }
}

/// Gaussian naive Bayes: independent per-feature normal likelihoods.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNbModel {
    pub class_priors: [f64; 2],
    /// `means[class][feature]`.
    pub means: [Vec<f64>; 2],
    /// `variances[class][feature]`, each at least the feature's floor.
    pub variances: [Vec<f64>; 2],
    pub variance_floor: Vec<f64>,
}

impl GaussianNbModel {
    fn fit_design(design: &Design, floor: VarianceFloor) -> Result<Self> {
        let m = Moments::compute(design, floor)?;
        let w = design.width;
        let mut sq = [vec![0.0; w], vec![0.0; w]];
        for i in 0..design.len() {
            let c = design.labels[i].index();
            for (f, v) in design.row(i).iter().enumerate() {
                sq[c][f] += (v - m.means[c][f]).powi(2);
            }
        }
        let variances = [0, 1].map(|c| {
            sq[c]
                .iter()
                .zip(&m.floors)
                .map(|(s, &fl)| (s / m.counts[c] as f64).max(fl))
                .collect::<Vec<_>>()
        });
        Ok(GaussianNbModel {
            class_priors: m.priors(),
            means: m.means,
            variances,
            variance_floor: m.floors,
        })
    }

    pub fn n_features(&self) -> usize {
        self.means[0].len()
    }

    /// Log prior plus log likelihood of `row` under each class.
    pub fn log_scores(&self, row: &[f64]) -> [f64; 2] {
        [0, 1].map(|c| {
            let mut s = self.class_priors[c].ln();
            for ((x, mu), var) in row.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                s -= 0.5 * (LN_2PI + var.ln() + (x - mu).powi(2) / var);
            }
            s
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> Label {
        decide(self.log_scores(row))
    }
}

/// Gaussian class-conditional model with full, diagonally shrunk covariance.
#[derive(Debug, Clone)]
pub struct GaussianFullModel {
    pub class_priors: [f64; 2],
    pub means: [DVector<f64>; 2],
    /// Lower Cholesky factors of the class covariances.
    chol: [DMatrix<f64>; 2],
    log_dets: [f64; 2],
}

impl GaussianFullModel {
    fn fit_design(design: &Design, floor: VarianceFloor, shrinkage: f64) -> Result<Self> {
        let m = Moments::compute(design, floor)?;
        let w = design.width;
        let mut covs = [DMatrix::<f64>::zeros(w, w), DMatrix::<f64>::zeros(w, w)];
        for i in 0..design.len() {
            let c = design.labels[i].index();
            let row = design.row(i);
            for a in 0..w {
                let da = row[a] - m.means[c][a];
                for b in 0..=a {
                    covs[c][(a, b)] += da * (row[b] - m.means[c][b]);
                }
            }
        }
        let mut chol = Vec::with_capacity(2);
        let mut log_dets = [0.0; 2];
        for (c, cov) in covs.iter_mut().enumerate() {
            let n = m.counts[c] as f64;
            for a in 0..w {
                for b in 0..a {
                    let v = (1.0 - shrinkage) * cov[(a, b)] / n;
                    cov[(a, b)] = v;
                    cov[(b, a)] = v;
                }
                cov[(a, a)] = (cov[(a, a)] / n).max(m.floors[a]);
            }
            let mut factor = None;
            // Flooring keeps the diagonal positive; if the shrunk matrix is
            // still numerically singular, add jitter scaled by the floor.
            for attempt in 0..8 {
                let mut trial = cov.clone();
                if attempt > 0 {
                    for a in 0..w {
                        trial[(a, a)] += m.floors[a] * 10f64.powi(attempt * 2);
                    }
                }
                if let Some(ch) = trial.cholesky() {
                    factor = Some(ch.l());
                    break;
                }
            }
            let l = factor.ok_or_else(|| Error::InvalidArgument("class covariance is not positive definite".into()))?;
            log_dets[c] = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
            chol.push(l);
        }
        let chol: [DMatrix<f64>; 2] = chol.try_into().expect("two classes");
        Ok(GaussianFullModel {
            class_priors: m.priors(),
            means: m.means.map(DVector::from_vec),
            chol,
            log_dets,
        })
    }

    pub fn n_features(&self) -> usize {
        self.means[0].len()
    }

    pub fn log_scores(&self, row: &[f64]) -> [f64; 2] {
        let x = DVector::from_column_slice(row);
        [0, 1].map(|c| {
            let diff = &x - &self.means[c];
            let z = self.chol[c]
                .solve_lower_triangular(&diff)
                .expect("Cholesky factor has a positive diagonal");
            self.class_priors[c].ln() - 0.5 * (row.len() as f64 * LN_2PI + self.log_dets[c] + z.norm_squared())
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> Label {
        decide(self.log_scores(row))
    }
}

/// A fitted model of either kind.
#[derive(Debug, Clone)]
pub enum Model {
    NaiveBayes(GaussianNbModel),
    GaussianFull(GaussianFullModel),
}

impl Model {
    pub fn n_features(&self) -> usize {
        match self {
            Model::NaiveBayes(m) => m.n_features(),
            Model::GaussianFull(m) => m.n_features(),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> Label {
        match self {
            Model::NaiveBayes(m) => m.predict_row(row),
            Model::GaussianFull(m) => m.predict_row(row),
        }
    }
}

fn fit_design(design: &Design, config: &ClassifierConfig) -> Result<Model> {
    Ok(match config.kind {
        ClassifierKind::NaiveBayes => Model::NaiveBayes(GaussianNbModel::fit_design(design, config.floor)?),
        ClassifierKind::GaussianFull => {
            Model::GaussianFull(GaussianFullModel::fit_design(design, config.floor, config.shrinkage)?)
        }
    })
}

/// Fits a model on `rows` of `matrix` restricted to `columns`.
pub fn fit_rows(matrix: &FeatureMatrix, columns: &[usize], rows: &[usize], config: &ClassifierConfig) -> Result<Model> {
    check_subset(matrix, columns)?;
    fit_design(&Design::gather(matrix, columns, rows), config)
}

/// Fits a model on every row of `matrix` restricted to `columns`.
pub fn fit(matrix: &FeatureMatrix, columns: &[usize], config: &ClassifierConfig) -> Result<Model> {
    let rows: Vec<usize> = (0..matrix.n_rows()).collect();
    fit_rows(matrix, columns, &rows, config)
}

/// Naive Bayes fit on all rows.
pub fn fit_naive_bayes(matrix: &FeatureMatrix, columns: &[usize], floor: VarianceFloor) -> Result<GaussianNbModel> {
    check_subset(matrix, columns)?;
    let rows: Vec<usize> = (0..matrix.n_rows()).collect();
    GaussianNbModel::fit_design(&Design::gather(matrix, columns, &rows), floor)
}

/// Predicted labels for `rows`, each as wide as the model.
pub fn predict<'a>(model: &Model, rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Vec<Label>> {
    rows.into_iter()
        .map(|row| {
            if row.len() != model.n_features() {
                Err(Error::WidthMismatch {
                    expected: model.n_features(),
                    found: row.len(),
                })
            } else {
                Ok(model.predict_row(row))
            }
        })
        .collect()
}

/// Pooled cross-validation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub accuracy: f64,
    /// Recall of `false` then `true`.
    pub recall: [f64; 2],
    /// `confusion[actual][predicted]`, indexed by [`Label::index`].
    pub confusion: [[u64; 2]; 2],
}

impl EvalResult {
    pub fn from_confusion(confusion: [[u64; 2]; 2]) -> Self {
        let total: u64 = confusion.iter().flatten().sum();
        let correct = confusion[0][0] + confusion[1][1];
        let recall = [0, 1].map(|c| {
            let n = confusion[c][0] + confusion[c][1];
            if n == 0 {
                0.0
            } else {
                confusion[c][c] as f64 / n as f64
            }
        });
        EvalResult {
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
            recall,
            confusion,
        }
    }
}

/// Fraction of the most frequent class.
pub fn majority_rate(labels: &[Label]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let trues = labels.iter().filter(|&&l| l == Label::True).count();
    trues.max(labels.len() - trues) as f64 / labels.len() as f64
}

/// k-fold cross-validated accuracy of the classifier on `columns`: fit on
/// k-1 folds, predict the held-out fold, pool the confusion counts.
pub fn cv_accuracy(
    matrix: &FeatureMatrix,
    columns: &[usize],
    plan: &SplitPlan,
    config: &ClassifierConfig,
) -> Result<EvalResult> {
    check_subset(matrix, columns)?;
    if plan.len() != matrix.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "split plan covers {} rows, matrix has {}",
            plan.len(),
            matrix.n_rows()
        )));
    }
    let mut confusion = [[0u64; 2]; 2];
    for fold in 0..plan.k {
        let (train, test) = plan.fold(fold);
        if test.is_empty() {
            continue;
        }
        let model = fit_design(&Design::gather(matrix, columns, &train), config)?;
        let held_out = Design::gather(matrix, columns, &test);
        for i in 0..held_out.len() {
            let predicted = model.predict_row(held_out.row(i));
            confusion[held_out.labels[i].index()][predicted.index()] += 1;
        }
    }
    Ok(EvalResult::from_confusion(confusion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::stratified_kfold;

    fn matrix(rows: Vec<Vec<f64>>, labels: &[u8]) -> FeatureMatrix {
        let names = (0..rows[0].len()).map(|i| format!("f{i}")).collect();
        let labels = labels.iter().map(|&b| Label::from_bool(b == 1)).collect();
        FeatureMatrix::new(names, rows, labels).unwrap()
    }

    #[test]
    fn degenerate_moments_hit_the_floor() {
        let m = matrix(vec![vec![0.0], vec![0.0], vec![10.0], vec![10.0]], &[0, 0, 1, 1]);
        let model = fit_naive_bayes(&m, &[0], VarianceFloor::Absolute(1e-9)).unwrap();
        assert_eq!(model.means, [vec![0.0], vec![10.0]]);
        assert_eq!(model.variances, [vec![1e-9], vec![1e-9]]);
        assert_eq!(model.class_priors, [0.5, 0.5]);
    }

    #[test]
    fn relative_floor_tracks_global_variance() {
        let m = matrix(vec![vec![0.0], vec![0.0], vec![10.0], vec![10.0]], &[0, 0, 1, 1]);
        let model = fit_naive_bayes(&m, &[0], VarianceFloor::default()).unwrap();
        assert!((model.variance_floor[0] - 1e-9 * (25.0 + 1e-12)).abs() < 1e-20);
    }

    #[test]
    fn posterior_matches_hand_computation() {
        // Class false: (0,1), (2,3); class true: (4,0), (6,2).
        let m = matrix(
            vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 0.0], vec![6.0, 2.0]],
            &[0, 0, 1, 1],
        );
        let model = fit_naive_bayes(&m, &[0, 1], VarianceFloor::Absolute(1e-9)).unwrap();
        // Means: false (1,2), true (5,1). Population variances are all 1.
        assert_eq!(model.means, [vec![1.0, 2.0], vec![5.0, 1.0]]);
        assert_eq!(model.variances, [vec![1.0, 1.0], vec![1.0, 1.0]]);
        let x = [2.5, 1.5];
        let scores = model.log_scores(&x);
        let by_hand = |mu: [f64; 2]| {
            0.5f64.ln() - (2.0 * std::f64::consts::PI).ln() - 0.5 * ((x[0] - mu[0]).powi(2) + (x[1] - mu[1]).powi(2))
        };
        assert!((scores[0] - by_hand([1.0, 2.0])).abs() < 1e-12);
        assert!((scores[1] - by_hand([5.0, 1.0])).abs() < 1e-12);
        // -(1.5^2 + 0.5^2)/2 = -1.25 beats -(2.5^2 + 0.5^2)/2 = -3.25.
        assert_eq!(model.predict_row(&x), Label::False);
    }

    #[test]
    fn point_at_class_mean_and_tie_break() {
        let m = matrix(vec![vec![-1.0], vec![-3.0], vec![1.0], vec![3.0]], &[0, 0, 1, 1]);
        for config in [ClassifierConfig::naive_bayes(), ClassifierConfig::default()] {
            let model = fit(&m, &[0], &config).unwrap();
            assert_eq!(model.predict_row(&[2.0]), Label::True);
            assert_eq!(model.predict_row(&[-2.0]), Label::False);
            // Symmetric model, equidistant point: the smaller label wins.
            assert_eq!(model.predict_row(&[0.0]), Label::False);
        }
    }

    #[test]
    fn width_mismatch_and_single_class_rejected() {
        let m = matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![3.0, 3.0], vec![4.0, 4.0]], &[0, 0, 1, 1]);
        let model = fit(&m, &[0, 1], &ClassifierConfig::default()).unwrap();
        assert!(matches!(
            predict(&model, [&[1.0][..]]),
            Err(Error::WidthMismatch { expected: 2, found: 1 })
        ));
        let single = matrix(vec![vec![0.0], vec![1.0]], &[1, 1]);
        assert!(matches!(fit(&single, &[0], &ClassifierConfig::default()), Err(Error::SingleClass)));
        assert!(fit(&m, &[], &ClassifierConfig::default()).is_err());
    }

    #[test]
    fn separable_feature_has_perfect_cv_accuracy() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![if i < 10 { i as f64 } else { 100.0 + i as f64 }]).collect();
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let m = matrix(rows, &labels);
        let plan = stratified_kfold(m.labels(), 5, 1).unwrap();
        for config in [ClassifierConfig::naive_bayes(), ClassifierConfig::default()] {
            let r = cv_accuracy(&m, &[0], &plan, &config).unwrap();
            assert_eq!(r.accuracy, 1.0);
            assert_eq!(r.confusion, [[10, 0], [0, 10]]);
            assert_eq!(r.recall, [1.0, 1.0]);
        }
    }

    #[test]
    fn full_covariance_learns_parity_naive_bayes_cannot() {
        // label = sign(x) xor sign(y) on the four quadrants.
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..80 {
            let (sx, sy) = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)][i % 4];
            let jitter = 0.1 * ((i * 7919) % 13) as f64 / 13.0;
            rows.push(vec![sx * (1.0 + jitter), sy * (1.0 + 0.5 * jitter)]);
            labels.push(u8::from((sx > 0.0) != (sy > 0.0)));
        }
        let m = matrix(rows, &labels);
        let plan = stratified_kfold(m.labels(), 5, 4).unwrap();
        let full = cv_accuracy(&m, &[0, 1], &plan, &ClassifierConfig::default()).unwrap();
        let naive = cv_accuracy(&m, &[0, 1], &plan, &ClassifierConfig::naive_bayes()).unwrap();
        assert_eq!(full.accuracy, 1.0);
        assert!(naive.accuracy < 0.7, "{}", naive.accuracy);
    }

    #[test]
    fn accuracy_is_trace_over_total() {
        let r = EvalResult::from_confusion([[3, 1], [2, 4]]);
        assert_eq!(r.accuracy, 0.7);
        assert_eq!(r.recall, [0.75, 4.0 / 6.0]);
    }
}
