//! Scalar summaries of wavelet coefficient vectors and the per-record feature
//! matrix built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Label, Record};
use crate::error::{Error, Result};
use crate::wavelet::{dwt_samples, BoundaryMode, Channel, WaveletFilter};

/// Bin count of the magnitude histogram behind [`Statistic::Entropy`].
pub const ENTROPY_BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    Mean,
    Std,
    Skewness,
    Kurtosis,
    Min,
    Max,
    Median,
    Rms,
    Entropy,
    ZeroCrossingRate,
    InterquartileRange,
    MeanAbsDeviation,
    P05,
    P95,
    Energy,
    LogEnergy,
    LineLength,
    Range,
    P25,
    P75,
}

impl Statistic {
    pub const ALL: [Statistic; 20] = [
        Statistic::Mean,
        Statistic::Std,
        Statistic::Skewness,
        Statistic::Kurtosis,
        Statistic::Min,
        Statistic::Max,
        Statistic::Median,
        Statistic::Rms,
        Statistic::Entropy,
        Statistic::ZeroCrossingRate,
        Statistic::InterquartileRange,
        Statistic::MeanAbsDeviation,
        Statistic::P05,
        Statistic::P95,
        Statistic::Energy,
        Statistic::LogEnergy,
        Statistic::LineLength,
        Statistic::Range,
        Statistic::P25,
        Statistic::P75,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Std => "std",
            Statistic::Skewness => "skewness",
            Statistic::Kurtosis => "kurtosis",
            Statistic::Min => "min",
            Statistic::Max => "max",
            Statistic::Median => "median",
            Statistic::Rms => "rms",
            Statistic::Entropy => "entropy",
            Statistic::ZeroCrossingRate => "zcr",
            Statistic::InterquartileRange => "iqr",
            Statistic::MeanAbsDeviation => "mad",
            Statistic::P05 => "p05",
            Statistic::P95 => "p95",
            Statistic::Energy => "energy",
            Statistic::LogEnergy => "logenergy",
            Statistic::LineLength => "linelength",
            Statistic::Range => "range",
            Statistic::P25 => "p25",
            Statistic::P75 => "p75",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|stat| stat.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown statistic {s:?}")))
    }
}

/// Which statistics are extracted from each coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Catalog {
    /// Ten statistics; 3 channels x 6 levels gives 180 columns.
    #[default]
    Default,
    /// All twenty statistics.
    Extended,
}

impl Catalog {
    pub fn statistics(self) -> &'static [Statistic] {
        match self {
            Catalog::Default => &Statistic::ALL[..10],
            Catalog::Extended => &Statistic::ALL,
        }
    }

    pub fn len(self) -> usize {
        self.statistics().len()
    }

    pub fn is_empty(self) -> bool {
        false
    }
}

impl FromStr for Catalog {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Catalog::Default),
            "extended" => Ok(Catalog::Extended),
            _ => Err(Error::InvalidArgument(format!(
                "unknown catalog {s:?}; expected default or extended"
            ))),
        }
    }
}

/// How entropy treats a vector whose magnitudes are all equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegenerateEntropy {
    /// All mass falls in one bin: 0 bits.
    #[default]
    SingleBin,
    /// Every point is its own equal-mass cell: log2(n) bits.
    EqualMass,
}

/// Shannon entropy in bits of the equal-width histogram of `|values|` over
/// `[min, max]`, with `0 log 0 = 0`.
pub fn magnitude_entropy(values: &[f64], bins: usize, degenerate: DegenerateEntropy) -> f64 {
    let (lo, hi) = values
        .iter()
        .map(|v| v.abs())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let n = values.len() as f64;
    if hi <= lo {
        return match degenerate {
            DegenerateEntropy::SingleBin => 0.0,
            DegenerateEntropy::EqualMass => n.log2(),
        };
    }
    let mut counts = vec![0usize; bins];
    let width = hi - lo;
    for v in values {
        let pos = (v.abs() - lo) / width * bins as f64;
        let bin = (pos as usize).min(bins - 1);
        counts[bin] += 1;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Percentile with linear interpolation between order statistics.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

struct Summary {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
    min: f64,
    max: f64,
    sorted: Vec<f64>,
}

impl Summary {
    fn new(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Summary {
            n,
            mean,
            m2: m2 / n,
            m3: m3 / n,
            m4: m4 / n,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            sorted,
        }
    }

    fn degenerate(&self) -> bool {
        self.max == self.min
    }
}

fn compute(stat: Statistic, values: &[f64], s: &Summary) -> f64 {
    match stat {
        Statistic::Mean => s.mean,
        Statistic::Std => s.m2.sqrt(),
        Statistic::Skewness => {
            if s.degenerate() {
                0.0
            } else {
                s.m3 / s.m2.powf(1.5)
            }
        }
        Statistic::Kurtosis => {
            if s.degenerate() {
                0.0
            } else {
                s.m4 / (s.m2 * s.m2) - 3.0
            }
        }
        Statistic::Min => s.min,
        Statistic::Max => s.max,
        Statistic::Median => percentile(&s.sorted, 0.5),
        Statistic::Rms => (values.iter().map(|v| v * v).sum::<f64>() / s.n).sqrt(),
        Statistic::Entropy => magnitude_entropy(values, ENTROPY_BINS, DegenerateEntropy::SingleBin),
        Statistic::ZeroCrossingRate => {
            if values.len() < 2 {
                0.0
            } else {
                let crossings = values.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
                crossings as f64 / (values.len() - 1) as f64
            }
        }
        Statistic::InterquartileRange => percentile(&s.sorted, 0.75) - percentile(&s.sorted, 0.25),
        Statistic::MeanAbsDeviation => values.iter().map(|v| (v - s.mean).abs()).sum::<f64>() / s.n,
        Statistic::P05 => percentile(&s.sorted, 0.05),
        Statistic::P95 => percentile(&s.sorted, 0.95),
        Statistic::Energy => values.iter().map(|v| v * v).sum(),
        Statistic::LogEnergy => values
            .iter()
            .filter(|v| **v != 0.0)
            .map(|v| (v * v).ln())
            .sum(),
        Statistic::LineLength => values.windows(2).map(|w| (w[1] - w[0]).abs()).sum(),
        Statistic::Range => s.max - s.min,
        Statistic::P25 => percentile(&s.sorted, 0.25),
        Statistic::P75 => percentile(&s.sorted, 0.75),
    }
}

/// Values of `stats` for one coefficient vector, in the given order.
pub fn extract_values(coeffs: &[f64], stats: &[Statistic]) -> Result<Vec<f64>> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("cannot extract features from an empty vector".into()));
    }
    if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFiniteSample { index });
    }
    let summary = Summary::new(coeffs);
    Ok(stats.iter().map(|&stat| compute(stat, coeffs, &summary)).collect())
}

/// Named feature map for one coefficient vector.
pub fn extract_features(coeffs: &[f64], catalog: Catalog) -> Result<BTreeMap<Statistic, f64>> {
    let stats = catalog.statistics();
    let values = extract_values(coeffs, stats)?;
    Ok(stats.iter().copied().zip(values).collect())
}

/// Provenance of one feature column: `<channel>_L<level>_<stat>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureDescriptor {
    pub channel: Channel,
    pub level: usize,
    pub statistic: Statistic,
}

impl FeatureDescriptor {
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FeatureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_L{}_{}", self.channel, self.level, self.statistic)
    }
}

impl FromStr for FeatureDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed feature name {s:?}"));
        let (rest, stat) = s.rsplit_once('_').ok_or_else(bad)?;
        let (channel, level) = rest.rsplit_once('_').ok_or_else(bad)?;
        let level = level
            .strip_prefix('L')
            .and_then(|l| l.parse::<usize>().ok())
            .ok_or_else(bad)?;
        Ok(FeatureDescriptor {
            channel: channel.parse()?,
            level,
            statistic: stat.parse()?,
        })
    }
}

/// Samples x named features, with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    descriptors: Vec<Option<FeatureDescriptor>>,
    data: Vec<f64>,
    labels: Vec<Label>,
}

impl FeatureMatrix {
    /// Builds a matrix from row-major `rows`. Feature names that parse as
    /// `<channel>_L<level>_<stat>` keep their provenance.
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::InvalidArgument("feature names must be unique".into()));
        }
        let width = names.len();
        let mut data = Vec::with_capacity(rows.len() * width);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    found: row.len(),
                });
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite value at row {r}, column {}",
                    names[c]
                )));
            }
            data.extend(row);
        }
        let descriptors = names.iter().map(|n| n.parse().ok()).collect();
        Ok(FeatureMatrix {
            names,
            descriptors,
            data,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn descriptor(&self, column: usize) -> Option<&FeatureDescriptor> {
        self.descriptors[column].as_ref()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let w = self.n_features();
        &self.data[r * w..(r + 1) * w]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n_features() + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, c)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_features().max(1)).take(self.n_rows())
    }

    /// Index of the column called `name`.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Copy with rows reordered so that new row `i` is old row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> FeatureMatrix {
        let rows = order.iter().map(|&r| self.row(r).to_vec()).collect();
        let labels = order.iter().map(|&r| self.labels[r]).collect();
        FeatureMatrix::new(self.names.clone(), rows, labels).expect("permutation of a valid matrix")
    }

    /// Copy with `column` multiplied by `factor`.
    pub fn scale_column(&self, column: usize, factor: f64) -> FeatureMatrix {
        let mut out = self.clone();
        let w = out.n_features();
        for r in 0..out.n_rows() {
            out.data[r * w + column] *= factor;
        }
        out
    }

    /// Copy with `column` mapped through `f`.
    pub fn map_column(&self, column: usize, f: impl Fn(f64) -> f64) -> Result<FeatureMatrix> {
        let rows = (0..self.n_rows())
            .map(|r| {
                let mut row = self.row(r).to_vec();
                row[column] = f(row[column]);
                row
            })
            .collect();
        FeatureMatrix::new(self.names.clone(), rows, self.labels.clone())
    }

    /// Restriction to the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> FeatureMatrix {
        let names = columns.iter().map(|&c| self.names[c].clone()).collect();
        let rows = (0..self.n_rows())
            .map(|r| columns.iter().map(|&c| self.get(r, c)).collect())
            .collect();
        FeatureMatrix::new(names, rows, self.labels.clone()).expect("sub-matrix of a valid matrix")
    }

    /// RFC-4180 CSV: descriptor names, then a trailing `label` column.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.names.iter().map(String::as_str).chain(["label"]))?;
        for (row, label) in self.rows().zip(&self.labels) {
            let mut fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            fields.push(label.as_str().to_string());
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load_csv(path: &Path) -> Result<FeatureMatrix> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = reader.headers().map_err(csv_err)?.clone();
        let width = header.len();
        if width == 0 || &header[width - 1] != "label" {
            return Err(Error::InvalidArgument(format!(
                "{}: last column must be `label`",
                path.display()
            )));
        }
        let names: Vec<String> = header.iter().take(width - 1).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (r, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let mut row = Vec::with_capacity(width - 1);
            for (c, field) in record.iter().take(width - 1).enumerate() {
                let value: f64 = field.trim().parse().map_err(|_| {
                    Error::InvalidArgument(format!("row {r}, column {}: {field:?} is not a number", names[c]))
                })?;
                row.push(value);
            }
            labels.push(record[width - 1].parse()?);
            rows.push(row);
        }
        FeatureMatrix::new(names, rows, labels)
    }
}

/// Per-channel filter assignment.
pub type FilterMap = BTreeMap<Channel, WaveletFilter>;

/// Standard assignment: db8 for ECG, db4 for everything else.
pub fn default_filter_map<'a>(channels: impl IntoIterator<Item = &'a Channel>) -> Result<FilterMap> {
    channels
        .into_iter()
        .map(|c| Ok((c.clone(), WaveletFilter::by_name(c.default_wavelet())?)))
        .collect()
}

/// Options for [`build_feature_matrix`].
#[derive(Debug, Clone)]
pub struct ExtractionConfig {
    pub filters: FilterMap,
    pub depth: usize,
    pub catalog: Catalog,
    pub boundary: BoundaryMode,
}

/// Column layout of the matrix built for `channels`: channel, then level
/// 1..=depth, then catalog order.
pub fn feature_descriptors(channels: &[Channel], depth: usize, catalog: Catalog) -> Vec<FeatureDescriptor> {
    let mut out = Vec::with_capacity(channels.len() * depth * catalog.len());
    for channel in channels {
        for level in 1..=depth {
            for &statistic in catalog.statistics() {
                out.push(FeatureDescriptor {
                    channel: channel.clone(),
                    level,
                    statistic,
                });
            }
        }
    }
    out
}

/// Feature row of one record: detail levels 1..=depth of every channel. The
/// final approximation band is not summarized.
pub fn record_features(record: &Record, channels: &[Channel], config: &ExtractionConfig) -> Result<Vec<f64>> {
    let stats = config.catalog.statistics();
    let mut row = Vec::with_capacity(channels.len() * config.depth * stats.len());
    for channel in channels {
        let signal = record
            .channels
            .get(channel)
            .ok_or_else(|| Error::record(&record.id, format!("missing channel {channel}")))?;
        let filter = config
            .filters
            .get(channel)
            .ok_or_else(|| Error::InvalidArgument(format!("no wavelet configured for channel {channel}")))?;
        let decomp = dwt_samples(signal.samples(), filter, config.depth, config.boundary)
            .map_err(|e| Error::record(&record.id, format!("{channel}: {e}")))?;
        for detail in &decomp.details {
            row.extend(extract_values(detail, stats)?);
        }
    }
    Ok(row)
}

/// Decomposes every record and assembles the labelled feature matrix. Rows
/// are computed in parallel and assembled in record order.
pub fn build_feature_matrix(records: &[Record], config: &ExtractionConfig) -> Result<FeatureMatrix> {
    let channels: Vec<Channel> = match records.first() {
        Some(first) => first.channels.keys().cloned().collect(),
        None => config.filters.keys().cloned().collect(),
    };
    for record in records {
        if !record.channels.keys().eq(channels.iter()) {
            let found: Vec<&str> = record.channels.keys().map(Channel::as_str).collect();
            return Err(Error::record(
                &record.id,
                format!(
                    "channel set {found:?} differs from {:?}",
                    channels.iter().map(Channel::as_str).collect::<Vec<_>>()
                ),
            ));
        }
    }
    let rows = records
        .par_iter()
        .map(|record| record_features(record, &channels, config))
        .collect::<Result<Vec<_>>>()?;
    let names = feature_descriptors(&channels, config.depth, config.catalog)
        .iter()
        .map(FeatureDescriptor::name)
        .collect();
    let labels = records.iter().map(|r| r.label).collect();
    FeatureMatrix::new(names, rows, labels)
}
