//! Labelled multi-channel records: on-disk layout, stratified fold plans and a
//! synthetic generator with planted XOR coalitions.
//!
//! On disk a dataset is a directory holding `manifest.json` and one
//! `<record-id>/<channel>.csv` file per record and channel, each with a single
//! `value` column.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavelet::{band_lengths, idwt_multilevel, BoundaryMode, Channel, Signal, WaveletDecomposition, WaveletFilter};

/// Binary alarm label. Ordering follows the label strings, so `False < True`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "false")]
    False,
    #[serde(rename = "true")]
    True,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::False, Label::True];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::False => "false",
            Label::True => "true",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Label {
        if i == 0 {
            Label::False
        } else {
            Label::True
        }
    }

    pub fn from_bool(b: bool) -> Label {
        if b {
            Label::True
        } else {
            Label::False
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true" => Ok(Label::True),
            "false" => Ok(Label::False),
            _ => Err(Error::InvalidArgument(format!("unknown label {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub channels: BTreeMap<Channel, Signal>,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    /// `"true"`, `"false"` or `"unknown"`.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub channels: Vec<Channel>,
    pub sample_rate: f64,
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Records loaded from disk plus bookkeeping about what was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub channels: Vec<Channel>,
    pub sample_rate: f64,
    pub records: Vec<Record>,
    /// Records labelled `unknown` that were left out.
    pub excluded_unknown: usize,
}

impl Dataset {
    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }
}

fn read_channel_csv(path: &Path, record_id: &str, channel: &Channel) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| {
        Error::record(record_id, format!("missing or unreadable channel {channel} ({}): {e}", path.display()))
    })?;
    let header = reader.headers().map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    if header.len() != 1 || &header[0] != "value" {
        return Err(Error::record(record_id, format!("{}: expected a single `value` column", path.display())));
    }
    let mut samples = Vec::new();
    for (index, row) in reader.records().enumerate() {
        let row = row.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let field = row.get(0).unwrap_or("").trim();
        let value: f64 = field.parse().map_err(|_| {
            Error::record(record_id, format!("channel {channel}, sample {index}: {field:?} is not a number"))
        })?;
        if !value.is_finite() {
            return Err(Error::record(
                record_id,
                format!("channel {channel}, sample {index}: non-finite value {field}"),
            ));
        }
        samples.push(value);
    }
    Ok(samples)
}

/// Reads every record named by `manifest` under `root`. Records labelled
/// `unknown` are skipped and counted.
pub fn load_records_with_manifest(root: &Path, manifest: &Manifest) -> Result<Dataset> {
    let mut records = Vec::with_capacity(manifest.records.len());
    let mut excluded_unknown = 0;
    for entry in &manifest.records {
        let label = match entry.label.as_str() {
            "unknown" => {
                excluded_unknown += 1;
                continue;
            }
            other => other
                .parse::<Label>()
                .map_err(|_| Error::record(&entry.id, format!("unknown label string {other:?}")))?,
        };
        let mut channels = BTreeMap::new();
        for channel in &manifest.channels {
            let path = root.join(&entry.id).join(format!("{channel}.csv"));
            let samples = read_channel_csv(&path, &entry.id, channel)?;
            let signal = Signal::new(channel.clone(), samples, manifest.sample_rate)
                .map_err(|e| Error::record(&entry.id, format!("channel {channel}: {e}")))?;
            channels.insert(channel.clone(), signal);
        }
        records.push(Record {
            id: entry.id.clone(),
            channels,
            label,
        });
    }
    if excluded_unknown > 0 {
        log::warn!("excluded {excluded_unknown} records labelled unknown");
    }
    Ok(Dataset {
        channels: manifest.channels.clone(),
        sample_rate: manifest.sample_rate,
        records,
        excluded_unknown,
    })
}

/// Reads `<root>/manifest.json` and the records it lists.
pub fn load_records(root: &Path) -> Result<Dataset> {
    let manifest = Manifest::load(&root.join("manifest.json"))?;
    load_records_with_manifest(root, &manifest)
}

/// Writes records in the layout read by [`load_records`]. Values use the
/// shortest decimal form that parses back to the same `f64`.
pub fn write_records(root: &Path, channels: &[Channel], sample_rate: f64, records: &[Record]) -> Result<()> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    for record in records {
        let dir = root.join(&record.id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for channel in channels {
            let signal = record
                .channels
                .get(channel)
                .ok_or_else(|| Error::record(&record.id, format!("missing channel {channel}")))?;
            let mut text = String::with_capacity(signal.len() * 20 + 6);
            text.push_str("value\n");
            for v in signal.samples() {
                text.push_str(&v.to_string());
                text.push('\n');
            }
            let path = dir.join(format!("{channel}.csv"));
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
    }
    let manifest = Manifest {
        channels: channels.to_vec(),
        sample_rate,
        records: records
            .iter()
            .map(|r| ManifestRecord {
                id: r.id.clone(),
                label: r.label.as_str().to_string(),
            })
            .collect(),
    };
    let path = root.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}

/// Assignment of samples to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub fold_assignments: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl SplitPlan {
    pub fn len(&self) -> usize {
        self.fold_assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_assignments.is_empty()
    }

    /// `(train, test)` row indices of `fold`.
    pub fn fold(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.fold_assignments.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    /// Same plan for rows reordered so that new row `i` is old row `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> SplitPlan {
        SplitPlan {
            fold_assignments: order.iter().map(|&i| self.fold_assignments[i]).collect(),
            k: self.k,
            seed: self.seed,
        }
    }
}

/// Stratified k-fold plan. Within each class the members are shuffled and
/// dealt round-robin, continuing the rotation from the previous class so fold
/// sizes stay balanced.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<SplitPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("fold count must be >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for class in Label::BOTH {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                label: class.to_string(),
                count: members.len(),
                required: k,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(SplitPlan {
        fold_assignments: folds,
        k,
        seed,
    })
}

/// A (channel, detail level) band of a synthetic record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Component {
    pub channel: Channel,
    pub level: usize,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_L{}", self.channel, self.level)
    }
}

fn default_sample_rate() -> f64 {
    125.0
}

fn default_modulation() -> f64 {
    3.0
}

fn default_jitter() -> f64 {
    0.15
}

/// Description of a synthetic dataset.
///
/// Each record is built in the wavelet domain: every detail band holds white
/// Gaussian coefficients with a per-record log-normal amplitude jitter, and
/// the signal is the inverse periodic transform of those bands under the
/// channel's standard wavelet. For every component of the planted coalition a
/// fair coin picks the sign of that band's log-amplitude offset (the two
/// states differ by a factor `modulation`); the label is the parity of those
/// coins. Each planted band is therefore independent of the label on its own,
/// while the bands together determine it.
///
/// Marginal bands are optional distractors: their amplitude is multiplied by
/// `marginal_shift` whenever a shared latent bit is set, and that bit agrees
/// with the label with probability `marginal_agreement`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub samples: usize,
    pub channels: Vec<Channel>,
    pub signal_length: usize,
    /// Number of synthesized detail levels.
    pub depth: usize,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: f64,
    /// Bands whose amplitude coins are XOR-coupled to the label. Empty means
    /// labels are drawn independently of every band.
    #[serde(default)]
    pub coalition: Vec<Component>,
    /// Bands whose amplitude follows a latent indicator that agrees with the
    /// label with probability `marginal_agreement`. Each one is individually
    /// informative and they are redundant with one another.
    #[serde(default)]
    pub marginal: Vec<Component>,
    /// Amplitude ratio between the two states of a planted band's coin.
    #[serde(default = "default_modulation")]
    pub modulation: f64,
    /// Standard deviation of the continuous part of a planted band's signed
    /// log-amplitude offset. Zero gives two sharp amplitude states.
    #[serde(default)]
    pub spread: f64,
    /// Amplitude factor applied to every marginal band when the record's
    /// latent indicator is set.
    #[serde(default = "default_marginal_shift")]
    pub marginal_shift: f64,
    /// Probability that the latent indicator shared by the marginal bands
    /// equals the label.
    #[serde(default = "default_marginal_agreement")]
    pub marginal_agreement: f64,
    /// Standard deviation of the per-record log-amplitude of every band.
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

fn default_marginal_shift() -> f64 {
    1.5
}

fn default_marginal_agreement() -> f64 {
    1.0
}

impl GeneratorSpec {
    /// Spec with no planted structure.
    pub fn null(samples: usize, channels: Vec<Channel>, signal_length: usize, depth: usize) -> Self {
        GeneratorSpec {
            samples,
            channels,
            signal_length,
            depth,
            sample_rate: default_sample_rate(),
            coalition: Vec::new(),
            marginal: Vec::new(),
            modulation: default_modulation(),
            spread: 0.0,
            marginal_shift: default_marginal_shift(),
            marginal_agreement: default_marginal_agreement(),
            jitter: default_jitter(),
        }
    }

    pub fn components(&self) -> Vec<Component> {
        self.channels
            .iter()
            .flat_map(|channel| {
                (1..=self.depth).map(move |level| Component {
                    channel: channel.clone(),
                    level,
                })
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.samples == 0 {
            return bad("generator needs at least one sample".into());
        }
        if self.channels.is_empty() {
            return bad("generator needs at least one channel".into());
        }
        if self.depth == 0 {
            return bad("generator depth must be >= 1".into());
        }
        let available = self.components();
        let planted = self.coalition.len() + self.marginal.len();
        if planted > available.len() {
            return bad(format!(
                "{} planted components requested but only {} bands exist",
                planted,
                available.len()
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in self.coalition.iter().chain(&self.marginal) {
            if !available.contains(c) {
                return bad(format!("planted component {c} is not a band of this spec"));
            }
            if !seen.insert(c) {
                return bad(format!("component {c} planted twice"));
            }
        }
        if !(self.modulation.is_finite() && self.modulation > 0.0) {
            return bad(format!("modulation must be positive, got {}", self.modulation));
        }
        if !(self.spread.is_finite() && self.spread >= 0.0) {
            return bad(format!("spread must be non-negative, got {}", self.spread));
        }
        if !(self.marginal_shift.is_finite() && self.marginal_shift > 0.0) {
            return bad(format!("marginal_shift must be positive, got {}", self.marginal_shift));
        }
        if !(0.0..=1.0).contains(&self.marginal_agreement) {
            return bad(format!("marginal_agreement must lie in [0, 1], got {}", self.marginal_agreement));
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return bad(format!("jitter must be non-negative, got {}", self.jitter));
        }
        for channel in &self.channels {
            let filter = WaveletFilter::by_name(channel.default_wavelet())?;
            let required = crate::wavelet::required_length(filter.taps(), self.depth);
            if self.signal_length < required {
                return bad(format!(
                    "signal_length {} too short for depth {}; required minimum length is {required}",
                    self.signal_length, self.depth
                ));
            }
        }
        Ok(())
    }
}

/// Generates `spec.samples` records. Identical `(spec, seed)` give identical
/// records.
pub fn generate_synthetic(spec: &GeneratorSpec, seed: u64) -> Result<Vec<Record>> {
    spec.validate()?;
    let filters: BTreeMap<&Channel, WaveletFilter> = spec
        .channels
        .iter()
        .map(|c| Ok((c, WaveletFilter::by_name(c.default_wavelet())?)))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (spec.samples.max(2) - 1).to_string().len();
    let mut records = Vec::with_capacity(spec.samples);
    for index in 0..spec.samples {
        let coins: Vec<bool> = spec.coalition.iter().map(|_| rng.random_bool(0.5)).collect();
        let label = if spec.coalition.is_empty() {
            Label::from_bool(rng.random_bool(0.5))
        } else {
            Label::from_bool(coins.iter().filter(|&&c| c).count() % 2 == 1)
        };
        let latent = if spec.marginal.is_empty() {
            false
        } else {
            (label == Label::True) == rng.random_bool(spec.marginal_agreement)
        };
        let mut channels = BTreeMap::new();
        for channel in &spec.channels {
            let filter = &filters[channel];
            let (inputs, bands) = band_lengths(spec.signal_length, filter.taps(), spec.depth, BoundaryMode::Periodic);
            let mut details = Vec::with_capacity(spec.depth);
            for (j, &len) in bands.iter().enumerate() {
                let level = j + 1;
                let component = Component {
                    channel: channel.clone(),
                    level,
                };
                let jitter: f64 = rng.sample::<f64, _>(StandardNormal) * spec.jitter;
                let mut amplitude = 2f64.powf(0.5 * (level as f64 - 1.0)) * jitter.exp();
                if let Some(p) = spec.coalition.iter().position(|c| *c == component) {
                    let magnitude = 0.5 * spec.modulation.ln() + spec.spread * rng.sample::<f64, _>(StandardNormal).abs();
                    amplitude *= if coins[p] { magnitude.exp() } else { (-magnitude).exp() };
                }
                if latent && spec.marginal.contains(&component) {
                    amplitude *= spec.marginal_shift;
                }
                let band: Vec<f64> = (0..len)
                    .map(|_| amplitude * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                details.push(band);
            }
            let approx_len = *bands.last().expect("depth >= 1");
            let baseline = 4.0 * 2f64.powf(0.5 * spec.depth as f64);
            let approximation = (0..approx_len)
                .map(|_| baseline * (1.0 + 0.1 * rng.sample::<f64, _>(StandardNormal)))
                .collect();
            let decomp = WaveletDecomposition {
                details,
                approximation,
                filter_name: filter.name().to_string(),
                boundary: BoundaryMode::Periodic,
                input_lengths: inputs,
            };
            let samples = idwt_multilevel(&decomp, filter)?;
            channels.insert(channel.clone(), Signal::new(channel.clone(), samples, spec.sample_rate)?);
        }
        records.push(Record {
            id: format!("rec{index:0width$}"),
            channels,
            label,
        });
    }
    Ok(records)
}
