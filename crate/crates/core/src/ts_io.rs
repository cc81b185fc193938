//! Reading and writing the `.ts` archive format, and deterministic synthetic
//! datasets for desk-scale experiments.
//!
//! Only the equal-length, non-timestamped flavour of the format is handled:
//!
//! ```text
//! # comment
//! @problemName Toy
//! @timeStamps false
//! @univariate false
//! @classLabel true a b
//! @data
//! 1,2,3:4,5,6:a
//! ```
//!
//! Each data line is one sample: `:`-separated channels of comma-separated
//! values, with the class label as the last field.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{Dataset3D, TensorError};

#[derive(Debug, Error)]
pub enum TsError {
    #[error("line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("missing @classLabel directive (only labelled classification data is supported)")]
    MissingClassLabel,
    #[error("missing @data section")]
    MissingData,
    #[error("no samples after @data")]
    NoSamples,
    #[error("line {line}, column {column}: cannot parse `{token}` as a number")]
    NotNumeric { line: usize, column: usize, token: String },
    #[error("line {line}: expected {expected} channels, found {found}")]
    ChannelCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: channel {channel} has {found} values, expected {expected} (only equal-length data is supported)")]
    SeriesLength { line: usize, channel: usize, expected: usize, found: usize },
    #[error("line {line}: unknown class label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: {message}")]
    Data { line: usize, message: String },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Header directives seen before `@data`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TsHeader {
    pub problem_name: String,
    pub class_names: Vec<String>,
    pub univariate: Option<bool>,
    pub dimensions: Option<usize>,
    pub series_length: Option<usize>,
    pub equal_length: Option<bool>,
    /// Every directive verbatim, lower-cased key → raw value.
    pub directives: BTreeMap<String, String>,
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, TsError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(TsError::Header { line, message: format!("@{key} expects true/false, got `{other}`") }),
    }
}

fn parse_count(line: usize, key: &str, value: &str) -> Result<usize, TsError> {
    value
        .trim()
        .parse()
        .map_err(|_| TsError::Header { line, message: format!("@{key} expects an integer, got `{value}`") })
}

/// Parses the header and returns it with the 0-based index of the first data line.
fn parse_header(lines: &[&str]) -> Result<(TsHeader, usize), TsError> {
    let mut header = TsHeader::default();
    let mut saw_class_label = false;
    for (idx, raw) in lines.iter().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(directive) = line.strip_prefix('@') else {
            return Err(TsError::Header { line: line_no, message: "data before @data".into() });
        };
        let (key, value) = directive.split_once(char::is_whitespace).unwrap_or((directive, ""));
        let key = key.to_ascii_lowercase();
        let value = value.trim();
        match key.as_str() {
            "data" => {
                if !saw_class_label {
                    return Err(TsError::MissingClassLabel);
                }
                return Ok((header, idx + 1));
            }
            "problemname" => header.problem_name = value.to_string(),
            "timestamps" => {
                if parse_bool(line_no, &key, value)? {
                    return Err(TsError::Header {
                        line: line_no,
                        message: "timestamped series are not supported".into(),
                    });
                }
            }
            "missing" => {
                if parse_bool(line_no, &key, value)? {
                    warn!("line {line_no}: @missing true; any `?` value will be rejected");
                }
            }
            "univariate" => header.univariate = Some(parse_bool(line_no, &key, value)?),
            "dimensions" => header.dimensions = Some(parse_count(line_no, &key, value)?),
            "serieslength" => header.series_length = Some(parse_count(line_no, &key, value)?),
            "equallength" => {
                let equal = parse_bool(line_no, &key, value)?;
                if !equal {
                    return Err(TsError::Header {
                        line: line_no,
                        message: "unequal-length series are not supported".into(),
                    });
                }
                header.equal_length = Some(equal);
            }
            "classlabel" => {
                let mut parts = value.split_whitespace();
                let enabled = parse_bool(line_no, &key, parts.next().unwrap_or(""))?;
                if !enabled {
                    return Err(TsError::Header {
                        line: line_no,
                        message: "@classLabel false: unlabelled data is not supported".into(),
                    });
                }
                header.class_names = parts.map(str::to_string).collect();
                let mut unique = header.class_names.clone();
                unique.sort();
                unique.dedup();
                if unique.len() != header.class_names.len() {
                    return Err(TsError::Header { line: line_no, message: "duplicate class names".into() });
                }
                if header.class_names.len() < 2 {
                    return Err(TsError::Header {
                        line: line_no,
                        message: "@classLabel needs at least two class names".into(),
                    });
                }
                saw_class_label = true;
            }
            _ => warn!("line {line_no}: ignoring unknown directive @{key}"),
        }
        header.directives.insert(key, value.to_string());
    }
    if saw_class_label {
        Err(TsError::MissingData)
    } else {
        Err(TsError::MissingClassLabel)
    }
}

/// Parses `.ts` text into a dataset, returning the header alongside.
pub fn parse_ts_with_header(text: &str) -> Result<(Dataset3D, TsHeader), TsError> {
    let lines: Vec<&str> = text.lines().collect();
    let (header, first_data) = parse_header(&lines)?;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut series_len: Option<usize> = header.series_length;
    let mut channels_seen: Option<usize> = header.dimensions;

    for (idx, raw) in lines.iter().enumerate().skip(first_data) {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(':').collect();
        if fields.len() < 2 {
            return Err(TsError::Data { line: line_no, message: "expected channel values followed by a label".into() });
        }
        let (label_field, channel_fields) = fields.split_last().expect("at least two fields");
        let label = label_field.trim();
        let class = header
            .class_names
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| TsError::UnknownLabel { line: line_no, label: label.to_string() })?;

        let expected_c = *channels_seen.get_or_insert(channel_fields.len());
        if channel_fields.len() != expected_c {
            return Err(TsError::ChannelCount { line: line_no, expected: expected_c, found: channel_fields.len() });
        }

        let mut column = 1;
        for (ch, field) in channel_fields.iter().enumerate() {
            let mut count = 0;
            let mut token_col = column;
            for token in field.split(',') {
                let trimmed = token.trim();
                let value = f64::from_str(trimmed)
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| TsError::NotNumeric {
                        line: line_no,
                        column: token_col + (token.len() - token.trim_start().len()),
                        token: trimmed.to_string(),
                    })?;
                values.push(value);
                count += 1;
                token_col += token.len() + 1;
            }
            column += field.len() + 1;
            let expected_t = *series_len.get_or_insert(count);
            if count != expected_t {
                return Err(TsError::SeriesLength { line: line_no, channel: ch, expected: expected_t, found: count });
            }
        }
        labels.push(class);
    }

    let Some((c, t)) = channels_seen.zip(series_len).filter(|_| !labels.is_empty()) else {
        return Err(TsError::NoSamples);
    };
    let n = labels.len();
    let dataset = Dataset3D::new((n, c, t), values, labels, header.class_names.clone())?;
    Ok((dataset, header))
}

pub fn parse_ts(text: &str) -> Result<Dataset3D, TsError> {
    parse_ts_with_header(text).map(|(d, _)| d)
}

/// Emits a dataset in `.ts` format. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn write_ts(dataset: &Dataset3D, problem_name: &str) -> String {
    let (n, c, t) = dataset.shape();
    let mut out = String::new();
    let _ = writeln!(out, "@problemName {problem_name}");
    let _ = writeln!(out, "@timeStamps false");
    let _ = writeln!(out, "@missing false");
    let _ = writeln!(out, "@univariate {}", c == 1);
    let _ = writeln!(out, "@dimensions {c}");
    let _ = writeln!(out, "@equalLength true");
    let _ = writeln!(out, "@seriesLength {t}");
    let _ = writeln!(out, "@classLabel true {}", dataset.class_names().join(" "));
    let _ = writeln!(out, "@data");
    for s in 0..n {
        for ch in 0..c {
            for ts in 0..t {
                if ts > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", dataset.get(s, ch, ts));
            }
            out.push(':');
        }
        out.push_str(&dataset.class_names()[dataset.labels()[s]]);
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthPreset {
    /// Class `k` scales a shared sinusoid by `1 + k`.
    AmplitudeShift,
    /// One informative channel plus nuisance channels with large
    /// per-sample offsets.
    OffsetNuisance,
    /// i.i.d. standard normal values; labels carry no signal.
    GaussianNull,
}

impl FromStr for SynthPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "amplitude-shift" => Ok(SynthPreset::AmplitudeShift),
            "offset-nuisance" => Ok(SynthPreset::OffsetNuisance),
            "gaussian-null" => Ok(SynthPreset::GaussianNull),
            other => Err(format!("unknown preset `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub preset: SynthPreset,
    pub n_samples: usize,
    pub n_channels: usize,
    pub n_timesteps: usize,
    pub class_count: usize,
    pub seed: u64,
}

/// Cycles of the shared sinusoid over the series.
const SINE_CYCLES: f64 = 3.0;
/// Noise on signal-bearing channels.
const SIGNAL_NOISE: f64 = 0.5;
/// Amplitude step between consecutive classes of the informative channel in
/// `offset-nuisance`.
const NUISANCE_AMPLITUDE_GAP: f64 = 0.2;
/// Per-sample offsets on nuisance channels are Uniform(-OFFSET, OFFSET).
const NUISANCE_OFFSET: f64 = 100.0;
/// White noise on nuisance channels. Large enough that mixed-channel kernels
/// carry no signal on raw data; per-sample means stay offset-dominated.
const NUISANCE_NOISE: f64 = 300.0;

impl SynthSpec {
    fn validate(&self) -> Result<(), TsError> {
        let fail = |m: &str| Err(TsError::InvalidSpec(m.to_string()));
        if self.class_count < 2 {
            return fail("need at least two classes");
        }
        if self.n_samples < 2 * self.class_count {
            return fail("need at least two samples per class");
        }
        if self.n_channels == 0 || self.n_timesteps == 0 {
            return fail("channels and timesteps must be positive");
        }
        if self.preset == SynthPreset::OffsetNuisance && self.n_channels < 2 {
            return fail("offset-nuisance needs at least two channels");
        }
        Ok(())
    }
}

/// Generates a balanced synthetic dataset; the output depends only on `spec`.
pub fn synth_generate(spec: &SynthSpec) -> Result<Dataset3D, TsError> {
    spec.validate()?;
    let SynthSpec { preset, n_samples: n, n_channels: c, n_timesteps: t, class_count: k, seed } = *spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    labels.shuffle(&mut rng);

    let phase_dist = Uniform::new(0.0, 2.0 * PI).expect("valid range");
    let offset_dist = Uniform::new(-NUISANCE_OFFSET, NUISANCE_OFFSET).expect("valid range");
    let noise = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let sine = |ts: usize, phase: f64| (2.0 * PI * SINE_CYCLES * ts as f64 / t as f64 + phase).sin();

    let mut values = Vec::with_capacity(n * c * t);
    for &class in &labels {
        let phase = phase_dist.sample(&mut rng);
        match preset {
            SynthPreset::GaussianNull => {
                values.extend((0..c * t).map(|_| noise(&mut rng)));
            }
            SynthPreset::AmplitudeShift => {
                let amplitude = 1.0 + class as f64;
                for ch in 0..c {
                    let shift = ch as f64 * 0.5;
                    for ts in 0..t {
                        values.push(amplitude * sine(ts, phase + shift) + SIGNAL_NOISE * noise(&mut rng));
                    }
                }
            }
            SynthPreset::OffsetNuisance => {
                let amplitude = 1.0 + NUISANCE_AMPLITUDE_GAP * class as f64;
                for ts in 0..t {
                    values.push(amplitude * sine(ts, phase) + SIGNAL_NOISE * noise(&mut rng));
                }
                for _ in 1..c {
                    let offset = offset_dist.sample(&mut rng);
                    for _ in 0..t {
                        values.push(offset + NUISANCE_NOISE * noise(&mut rng));
                    }
                }
            }
        }
    }
    let class_names = (0..k).map(|i| format!("c{i}")).collect();
    Ok(Dataset3D::new((n, c, t), values, labels, class_names)?)
}
