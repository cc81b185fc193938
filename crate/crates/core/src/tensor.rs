//! The `samples x channels x timesteps` dataset and the slice schemes that
//! partition it into the sets a scaler is fit over.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("dataset must have at least one sample, channel and timestep (got {n}x{c}x{t})")]
    EmptyShape { n: usize, c: usize, t: usize },
    #[error("value buffer has {actual} entries, expected {expected}")]
    ValueCount { expected: usize, actual: usize },
    #[error("label count {labels} does not match sample count {samples}")]
    LabelCount { labels: usize, samples: usize },
    #[error("label index {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("non-finite value at sample {sample}, channel {channel}, timestep {timestep}")]
    NonFinite { sample: usize, channel: usize, timestep: usize },
    #[error("slice {id} is malformed or out of bounds for {c} channels x {t} timesteps")]
    BadSlice { id: SliceId, c: usize, t: usize },
    #[error("slice {id} holds {expected} values, got {actual}")]
    SliceLength { id: SliceId, expected: usize, actual: usize },
    #[error("datasets are incompatible: {0}")]
    Incompatible(String),
}

/// How the dataset is partitioned into scaling sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceScheme {
    /// One set per channel: all samples and timesteps of that channel.
    Channels,
    /// One set per timestep: all samples and channels at that timestep.
    Timesteps,
    /// One set per (channel, timestep) pair, across samples.
    Both,
    /// The whole dataset as a single set.
    All,
}

impl SliceScheme {
    pub const ALL: [SliceScheme; 4] = [
        SliceScheme::Channels,
        SliceScheme::Timesteps,
        SliceScheme::Both,
        SliceScheme::All,
    ];

    pub fn set_count(self, channels: usize, timesteps: usize) -> usize {
        match self {
            SliceScheme::Channels => channels,
            SliceScheme::Timesteps => timesteps,
            SliceScheme::Both => channels * timesteps,
            SliceScheme::All => 1,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            SliceScheme::Channels => "channels",
            SliceScheme::Timesteps => "timesteps",
            SliceScheme::Both => "both",
            SliceScheme::All => "all",
        }
    }
}

impl fmt::Display for SliceScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SliceScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "channels" | "channel" => Ok(SliceScheme::Channels),
            "timesteps" | "timestep" => Ok(SliceScheme::Timesteps),
            "both" => Ok(SliceScheme::Both),
            "all" => Ok(SliceScheme::All),
            other => Err(format!("unknown dimension `{other}`")),
        }
    }
}

/// Identity of one scaling set under a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SliceId {
    pub scheme: SliceScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestep: Option<usize>,
}

impl SliceId {
    pub fn channel(c: usize) -> Self {
        SliceId { scheme: SliceScheme::Channels, channel: Some(c), timestep: None }
    }

    pub fn timestep(t: usize) -> Self {
        SliceId { scheme: SliceScheme::Timesteps, channel: None, timestep: Some(t) }
    }

    pub fn both(c: usize, t: usize) -> Self {
        SliceId { scheme: SliceScheme::Both, channel: Some(c), timestep: Some(t) }
    }

    pub fn all() -> Self {
        SliceId { scheme: SliceScheme::All, channel: None, timestep: None }
    }

    /// Checks that the indices present match the scheme and lie within `c x t`.
    pub fn is_valid_for(&self, c: usize, t: usize) -> bool {
        match (self.scheme, self.channel, self.timestep) {
            (SliceScheme::Channels, Some(ch), None) => ch < c,
            (SliceScheme::Timesteps, None, Some(ts)) => ts < t,
            (SliceScheme::Both, Some(ch), Some(ts)) => ch < c && ts < t,
            (SliceScheme::All, None, None) => true,
            _ => false,
        }
    }
}

impl fmt::Display for SliceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.scheme)?;
        if let Some(c) = self.channel {
            write!(f, "[c={c}]")?;
        }
        if let Some(t) = self.timestep {
            write!(f, "[t={t}]")?;
        }
        Ok(())
    }
}

/// All slice identities of a scheme, channel-major then timestep.
pub fn slice_ids(scheme: SliceScheme, channels: usize, timesteps: usize) -> Vec<SliceId> {
    match scheme {
        SliceScheme::Channels => (0..channels).map(SliceId::channel).collect(),
        SliceScheme::Timesteps => (0..timesteps).map(SliceId::timestep).collect(),
        SliceScheme::Both => (0..channels)
            .flat_map(|c| (0..timesteps).map(move |t| SliceId::both(c, t)))
            .collect(),
        SliceScheme::All => vec![SliceId::all()],
    }
}

/// Labeled tensor of shape `samples x channels x timesteps`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset3D {
    n_samples: usize,
    n_channels: usize,
    n_timesteps: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset3D {
    pub fn new(
        shape: (usize, usize, usize),
        values: Vec<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self, TensorError> {
        let (n, c, t) = shape;
        if n == 0 || c == 0 || t == 0 {
            return Err(TensorError::EmptyShape { n, c, t });
        }
        if values.len() != n * c * t {
            return Err(TensorError::ValueCount { expected: n * c * t, actual: values.len() });
        }
        if labels.len() != n {
            return Err(TensorError::LabelCount { labels: labels.len(), samples: n });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(TensorError::LabelOutOfRange { label, classes: class_names.len() });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite {
                sample: pos / (c * t),
                channel: (pos / t) % c,
                timestep: pos % t,
            });
        }
        Ok(Dataset3D { n_samples: n, n_channels: c, n_timesteps: t, values, labels, class_names })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_timesteps(&self) -> usize {
        self.n_timesteps
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_samples, self.n_channels, self.n_timesteps)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    #[inline]
    pub fn get(&self, sample: usize, channel: usize, timestep: usize) -> f64 {
        self.values[self.offset(sample, channel, timestep)]
    }

    /// The `channels x timesteps` block of one sample.
    pub fn sample(&self, sample: usize) -> &[f64] {
        let stride = self.n_channels * self.n_timesteps;
        &self.values[sample * stride..(sample + 1) * stride]
    }

    #[inline]
    fn offset(&self, sample: usize, channel: usize, timestep: usize) -> usize {
        (sample * self.n_channels + channel) * self.n_timesteps + timestep
    }

    /// Number of cells in a slice of this dataset.
    pub fn slice_len(&self, scheme: SliceScheme) -> usize {
        let (n, c, t) = self.shape();
        match scheme {
            SliceScheme::Channels => n * t,
            SliceScheme::Timesteps => n * c,
            SliceScheme::Both => n,
            SliceScheme::All => n * c * t,
        }
    }

    /// Flat offsets of a slice's cells in gather order (sample-major, then
    /// channel, then timestep).
    fn slice_offsets(&self, id: &SliceId) -> Result<Vec<usize>, TensorError> {
        let (n, c, t) = self.shape();
        if !id.is_valid_for(c, t) {
            return Err(TensorError::BadSlice { id: *id, c, t });
        }
        let offsets = match id.scheme {
            SliceScheme::Channels => {
                let ch = id.channel.unwrap_or_default();
                (0..n)
                    .flat_map(|s| (0..t).map(move |ts| (s * c + ch) * t + ts))
                    .collect()
            }
            SliceScheme::Timesteps => {
                let ts = id.timestep.unwrap_or_default();
                (0..n)
                    .flat_map(|s| (0..c).map(move |ch| (s * c + ch) * t + ts))
                    .collect()
            }
            SliceScheme::Both => {
                let (ch, ts) = (id.channel.unwrap_or_default(), id.timestep.unwrap_or_default());
                (0..n).map(|s| (s * c + ch) * t + ts).collect()
            }
            SliceScheme::All => (0..n * c * t).collect(),
        };
        Ok(offsets)
    }

    pub fn gather(&self, id: &SliceId) -> Result<Vec<f64>, TensorError> {
        Ok(self.slice_offsets(id)?.into_iter().map(|o| self.values[o]).collect())
    }

    /// Returns a copy with the slice `id` overwritten by `values`, in gather order.
    pub fn scatter(&self, id: &SliceId, values: &[f64]) -> Result<Dataset3D, TensorError> {
        let mut out = self.clone();
        out.scatter_in_place(id, values)?;
        Ok(out)
    }

    pub fn scatter_in_place(&mut self, id: &SliceId, values: &[f64]) -> Result<(), TensorError> {
        let offsets = self.slice_offsets(id)?;
        if offsets.len() != values.len() {
            return Err(TensorError::SliceLength {
                id: *id,
                expected: offsets.len(),
                actual: values.len(),
            });
        }
        for (o, &v) in offsets.into_iter().zip(values) {
            self.values[o] = v;
        }
        Ok(())
    }

    /// Replaces the whole value buffer, keeping shape and labels.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Dataset3D, TensorError> {
        if values.len() != self.values.len() {
            return Err(TensorError::ValueCount { expected: self.values.len(), actual: values.len() });
        }
        Ok(Dataset3D { values, ..self.clone() })
    }

    /// Samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset3D {
        let stride = self.n_channels * self.n_timesteps;
        let mut values = Vec::with_capacity(indices.len() * stride);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        Dataset3D {
            n_samples: indices.len(),
            n_channels: self.n_channels,
            n_timesteps: self.n_timesteps,
            values,
            labels,
            class_names: self.class_names.clone(),
        }
    }

    /// Stacks `other` below `self`. Both must share channels, timesteps and classes.
    pub fn concat(&self, other: &Dataset3D) -> Result<Dataset3D, TensorError> {
        if self.n_channels != other.n_channels || self.n_timesteps != other.n_timesteps {
            return Err(TensorError::Incompatible(format!(
                "{}x{} vs {}x{} channels x timesteps",
                self.n_channels, self.n_timesteps, other.n_channels, other.n_timesteps
            )));
        }
        if self.class_names != other.class_names {
            return Err(TensorError::Incompatible("class lists differ".into()));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Dataset3D {
            n_samples: self.n_samples + other.n_samples,
            values,
            labels,
            ..self.clone()
        })
    }
}
