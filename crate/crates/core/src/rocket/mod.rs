//! Random convolutional kernel features with a ridge classifier on top.

pub mod kernels;
pub mod ridge;

use thiserror::Error;

pub use kernels::{featurize, generate_kernels, Kernel, KernelBank, KERNEL_LENGTHS};
pub use ridge::{accuracy, default_alphas, ridge_fit, ridge_predict, RidgeConfig, RidgeModel};

use crate::tensor::Dataset3D;

#[derive(Debug, Error)]
pub enum RocketError {
    #[error("series length {0} is too short for convolution kernels")]
    SeriesTooShort(usize),
    #[error("dataset has no channels")]
    NoChannels,
    #[error("kernel count must be positive")]
    NoKernels,
    #[error("kernel bank was fitted on (channels, timesteps) = {expected:?}, data has {actual:?}")]
    ShapeMismatch { expected: (usize, usize), actual: (usize, usize) },
    #[error("model expects {expected} features, got {actual}")]
    FeatureCount { expected: usize, actual: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("alpha grid must be non-empty and strictly positive")]
    BadAlphas,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("training labels contain a single class")]
    SingleClass,
}

/// Dense row-major `samples x features` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "feature matrix size");
        FeatureMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Kernel bank plus fitted ridge model.
#[derive(Debug, Clone)]
pub struct RocketClassifier {
    pub bank: KernelBank,
    pub model: RidgeModel,
}

impl RocketClassifier {
    pub fn fit(train: &Dataset3D, kernel_count: usize, seed: u64, config: &RidgeConfig) -> Result<Self, RocketError> {
        let (_, c, t) = train.shape();
        let bank = generate_kernels(seed, c, t, kernel_count)?;
        let features = featurize(train, &bank)?;
        let model = ridge_fit(&features, train.labels(), train.class_count(), config)?;
        Ok(RocketClassifier { bank, model })
    }

    pub fn predict(&self, data: &Dataset3D) -> Result<Vec<usize>, RocketError> {
        ridge_predict(&self.model, &featurize(data, &self.bank)?)
    }

    pub fn score(&self, data: &Dataset3D) -> Result<f64, RocketError> {
        accuracy(&self.predict(data)?, data.labels())
    }
}
