use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, RocketError};

/// `10^-3 ..= 10^3`, ten log-spaced points.
pub fn default_alphas() -> Vec<f64> {
    (0..10).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 9.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeConfig {
    pub alphas: Vec<f64>,
    /// Standardise each feature with training statistics before fitting.
    pub standardize: bool,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        RidgeConfig { alphas: default_alphas(), standardize: true }
    }
}

/// One-vs-rest ridge regression on ±1 targets, decoded by argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub alpha: f64,
    pub class_count: usize,
    /// `features x classes`, applied to standardised features.
    pub weights: DMatrix<f64>,
    pub intercept: Vec<f64>,
    pub feature_mean: Vec<f64>,
    /// Multiplier applied after centring: `1/std`, or 0 for constant features.
    pub feature_scale: Vec<f64>,
}

impl RidgeModel {
    pub fn feature_count(&self) -> usize {
        self.feature_mean.len()
    }

    fn design(&self, features: &FeatureMatrix) -> DMatrix<f64> {
        DMatrix::from_fn(features.rows(), features.cols(), |r, c| {
            (features.get(r, c) - self.feature_mean[c]) * self.feature_scale[c]
        })
    }

    /// Class scores, `samples x classes`.
    pub fn decision_function(&self, features: &FeatureMatrix) -> Result<DMatrix<f64>, RocketError> {
        if features.cols() != self.feature_count() {
            return Err(RocketError::FeatureCount { expected: self.feature_count(), actual: features.cols() });
        }
        let mut scores = self.design(features) * &self.weights;
        for mut row in scores.row_iter_mut() {
            for (v, b) in row.iter_mut().zip(&self.intercept) {
                *v += b;
            }
        }
        Ok(scores)
    }
}

/// Centres (and optionally scales) columns; returns the design with its
/// column means and multipliers.
fn standardize_columns(features: &FeatureMatrix, scale: bool) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let (n, f) = (features.rows(), features.cols());
    let mut mean = vec![0.0; f];
    let mut multiplier = vec![1.0; f];
    for c in 0..f {
        let col: Vec<f64> = (0..n).map(|r| features.get(r, c)).collect();
        let m = col.iter().sum::<f64>() / n as f64;
        mean[c] = m;
        let constant = col.iter().all(|&v| v == col[0]);
        if constant {
            multiplier[c] = 0.0;
        } else if scale {
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            multiplier[c] = 1.0 / var.sqrt();
        }
    }
    let design = DMatrix::from_fn(n, f, |r, c| (features.get(r, c) - mean[c]) * multiplier[c]);
    (design, mean, multiplier)
}

fn one_hot(labels: &[usize], class_count: usize) -> DMatrix<f64> {
    DMatrix::from_fn(labels.len(), class_count, |r, k| if labels[r] == k { 1.0 } else { -1.0 })
}

/// Eigen-decomposition of the Gram matrix of a centred design, shared by the
/// leave-one-out scan and the final solve.
struct GramSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl GramSpectrum {
    fn new(design: &DMatrix<f64>) -> Self {
        let gram = design * design.transpose();
        let eig = SymmetricEigen::new(gram);
        GramSpectrum {
            eigenvalues: eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect(),
            eigenvectors: eig.eigenvectors,
        }
    }

    /// Mean squared leave-one-out residual for each alpha.
    ///
    /// With `H = 11'/n + U diag(l/(l+a)) U'` the hat matrix of ridge with an
    /// unpenalised intercept, the LOO residual is `(y - Hy)_i / (1 - H_ii)`.
    fn loo_errors(&self, centred_targets: &DMatrix<f64>, alphas: &[f64]) -> Vec<f64> {
        let n = centred_targets.nrows();
        let u = &self.eigenvectors;
        let projected = u.transpose() * centred_targets;
        alphas
            .iter()
            .map(|&alpha| {
                let shrink: Vec<f64> = self.eigenvalues.iter().map(|&l| l / (l + alpha)).collect();
                let mut scaled = projected.clone();
                for (i, mut row) in scaled.row_iter_mut().enumerate() {
                    row *= shrink[i];
                }
                let fitted = u * scaled;
                let mut total = 0.0;
                for j in 0..n {
                    let h = 1.0 / n as f64
                        + (0..n).map(|i| u[(j, i)] * u[(j, i)] * shrink[i]).sum::<f64>();
                    let denom = 1.0 - h;
                    if denom <= 1e-12 {
                        return f64::INFINITY;
                    }
                    for k in 0..centred_targets.ncols() {
                        let r = (centred_targets[(j, k)] - fitted[(j, k)]) / denom;
                        total += r * r;
                    }
                }
                total / (n * centred_targets.ncols()) as f64
            })
            .collect()
    }

    /// `W = Z' U diag(1/(l+a)) U' Y`.
    fn solve(&self, design: &DMatrix<f64>, centred_targets: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
        let u = &self.eigenvectors;
        let mut coef = u.transpose() * centred_targets;
        for (i, mut row) in coef.row_iter_mut().enumerate() {
            row /= self.eigenvalues[i] + alpha;
        }
        design.transpose() * (u * coef)
    }
}

fn centre_targets(targets: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let means: Vec<f64> = targets.column_iter().map(|c| c.mean()).collect();
    let centred = DMatrix::from_fn(targets.nrows(), targets.ncols(), |r, k| targets[(r, k)] - means[k]);
    (centred, means)
}

/// Mean squared leave-one-out error of ridge regression with an unpenalised
/// intercept, for each alpha, on a fixed design matrix.
pub fn loo_errors(design: &DMatrix<f64>, targets: &DMatrix<f64>, alphas: &[f64]) -> Vec<f64> {
    let means: Vec<f64> = design.column_iter().map(|c| c.mean()).collect();
    let centred = DMatrix::from_fn(design.nrows(), design.ncols(), |r, c| design[(r, c)] - means[c]);
    let (y, _) = centre_targets(targets);
    GramSpectrum::new(&centred).loo_errors(&y, alphas)
}

/// Fits the ridge classifier, selecting alpha by leave-one-out error.
pub fn ridge_fit(
    features: &FeatureMatrix,
    labels: &[usize],
    class_count: usize,
    config: &RidgeConfig,
) -> Result<RidgeModel, RocketError> {
    let n = features.rows();
    if labels.len() != n {
        return Err(RocketError::LengthMismatch(labels.len(), n));
    }
    if n < 2 {
        return Err(RocketError::TooFewSamples(n));
    }
    if config.alphas.is_empty() || config.alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(RocketError::BadAlphas);
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
        return Err(RocketError::LabelOutOfRange { label: bad, classes: class_count });
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(RocketError::SingleClass);
    }

    let (design, feature_mean, feature_scale) = standardize_columns(features, config.standardize);
    let (targets, intercept) = centre_targets(&one_hot(labels, class_count));
    let spectrum = GramSpectrum::new(&design);
    let errors = spectrum.loo_errors(&targets, &config.alphas);
    let best = errors
        .iter()
        .enumerate()
        .fold(0, |best, (i, e)| if *e < errors[best] { i } else { best });
    let alpha = config.alphas[best];
    let weights = spectrum.solve(&design, &targets, alpha);
    Ok(RidgeModel { alpha, class_count, weights, intercept, feature_mean, feature_scale })
}

/// Argmax of class scores; ties go to the lowest class index.
pub fn ridge_predict(model: &RidgeModel, features: &FeatureMatrix) -> Result<Vec<usize>, RocketError> {
    let scores = model.decision_function(features)?;
    Ok(scores
        .row_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &s)| if s > best.1 { (k, s) } else { best })
                .0
        })
        .collect())
}

pub fn accuracy(predicted: &[usize], actual: &[usize]) -> Result<f64, RocketError> {
    if predicted.len() != actual.len() {
        return Err(RocketError::LengthMismatch(predicted.len(), actual.len()));
    }
    if predicted.is_empty() {
        return Err(RocketError::TooFewSamples(0));
    }
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / actual.len() as f64)
}
