//! Scaling methods with fit/apply separation, and their application to a
//! dataset across a [`SliceScheme`].
//!
//! Every method is a total function: degenerate sets (zero spread, zero
//! norm, a single distinct value) map to a fixed, finite output instead of
//! propagating NaN.
//!
//! | method     | statistics            | degenerate rule        |
//! |------------|-----------------------|------------------------|
//! | `l2`       | Euclidean norm        | norm 0 → identity      |
//! | `standard` | mean, population std  | std 0 → 0              |
//! | `minmax`   | min, max              | max = min → 0          |
//! | `maxabs`   | max \|x\|             | 0 → identity           |
//! | `robust`   | median, q1, q3        | q3 = q1 → divide by 1  |
//! | `power`    | Yeo-Johnson λ, mean, std of ψ | constant → identity |
//! | `quantile` | ≤ 1000 reference quantiles | one value → 0.5   |

mod power;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{slice_ids, Dataset3D, SliceId, SliceScheme, TensorError};

pub use power::{brent_minimize, fit_lambda, log_likelihood, yeo_johnson_point};

/// Upper bound on the number of reference quantiles kept per set.
pub const MAX_QUANTILES: usize = 1000;

pub const SCALER_JSON_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScalerError {
    #[error("cannot fit a scaler on an empty set")]
    Empty,
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("input values are all equal")]
    ConstantInput,
    #[error("non-finite input value {0}")]
    NonFinite(f64),
    #[error("percentile {0} outside [0, 100]")]
    BadPercentile(f64),
    #[error("parameters for `{params}` cannot drive method `{method}`")]
    MethodMismatch { method: ScalerMethod, params: &'static str },
    #[error("scaler was fit on {fit_c} channels x {fit_t} timesteps, data has {c} x {t}")]
    DimensionMismatch { fit_c: usize, fit_t: usize, c: usize, t: usize },
    #[error("fitting slice {id}: {source}")]
    Slice {
        id: SliceId,
        #[source]
        source: Box<ScalerError>,
    },
    #[error("unsupported scaler document version {0}")]
    Version(u32),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScalerMethod {
    /// No scaling; the baseline.
    #[serde(rename = "none")]
    None,
    #[serde(rename = "l2")]
    L2Normalize,
    #[serde(rename = "standard")]
    Standardize,
    #[serde(rename = "minmax")]
    MinMax,
    #[serde(rename = "maxabs")]
    MaxAbs,
    #[serde(rename = "robust")]
    Robust,
    #[serde(rename = "power")]
    PowerYeoJohnson,
    #[serde(rename = "quantile")]
    QuantileUniform,
}

impl ScalerMethod {
    /// The seven scaling methods, without the baseline.
    pub const SCALING: [ScalerMethod; 7] = [
        ScalerMethod::L2Normalize,
        ScalerMethod::Standardize,
        ScalerMethod::MinMax,
        ScalerMethod::MaxAbs,
        ScalerMethod::Robust,
        ScalerMethod::PowerYeoJohnson,
        ScalerMethod::QuantileUniform,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ScalerMethod::None => "none",
            ScalerMethod::L2Normalize => "l2",
            ScalerMethod::Standardize => "standard",
            ScalerMethod::MinMax => "minmax",
            ScalerMethod::MaxAbs => "maxabs",
            ScalerMethod::Robust => "robust",
            ScalerMethod::PowerYeoJohnson => "power",
            ScalerMethod::QuantileUniform => "quantile",
        }
    }
}

impl fmt::Display for ScalerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ScalerMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "none" | "noscaling" | "baseline" => Ok(ScalerMethod::None),
            "l2" | "normalize" | "normalization" | "l2normalize" => Ok(ScalerMethod::L2Normalize),
            "standard" | "standardize" | "standardization" | "zscore" => Ok(ScalerMethod::Standardize),
            "minmax" => Ok(ScalerMethod::MinMax),
            "maxabs" => Ok(ScalerMethod::MaxAbs),
            "robust" => Ok(ScalerMethod::Robust),
            "power" | "yeojohnson" | "poweryeojohnson" => Ok(ScalerMethod::PowerYeoJohnson),
            "quantile" | "quantileuniform" => Ok(ScalerMethod::QuantileUniform),
            other => Err(format!("unknown scaling method `{other}`")),
        }
    }
}

/// Statistics fitted on one scaling set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SliceParams {
    Identity,
    L2 { norm: f64 },
    Standard { mean: f64, std: f64 },
    MinMax { min: f64, max: f64 },
    MaxAbs { max_abs: f64 },
    Robust { median: f64, q1: f64, q3: f64 },
    Power { lambda: f64, mean: f64, std: f64 },
    Quantile { quantiles: Vec<f64>, levels: Vec<f64> },
}

impl SliceParams {
    fn kind(&self) -> &'static str {
        match self {
            SliceParams::Identity => "identity",
            SliceParams::L2 { .. } => "l2",
            SliceParams::Standard { .. } => "standard",
            SliceParams::MinMax { .. } => "minmax",
            SliceParams::MaxAbs { .. } => "maxabs",
            SliceParams::Robust { .. } => "robust",
            SliceParams::Power { .. } => "power",
            SliceParams::Quantile { .. } => "quantile",
        }
    }

    fn matches(&self, method: ScalerMethod) -> bool {
        matches!(
            (method, self),
            (ScalerMethod::None, SliceParams::Identity)
                | (ScalerMethod::L2Normalize, SliceParams::L2 { .. })
                | (ScalerMethod::Standardize, SliceParams::Standard { .. })
                | (ScalerMethod::MinMax, SliceParams::MinMax { .. })
                | (ScalerMethod::MaxAbs, SliceParams::MaxAbs { .. })
                | (ScalerMethod::Robust, SliceParams::Robust { .. })
                | (ScalerMethod::PowerYeoJohnson, SliceParams::Power { .. })
                | (ScalerMethod::QuantileUniform, SliceParams::Quantile { .. })
        )
    }

    /// Transforms a single value.
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            SliceParams::Identity => x,
            SliceParams::L2 { norm } => {
                if norm > 0.0 {
                    x / norm
                } else {
                    x
                }
            }
            SliceParams::Standard { mean, std } => {
                if std > 0.0 {
                    (x - mean) / std
                } else {
                    0.0
                }
            }
            SliceParams::MinMax { min, max } => {
                if max > min {
                    (x - min) / (max - min)
                } else {
                    0.0
                }
            }
            SliceParams::MaxAbs { max_abs } => {
                if max_abs > 0.0 {
                    x / max_abs
                } else {
                    x
                }
            }
            SliceParams::Robust { median, q1, q3 } => {
                let iqr = q3 - q1;
                (x - median) / if iqr > 0.0 { iqr } else { 1.0 }
            }
            SliceParams::Power { lambda, mean, std } => {
                if std > 0.0 {
                    (yeo_johnson_point(x, lambda) - mean) / std
                } else {
                    0.0
                }
            }
            SliceParams::Quantile { ref quantiles, ref levels } => interpolate_cdf(quantiles, levels, x),
        }
    }
}

/// Forward piecewise-linear map through (quantile, level) knots, clipped to
/// `[0, 1]`. Within a run of tied quantiles the highest level wins.
fn interpolate_cdf(quantiles: &[f64], levels: &[f64], x: f64) -> f64 {
    let (Some(&first), Some(&last)) = (quantiles.first(), quantiles.last()) else {
        return 0.5;
    };
    if first == last {
        return 0.5;
    }
    if x <= first {
        return 0.0;
    }
    if x >= last {
        return 1.0;
    }
    // first index whose quantile exceeds x; 1 <= upper < len here
    let upper = quantiles.partition_point(|&q| q <= x);
    let lower = upper - 1;
    let (q0, q1) = (quantiles[lower], quantiles[upper]);
    let (p0, p1) = (levels[lower], levels[upper]);
    (p0 + (x - q0) / (q1 - q0) * (p1 - p0)).clamp(0.0, 1.0)
}

fn check_values(values: &[f64]) -> Result<(), ScalerError> {
    if values.is_empty() {
        return Err(ScalerError::Empty);
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(ScalerError::NonFinite(bad));
    }
    Ok(())
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
}

/// Linear interpolation at fractional rank `h` of a sorted sample.
fn interpolate_rank(sorted: &[f64], h: f64) -> f64 {
    let last = sorted.len() - 1;
    let lo = h.floor();
    let i = lo as usize;
    if i >= last {
        return sorted[last];
    }
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    interpolate_rank(sorted, (sorted.len() - 1) as f64 * p / 100.0)
}

/// Linear-interpolation percentile, `p` in `[0, 100]`.
pub fn percentile(values: &[f64], p: f64) -> Result<f64, ScalerError> {
    check_values(values)?;
    if !(0.0..=100.0).contains(&p) {
        return Err(ScalerError::BadPercentile(p));
    }
    Ok(percentile_sorted(&sorted_copy(values), p))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fits `method`'s statistics on one set of values.
pub fn fit_slice(method: ScalerMethod, values: &[f64]) -> Result<SliceParams, ScalerError> {
    check_values(values)?;
    let params = match method {
        ScalerMethod::None => SliceParams::Identity,
        ScalerMethod::L2Normalize => {
            SliceParams::L2 { norm: values.iter().map(|v| v * v).sum::<f64>().sqrt() }
        }
        ScalerMethod::Standardize => {
            let (mean, std) = mean_std(values);
            SliceParams::Standard { mean, std }
        }
        ScalerMethod::MinMax => {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            SliceParams::MinMax { min, max }
        }
        ScalerMethod::MaxAbs => {
            SliceParams::MaxAbs { max_abs: values.iter().fold(0.0, |m, v| v.abs().max(m)) }
        }
        ScalerMethod::Robust => {
            let sorted = sorted_copy(values);
            SliceParams::Robust {
                median: percentile_sorted(&sorted, 50.0),
                q1: percentile_sorted(&sorted, 25.0),
                q3: percentile_sorted(&sorted, 75.0),
            }
        }
        ScalerMethod::PowerYeoJohnson => match fit_lambda(values) {
            Ok(lambda) => {
                let transformed: Vec<f64> =
                    values.iter().map(|&x| yeo_johnson_point(x, lambda)).collect();
                let (mean, std) = mean_std(&transformed);
                SliceParams::Power { lambda, mean, std }
            }
            Err(ScalerError::ConstantInput | ScalerError::TooFewValues { .. }) => {
                SliceParams::Power { lambda: 1.0, mean: 0.0, std: 1.0 }
            }
            Err(e) => return Err(e),
        },
        ScalerMethod::QuantileUniform => {
            let sorted = sorted_copy(values);
            let n = sorted.len();
            let n_q = n.min(MAX_QUANTILES);
            if n_q == 1 {
                SliceParams::Quantile { quantiles: vec![sorted[0]], levels: vec![0.0] }
            } else {
                let steps = (n_q - 1) as f64;
                let levels: Vec<f64> = (0..n_q).map(|k| k as f64 / steps).collect();
                let quantiles = (0..n_q)
                    .map(|k| interpolate_rank(&sorted, ((n - 1) * k) as f64 / steps))
                    .collect();
                SliceParams::Quantile { quantiles, levels }
            }
        }
    };
    Ok(params)
}

/// Applies fitted parameters elementwise.
pub fn transform_slice(
    method: ScalerMethod,
    params: &SliceParams,
    values: &[f64],
) -> Result<Vec<f64>, ScalerError> {
    if !params.matches(method) {
        return Err(ScalerError::MethodMismatch { method, params: params.kind() });
    }
    Ok(values.iter().map(|&x| params.apply(x)).collect())
}

/// A method fitted on every set of a slice scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedScaler {
    pub method: ScalerMethod,
    pub scheme: SliceScheme,
    pub fit_channels: usize,
    pub fit_timesteps: usize,
    /// One entry per slice, in [`slice_ids`] order. Empty for [`ScalerMethod::None`].
    pub params: Vec<SlicePair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicePair {
    pub slice: SliceId,
    pub params: SliceParams,
}

#[derive(Serialize, Deserialize)]
struct ScalerDocument {
    version: u32,
    #[serde(flatten)]
    scaler: FittedScaler,
}

impl FittedScaler {
    pub fn get(&self, id: &SliceId) -> Option<&SliceParams> {
        self.params.iter().find(|p| &p.slice == id).map(|p| &p.params)
    }

    pub fn to_json(&self) -> Result<String, ScalerError> {
        let doc = ScalerDocument { version: SCALER_JSON_VERSION, scaler: self.clone() };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ScalerError> {
        let doc: ScalerDocument = serde_json::from_str(text)?;
        if doc.version != SCALER_JSON_VERSION {
            return Err(ScalerError::Version(doc.version));
        }
        Ok(doc.scaler)
    }
}

/// Fits `method` on every set of `scheme` over the training data.
pub fn fit_dataset(
    train: &Dataset3D,
    method: ScalerMethod,
    scheme: SliceScheme,
) -> Result<FittedScaler, ScalerError> {
    let (_, c, t) = train.shape();
    let params = if method == ScalerMethod::None {
        Vec::new()
    } else {
        slice_ids(scheme, c, t)
            .into_par_iter()
            .map(|id| {
                let values = train.gather(&id)?;
                let params = fit_slice(method, &values)
                    .map_err(|e| ScalerError::Slice { id, source: Box::new(e) })?;
                Ok(SlicePair { slice: id, params })
            })
            .collect::<Result<Vec<_>, ScalerError>>()?
    };
    Ok(FittedScaler { method, scheme, fit_channels: c, fit_timesteps: t, params })
}

/// Transforms every slice of `data` with the scaler's fitted parameters.
pub fn apply_dataset(scaler: &FittedScaler, data: &Dataset3D) -> Result<Dataset3D, ScalerError> {
    let (_, c, t) = data.shape();
    if c != scaler.fit_channels || t != scaler.fit_timesteps {
        return Err(ScalerError::DimensionMismatch {
            fit_c: scaler.fit_channels,
            fit_t: scaler.fit_timesteps,
            c,
            t,
        });
    }
    if scaler.method == ScalerMethod::None {
        return Ok(data.clone());
    }
    let transformed = scaler
        .params
        .par_iter()
        .map(|pair| {
            let values = data.gather(&pair.slice)?;
            Ok((pair.slice, transform_slice(scaler.method, &pair.params, &values)?))
        })
        .collect::<Result<Vec<_>, ScalerError>>()?;
    let mut out = data.clone();
    for (id, values) in transformed {
        out.scatter_in_place(&id, &values)?;
    }
    Ok(out)
}
