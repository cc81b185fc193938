//! The experiment grid (scaling method x slice scheme x resample), the
//! analyses run over its results, and report emission.

pub mod analysis;
pub mod report;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rocket::{RidgeConfig, RocketClassifier, RocketError};
use crate::scalers::{apply_dataset, fit_dataset, ScalerError, ScalerMethod};
use crate::stats::StatsError;
use crate::tensor::{Dataset3D, SliceScheme, TensorError};

pub use analysis::{
    baseline_comparisons, compare_to_baseline, dimension_sweep, group_scores, utility_scores, BaselineComparison,
    BestReport, ConfigKey, DatasetUtility, PairTest, SweepReport, UtilityProfile,
};
pub use report::{emit_report, Analysis, ReportFormat};

pub const TABLE_VERSION: u32 = 1;
pub const DEFAULT_RESAMPLES: usize = 20;
pub const DEFAULT_KERNELS: usize = 10_000;
/// Scheme tag used when deriving seeds for the unscaled baseline.
const BASELINE_TAG: &str = "-";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("train and test are incompatible: {0}")]
    Incompatible(#[from] TensorError),
    #[error("cell {cell} failed: {source}")]
    Cell { cell: String, source: CellError },
    #[error("table has no baseline records")]
    MissingBaseline,
    #[error("table has no records for {0}")]
    MissingConfig(String),
    #[error("need at least 2 resamples for statistical analysis, table has {0}")]
    TooFewResamples(usize),
    #[error("no tables to analyse")]
    EmptyInput,
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
    #[error("unsupported result table version {0}")]
    Version(u32),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("csv output: {0}")]
    Csv(String),
}

#[derive(Debug, Error)]
pub enum CellError {
    #[error(transparent)]
    Scaler(#[from] ScalerError),
    #[error(transparent)]
    Rocket(#[from] RocketError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Which data the scaler statistics are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitScope {
    Train,
    /// Train and test pooled.
    All,
}

impl FromStr for FitScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(FitScope::Train),
            "all" => Ok(FitScope::All),
            other => Err(format!("unknown fit scope `{other}`")),
        }
    }
}

/// What varies between resamples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResampleMode {
    /// Only classifier randomness; the given train/test split is kept.
    SeedOnly,
    /// Also a fresh stratified split of the pooled data at the original
    /// per-class train counts.
    ShuffleSplit,
}

impl FromStr for ResampleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "seed-only" => Ok(ResampleMode::SeedOnly),
            "shuffle-split" => Ok(ResampleMode::ShuffleSplit),
            other => Err(format!("unknown resample mode `{other}`")),
        }
    }
}

impl fmt::Display for ResampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResampleMode::SeedOnly => "seed-only",
            ResampleMode::ShuffleSplit => "shuffle-split",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    /// Scaling methods; the unscaled baseline always runs and need not be listed.
    pub methods: Vec<ScalerMethod>,
    pub schemes: Vec<SliceScheme>,
    pub resamples: usize,
    pub base_seed: u64,
    pub kernel_count: usize,
    pub fit_scope: FitScope,
    pub resample_mode: ResampleMode,
    /// Record per-cell wall time. Off by default since it breaks byte-identical output.
    #[serde(default)]
    pub record_timing: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            methods: ScalerMethod::SCALING.to_vec(),
            schemes: SliceScheme::ALL.to_vec(),
            resamples: DEFAULT_RESAMPLES,
            base_seed: 0,
            kernel_count: DEFAULT_KERNELS,
            fit_scope: FitScope::Train,
            resample_mode: ResampleMode::SeedOnly,
            record_timing: false,
        }
    }
}

impl ExperimentPlan {
    /// Drops the baseline and duplicates from the method and scheme lists and
    /// puts both in canonical order.
    pub fn normalized(&self) -> ExperimentPlan {
        let mut plan = self.clone();
        plan.methods.retain(|&m| m != ScalerMethod::None);
        plan.methods.sort();
        plan.methods.dedup();
        plan.schemes.sort();
        plan.schemes.dedup();
        plan
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.resamples == 0 {
            return Err(HarnessError::InvalidPlan("resamples must be at least 1".into()));
        }
        if self.kernel_count == 0 {
            return Err(HarnessError::InvalidPlan("kernel count must be at least 1".into()));
        }
        let scaling = self.methods.iter().any(|&m| m != ScalerMethod::None);
        if scaling && self.schemes.is_empty() {
            return Err(HarnessError::InvalidPlan("scaling methods given without any dimension".into()));
        }
        Ok(())
    }

    /// Number of records `run_grid` produces.
    pub fn record_count(&self) -> usize {
        let plan = self.normalized();
        (plan.methods.len() * plan.schemes.len() + 1) * plan.resamples
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub n_train: usize,
    pub n_test: usize,
    pub channels: usize,
    pub timesteps: usize,
    pub class_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub method: ScalerMethod,
    /// `None` for the baseline.
    pub scheme: Option<SliceScheme>,
    pub resample: usize,
    pub seed: u64,
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl CellRecord {
    pub fn config(&self) -> ConfigKey {
        ConfigKey { method: self.method, scheme: self.scheme }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub version: u32,
    pub dataset: DatasetMeta,
    pub plan: ExperimentPlan,
    pub records: Vec<CellRecord>,
}

impl ResultTable {
    pub fn to_json(&self) -> Result<String, HarnessError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let table: ResultTable = serde_json::from_str(text)?;
        if table.version != TABLE_VERSION {
            return Err(HarnessError::Version(table.version));
        }
        Ok(table)
    }
}

/// Stable 64-bit seed for one grid cell: FNV-1a over the inputs, finished
/// with a splitmix64 mix.
pub fn derive_seed(base_seed: u64, method_tag: &str, scheme_tag: &str, resample: usize) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0100_0000_01b3;
    let mut h = OFFSET;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    feed(&base_seed.to_le_bytes());
    feed(method_tag.as_bytes());
    feed(&[0xff]);
    feed(scheme_tag.as_bytes());
    feed(&[0xff]);
    feed(&(resample as u64).to_le_bytes());

    let mut z = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stratified re-split of `train ∪ test` keeping each class's train count.
pub fn stratified_resplit(train: &Dataset3D, test: &Dataset3D, seed: u64) -> Result<(Dataset3D, Dataset3D), TensorError> {
    let pooled = train.concat(test)?;
    let mut train_counts = vec![0usize; pooled.class_count()];
    for &l in train.labels() {
        train_counts[l] += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::with_capacity(train.n_samples());
    let mut test_idx = Vec::with_capacity(test.n_samples());
    for (class, &take) in train_counts.iter().enumerate() {
        let mut members: Vec<usize> = (0..pooled.n_samples()).filter(|&i| pooled.labels()[i] == class).collect();
        members.shuffle(&mut rng);
        train_idx.extend_from_slice(&members[..take]);
        test_idx.extend_from_slice(&members[take..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((pooled.select(&train_idx), pooled.select(&test_idx)))
}

struct Job {
    method: ScalerMethod,
    scheme: Option<SliceScheme>,
    resample: usize,
}

impl Job {
    fn label(&self) -> String {
        format!("{} r{}", ConfigKey { method: self.method, scheme: self.scheme }, self.resample)
    }
}

fn run_cell(train: &Dataset3D, test: &Dataset3D, plan: &ExperimentPlan, job: &Job) -> Result<CellRecord, CellError> {
    let started = Instant::now();
    let scheme_tag = job.scheme.map_or(BASELINE_TAG, |s| s.tag());
    let seed = derive_seed(plan.base_seed, job.method.tag(), scheme_tag, job.resample);

    let (train_s, test_s) = match job.scheme {
        Some(scheme) if job.method != ScalerMethod::None => {
            let fitted = match plan.fit_scope {
                FitScope::Train => fit_dataset(train, job.method, scheme)?,
                FitScope::All => fit_dataset(&train.concat(test)?, job.method, scheme)?,
            };
            (apply_dataset(&fitted, train)?, apply_dataset(&fitted, test)?)
        }
        _ => (train.clone(), test.clone()),
    };
    let classifier = RocketClassifier::fit(&train_s, plan.kernel_count, seed, &RidgeConfig::default())?;
    let accuracy = classifier.score(&test_s)?;
    Ok(CellRecord {
        method: job.method,
        scheme: job.scheme,
        resample: job.resample,
        seed,
        accuracy,
        wall_time_s: plan.record_timing.then(|| started.elapsed().as_secs_f64()),
    })
}

/// Runs every cell of the plan. Cells run in parallel on the current rayon
/// pool; records come back in a fixed order (baseline first, then methods x
/// schemes, resamples innermost) whatever the completion order.
pub fn run_grid(name: &str, train: &Dataset3D, test: &Dataset3D, plan: &ExperimentPlan) -> Result<ResultTable, HarnessError> {
    plan.validate()?;
    let plan = plan.normalized();
    // compatibility check up front rather than inside every cell
    train.concat(test)?;

    let splits: Vec<(Dataset3D, Dataset3D)> = match plan.resample_mode {
        ResampleMode::SeedOnly => Vec::new(),
        ResampleMode::ShuffleSplit => (0..plan.resamples)
            .map(|r| stratified_resplit(train, test, derive_seed(plan.base_seed, "split", BASELINE_TAG, r)))
            .collect::<Result<_, _>>()?,
    };

    let mut jobs: Vec<Job> =
        (0..plan.resamples).map(|resample| Job { method: ScalerMethod::None, scheme: None, resample }).collect();
    for &method in &plan.methods {
        for &scheme in &plan.schemes {
            jobs.extend((0..plan.resamples).map(|resample| Job { method, scheme: Some(scheme), resample }));
        }
    }

    let records = jobs
        .par_iter()
        .map(|job| {
            let (tr, te) = match plan.resample_mode {
                ResampleMode::SeedOnly => (train, test),
                ResampleMode::ShuffleSplit => (&splits[job.resample].0, &splits[job.resample].1),
            };
            log::debug!("running {}", job.label());
            run_cell(tr, te, &plan, job).map_err(|source| HarnessError::Cell { cell: job.label(), source })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let (_, channels, timesteps) = train.shape();
    Ok(ResultTable {
        version: TABLE_VERSION,
        dataset: DatasetMeta {
            name: name.to_string(),
            n_train: train.n_samples(),
            n_test: test.n_samples(),
            channels,
            timesteps,
            class_count: train.class_count(),
        },
        plan,
        records,
    })
}
