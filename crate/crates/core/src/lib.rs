//! Input scaling across the dimensions of multivariate time-series datasets,
//! plus a ROCKET-based benchmark harness for measuring its effect on
//! classification accuracy.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: the `samples x channels x timesteps` dataset and the four
//!   slice schemes (channels, timesteps, both, all) scalers are fit over.
//! - [`scalers`]: seven scaling methods with fit/apply separation.
//! - [`ts_io`]: `.ts` archive parsing/emitting and synthetic datasets.
//! - [`rocket`]: random convolutional kernel features and a ridge classifier.
//! - [`stats`]: Wilcoxon signed-rank, Holm correction, configuration ranking.
//! - [`harness`]: the experiment grid, analyses and reports.

pub mod harness;
pub mod rocket;
pub mod scalers;
pub mod stats;
pub mod tensor;
pub mod ts_io;

pub use harness::{ExperimentPlan, FitScope, ResampleMode, ResultTable};
pub use rocket::{KernelBank, RidgeModel};
pub use scalers::{FittedScaler, ScalerMethod, SliceParams};
pub use tensor::{Dataset3D, SliceId, SliceScheme};
