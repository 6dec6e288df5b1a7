//! Block partial-sum processes of heavy-tailed stationary sequences and
//! their alpha-stable Levy limits.
//!
//! * [`models`]: regularly varying sequences and norming constants.
//! * [`blocks`]: block sums and the processes `V_n`, `W_n`, `W_n^(u)`.
//! * [`step`], [`points`], [`metrics`]: step functions, point measures,
//!   the J1 distance, the metric `rho` and a vague metric.
//! * [`levy`]: the Levy measure, Poisson random measures, limit paths and
//!   the law of `W_0(1)`.
//! * [`diagnostics`]: Monte Carlo checks of the conditions and conclusions
//!   of the functional limit theorem.
//! * [`experiment`]: config-driven studies with CSV and JSON reports.

// NaN must fail the range checks, hence the negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod blocks;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod levy;
pub mod metrics;
pub mod models;
pub mod pathio;
pub mod points;
pub mod quad;
pub mod rng;
pub mod stats;
pub mod step;

pub use error::{Error, Result};
pub use levy::LevyMeasureParams;
pub use models::{RegVarSpec, SamplePath};
pub use points::PointMeasure;
pub use step::StepFunction;
