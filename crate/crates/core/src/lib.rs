//! Subsequence convergence for non-autonomous higher-order difference
//! equations and the planar and three-dimensional systems that fold into
//! them.
//!
//! An equation `x_n = F_n(x_{n-1}, ..., x_{n-m})` with `|F_n(u)| <= g(u_k)`
//! and `g(u) < |u|` on `(-α, α)` has the property that once a term `x_{n0}`
//! falls in that window, the subsequence `x_{n0 + j k}` tends to zero. The
//! crate builds such equations ([`models`]), locates α and turns it into
//! predictions ([`criteria`]), checks those predictions against computed
//! trajectories ([`analysis`]) and folds systems into scalar equations
//! ([`folding`]).

// `!(x > 0.0)` is used throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod criteria;
pub mod descriptor;
pub mod equation;
pub mod error;
pub mod folding;
pub mod models;
pub mod sequence;
mod serde_util;

pub use analysis::{build_report, ConvergenceReport, Tolerances, Verdict};
pub use criteria::{BoundingFunction, Threshold, ThresholdKind, ThresholdWindow};
pub use descriptor::{Model, ModelDescriptor};
pub use equation::{Domain, EquationSpec, Interval, Trajectory, TrajectoryRecord};
pub use error::{Error, Result};
pub use folding::{Orbit, PlanarSystem};
pub use sequence::ParameterSequence;
