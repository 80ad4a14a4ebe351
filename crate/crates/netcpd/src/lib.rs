//! Multiple change point detection for time series of binary networks.
//!
//! The model is a time-heterogeneous separable temporal ERGM: every
//! transition between consecutive snapshots is split into a formation
//! network (edges present before or after) and a dissolution network
//! (edges present before and after), each governed by its own parameter
//! vector. Fitting all transitions jointly under a group fused lasso
//! penalty makes consecutive parameter vectors identical except at a
//! sparse set of time points; those points, after standardization and a
//! data-driven threshold, are the declared change points. A BIC over a
//! grid of penalty weights selects the final model.
//!
//! Modules follow the pipeline:
//!
//! * [`net`] — snapshots, series, formation/dissolution transforms, the
//!   canonical dyad order.
//! * [`stats`] — network statistics, change statistics, and the
//!   per-transition change-statistic blocks.
//! * [`pseudolik`] — log pseudo-likelihood, gradient, Hessian blocks.
//! * [`solver`] — the ADMM loop with Newton and group-lasso subproblems.
//! * [`detect`] — standardized parameter differences, thresholding,
//!   localization, and BIC model selection over a penalty grid.
//! * [`simulate`] — seeded generators for benchmark network series.
//! * [`evaluate`] — change-point accuracy metrics.

pub mod detect;
pub mod error;
pub mod evaluate;
pub mod net;
pub mod pseudolik;
pub mod simulate;
pub mod solver;
pub mod stats;

pub use detect::{DetectionConfig, DetectionResult, detect_change_points};
pub use error::{Error, Result};
pub use evaluate::ChangePointSet;
pub use net::{NetworkSeries, NetworkSnapshot, NodalAttributes};
pub use pseudolik::ParamTrajectory;
pub use solver::{AdmmState, SolverConfig, run_admm};
pub use stats::{ChangeStatBlocks, StatisticKind, StatisticSpec};
