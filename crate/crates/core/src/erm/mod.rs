//! Empirical risk minimization over bounded FNO classes: the input law, synthetic ground
//! truths, a multi-restart projected-descent surrogate of the ERM, and rate sweeps with
//! the high-probability risk audit.

mod functional;
mod measure;
mod sweep;
mod train;
mod truth;

pub use functional::{fno_decoder, fooling_cross_check, functional_mode, CrossCheckRow, FunctionalReport};
pub use measure::{sample_inputs, sample_stream, MeasureSpec};
pub use sweep::{estprob_audit, rate_sweep, EstprobAudit, SweepConfig, SweepRow, RateSweepReport};
pub use train::{
    architecture, descend, empirical_risk, fit, mc_estimate, train_erm, train_on, DecompositionAudit, Fit, Labeled, McEstimate,
    RestartRecord, TrainConfig, TrainReport,
};
pub use truth::{GroundTruth, NORMALIZATION_PROBES, TARGET_SUP};
