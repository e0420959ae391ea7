//! Closed-form bounds for FNOs (layer norms, hidden-state growth, parameter
//! Lipschitz constants, covering numbers, sample sizes) and samplers that audit them.

mod audit;
mod bounds;
mod entropy;
mod flip;

pub use audit::{audit_lemmas, audit_risk_lipschitz, AuditRecord, Lemma, RiskLipschitzReport};
pub use bounds::{layer_lipschitz_bounds, lipschitz_certificate, parameter_lipschitz, LayerBounds, LipschitzCertificate, LogBound};
pub use entropy::{
    class_index, covering_number_log, cube_covering_log, entropy_report, epsilon_for, predicted_exponent, sample_size,
    sigma_m_config, sigma_m_kappa, CoverSet, EntropyReport, SampleSize, SamplingPolicy,
};
pub use flip::{flip, flip_grad, flip_audit, FlipAudit};
