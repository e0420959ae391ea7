//! Fourier neural operator: configuration, parameters, forward pass on grid functions,
//! parameter counting, reverse-mode gradients of the empirical risk, and the parameter
//! file format.

mod activation;
mod config;
pub mod format;
mod forward;
mod grad;
mod modes;
mod params;
mod spectral;

pub use activation::Activation;
pub use config::{param_count, sigma_m_member, FnoConfig, ParamCount};
pub use forward::{apply_layer, forward, forward_batch, forward_trace, Trace};
pub use grad::{grad_empirical_risk, gradient_check, risk_value, GradCheck, RiskGradient};
pub use modes::{Mode, ModeTable};
pub use params::{project_params, Entry, FnoParams, ParamLayout};
pub use spectral::{bias_field, naive_spectral_conv, spectral_conv};

use crate::space::GridFunction;
use crate::Result;

/// Anything that maps input grid functions to output grid functions.
pub trait Operator: Sync {
    fn apply(&self, u: &GridFunction) -> Result<GridFunction>;
}

impl Operator for FnoParams {
    fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        forward(self, u)
    }
}
