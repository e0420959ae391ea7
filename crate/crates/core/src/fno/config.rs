use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::params::FnoParams;
use crate::{Error, Result};

/// Architecture and discretization of one FNO.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FnoConfig {
    pub d: usize,
    pub d_in: usize,
    pub d_out: usize,
    /// hidden channel width
    pub d_c: usize,
    /// retained modes satisfy |k|_inf < kappa
    pub kappa: usize,
    pub depth: usize,
    /// uniform parameter bound
    pub bound: f64,
    /// grid points per axis
    pub resolution: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl FnoConfig {
    /// Small network used by the examples and checks: d = 1, one input and output channel.
    pub fn tiny(d_c: usize, kappa: usize, depth: usize, resolution: usize) -> Self {
        FnoConfig {
            d: 1,
            d_in: 1,
            d_out: 1,
            d_c,
            kappa,
            depth,
            bound: 1.0,
            resolution,
            activation: Activation::SmoothGate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(Error::Domain(format!("FNO dimension {} not in 1..=3", self.d)));
        }
        if self.d_in == 0 || self.d_out == 0 || self.d_c == 0 || self.kappa == 0 || self.depth == 0 {
            return Err(Error::Domain("FNO sizes must be positive".into()));
        }
        if self.d_in > self.d_c || self.d_out > self.d_c {
            return Err(Error::Domain(format!(
                "channel width {} below input {} or output {}",
                self.d_c, self.d_in, self.d_out
            )));
        }
        if !self.resolution.is_power_of_two() || self.resolution < 2 || 2 * self.kappa > self.resolution {
            return Err(Error::Domain(format!(
                "resolution {1} must be a power of two at least twice the cut-off {0}",
                self.kappa, self.resolution
            )));
        }
        if self.resolution.checked_pow(self.d as u32).map_or(true, |p| p > 1 << 22) {
            return Err(Error::Domain("grid too large".into()));
        }
        if !(self.bound >= 1.0) || !self.bound.is_finite() {
            return Err(Error::Domain(format!("parameter bound {} must be finite and >= 1", self.bound)));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.resolution.pow(self.d as u32)
    }

    /// Number of retained modes, (2κ-1)^d.
    pub fn retained(&self) -> usize {
        (2 * self.kappa - 1).pow(self.d as u32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCount {
    pub exact: u64,
    pub paper_bound: u64,
}

/// Free real parameters under Hermitian symmetry, and the bound 5(2κ)^d L d_c².
pub fn param_count(config: &FnoConfig) -> ParamCount {
    let dc = config.d_c as u64;
    let r = config.retained() as u64;
    let l = config.depth as u64;
    let exact = dc * config.d_in as u64 + l.saturating_mul(dc * dc + dc * dc * r + dc * r) + config.d_out as u64 * dc;
    let paper_bound = 5 * (2 * config.kappa as u64).pow(config.d as u32) * l * dc * dc;
    ParamCount { exact, paper_bound }
}

/// Membership in the class with κ^d, d_c, L <= m and parameters bounded by e^m.
pub fn sigma_m_member(params: &FnoParams, m: usize) -> bool {
    let c = params.config();
    let m_f = m as f64;
    c.kappa.pow(c.d as u32) <= m && c.d_c <= m && c.depth <= m && params.norm_inf() <= m_f.exp()
}
