use serde::{Deserialize, Serialize};

use crate::fno::FnoConfig;

const OVERFLOW_LOG: f64 = 690.775_527_898_213_7; // ln(1e300)

/// A positive bound carried both directly and as a logarithm. Past 1e300 only the log
/// is meaningful and `value` is +inf.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogBound {
    pub value: f64,
    pub log: f64,
    pub overflow: bool,
}

impl LogBound {
    pub fn from_log(log: f64) -> Self {
        if log > OVERFLOW_LOG {
            LogBound { value: f64::INFINITY, log, overflow: true }
        } else {
            LogBound { value: log.exp(), log, overflow: false }
        }
    }

    pub fn from_value(value: f64) -> Self {
        Self::from_log(value.ln())
    }
}

/// Bounds of one hidden layer given only the architecture and B.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerBounds {
    /// ‖W v‖ <= d_c ‖W‖_inf ‖v‖
    pub w_bound: f64,
    /// ‖K v‖ <= d_c ‖P̂‖_inf ‖v‖
    pub k_bound: f64,
    /// ‖b‖ <= d_c^{1/2} (2κ)^{d/2} ‖b̂‖_inf
    pub bias_bound: f64,
    /// Lipschitz constant of v ↦ 𝓛_ℓ(v), 2 d_c B
    pub layer_bound: f64,
    /// (2 d_c B)^ℓ for ℓ = 1..=L
    pub composite: Vec<LogBound>,
}

fn half_box(config: &FnoConfig) -> f64 {
    (2.0 * config.kappa as f64).powf(config.d as f64 / 2.0)
}

pub fn layer_lipschitz_bounds(config: &FnoConfig) -> LayerBounds {
    let dc = config.d_c as f64;
    let b = config.bound;
    let layer = 2.0 * dc * b;
    LayerBounds {
        w_bound: dc * b,
        k_bound: dc * b,
        bias_bound: dc.sqrt() * half_box(config) * b,
        layer_bound: layer,
        composite: (1..=config.depth).map(|l| LogBound::from_log(l as f64 * layer.ln())).collect(),
    }
}

/// λ(u) = (L+2)(2 d_c B)^{L+2}(‖u‖ + (2κ)^{d/2}).
pub fn parameter_lipschitz(config: &FnoConfig, u_norm: f64) -> LogBound {
    let l = config.depth as f64;
    let log = (l + 2.0).ln() + (l + 2.0) * (2.0 * config.d_c as f64 * config.bound).ln() + (u_norm + half_box(config)).ln();
    LogBound::from_log(log)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCertificate {
    pub config: FnoConfig,
    /// bound M on ‖u‖ over the input set
    pub input_bound: f64,
    pub layer_bound: f64,
    /// hidden-state bounds M_0 (after lifting) .. M_L from the recursion
    /// M_ℓ <= C0 M_{ℓ-1} + C1
    pub hidden: Vec<LogBound>,
    /// (2 d_c B)^{ℓ+1}(M + (2κ)^{d/2}) per hidden state
    pub hidden_closed_form: Vec<LogBound>,
    /// (2 d_c B)^{L+2}(M + (2κ)^{d/2})
    pub output: LogBound,
    pub lambda: LogBound,
    /// filled in by sampling audits
    pub measured_quotient: Option<f64>,
}

pub fn lipschitz_certificate(config: &FnoConfig, input_bound: f64) -> LipschitzCertificate {
    let dc = config.d_c as f64;
    let b = config.bound;
    let c0 = 2.0 * dc * b;
    let c1 = dc.sqrt() * half_box(config) * b;
    let base = (input_bound + half_box(config)).ln();
    let mut hidden = Vec::with_capacity(config.depth + 1);
    let mut prev = LogBound::from_value(dc * b * input_bound.max(f64::MIN_POSITIVE));
    hidden.push(prev);
    for _ in 0..config.depth {
        // log(C0 e^a + C1) without overflow
        let a = c0.ln() + prev.log;
        let c = c1.ln();
        let hi = a.max(c);
        prev = LogBound::from_log(hi + ((a - hi).exp() + (c - hi).exp()).ln());
        hidden.push(prev);
    }
    LipschitzCertificate {
        config: config.clone(),
        input_bound,
        layer_bound: c0,
        hidden,
        hidden_closed_form: (0..=config.depth).map(|l| LogBound::from_log((l + 1) as f64 * c0.ln() + base)).collect(),
        output: LogBound::from_log((config.depth + 2) as f64 * c0.ln() + base),
        lambda: parameter_lipschitz(config, input_bound),
        measured_quotient: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_examples() {
        let c = FnoConfig::tiny(2, 1, 1, 8);
        assert_eq!(layer_lipschitz_bounds(&c).layer_bound, 4.0);
        let lam = parameter_lipschitz(&c, 1.0).value;
        assert!((lam - 3.0 * 64.0 * (1.0 + 2f64.sqrt())).abs() < 1e-9);
        let c = FnoConfig { bound: 2.0, ..FnoConfig::tiny(4, 1, 1, 8) };
        assert!((layer_lipschitz_bounds(&c).bias_bound - 4.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn overflow_switches_to_logs() {
        let c = FnoConfig { bound: 1e6, ..FnoConfig::tiny(64, 1, 60, 8) };
        let lam = parameter_lipschitz(&c, 1.0);
        assert!(lam.overflow && lam.value.is_infinite() && lam.log.is_finite());
    }

    #[test]
    fn recursion_sits_below_closed_form() {
        for depth in 1..6 {
            let c = FnoConfig { bound: 1.5, ..FnoConfig::tiny(3, 2, depth, 8) };
            let cert = lipschitz_certificate(&c, 2.0);
            for (r, f) in cert.hidden.iter().zip(&cert.hidden_closed_form) {
                assert!(r.log <= f.log + 1e-12);
            }
        }
    }
}
