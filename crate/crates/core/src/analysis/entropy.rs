use serde::{Deserialize, Serialize};

use super::bounds::parameter_lipschitz;
use crate::fno::{param_count, Activation, FnoConfig};
use crate::{Error, Result};

/// Fixed parts of the FNO classes whose entropy is counted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingPolicy {
    pub d: usize,
    pub d_in: usize,
    pub d_out: usize,
    /// M = max ‖u‖ over the input set
    pub input_bound: f64,
    /// replaces B = e^m by min(e^m, cap) when set
    pub b_cap: Option<f64>,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        SamplingPolicy { d: 1, d_in: 1, d_out: 1, input_bound: 1.0, b_cap: None }
    }
}

/// Set whose covering number is bounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoverSet {
    Single { config: FnoConfig },
    SigmaM { m: usize },
}

/// Largest κ with κ^d <= m.
pub fn sigma_m_kappa(m: usize, d: usize) -> usize {
    let mut k = 1;
    while (k + 1usize).pow(d as u32) <= m {
        k += 1;
    }
    k
}

/// Largest architecture of depth `depth` admitted by Σ_m; every smaller one embeds in it
/// by zero padding.
pub fn sigma_m_config(policy: &SamplingPolicy, m: usize, depth: usize) -> FnoConfig {
    let kappa = sigma_m_kappa(m, policy.d);
    let bound = match policy.b_cap {
        Some(cap) => (m as f64).exp().min(cap).max(1.0),
        None => (m as f64).exp(),
    };
    FnoConfig {
        d: policy.d,
        d_in: policy.d_in,
        d_out: policy.d_out,
        d_c: m.max(policy.d_in).max(policy.d_out),
        kappa,
        depth,
        bound,
        resolution: (2 * kappa).next_power_of_two().max(2),
        activation: Activation::SmoothGate,
    }
}

/// log of (2B/ε)^{d_θ}, the sup-norm covering of [-B, B]^{d_θ} (at least one ball).
pub fn cube_covering_log(d_theta: u64, b: f64, eps: f64) -> f64 {
    d_theta as f64 * (2.0 * b / eps).ln().max(0.0)
}

fn single_log(config: &FnoConfig, eps: f64, input_bound: f64, count: f64) -> f64 {
    let lam = parameter_lipschitz(config, input_bound).log;
    count * ((2.0 * config.bound).ln() + lam - eps.ln()).max(0.0)
}

/// Exact parameter count in floating point; the integer count overflows for large m.
fn count_f64(c: &FnoConfig) -> f64 {
    let dc = c.d_c as f64;
    let r = (2.0 * c.kappa as f64 - 1.0).powi(c.d as i32);
    dc * c.d_in as f64 + c.depth as f64 * (dc * dc + dc * dc * r + dc * r) + c.d_out as f64 * dc
}

fn logsumexp(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi + xs.iter().map(|x| (x - hi).exp()).sum::<f64>().ln()
}

/// log 𝒩(set, ε) in C(𝒦; L²): exact parameter count times log(2B λ(M)/ε) for one
/// architecture; a union over the depth classes for Σ_m.
pub fn covering_number_log(set: &CoverSet, eps: f64, policy: &SamplingPolicy) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("covering scale {eps} must be positive")));
    }
    match set {
        CoverSet::Single { config } => {
            config.validate()?;
            Ok(single_log(config, eps, policy.input_bound, count_f64(config)))
        }
        CoverSet::SigmaM { m } => {
            if *m == 0 {
                return Err(Error::Domain("m must be positive".into()));
            }
            let mut c = sigma_m_config(policy, *m, 1);
            let parts: Vec<f64> = (1..=*m)
                .map(|l| {
                    c.depth = l;
                    single_log(&c, eps, policy.input_bound, count_f64(&c))
                })
                .collect();
            Ok(logsumexp(&parts))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub m: usize,
    pub eps: f64,
    /// exact count of the deepest admissible architecture
    pub d_theta: u64,
    /// d_θ log(2Bλ(M)/ε) for that architecture
    pub cube_exponent: f64,
    /// same with d_θ replaced by 5(2κ)^d L d_c²
    pub paper_shaped: f64,
    pub sigma_m_log: f64,
    /// ⌈ε^{-1} log(2𝒩(Σ_m, ε)²)⌉
    pub n: u64,
}

pub fn entropy_report(m: usize, eps: f64, policy: &SamplingPolicy) -> Result<EntropyReport> {
    let top = sigma_m_config(policy, m, m);
    let pc = param_count(&top);
    let sigma_m_log = covering_number_log(&CoverSet::SigmaM { m }, eps, policy)?;
    Ok(EntropyReport {
        m,
        eps,
        d_theta: pc.exact,
        cube_exponent: single_log(&top, eps, policy.input_bound, count_f64(&top)),
        paper_shaped: single_log(&top, eps, policy.input_bound, pc.paper_bound as f64),
        sigma_m_log,
        n: samples_needed(sigma_m_log, eps, 0.5),
    })
}

fn samples_needed(log_cover: f64, eps: f64, delta: f64) -> u64 {
    ((2.0 * log_cover - delta.ln()) / eps - 1e-9).ceil().max(1.0) as u64
}

/// m = ⌈(2/ε)^{1/γ}⌉, guarded against rounding just above an integer.
pub fn class_index(eps: f64, gamma: f64) -> usize {
    ((2.0 / eps).powf(1.0 / gamma) - 1e-12).ceil().max(1.0) as usize
}

/// Exponent 1/(2(1 + 8/γ)) of the upper rate; 1/2 in the limit γ → ∞.
pub fn predicted_exponent(gamma: f64) -> f64 {
    if gamma.is_infinite() {
        0.5
    } else {
        1.0 / (2.0 * (1.0 + 8.0 / gamma))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSize {
    pub eps: f64,
    pub gamma: f64,
    pub m: usize,
    pub n: u64,
    pub log_covering: f64,
    /// squared-error prediction 145ε
    pub risk_prediction: f64,
    pub exponent: f64,
}

pub fn sample_size(eps: f64, gamma: f64, policy: &SamplingPolicy) -> Result<SampleSize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Range(format!("ε = {eps} outside (0, 1]")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Range(format!("γ = {gamma} must be positive")));
    }
    let m = class_index(eps, gamma);
    let log_covering = covering_number_log(&CoverSet::SigmaM { m }, eps, policy)?;
    Ok(SampleSize {
        eps,
        gamma,
        m,
        n: samples_needed(log_covering, eps, 0.5),
        log_covering,
        risk_prediction: 145.0 * eps,
        exponent: predicted_exponent(gamma),
    })
}

/// Smallest ε (searched on [1e-6, 1e6], log-bisection) whose requirement
/// n >= ε^{-1} log(δ^{-1} 𝒩(Σ_m, ε)²), m = ⌈(2/ε)^{1/γ}⌉, is met by `n`. Beyond ε = 1 the
/// formula is continued as written; callers flag that regime.
pub fn epsilon_for(n: u64, gamma: f64, delta: f64, policy: &SamplingPolicy) -> Result<f64> {
    if n == 0 || !(gamma > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Range("need n >= 1, γ > 0, δ in (0,1)".into()));
    }
    let need = |eps: f64| -> Result<u64> {
        let m = class_index(eps, gamma);
        Ok(samples_needed(covering_number_log(&CoverSet::SigmaM { m }, eps, policy)?, eps, delta))
    };
    // bracket by doubling from ε = 1; the requirement explodes as ε shrinks, so the
    // bracket stays where m is small
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    if need(1.0)? <= n {
        while need(lo)? <= n {
            hi = lo;
            lo /= 2.0;
            if lo < 1e-6 {
                return Ok(hi);
            }
        }
    } else {
        while need(hi)? > n {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::Range(format!("no ε <= 1e6 is certified by n = {n}")));
            }
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if need(mid)? <= n {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo < 1.0 + 1e-12 {
            break;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_examples() {
        let p = SamplingPolicy::default();
        assert_eq!(sample_size(1.0, 2.0, &p).unwrap().m, 2);
        assert_eq!(predicted_exponent(f64::INFINITY), 0.5);
        assert!((predicted_exponent(1e12) - 0.5).abs() < 1e-10);
        assert!(cube_covering_log(2, 1.0, 0.5) <= 2.0 * 4f64.ln() + 1e-15);
    }

    #[test]
    fn halving_adds_d_theta_log_two() {
        let c = FnoConfig::tiny(2, 2, 1, 8);
        let p = SamplingPolicy::default();
        let a = covering_number_log(&CoverSet::Single { config: c.clone() }, 0.1, &p).unwrap();
        let b = covering_number_log(&CoverSet::Single { config: c.clone() }, 0.05, &p).unwrap();
        let dt = param_count(&c).exact as f64;
        assert!((b - a - dt * 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn epsilon_inverts_sample_size() {
        let p = SamplingPolicy { b_cap: Some(10.0), ..Default::default() };
        for n in [50u64, 500, 5000, 50_000] {
            let eps = epsilon_for(n, 4.0, 0.5, &p).unwrap();
            if eps <= 1.0 {
                assert!(sample_size(eps, 4.0, &p).unwrap().n <= n);
            }
        }
    }
}
