//! Fooling pairs: two unit-ball functions that agree on every sample yet sit far apart.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bump::{gamma_const, BumpFamily};
use crate::rng;
use crate::space::{lp_distance, norm, Domain, Exponent, GridFunction, NormSpec};
use crate::{Error, Result};

/// Smoothness class `U(W^{k,q})` (or `U(C^k)` for `q = ∞`) and error norm `L^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoolingSpec {
    pub d: usize,
    pub k: usize,
    pub q: Exponent,
    pub p: Exponent,
    pub seed: u64,
}

impl FoolingSpec {
    /// γ = d/(kp+d) for finite p, ½ otherwise.
    pub fn gamma(&self) -> f64 {
        match self.p {
            Exponent::Finite(p) => self.d as f64 / (self.k as f64 * p + self.d as f64),
            Exponent::Infinity => 0.5,
        }
    }

    pub fn smoothness(&self) -> NormSpec {
        match self.q {
            Exponent::Infinity => NormSpec::Ck { k: self.k },
            q => NormSpec::Wkq { k: self.k, q },
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Range("dimension must be positive".into()));
        }
        if self.k == 0 || self.k > 4 {
            return Err(Error::Range(format!("smoothness k = {} outside 1..=4", self.k)));
        }
        for e in [self.p, self.q] {
            if let Exponent::Finite(v) = e {
                if !(v >= 1.0 && v.is_finite()) {
                    return Err(Error::Range(format!("exponent {v} < 1")));
                }
            }
        }
        Ok(())
    }
}

/// Certificate fields written next to a fooling pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub d: usize,
    pub k: usize,
    pub q: Exponent,
    pub p: Exponent,
    pub gamma: f64,
    pub m: usize,
    pub bumps: usize,
    pub samples: usize,
    pub unhit: usize,
    /// Derivative constant used in the scale (`Γ(k)`, times `H` on the Gaussian domain).
    pub derivative_constant: f64,
    /// Empirical transport constant `H` (1 on the cube).
    pub transport_constant: f64,
    pub j_formula: f64,
    pub j: f64,
    /// `2Jγ^{d/p}` (`2J` for `p = ∞`).
    pub claimed_separation: f64,
    /// `2J (#unhit·γ^d / #bumps)^{1/p}`, which the construction guarantees.
    pub certified_separation: f64,
    pub measured_separation: f64,
    pub smoothness_f: f64,
    pub smoothness_g: f64,
    pub max_sample_mismatch: f64,
}

impl Certificate {
    pub fn unit_ball_margin(&self) -> f64 {
        1.0 - self.smoothness_f.max(self.smoothness_g)
    }

    pub fn separation_margin(&self) -> f64 {
        self.measured_separation - self.certified_separation
    }
}

/// Coefficients of a fooling pair over a bump family, without any grid.
#[derive(Clone, Debug)]
pub struct FoolingWitness {
    pub family: BumpFamily,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub hit: Vec<usize>,
    pub j: f64,
    /// `Γ(k)·H` as used in the scale formula.
    pub derivative_constant: f64,
    pub transport_constant: f64,
}

impl FoolingWitness {
    /// Only the bump whose closed cell holds `x` can be nonzero there.
    pub fn eval_f(&self, x: &[f64]) -> f64 {
        let l = self.family.locate(x);
        self.j * self.alpha[l] * self.family.eval(l, x)
    }

    pub fn eval_g(&self, x: &[f64]) -> f64 {
        let l = self.family.locate(x);
        self.j * self.beta[l] * self.family.eval(l, x)
    }

    pub fn unhit(&self) -> Vec<usize> {
        let mut seen = vec![false; self.family.count()];
        for &l in &self.hit {
            seen[l] = true;
        }
        (0..seen.len()).filter(|&j| !seen[j]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct FoolingPair {
    pub witness: FoolingWitness,
    pub f: GridFunction,
    pub g: GridFunction,
    pub certificate: Certificate,
}

/// Smallest `m` with `m^d >= 2 n`.
pub fn subdivisions_for(samples: usize, d: usize) -> usize {
    let target = 2 * samples.max(1);
    let mut m = 1usize;
    while m.pow(d as u32) < target {
        m += 1;
    }
    m
}

/// The scale `((k+1)^{1/q} T C d^{k/q} m^k)^{-1}` with `T = (1-γ)^{-k}` and derivative constant `C`.
pub fn scale_formula(spec: &FoolingSpec, gamma: f64, m: usize, constant: f64) -> f64 {
    let k = spec.k as f64;
    let t = (1.0 - gamma).powf(-k);
    let (count, dim) = match spec.q {
        Exponent::Infinity => (1.0, 1.0),
        Exponent::Finite(q) => ((k + 1.0).powf(1.0 / q), (spec.d as f64).powf(k / q)),
    };
    1.0 / (count * t * constant * dim * (m as f64).powf(k))
}

/// Build the coefficient part of a fooling pair. Samples are ambient points of `domain`.
pub fn fooling_witness(samples: &[Vec<f64>], spec: &FoolingSpec, domain: Domain) -> Result<FoolingWitness> {
    spec.validate()?;
    for y in samples {
        if y.len() != spec.d {
            return Err(Error::Shape(format!("sample of length {} in dimension {}", y.len(), spec.d)));
        }
        if domain == Domain::Cube && y.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Range(format!("sample {y:?} outside the unit cube")));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sample {y:?}")));
        }
    }
    let m = subdivisions_for(samples.len(), spec.d);
    let family = BumpFamily::unchecked(spec.d, m, spec.gamma(), domain)?;
    let h = match domain {
        Domain::Cube => 1.0,
        Domain::Gaussian => family.transport_constant(spec.k)?,
    };
    let constant = gamma_const(spec.k) * h;
    let j = scale_formula(spec, spec.gamma(), m, constant);
    let mut rng = rng::stream(spec.seed, "fooling", 0);
    let alpha: Vec<f64> = (0..family.count()).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let hit: Vec<usize> = samples.iter().map(|y| family.locate(y)).collect();
    let mut beta: Vec<f64> = alpha.iter().map(|a| -a).collect();
    for &l in &hit {
        beta[l] = alpha[l];
    }
    Ok(FoolingWitness { family, alpha, beta, hit, j, derivative_constant: constant, transport_constant: h })
}

/// Grid resolution used to materialize a pair: about 32 points per cell, at least 64.
pub fn default_resolution(m: usize) -> usize {
    (32 * m).next_power_of_two().max(64)
}

fn materialize(samples: &[Vec<f64>], spec: &FoolingSpec, domain: Domain, resolution: Option<usize>) -> Result<FoolingPair> {
    let mut w = fooling_witness(samples, spec, domain)?;
    let n = resolution.unwrap_or_else(|| default_resolution(w.family.m()));
    let unit_f = w.family.combination(&w.alpha, n)?;
    let unit_g = w.family.combination(&w.beta, n)?;
    let smooth = spec.smoothness();
    let raw = norm(&unit_f, &smooth)?.max(norm(&unit_g, &smooth)?);
    let j_formula = w.j;
    // the norm is homogeneous in J, so the shrink is a single rescale
    if w.j * raw > 1.0 {
        w.j = 1.0 / raw;
        while w.j * raw > 1.0 {
            w.j *= 1.0 - 1e-15;
        }
    }
    let f = unit_f.scale(w.j)?;
    let g = unit_g.scale(w.j)?;
    let gamma = spec.gamma();
    let d = spec.d as f64;
    let count = w.family.count();
    let unhit = w.unhit().len();
    let (claimed, certified) = match spec.p {
        Exponent::Infinity => (2.0 * w.j, if unhit > 0 { 2.0 * w.j } else { 0.0 }),
        Exponent::Finite(p) => (
            2.0 * w.j * gamma.powf(d / p),
            2.0 * w.j * (unhit as f64 * gamma.powf(d) / count as f64).powf(1.0 / p),
        ),
    };
    let mismatch = samples.iter().map(|y| (w.eval_f(y) - w.eval_g(y)).abs()).fold(0.0, f64::max);
    let certificate = Certificate {
        d: spec.d,
        k: spec.k,
        q: spec.q,
        p: spec.p,
        gamma,
        m: w.family.m(),
        bumps: count,
        samples: samples.len(),
        unhit,
        derivative_constant: w.derivative_constant,
        transport_constant: w.transport_constant,
        j_formula,
        j: w.j,
        claimed_separation: claimed,
        certified_separation: certified,
        measured_separation: lp_distance(&f, &g, &NormSpec::Lp { p: spec.p })?,
        smoothness_f: norm(&f, &smooth)?,
        smoothness_g: norm(&g, &smooth)?,
        max_sample_mismatch: mismatch,
    };
    Ok(FoolingPair { witness: w, f, g, certificate })
}

/// Fooling pair on the cube against samples in `[0,1]^d`.
pub fn fooling_pair(samples: &[Vec<f64>], spec: &FoolingSpec, resolution: Option<usize>) -> Result<FoolingPair> {
    materialize(samples, spec, Domain::Cube, resolution)
}

/// Fooling pair from transported bumps against samples in `R^d`, measured in `L^p_ρ`.
pub fn gaussian_fooling_pair(samples: &[Vec<f64>], spec: &FoolingSpec, resolution: Option<usize>) -> Result<FoolingPair> {
    materialize(samples, spec, Domain::Gaussian, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, k: usize, q: Exponent, p: Exponent) -> FoolingSpec {
        FoolingSpec { d, k, q, p, seed: 11 }
    }

    #[test]
    fn single_midpoint_sample_sup_case() {
        let s = spec(1, 1, Exponent::Infinity, Exponent::Infinity);
        let pair = fooling_pair(&[vec![0.5]], &s, None).unwrap();
        let c = &pair.certificate;
        assert_eq!(c.m, 2);
        assert_eq!(pair.witness.eval_f(&[0.5]), pair.witness.eval_g(&[0.5]));
        assert!((c.measured_separation - 2.0 * c.j).abs() < 1e-15);
        assert!(c.smoothness_f <= 1.0 + 1e-6);
    }

    #[test]
    fn samples_agree_exactly() {
        let s = spec(2, 2, Exponent::Finite(2.0), Exponent::Finite(1.0));
        let ys = vec![vec![0.1, 0.9], vec![0.5, 0.5], vec![0.33, 0.71], vec![1.0, 0.0]];
        let pair = fooling_pair(&ys, &s, Some(128)).unwrap();
        assert_eq!(pair.certificate.max_sample_mismatch, 0.0);
        assert!(pair.certificate.unhit * 2 >= pair.certificate.bumps);
        assert!(pair.certificate.separation_margin() >= -1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let s = spec(1, 1, Exponent::Infinity, Exponent::Finite(2.0));
        assert!(fooling_pair(&[vec![1.5]], &s, None).is_err());
        assert!(fooling_pair(&[vec![0.5]], &FoolingSpec { k: 5, ..s }, None).is_err());
    }

    #[test]
    fn subdivision_rule() {
        assert_eq!(subdivisions_for(1, 1), 2);
        assert_eq!(subdivisions_for(4, 2), 3);
        assert_eq!(subdivisions_for(8, 2), 4);
        assert_eq!(subdivisions_for(16, 1), 32);
    }
}
