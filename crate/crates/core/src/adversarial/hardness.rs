//! Operator-level hardness: fooling pairs in `C^k([0,1]^dim)` pushed through the
//! hypercube embedding, for several embedded dimensions, at growing sample counts.

use rand::Rng;
use serde::Serialize;

use super::embed::embed_functional;
use super::fooling::{fooling_witness, FoolingSpec};
use super::hypercube::build_trig_hypercube;
use crate::rng;
use crate::space::{Domain, Exponent};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct DimWitness {
    pub dim: usize,
    pub m: usize,
    pub j: f64,
    /// `max_{ℓ<=k} (c^{-1} M dim^{α+1})^ℓ`, the growth of the C^k norm under embedding
    pub embed_constant: f64,
    /// `|ι f - ι g|` at the peak of an unhit bump
    pub separation: f64,
    /// largest `|ι f - ι g|` over the sampled inputs
    pub sample_mismatch: f64,
    /// `separation / (2 embed_constant)`
    pub witness: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HardnessRow {
    pub n: usize,
    pub best_dim: usize,
    pub witness: f64,
    /// `R log(n)^{-(α+1)k}` with `R` calibrated on the first row
    pub floor: f64,
    pub pass: bool,
    pub per_dim: Vec<DimWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HardnessReport {
    pub s: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: f64,
    pub exponent: f64,
    pub calibration: f64,
    pub rows: Vec<HardnessRow>,
    pub pass: bool,
}

fn dim_witness(n: usize, dim: usize, s: usize, k: usize, d: usize, seed: u64) -> Result<DimWitness> {
    let system = build_trig_hypercube(dim, s, Exponent::Infinity, d)?;
    let mut rng = rng::stream(seed, "hardness", (n * 16 + dim) as u64);
    let samples: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
    let spec = FoolingSpec { d: dim, k, q: Exponent::Infinity, p: Exponent::Infinity, seed };
    let w = fooling_witness(&samples, &spec, Domain::Cube)?;
    let base = (dim as f64).powf(system.alpha) / system.c * system.m_bound * dim as f64;
    let embed_constant = (1..=k).map(|l| base.powi(l as i32)).fold(1.0, f64::max);
    let f = embed_functional(|y: &[f64]| w.eval_f(y), dim, &system)?;
    let g = embed_functional(|y: &[f64]| w.eval_g(y), dim, &system)?;
    let mut mismatch = 0.0f64;
    for y in &samples {
        let u = system.point(y)?;
        mismatch = mismatch.max((f.eval(&u)? - g.eval(&u)?).abs());
    }
    let free = *w.unhit().first().ok_or_else(|| Error::Range("every bump was hit".into()))?;
    let u = system.point(&w.family.peak(free))?;
    let separation = (f.eval(&u)? - g.eval(&u)?).abs();
    Ok(DimWitness {
        dim,
        m: w.family.m(),
        j: w.j,
        embed_constant,
        separation,
        sample_mismatch: mismatch,
        witness: separation / (2.0 * embed_constant),
    })
}

/// For each `n`, the best witness error over `dim = 1..=max_dim`, compared with
/// `R log(n)^{-(α+1)k}` where `R` makes the first row tight.
pub fn log_hardness(schedule: &[usize], s: usize, k: usize, d: usize, max_dim: usize, seed: u64) -> Result<HardnessReport> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) || schedule[0] < 2 {
        return Err(Error::Range("schedule must increase and start at n >= 2".into()));
    }
    if !(1..=4).contains(&max_dim) {
        return Err(Error::Range(format!("embedded dimension {max_dim} outside 1..=4")));
    }
    let alpha = s as f64 / d as f64;
    let exponent = (alpha + 1.0) * k as f64;
    let mut rows = Vec::with_capacity(schedule.len());
    let mut calibration = 0.0;
    for (i, &n) in schedule.iter().enumerate() {
        let per_dim: Vec<DimWitness> = (1..=max_dim).map(|dim| dim_witness(n, dim, s, k, d, seed)).collect::<Result<_>>()?;
        let best = per_dim.iter().max_by(|a, b| a.witness.total_cmp(&b.witness)).unwrap();
        let logn = (n as f64).ln();
        if i == 0 {
            calibration = best.witness * logn.powf(exponent);
        }
        let floor = calibration * logn.powf(-exponent);
        rows.push(HardnessRow {
            n,
            best_dim: best.dim,
            witness: best.witness,
            floor,
            pass: best.witness >= floor * (1.0 - 1e-12) && per_dim.iter().all(|w| w.sample_mismatch == 0.0),
            per_dim,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(HardnessReport { s, k, d, alpha, exponent, calibration, rows, pass })
}
