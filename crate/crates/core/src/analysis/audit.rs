//! Sampling audits: every bound is paired with a sampler that must never exceed it.
//! Sups over the input set are replaced by maxima over declared probe sets, so each
//! measured value is a lower estimate of the true quantity.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::parameter_lipschitz;
use crate::fno::{apply_layer, bias_field, forward, forward_trace, project_params, spectral_conv, FnoConfig, FnoParams, Operator};
use crate::rng;
use crate::space::{l2, l2_distance, Domain, GridFunction};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// ‖Wv‖, ‖Kv‖, ‖b‖ bounds of one layer
    FnoHidden,
    /// Lipschitz constant 2 d_c B of a hidden layer in its input
    FnoHiddenLip,
    /// 3 d_c (2κ)^{d/2} max(1, ‖v‖) in the layer parameters
    FnoLayerLip,
    /// hidden-state growth and output bound
    FnoLayerBd,
    /// λ(u) in the full parameter vector
    FnoLip,
    /// 6 (sup‖Ψ-Ψ'‖ + sup‖𝒢-𝒢'‖) for the empirical risk
    RiskLip,
}

impl Lemma {
    pub const ALL: [Lemma; 6] =
        [Lemma::FnoHidden, Lemma::FnoHiddenLip, Lemma::FnoLayerLip, Lemma::FnoLayerBd, Lemma::FnoLip, Lemma::RiskLip];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub lemma: Lemma,
    pub part: String,
    pub probes: usize,
    /// largest measured/bound over the probes
    pub worst_ratio: f64,
    pub bound_at_worst: f64,
    pub measured_at_worst: f64,
    pub margin: f64,
    pub violations: usize,
    pub pass: bool,
}

/// One probe's (measured, bound) pair.
type Sample = (f64, f64);

fn record(lemma: Lemma, part: &str, samples: &[Sample], slack: f64) -> AuditRecord {
    let mut worst = (0.0, 0.0, 1.0);
    let mut violations = 0;
    for &(m, b) in samples {
        let r = if b > 0.0 { m / b } else if m > 0.0 { f64::INFINITY } else { 0.0 };
        if m > b * (1.0 + 1e-12) + slack {
            violations += 1;
        }
        if r > worst.0 {
            worst = (r, m, b);
        }
    }
    AuditRecord {
        lemma,
        part: part.into(),
        probes: samples.len(),
        worst_ratio: worst.0,
        bound_at_worst: worst.2,
        measured_at_worst: worst.1,
        margin: 1.0 - worst.0,
        violations,
        pass: violations == 0,
    }
}

fn random_state(config: &FnoConfig, channels: usize, rng: &mut ChaCha8Rng) -> Result<GridFunction> {
    let pts = config.points();
    let amp = 10f64.powf(rng.gen_range(-2.0..1.0));
    let smooth = rng.gen::<bool>();
    let mut values = Vec::with_capacity(channels * pts);
    for _ in 0..channels {
        if smooth {
            let modes: Vec<(usize, f64, f64)> =
                (0..4).map(|_| (rng.gen_range(0..config.kappa + 2), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.3))).collect();
            let n = config.resolution;
            for flat in 0..pts {
                // phase from the first axis only; enough to vary the spectrum
                let x = (flat / n.pow(config.d as u32 - 1)) as f64 / n as f64;
                values.push(amp * modes.iter().map(|(k, a, ph)| a * (std::f64::consts::TAU * *k as f64 * x + ph).cos()).sum::<f64>());
            }
        } else {
            values.extend((0..pts).map(|_| amp * rng.gen_range(-1.0..1.0)));
        }
    }
    GridFunction::new(config.d, config.resolution, channels, Domain::Cube, values)
}

/// Feasible parameters; some probes sit on the boundary ‖θ‖_inf = B.
fn random_params(config: &FnoConfig, rng: &mut ChaCha8Rng) -> Result<FnoParams> {
    let b = config.bound;
    if rng.gen_bool(0.3) {
        Ok(project_params(&FnoParams::random(config.clone(), 4.0 * b, rng)?, b))
    } else {
        FnoParams::random(config.clone(), b, rng)
    }
}

fn half_box(config: &FnoConfig) -> f64 {
    (2.0 * config.kappa as f64).powf(config.d as f64 / 2.0)
}

fn layer_sup(p: &FnoParams, l: usize, what: &str) -> f64 {
    let c = p.config();
    let lay = p.layout();
    let mut s = 0.0f64;
    match what {
        "W" => {
            for i in 0..c.d_c {
                for j in 0..c.d_c {
                    s = s.max(p.data()[lay.w(l, i, j)].abs());
                }
            }
        }
        "K" => {
            for f in 0..lay.n_free() {
                for i in 0..c.d_c {
                    for j in 0..c.d_c {
                        s = s.max(p.phat(l, f, i, j).norm());
                    }
                }
            }
        }
        _ => {
            for f in 0..lay.n_free() {
                for i in 0..c.d_c {
                    s = s.max(p.bhat(l, f, i).norm());
                }
            }
        }
    }
    s
}

fn apply_w(p: &FnoParams, l: usize, v: &GridFunction) -> Result<GridFunction> {
    let c = p.config();
    let chans: Vec<Vec<f64>> = (0..c.d_c)
        .map(|i| {
            let mut out = vec![0.0; v.points()];
            for j in 0..c.d_c {
                let w = p.w(l, i, j);
                out.iter_mut().zip(v.channel(j)).for_each(|(o, x)| *o += w * x);
            }
            out
        })
        .collect();
    GridFunction::from_channels(chans, c.d, c.resolution, Domain::Cube)
}

fn probe_rng(seed: u64, lemma: Lemma, i: usize) -> ChaCha8Rng {
    rng::stream(seed, &format!("audit-{lemma:?}"), i as u64)
}

fn run_probes<T: Send>(probes: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..probes).into_par_iter().map(f).collect()
}

fn audit_hidden(config: &FnoConfig, probes: usize, seed: u64) -> Result<Vec<AuditRecord>> {
    let dc = config.d_c as f64;
    let rows = run_probes(probes, |i| {
        let mut rng = probe_rng(seed, Lemma::FnoHidden, i);
        let p = random_params(config, &mut rng)?;
        let l = rng.gen_range(0..config.depth);
        let v = random_state(config, config.d_c, &mut rng)?;
        let nv = l2(&v);
        let w = (l2(&apply_w(&p, l, &v)?), dc * layer_sup(&p, l, "W") * nv);
        let k = (l2(&spectral_conv(&p, l, &v, false)?), dc * layer_sup(&p, l, "K") * nv);
        let b = (l2(&bias_field(&p, l)?), dc.sqrt() * half_box(config) * layer_sup(&p, l, "b"));
        Ok([w, k, b])
    })?;
    Ok(["W", "K", "bias"]
        .iter()
        .enumerate()
        .map(|(j, part)| record(Lemma::FnoHidden, part, &rows.iter().map(|r| r[j]).collect::<Vec<_>>(), 0.0))
        .collect())
}

fn audit_hidden_lip(config: &FnoConfig, probes: usize, seed: u64) -> Result<Vec<AuditRecord>> {
    let lip = 2.0 * config.d_c as f64 * config.bound;
    let rows = run_probes(probes, |i| {
        let mut rng = probe_rng(seed, Lemma::FnoHiddenLip, i);
        let p = random_params(config, &mut rng)?;
        let l = rng.gen_range(0..config.depth);
        let v = random_state(config, config.d_c, &mut rng)?;
        let dv = random_state(config, config.d_c, &mut rng)?.scale(10f64.powf(rng.gen_range(-3.0..0.0)))?;
        let w = v.add(&dv)?;
        let meas = l2_distance(&apply_layer(&p, l, &v)?, &apply_layer(&p, l, &w)?)?;
        Ok((meas, lip * l2(&dv)))
    })?;
    Ok(vec![record(Lemma::FnoHiddenLip, "input", &rows, 0.0)])
}

fn perturb_layer(p: &FnoParams, layer: usize, scale: f64, rng: &mut ChaCha8Rng) -> Result<FnoParams> {
    let other = FnoParams::random(p.config().clone(), p.config().bound, rng)?;
    let mut q = p.clone();
    let lay = p.layout();
    let c = p.config();
    // copy layer slots of a fresh draw, blended toward p
    let mut idx = Vec::new();
    for i in 0..c.d_c {
        for j in 0..c.d_c {
            idx.push(lay.w(layer, i, j));
            for f in 0..lay.n_free() {
                idx.push(lay.phat_re(layer, f, i, j));
                if f > 0 {
                    idx.push(lay.phat_im(layer, f, i, j));
                }
            }
        }
        for f in 0..lay.n_free() {
            idx.push(lay.bhat_re(layer, f, i));
            if f > 0 {
                idx.push(lay.bhat_im(layer, f, i));
            }
        }
    }
    for k in idx {
        q.data_mut()[k] = p.data()[k] + scale * (other.data()[k] - p.data()[k]);
    }
    Ok(project_params(&q, c.bound))
}

fn audit_layer_lip(config: &FnoConfig, probes: usize, seed: u64) -> Result<Vec<AuditRecord>> {
    let coef = 3.0 * config.d_c as f64 * half_box(config);
    let rows = run_probes(probes, |i| {
        let mut rng = probe_rng(seed, Lemma::FnoLayerLip, i);
        let p = random_params(config, &mut rng)?;
        let l = rng.gen_range(0..config.depth);
        let q = perturb_layer(&p, l, 10f64.powf(rng.gen_range(-3.0..0.0)), &mut rng)?;
        let v = random_state(config, config.d_c, &mut rng)?;
        let meas = l2_distance(&apply_layer(&p, l, &v)?, &apply_layer(&q, l, &v)?)?;
        Ok((meas, coef * l2(&v).max(1.0) * p.distance_inf(&q)?))
    })?;
    Ok(vec![record(Lemma::FnoLayerLip, "parameters", &rows, 0.0)])
}

fn audit_layer_bd(config: &FnoConfig, probes: usize, seed: u64) -> Result<Vec<AuditRecord>> {
    let dc = config.d_c as f64;
    let c0 = 2.0 * dc * config.bound;
    let c1 = dc.sqrt() * half_box(config) * config.bound;
    let rows = run_probes(probes, |i| {
        let mut rng = probe_rng(seed, Lemma::FnoLayerBd, i);
        let p = random_params(config, &mut rng)?;
        let u = random_state(config, config.d_in, &mut rng)?;
        let t = forward_trace(&p, &u)?;
        let base = l2(&u) + half_box(config);
        let mut closed = (0.0, 1.0);
        let mut recur = (0.0, 1.0);
        for (l, h) in t.hidden.iter().enumerate() {
            let s = (l2(h), c0.powi(l as i32 + 1) * base);
            if s.0 / s.1 > closed.0 / closed.1 {
                closed = s;
            }
            if l > 0 {
                let r = (l2(h), c0 * l2(&t.hidden[l - 1]) + c1);
                if r.0 / r.1 > recur.0 / recur.1 {
                    recur = r;
                }
            }
        }
        let out = (l2(&t.output), c0.powi(config.depth as i32 + 2) * base);
        Ok([closed, recur, out])
    })?;
    Ok(["hidden", "recursion", "output"]
        .iter()
        .enumerate()
        .map(|(j, part)| record(Lemma::FnoLayerBd, part, &rows.iter().map(|r| r[j]).collect::<Vec<_>>(), 0.0))
        .collect())
}

fn audit_fno_lip(config: &FnoConfig, probes: usize, seed: u64) -> Result<Vec<AuditRecord>> {
    let rows = run_probes(probes, |i| {
        let mut rng = probe_rng(seed, Lemma::FnoLip, i);
        let p = random_params(config, &mut rng)?;
        let other = random_params(config, &mut rng)?;
        let t = 10f64.powf(rng.gen_range(-3.0..0.0));
        let blended: Vec<f64> = p.data().iter().zip(other.data()).map(|(a, b)| a + t * (b - a)).collect();
        let q = project_params(&FnoParams::from_vec(config.clone(), blended)?, config.bound);
        let u = random_state(config, config.d_in, &mut rng)?;
        let meas = l2_distance(&forward(&p, &u)?, &forward(&q, &u)?)?;
        let lam = parameter_lipschitz(config, l2(&u));
        Ok((meas, lam.value * p.distance_inf(&q)?))
    })?;
    Ok(vec![record(Lemma::FnoLip, "parameters", &rows, 0.0)])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskLipschitzReport {
    pub risk: f64,
    pub risk_other: f64,
    pub lhs: f64,
    /// sup-distances over the dataset
    pub dist_psi: f64,
    pub dist_g: f64,
    /// sup-distances over dataset plus the denser probe set
    pub dist_psi_dense: f64,
    pub dist_g_dense: f64,
    pub rhs: f64,
    pub pass: bool,
}

fn outputs(op: &dyn Operator, inputs: &[GridFunction]) -> Result<Vec<GridFunction>> {
    inputs.par_iter().map(|u| op.apply(u)).collect()
}

fn risk(a: &[GridFunction], b: &[GridFunction]) -> Result<f64> {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = l2_distance(x, y)?;
        s += d * d;
    }
    Ok(s / a.len() as f64)
}

fn sup_dist(a: &[GridFunction], b: &[GridFunction]) -> Result<f64> {
    a.iter().zip(b).map(|(x, y)| l2_distance(x, y)).try_fold(0.0f64, |m, d| Ok(m.max(d?)))
}

/// |𝓛̂(Ψ;𝒢) - 𝓛̂(Ψ';𝒢')| <= 6(‖Ψ-Ψ'‖ + ‖𝒢-𝒢'‖) with sup-distances over the dataset.
/// Requires ‖Ψ(u)‖, ‖Ψ'(u)‖ <= 2 and ‖𝒢(u)‖, ‖𝒢'(u)‖ <= 1 on every input used.
pub fn audit_risk_lipschitz(
    psi: &dyn Operator,
    psi2: &dyn Operator,
    g: &dyn Operator,
    g2: &dyn Operator,
    dataset: &[GridFunction],
    probes: &[GridFunction],
) -> Result<RiskLipschitzReport> {
    if dataset.is_empty() {
        return Err(Error::Domain("empty dataset".into()));
    }
    let all: Vec<GridFunction> = dataset.iter().chain(probes).cloned().collect();
    let (p1, p2, g1, gg) = (outputs(psi, &all)?, outputs(psi2, &all)?, outputs(g, &all)?, outputs(g2, &all)?);
    for (set, cap, name) in [(&p1, 2.0, "Ψ"), (&p2, 2.0, "Ψ'"), (&g1, 1.0, "𝒢"), (&gg, 1.0, "𝒢'")] {
        let worst = set.iter().map(l2).fold(0.0, f64::max);
        if worst > cap * (1.0 + 1e-12) {
            return Err(Error::Range(format!("‖{name}(u)‖ = {worst} exceeds {cap}")));
        }
    }
    let n = dataset.len();
    let r1 = risk(&p1[..n], &g1[..n])?;
    let r2 = risk(&p2[..n], &gg[..n])?;
    let dist_psi = sup_dist(&p1[..n], &p2[..n])?;
    let dist_g = sup_dist(&g1[..n], &gg[..n])?;
    let rhs = 6.0 * (dist_psi + dist_g);
    let lhs = (r1 - r2).abs();
    Ok(RiskLipschitzReport {
        risk: r1,
        risk_other: r2,
        lhs,
        dist_psi,
        dist_g,
        dist_psi_dense: sup_dist(&p1, &p2)?,
        dist_g_dense: sup_dist(&g1, &gg)?,
        rhs,
        pass: lhs <= rhs + 1e-9,
    })
}

/// Rescale the projection of a network so its largest output norm over `inputs` is `cap`.
fn normalized(p: FnoParams, inputs: &[GridFunction], cap: f64) -> Result<FnoParams> {
    let worst = forward_batchless(&p, inputs)?;
    if worst == 0.0 {
        return Ok(p);
    }
    let mut q = p;
    let lay = q.layout();
    let c = q.config().clone();
    let s = cap / worst;
    for o in 0..c.d_out {
        for i in 0..c.d_c {
            q.data_mut()[lay.proj(o, i)] *= s;
        }
    }
    Ok(q)
}

fn forward_batchless(p: &FnoParams, inputs: &[GridFunction]) -> Result<f64> {
    inputs.iter().map(|u| forward(p, u).map(|y| l2(&y))).try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

fn audit_risk_lip(config: &FnoConfig, probes: usize, seed: u64) -> Result<Vec<AuditRecord>> {
    let rows = run_probes(probes, |i| {
        let mut rng = probe_rng(seed, Lemma::RiskLip, i);
        let n = rng.gen_range(1..6);
        let dataset: Vec<GridFunction> = (0..n).map(|_| random_state(config, config.d_in, &mut rng)).collect::<Result<_>>()?;
        let dense: Vec<GridFunction> = (0..10 * n).map(|_| random_state(config, config.d_in, &mut rng)).collect::<Result<_>>()?;
        let all: Vec<GridFunction> = dataset.iter().chain(&dense).cloned().collect();
        let mut nets = Vec::with_capacity(4);
        for cap in [2.0, 2.0, 1.0, 1.0] {
            let p = random_params(config, &mut rng)?;
            nets.push(normalized(p, &all, cap * rng.gen_range(0.2..1.0))?);
        }
        let r = audit_risk_lipschitz(&nets[0], &nets[1], &nets[2], &nets[3], &dataset, &dense)?;
        Ok((r.lhs, r.rhs))
    })?;
    Ok(vec![record(Lemma::RiskLip, "empirical-risk", &rows, 1e-9)])
}

/// Run the samplers of the requested lemmas, `probes` draws each, at a fixed architecture.
pub fn audit_lemmas(config: &FnoConfig, which: &[Lemma], probes: usize, seed: u64) -> Result<Vec<AuditRecord>> {
    config.validate()?;
    let mut out = Vec::new();
    for lemma in which {
        out.extend(match lemma {
            Lemma::FnoHidden => audit_hidden(config, probes, seed)?,
            Lemma::FnoHiddenLip => audit_hidden_lip(config, probes, seed)?,
            Lemma::FnoLayerLip => audit_layer_lip(config, probes, seed)?,
            Lemma::FnoLayerBd => audit_layer_bd(config, probes, seed)?,
            Lemma::FnoLip => audit_fno_lip(config, probes, seed)?,
            Lemma::RiskLip => audit_risk_lip(config, probes, seed)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samplers_stay_under_bounds() {
        let mut c = FnoConfig::tiny(2, 2, 2, 16);
        c.bound = 1.5;
        let recs = audit_lemmas(&c, &Lemma::ALL, 24, 3).unwrap();
        assert_eq!(recs.len(), 10);
        for r in &recs {
            assert!(r.pass, "{r:?}");
            assert!(r.worst_ratio > 0.0, "{r:?}");
        }
    }
}
