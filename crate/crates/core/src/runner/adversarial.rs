use rand::Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{to_value, CheckRecord, JobSpec, Outcome, SeriesPoint};
use crate::adversarial::bump::{certify, BumpFamily};
use crate::adversarial::decoder::{decoder_trial, Decoder, NearestSample, RadialBasis};
use crate::adversarial::embed::embed_functional;
use crate::adversarial::fooling::{fooling_pair, gaussian_fooling_pair, FoolingSpec};
use crate::adversarial::hypercube::build_trig_hypercube;
use crate::adversarial::transport::{pushforward_ks, xi_inv};
use crate::erm::{fno_decoder, MeasureSpec, TrainConfig};
use crate::rng;
use crate::space::{norm, Domain, Exponent, NormSpec};
use crate::Result;

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BumpParams {
    ds: Vec<usize>,
    ms: Vec<usize>,
    k_max: usize,
    p: f64,
    gamma: f64,
    resolution: Option<usize>,
}

impl Default for BumpParams {
    fn default() -> Self {
        BumpParams { ds: vec![1, 2], ms: vec![2, 3, 4], k_max: 3, p: 2.0, gamma: 0.5, resolution: None }
    }
}

pub(crate) fn bump_verify(job: &JobSpec) -> Result<Outcome> {
    let bp: BumpParams = job.typed()?;
    let mut out = Outcome::default();
    let mut certs = Vec::new();
    for &d in &bp.ds {
        for &m in &bp.ms {
            let family = BumpFamily::new(d, m, bp.gamma, Domain::Cube)?;
            let n = bp.resolution.unwrap_or(if d == 1 { (64 * m).next_power_of_two() } else { (32 * m).next_power_of_two() });
            for k in 1..=bp.k_max {
                let c = certify(&family, k, bp.p, n)?;
                let tag = format!("d={d} m={m} k={k}");
                out.checks.push(CheckRecord::at_most(format!("{tag}: overlapping support nodes"), c.overlaps as f64, 0.0, 0.0));
                out.checks.push(CheckRecord::at_least(format!("{tag}: min ‖φ_j‖_p^p vs γ^d/n"), c.min_mass, c.mass_floor, 1e-3));
                out.checks.push(CheckRecord::at_most(format!("{tag}: sup|D^ν φ_j| / Γ(k)m^|ν|(1-γ)^-k"), c.derivative_ratio, 1.0, 0.0));
                certs.push(c);
            }
        }
    }
    out.data = json!({ "certificates": to_value(&certs)?, "beta": crate::adversarial::bump::beta().to_vec() });
    Ok(out)
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FoolingParams {
    trials: usize,
    max_samples: usize,
    resolution: usize,
    p: Exponent,
    q: Exponent,
    decoder_steps: usize,
    slope_ms_1d: Vec<usize>,
    slope_ms_2d: Vec<usize>,
    slope_ks: Vec<usize>,
    slope_tolerance: f64,
}

impl Default for FoolingParams {
    fn default() -> Self {
        FoolingParams {
            trials: 50,
            max_samples: 5,
            resolution: 64,
            p: Exponent::Finite(2.0),
            q: Exponent::Finite(2.0),
            decoder_steps: 300,
            slope_ms_1d: vec![2, 4, 6],
            slope_ms_2d: vec![2, 3, 4, 5, 6],
            slope_ks: vec![1, 2],
            slope_tolerance: 0.15,
        }
    }
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub(crate) fn fooling(job: &JobSpec) -> Result<Outcome> {
    let fp: FoolingParams = job.typed()?;
    let seed = job.need_seed()?;
    let mut out = Outcome::default();
    let measure = MeasureSpec { d: 1, resolution: 64, alpha: 1.5, j_max: 8, seed };
    let tc = TrainConfig {
        m: 4,
        steps: fp.decoder_steps.max(1),
        learning_rate: 0.02,
        omega: 0.0,
        restarts: 1,
        seed,
        n: 32,
        mc_size: 2,
        b_cap: 10.0,
        target_risk: 0.0,
        init_scale: 0.5,
        architecture: None,
    };
    let zoo: Vec<Box<dyn Decoder>> =
        vec![Box::new(NearestSample), Box::new(RadialBasis { width: None }), Box::new(fno_decoder(&measure, &tc)?)];
    let mut r = rng::stream(seed, "fooling", 0);
    let mut worst_gap = vec![f64::INFINITY; zoo.len()];
    let (mut ball, mut sep_margin, mut mismatch) = (0.0f64, f64::INFINITY, 0.0f64);
    for trial in 0..fp.trials {
        let n = r.gen_range(1..=fp.max_samples.max(1));
        let samples: Vec<Vec<f64>> = (0..n).map(|_| vec![r.gen::<f64>()]).collect();
        let spec = FoolingSpec { d: 1, k: 1 + trial % 2, q: fp.q, p: fp.p, seed: rng::derive(seed, &format!("trial-{trial}")) };
        let pair = fooling_pair(&samples, &spec, Some(fp.resolution))?;
        let c = &pair.certificate;
        ball = ball.max(c.smoothness_f.max(c.smoothness_g));
        sep_margin = sep_margin.min(c.separation_margin());
        mismatch = mismatch.max(c.max_sample_mismatch);
        for (slot, dec) in worst_gap.iter_mut().zip(&zoo) {
            let t = decoder_trial(&pair, &samples, dec.as_ref())?;
            *slot = slot.min(t.err_f.max(t.err_g) - t.lower_bound);
        }
    }
    for (gap, dec) in worst_gap.iter().zip(&zoo) {
        out.checks.push(CheckRecord::at_least(format!("decoder {}: min over trials of max(err f, err g) - ½‖f-g‖", dec.name()), *gap, 0.0, 1e-9));
    }
    out.checks.push(CheckRecord::at_most("largest smoothness norm of f, g", ball, 1.0, 1e-6));
    out.checks.push(CheckRecord::at_least("measured minus certified separation", sep_margin, 0.0, 1e-6));
    out.checks.push(CheckRecord::at_most("largest |f(y) - g(y)| at samples", mismatch, 0.0, 0.0));
    let mut slopes = Vec::new();
    for (d, ms) in [(1usize, &fp.slope_ms_1d), (2, &fp.slope_ms_2d)] {
        if ms.len() < 2 {
            continue;
        }
        for &k in &fp.slope_ks {
            let (mut xs, mut ys, mut measured) = (Vec::new(), Vec::new(), Vec::new());
            let label = format!("d={d} k={k}");
            let mut sr = rng::stream(seed, "fooling-slope", (d * 10 + k) as u64);
            for &m in ms.iter() {
                let n = ((m - 1).pow(d as u32) + 2) / 2;
                let samples: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| sr.gen::<f64>()).collect()).collect();
                let spec = FoolingSpec { d, k, q: Exponent::Finite(2.0), p: Exponent::Infinity, seed: m as u64 };
                let pair = fooling_pair(&samples, &spec, Some(if d == 1 { 256 } else { 128 }))?;
                let c = &pair.certificate;
                xs.push((c.bumps as f64).ln());
                ys.push(c.certified_separation.ln());
                measured.push(c.measured_separation.ln());
                out.series.push(SeriesPoint {
                    series: label.clone(),
                    key: "n".into(),
                    x: c.bumps as f64 / 2.0,
                    measured: c.measured_separation,
                    bound: c.certified_separation,
                });
            }
            let s = ls_slope(&xs, &ys);
            let target = -(k as f64) / d as f64;
            out.checks.push(CheckRecord::at_most(format!("{label}: |slope - (-k/d)| / (k/d)"), (s - target).abs() / target.abs(), fp.slope_tolerance, 0.0));
            slopes.push(json!({ "d": d, "k": k, "slope": s, "measured_slope": ls_slope(&xs, &measured), "target": target }));
        }
    }
    out.data = json!({ "worst_gap": worst_gap, "slopes": slopes });
    Ok(out)
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GaussianParams {
    draws: usize,
    ks_tolerance: f64,
    norm_tolerance: f64,
    pair_samples: usize,
}

impl Default for GaussianParams {
    fn default() -> Self {
        GaussianParams { draws: 10_000, ks_tolerance: 0.02, norm_tolerance: 1e-3, pair_samples: 3 }
    }
}

/// ∫|φ̃_j|^p ρ with one jittered point per stratum `ξ^{-1}([i, i+1)/S)` per axis.
fn stratified(family: &BumpFamily, j: usize, p: f64, strata: usize, seed: u64) -> f64 {
    let d = family.d();
    let mut r = rng::stream(seed, "stratified", j as u64);
    let cells = strata.pow(d as u32);
    let mut sum = 0.0;
    let mut x = vec![0.0; d];
    for c in 0..cells {
        let mut rem = c;
        for a in (0..d).rev() {
            let i = rem % strata;
            rem /= strata;
            x[a] = xi_inv(((i as f64 + r.gen::<f64>()) / strata as f64).clamp(1e-300, 1.0 - 1e-16));
        }
        sum += family.eval(j, &x).abs().powf(p);
    }
    sum / cells as f64
}

pub(crate) fn gaussian_fooling(job: &JobSpec) -> Result<Outcome> {
    let gp: GaussianParams = job.typed()?;
    let seed = job.need_seed()?;
    let mut out = Outcome::default();
    let ks = pushforward_ks(gp.draws, seed);
    out.checks.push(CheckRecord::at_most(format!("KS(ξ(x), U(0,1)) over {} draws", gp.draws), ks, gp.ks_tolerance, 0.0));
    let mut norms = Vec::new();
    for (d, m, strata, grid) in [(1usize, 2usize, 4096usize, 4096usize), (1, 3, 4096, 4096), (2, 2, 256, 256)] {
        let cube = BumpFamily::new(d, m, 0.5, Domain::Cube)?;
        let gauss = BumpFamily::new(d, m, 0.5, Domain::Gaussian)?;
        for p in [1.0, 2.0] {
            let spec = NormSpec::lp(p);
            for j in [0, cube.count() - 1] {
                let c = norm(&cube.grid(j, grid)?, &spec)?;
                let g = norm(&gauss.grid(j, grid)?, &spec)?;
                let s = stratified(&gauss, j, p, strata, seed).powf(1.0 / p);
                let tag = format!("d={d} m={m} p={p} j={j}");
                out.checks.push(CheckRecord::at_most(format!("{tag}: |‖φ̃‖_ρ (transport grid) - ‖φ‖| / ‖φ‖"), (g - c).abs() / c, gp.norm_tolerance, 0.0));
                out.checks.push(CheckRecord::at_most(format!("{tag}: |‖φ̃‖_ρ (stratified) - ‖φ‖| / ‖φ‖"), (s - c).abs() / c, gp.norm_tolerance, 0.0));
                norms.push(json!({ "d": d, "m": m, "p": p, "j": j, "cube": c, "transport": g, "stratified": s }));
            }
        }
    }
    let mut r = rng::stream(seed, "gaussian-fooling", 0);
    let samples: Vec<Vec<f64>> = (0..gp.pair_samples).map(|_| vec![r.sample(rand_distr::StandardNormal)]).collect();
    let spec = FoolingSpec { d: 1, k: 1, q: Exponent::Finite(2.0), p: Exponent::Finite(2.0), seed };
    let pair = gaussian_fooling_pair(&samples, &spec, Some(256))?;
    let c = &pair.certificate;
    out.checks.push(CheckRecord::at_most("Gaussian pair: |f(y) - g(y)| at samples", c.max_sample_mismatch, 0.0, 0.0));
    out.checks.push(CheckRecord::at_most("Gaussian pair: smoothness norm", c.smoothness_f.max(c.smoothness_g), 1.0, 1e-6));
    out.checks.push(CheckRecord::at_least("Gaussian pair: ‖f-g‖_{L²_ρ} vs certified", c.measured_separation, c.certified_separation, 1e-6));
    let t = decoder_trial(&pair, &samples, &NearestSample)?;
    out.checks.push(CheckRecord::at_least("Gaussian pair: nearest-sample decoder error vs ½‖f-g‖", t.err_f.max(t.err_g), t.lower_bound, 1e-9));
    out.data = json!({ "ks": ks, "norms": norms, "certificate": to_value(c)? });
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HypercubeCase {
    s: usize,
    p: Exponent,
    d: usize,
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct HypercubeParams {
    ns: Vec<usize>,
    cases: Vec<HypercubeCase>,
    tolerance: f64,
}

impl Default for HypercubeParams {
    fn default() -> Self {
        HypercubeParams {
            ns: vec![1, 2, 3, 4, 8, 16, 32, 64],
            cases: vec![
                HypercubeCase { s: 1, p: Exponent::Finite(2.0), d: 1 },
                HypercubeCase { s: 1, p: Exponent::Infinity, d: 1 },
                HypercubeCase { s: 2, p: Exponent::Finite(2.0), d: 2 },
            ],
            tolerance: 1e-8,
        }
    }
}

pub(crate) fn hypercube(job: &JobSpec) -> Result<Outcome> {
    let hp: HypercubeParams = job.typed()?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for case in &hp.cases {
        let (mut bi, mut corner, mut basis) = (0.0f64, 0.0f64, 0.0f64);
        for &n in &hp.ns {
            let sys = build_trig_hypercube(n, case.s, case.p, case.d)?;
            let e = sys.biorth_error()?;
            let cn = sys.smoothness_norm(&sys.corner()?)?;
            let bn = sys.basis_norms()?.into_iter().fold(0.0, f64::max);
            bi = bi.max(e);
            corner = corner.max(cn);
            basis = basis.max(bn);
            rows.push(json!({ "s": case.s, "p": to_value(&case.p)?, "d": case.d, "n": n, "biorth_error": e, "corner_norm": cn, "c": sys.c, "alpha": sys.alpha, "m_bound": sys.m_bound }));
        }
        let tag = format!("s={} p={} d={}", case.s, serde_json::to_string(&case.p)?, case.d);
        out.checks.push(CheckRecord::at_most(format!("{tag}: max |φ*_k(φ_j) - δ_kj|"), bi, hp.tolerance, 0.0));
        out.checks.push(CheckRecord::at_most(format!("{tag}: smoothness norm of the corner point"), corner, 1.0, 1e-6));
        out.checks.push(CheckRecord::at_most(format!("{tag}: max ‖φ_j‖"), basis, 1.0, 1e-8));
    }
    out.data = Value::Array(rows);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EmbedParams {
    dims: Vec<usize>,
    points: usize,
    s: usize,
    tolerance: f64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams { dims: vec![1, 2, 3, 4], points: 10, s: 1, tolerance: 1e-10 }
    }
}

fn boundary_bump(y: &[f64]) -> f64 {
    y.iter().map(|&t| (4.0 * t * (1.0 - t)).max(0.0)).product()
}

pub(crate) fn embed_check(job: &JobSpec) -> Result<Outcome> {
    let ep: EmbedParams = job.typed()?;
    let seed = job.need_seed()?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for &dim in &ep.dims {
        let mut r = rng::stream(seed, "embed-check", dim as u64);
        let mut worst = 0.0f64;
        let mut zero = 0.0f64;
        let mut sup_embedded = 0.0f64;
        for (s_idx, p) in [Exponent::Finite(2.0), Exponent::Infinity].into_iter().enumerate() {
            let sys = build_trig_hypercube(dim, ep.s, p, 1)?;
            let f = embed_functional(boundary_bump, dim, &sys)?;
            let z = embed_functional(|_: &[f64]| 0.0, dim, &sys)?;
            for _ in 0..ep.points {
                let y: Vec<f64> = (0..dim).map(|_| r.gen::<f64>()).collect();
                let u = f.section(&y)?;
                worst = worst.max((boundary_bump(&y) - f.eval(&u)?).abs());
                zero = zero.max(z.eval(&u)?.abs());
            }
            if s_idx == 0 {
                // the sup of ι f over the section image reaches sup f = 1 at the center
                sup_embedded = f.eval(&f.section(&vec![0.5; dim])?)?;
            }
        }
        out.checks.push(CheckRecord::at_most(format!("dim={dim}: max |f(y) - ι f(h(y))|"), worst, ep.tolerance, 0.0));
        out.checks.push(CheckRecord::at_most(format!("dim={dim}: max |ι 0|"), zero, 0.0, 0.0));
        out.checks.push(CheckRecord::at_least(format!("dim={dim}: sup of ι f on the section vs ‖f‖_∞"), sup_embedded, 1.0, ep.tolerance));
        rows.push(json!({ "dim": dim, "round_trip": worst, "sup": sup_embedded }));
    }
    out.data = Value::Array(rows);
    Ok(out)
}
