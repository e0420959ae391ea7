use rand::Rng;
use serde::Deserialize;
use serde_json::json;

use super::{to_value, CheckRecord, JobSpec, Outcome, SeriesPoint};
use crate::analysis::{
    audit_lemmas, covering_number_log, cube_covering_log, entropy_report, flip_audit, sample_size as size_for, CoverSet,
    Lemma, SamplingPolicy,
};
use crate::fno::{format, forward, gradient_check, naive_spectral_conv, param_count, spectral_conv, Activation, FnoConfig, FnoParams};
use crate::rng;
use crate::space::{Domain, GridFunction};
use crate::Result;

fn rough<R: Rng>(d: usize, n: usize, channels: usize, r: &mut R) -> Result<GridFunction> {
    let len = channels * n.pow(d as u32);
    GridFunction::new(d, n, channels, Domain::Cube, (0..len).map(|_| r.gen_range(-1.0..1.0)).collect())
}

fn max_abs_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ForwardParams {
    configs: usize,
    fft_tolerance: f64,
    shift_tolerance: f64,
    shift: isize,
    /// network whose parameters and output on one random input are written out
    network: FnoConfig,
}

impl Default for ForwardParams {
    fn default() -> Self {
        ForwardParams { configs: 100, fft_tolerance: 1e-9, shift_tolerance: 1e-10, shift: 5, network: FnoConfig::tiny(3, 4, 2, 32) }
    }
}

pub(crate) fn fno_forward(job: &JobSpec) -> Result<Outcome> {
    let fp: ForwardParams = job.typed()?;
    fp.network.validate()?;
    let seed = job.need_seed()?;
    let mut out = Outcome::default();

    for (case, (d, n, kappa)) in [(1usize, 32usize, 5usize), (2, 32, 3)].into_iter().enumerate() {
        let mut r = rng::stream(seed, "fno-forward-fft", case as u64);
        let c = FnoConfig { d, d_in: 1, d_out: 1, d_c: 3, kappa, depth: 1, bound: 1.0, resolution: n, activation: Activation::SmoothGate };
        let p = FnoParams::random(c, 1.0, &mut r)?;
        let v = rough(d, n, 3, &mut r)?;
        for bias in [false, true] {
            let err = max_abs_diff(&spectral_conv(&p, 0, &v, bias)?, &naive_spectral_conv(&p, 0, &v, bias)?);
            out.checks.push(CheckRecord::at_most(format!("d={d} N={n} bias={bias}: FFT path vs direct DFT sums"), err, fp.fft_tolerance, 0.0));
        }
    }

    for d in 1..=2usize {
        let mut r = rng::stream(seed, "fno-forward-shift", d as u64);
        let n = if d == 1 { 32 } else { 16 };
        let c = FnoConfig { d, d_in: 2, d_out: 1, d_c: 3, kappa: 3, depth: 2, bound: 1.0, resolution: n, activation: Activation::SmoothGate };
        let mut p = FnoParams::random(c, 1.0, &mut r)?;
        // only the mean mode of the bias commutes with shifts
        let lay = p.layout();
        for l in 0..2 {
            for f in 1..lay.n_free() {
                for i in 0..3 {
                    p.data_mut()[lay.bhat_re(l, f, i)] = 0.0;
                    p.data_mut()[lay.bhat_im(l, f, i)] = 0.0;
                }
            }
        }
        let u = rough(d, n, 2, &mut r)?;
        for axis in 0..d {
            let a = forward(&p, &u.roll(axis, fp.shift))?;
            let b = forward(&p, &u)?.roll(axis, fp.shift);
            out.checks.push(CheckRecord::at_most(format!("d={d} axis={axis}: |Ψ(τu) - τΨ(u)|"), max_abs_diff(&a, &b), fp.shift_tolerance, 0.0));
        }
    }

    let mut r = rng::stream(seed, "fno-forward-count", 0);
    let mut worst = f64::INFINITY;
    let mut counts = Vec::new();
    for _ in 0..fp.configs {
        let d_in = r.gen_range(1..=3);
        let d_out = r.gen_range(1..=3);
        let c = FnoConfig {
            d: r.gen_range(1..=3),
            d_in,
            d_out,
            d_c: r.gen_range(d_in.max(d_out)..=12),
            kappa: r.gen_range(1..=6),
            depth: r.gen_range(1..=6),
            bound: 1.0,
            resolution: 16,
            activation: Activation::SmoothGate,
        };
        let pc = param_count(&c);
        let slack = pc.paper_bound as f64 - pc.exact as f64;
        if slack < worst {
            worst = slack;
        }
        counts.push(json!({ "config": to_value(&c)?, "exact": pc.exact, "paper_bound": pc.paper_bound }));
    }
    out.checks.push(CheckRecord::at_least(format!("min over {} configs of 5(2κ)^d L d_c² - d_θ", fp.configs), worst, 0.0, 0.0));

    let mut r = rng::stream(seed, "fno-forward-network", 0);
    let p = FnoParams::random(fp.network.clone(), 1.0, &mut r)?;
    let u = rough(fp.network.d, fp.network.resolution, fp.network.d_in, &mut r)?;
    let y = forward(&p, &u)?;
    let bytes = format::to_bytes(&p);
    let back = format::from_bytes_for(&bytes, &fp.network)?;
    out.checks.push(CheckRecord::at_most("checkpoint round trip |θ - θ'|_∞", p.distance_inf(&back)?, 0.0, 0.0));
    out.artifacts.push(("params.bin".into(), bytes));
    out.artifacts.push(("output.json".into(), serde_json::to_vec(&json!({ "input": u.values(), "output": y.values() }))?));
    out.data = json!({ "param_counts": counts, "network": to_value(&fp.network)? });
    Ok(out)
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GradParams {
    config: FnoConfig,
    samples: usize,
    coords: usize,
    omegas: Vec<f64>,
    h: f64,
    tolerance: f64,
}

impl Default for GradParams {
    fn default() -> Self {
        let mut config = FnoConfig::tiny(3, 3, 2, 16);
        config.bound = 2.0;
        GradParams { config, samples: 3, coords: 20, omegas: vec![0.0, 0.5], h: 1e-6, tolerance: 1e-5 }
    }
}

pub(crate) fn grad_check(job: &JobSpec) -> Result<Outcome> {
    let gp: GradParams = job.typed()?;
    let seed = job.need_seed()?;
    let mut out = Outcome::default();
    let mut runs = Vec::new();
    for (i, &omega) in gp.omegas.iter().enumerate() {
        let g = gradient_check(&gp.config, gp.samples, gp.coords, omega, gp.h, rng::derive(seed, &format!("grad-check-{i}")))?;
        out.checks.push(CheckRecord::at_most(
            format!("ω={omega}: max |g - fd| / (1 + |g|) over {} coordinates", gp.coords),
            g.max_rel_error,
            gp.tolerance,
            0.0,
        ));
        if omega > 0.0 {
            out.checks.push(CheckRecord::flag(format!("ω={omega}: output-norm penalty active"), g.penalty_active));
        }
        runs.push(json!({ "omega": omega, "check": to_value(&g)? }));
    }
    out.data = json!({ "config": to_value(&gp.config)?, "runs": runs });
    Ok(out)
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AuditParams {
    config: FnoConfig,
    probes: usize,
    lemmas: Vec<Lemma>,
    flip_eps: f64,
    flip_grid: usize,
}

impl Default for AuditParams {
    fn default() -> Self {
        let mut config = FnoConfig::tiny(2, 2, 2, 16);
        config.bound = 1.5;
        AuditParams { config, probes: 200, lemmas: Lemma::ALL.to_vec(), flip_eps: 0.1, flip_grid: 200 }
    }
}

pub(crate) fn audit(job: &JobSpec) -> Result<Outcome> {
    let ap: AuditParams = job.typed()?;
    let seed = job.need_seed()?;
    let mut out = Outcome::default();
    let records = audit_lemmas(&ap.config, &ap.lemmas, ap.probes, seed)?;
    for r in &records {
        out.checks.push(CheckRecord::at_most(
            format!("{}/{}: violations over {} probes", serde_json::to_value(r.lemma)?.as_str().unwrap_or_default(), r.part, r.probes),
            r.violations as f64,
            0.0,
            0.0,
        ));
    }
    let flip = flip_audit(ap.flip_eps, ap.flip_grid);
    out.checks.push(CheckRecord::at_most("flip: largest difference slope vs 1/ε", flip.worst_slope, flip.bound, 1e-6 * flip.bound));
    out.data = json!({ "records": to_value(&records)?, "flip": to_value(&flip)? });
    Ok(out)
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CoveringParams {
    ms: Vec<usize>,
    eps: Vec<f64>,
    policy: SamplingPolicy,
}

impl Default for CoveringParams {
    fn default() -> Self {
        CoveringParams { ms: vec![1, 2, 3, 4, 6, 8], eps: vec![1.0, 0.5, 0.1], policy: SamplingPolicy { b_cap: Some(10.0), ..Default::default() } }
    }
}

pub(crate) fn covering(job: &JobSpec) -> Result<Outcome> {
    let cp: CoveringParams = job.typed()?;
    let mut out = Outcome::default();
    out.checks.push(CheckRecord::at_most("[-1,1]² at ε = ½: log count vs 2 log 4", cube_covering_log(2, 1.0, 0.5), 2.0 * 4f64.ln(), 1e-12));
    let mut rows = Vec::new();
    for &eps in &cp.eps {
        let mut prev = f64::NEG_INFINITY;
        for &m in &cp.ms {
            let r = entropy_report(m, eps, &cp.policy)?;
            if prev.is_finite() {
                out.checks.push(CheckRecord::at_least(format!("ε={eps}: log 𝒩(Σ_{m}) non-decreasing in m"), r.sigma_m_log, prev, 1e-9));
            }
            out.checks.push(CheckRecord::at_most(
                format!("ε={eps} m={m}: log count with d_θ vs with 5(2κ)^d L d_c²"),
                r.cube_exponent,
                r.paper_shaped,
                1e-9 * r.paper_shaped.abs(),
            ));
            prev = r.sigma_m_log;
            out.series.push(SeriesPoint { series: format!("eps={eps}"), key: "m".into(), x: m as f64, measured: r.sigma_m_log, bound: r.paper_shaped });
            rows.push(to_value(&r)?);
        }
    }
    // halving ε adds d_θ log 2 for one architecture
    for &m in &cp.ms {
        let config = crate::analysis::sigma_m_config(&cp.policy, m, m);
        let set = CoverSet::Single { config: config.clone() };
        let a = covering_number_log(&set, 0.01, &cp.policy)?;
        let b = covering_number_log(&set, 0.005, &cp.policy)?;
        let dt = param_count(&config).exact as f64;
        out.checks.push(CheckRecord::at_most(format!("m={m}: |Δ log 𝒩 under ε/2 - d_θ log 2|"), (b - a - dt * 2f64.ln()).abs(), 0.0, 1e-9 * b));
    }
    out.data = json!({ "policy": to_value(&cp.policy)?, "reports": rows });
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SizeParams {
    eps: f64,
    gamma: f64,
    #[serde(default)]
    policy: SamplingPolicy,
}

pub(crate) fn sample_size(job: &JobSpec) -> Result<Outcome> {
    let sp: SizeParams = job.typed()?;
    let mut out = Outcome::default();
    let s = size_for(sp.eps, sp.gamma, &sp.policy)?;
    let m_formula = ((2.0 / sp.eps).powf(1.0 / sp.gamma) - 1e-12).ceil().max(1.0);
    out.checks.push(CheckRecord::at_most("|m - ⌈(2/ε)^{1/γ}⌉|", (s.m as f64 - m_formula).abs(), 0.0, 0.0));
    let need = (2.0 * s.log_covering - 0.5f64.ln()) / sp.eps;
    out.checks.push(CheckRecord::at_least("n vs ε⁻¹ log(2𝒩²)", s.n as f64, need, 1e-9));
    out.checks.push(CheckRecord::at_most("n - 1 below the requirement", s.n as f64 - 1.0, need, 0.0));
    out.data = to_value(&s)?;
    Ok(out)
}
