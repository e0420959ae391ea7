use serde::Deserialize;
use serde_json::json;

use super::{to_value, CheckRecord, JobSpec, Outcome, SeriesPoint};
use crate::erm::{rate_sweep as sweep, train_erm, GroundTruth, MeasureSpec, SweepConfig, TrainConfig};
use crate::fno::{format, FnoConfig};
use crate::{Error, Result};

/// Ground truth as written in a job; a frozen network draws from `seed` (default: job seed).
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum TruthSpec {
    FixedFno {
        config: FnoConfig,
        #[serde(default = "one")]
        init_scale: f64,
        seed: Option<u64>,
    },
    Constant { value: f64 },
    MeanSquare { scale: f64 },
    Cubic { scale: f64 },
}

fn one() -> f64 {
    1.0
}

impl Default for TruthSpec {
    fn default() -> Self {
        TruthSpec::FixedFno { config: FnoConfig::tiny(2, 2, 1, 32), init_scale: 1.0, seed: None }
    }
}

impl TruthSpec {
    fn build(&self, spec: &MeasureSpec, seed: u64) -> Result<GroundTruth> {
        Ok(match self {
            TruthSpec::FixedFno { config, init_scale, seed: s } => GroundTruth::frozen_fno(config, *init_scale, spec, s.unwrap_or(seed))?,
            TruthSpec::Constant { value } => GroundTruth::Constant { value: *value },
            TruthSpec::MeanSquare { scale } => GroundTruth::MeanSquare { scale: *scale },
            TruthSpec::Cubic { scale } => GroundTruth::Cubic { scale: *scale },
        })
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MeasureParams {
    d: usize,
    resolution: usize,
    alpha: f64,
    j_max: usize,
    seed: Option<u64>,
}

impl Default for MeasureParams {
    fn default() -> Self {
        MeasureParams { d: 1, resolution: 32, alpha: 1.5, j_max: 8, seed: None }
    }
}

impl MeasureParams {
    fn build(&self, seed: u64) -> MeasureSpec {
        MeasureSpec { d: self.d, resolution: self.resolution, alpha: self.alpha, j_max: self.j_max, seed: self.seed.unwrap_or(seed) }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrainParams {
    m: usize,
    steps: usize,
    learning_rate: f64,
    omega: f64,
    restarts: usize,
    seed: Option<u64>,
    n: usize,
    mc_size: usize,
    b_cap: f64,
    target_risk: f64,
    init_scale: f64,
    architecture: Option<FnoConfig>,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            m: 2,
            steps: 2000,
            learning_rate: 0.02,
            omega: 1.0,
            restarts: 5,
            seed: None,
            n: 64,
            mc_size: 2000,
            b_cap: 10.0,
            target_risk: 1e-9,
            init_scale: 0.5,
            architecture: None,
        }
    }
}

impl TrainParams {
    fn build(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            m: self.m,
            steps: self.steps,
            learning_rate: self.learning_rate,
            omega: self.omega,
            restarts: self.restarts,
            seed: self.seed.unwrap_or(seed),
            n: self.n,
            mc_size: self.mc_size,
            b_cap: self.b_cap,
            target_risk: self.target_risk,
            init_scale: self.init_scale,
            architecture: self.architecture.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ErmParams {
    truth: TruthSpec,
    measure: MeasureParams,
    train: TrainParams,
    risk_tolerance: f64,
}

impl Default for ErmParams {
    fn default() -> Self {
        ErmParams { truth: TruthSpec::default(), measure: MeasureParams::default(), train: TrainParams::default(), risk_tolerance: 1e-4 }
    }
}

pub(crate) fn erm_train(job: &JobSpec) -> Result<Outcome> {
    let ep: ErmParams = job.typed()?;
    let seed = job.need_seed()?;
    let spec = ep.measure.build(seed);
    let truth = ep.truth.build(&spec, seed)?;
    let tc = ep.train.build(seed);
    let (params, r) = train_erm(&truth, &spec, &tc)?;
    let mut out = Outcome::default();
    out.checks.push(CheckRecord::at_most(format!("best of {} restarts: empirical risk at n = {}", tc.restarts, tc.n), r.empirical_risk, ep.risk_tolerance, 0.0));
    out.checks.push(CheckRecord::at_most(format!("Σ'_m probes: max ‖Ψ(u)‖ over {} inputs", r.probe_count), r.probe_max_norm, 2.0, 0.0));
    out.checks.push(CheckRecord::at_most("training inputs: max ‖Ψ(u)‖", r.train_max_norm, 2.0, 0.0));
    let dec = &r.decomposition;
    out.checks.push(CheckRecord::at_most(
        "population risk vs approximation + 𝓛̂(Ψ) + 2 max over restarts of (𝓛 - 𝓛̂)",
        dec.population_risk,
        dec.rhs,
        0.0,
    ));
    if let Some(tr) = r.truth_risk {
        // surrogate optimality against the in-class comparator
        out.checks.push(CheckRecord::at_most("𝓛̂(Ψ) - 𝓛̂(𝒢) for the in-class ground truth", r.empirical_risk - tr, ep.risk_tolerance, 0.0));
    }
    out.artifacts.push(("checkpoint.bin".into(), format::to_bytes(&params)));
    out.data = json!({ "truth": to_value(&truth)?, "measure": to_value(&spec)?, "train": to_value(&tc)?, "report": to_value(&r)? });
    Ok(out)
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepParams {
    truth: TruthSpec,
    measure: MeasureParams,
    train: TrainParams,
    gamma: f64,
    schedule: Vec<usize>,
    audit_reps: usize,
    audit_delta: f64,
    audit_steps: usize,
    /// required fraction of audit repetitions where the inequality holds
    audit_fraction: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            truth: TruthSpec::default(),
            measure: MeasureParams::default(),
            train: TrainParams { restarts: 3, mc_size: 10_000, n: 8, ..TrainParams::default() },
            gamma: 1.0,
            schedule: vec![8, 16, 32, 64, 128],
            audit_reps: 40,
            audit_delta: 0.05,
            audit_steps: 200,
            audit_fraction: 0.95,
        }
    }
}

pub(crate) fn rate_sweep(job: &JobSpec) -> Result<Outcome> {
    let sp: SweepParams = job.typed()?;
    let seed = job.need_seed()?;
    let spec = sp.measure.build(seed);
    let truth = sp.truth.build(&spec, seed)?;
    let sc = SweepConfig {
        gamma: sp.gamma,
        schedule: sp.schedule.clone(),
        train: sp.train.build(seed),
        audit_reps: sp.audit_reps,
        audit_delta: sp.audit_delta,
        audit_steps: sp.audit_steps,
    };
    let r = sweep(&truth, &spec, &sc)?;
    let mut out = Outcome::default();
    for (w, ok) in r.rows.windows(2).zip(&r.monotone) {
        let slack = 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        let mut c = CheckRecord::at_most(format!("pop risk n={} vs n={} + 2 stderr", w[1].n, w[0].n), w[1].pop_risk, w[0].pop_risk, slack);
        c.pass = *ok;
        out.checks.push(c);
    }
    for row in &r.rows {
        if let Some(f) = &row.failure {
            return Err(Error::Training(format!("sweep row n = {} failed: {f}", row.n)));
        }
        out.checks.push(CheckRecord::flag(format!("n={}: trained network passes the Σ'_m probes", row.n), row.feasible));
        if let Some(a) = &row.audit {
            let note = if a.vacuous { " (vacuous: 144ε >= 9 bounds every risk)" } else { "" };
            out.checks.push(CheckRecord::at_least(
                format!("n={}: fraction of {} reps with 𝓛 <= 2𝓛̂ + 144ε, ε = {:.4}{note}", row.n, a.reps, a.eps),
                a.fraction,
                sp.audit_fraction,
                0.0,
            ));
        }
        out.series.push(SeriesPoint { series: "population-risk".into(), key: "n".into(), x: row.n as f64, measured: row.bound_lhs, bound: row.bound_rhs });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "emp_risk", "pop_risk", "stderr", "epsilon", "bound_lhs", "bound_rhs", "pass"]).map_err(csv_err)?;
    for row in &r.rows {
        w.write_record([
            row.n.to_string(),
            format!("{:e}", row.emp_risk),
            format!("{:e}", row.pop_risk),
            format!("{:e}", row.stderr),
            format!("{:e}", row.epsilon),
            format!("{:e}", row.bound_lhs),
            format!("{:e}", row.bound_rhs),
            row.pass.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    out.artifacts.push(("sweep.csv".into(), bytes));
    out.data = json!({
        "truth": to_value(&truth)?,
        "measure": to_value(&spec)?,
        "sweep": to_value(&r)?,
        "slope": r.slope,
        "predicted_exponent": r.predicted_exponent,
        "any_vacuous": r.any_vacuous,
    });
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}
