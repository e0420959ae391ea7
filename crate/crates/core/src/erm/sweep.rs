use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::MeasureSpec;
use super::train::{architecture, fit, mc_estimate, train_on, Labeled, TrainConfig};
use super::truth::GroundTruth;
use crate::analysis::{class_index, epsilon_for, predicted_exponent, SamplingPolicy};
use crate::fno::FnoParams;
use crate::{Error, Result};

/// Squared errors never exceed (2 + 1)², so 144ε >= 9 makes the audit inequality automatic.
pub const RISK_CEILING: f64 = 9.0;

fn default_reps() -> usize {
    40
}

fn default_delta() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub gamma: f64,
    pub schedule: Vec<usize>,
    /// `n` is overwritten per row
    pub train: TrainConfig,
    #[serde(default = "default_reps")]
    pub audit_reps: usize,
    #[serde(default = "default_delta")]
    pub audit_delta: f64,
    /// descent steps per audit repetition (warm-started from the row's network)
    pub audit_steps: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() || self.schedule.iter().any(|&n| n < 4) || self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Range("schedule must be strictly increasing with every n >= 4".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Range(format!("γ = {} must be positive", self.gamma)));
        }
        if !(self.audit_delta > 0.0 && self.audit_delta < 1.0) {
            return Err(Error::Range("audit δ must lie in (0, 1)".into()));
        }
        TrainConfig { n: self.schedule[0], ..self.train.clone() }.validate()
    }
}

/// 𝓛 <= 2𝓛̂ + 144ε over repeated draws of the training set at one n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstprobAudit {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub reps: usize,
    pub holds: usize,
    pub fraction: f64,
    /// largest 𝓛 - 2𝓛̂ seen, against the 144ε allowance
    pub worst_excess: f64,
    pub allowance: f64,
    /// 144ε >= 9: the inequality cannot fail at this n
    pub vacuous: bool,
    pub failures: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub emp_risk: f64,
    pub pop_risk: f64,
    pub stderr: f64,
    pub epsilon: f64,
    /// class index ⌈(2/ε)^{1/γ}⌉ the theory would pair with this n
    pub m_theory: usize,
    pub bound_lhs: f64,
    pub bound_rhs: f64,
    pub pass: bool,
    pub feasible: bool,
    pub audit: Option<EstprobAudit>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSweepReport {
    pub gamma: f64,
    pub rows: Vec<SweepRow>,
    /// least squares slope of ln(pop risk) on ln n over the successful rows
    pub slope: Option<f64>,
    /// -1/(2(1 + 8/γ)), for comparison only
    pub predicted_exponent: f64,
    /// pop(n_{i+1}) <= pop(n_i) + 2 sqrt(se_i² + se_{i+1}²) for each consecutive pair
    pub monotone: Vec<bool>,
    pub monotone_pass: bool,
    pub audit_pass: bool,
    pub any_vacuous: bool,
}

pub fn policy_for(spec: &MeasureSpec, tc: &TrainConfig) -> SamplingPolicy {
    SamplingPolicy { d: spec.d, d_in: 1, d_out: 1, input_bound: spec.norm_bound(), b_cap: Some(tc.b_cap) }
}

fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Repeat the training at `n` on `reps` fresh datasets, warm-started from `warm`, and
/// count how often 𝓛 <= 2𝓛̂ + 144ε holds at the realized pair.
pub fn estprob_audit(
    truth: &GroundTruth,
    spec: &MeasureSpec,
    sc: &SweepConfig,
    n: usize,
    eps: f64,
    population: &Labeled,
    warm: &FnoParams,
) -> Result<EstprobAudit> {
    let arch = architecture(truth, spec, &sc.train)?;
    let tc = TrainConfig { n, restarts: 1, steps: sc.audit_steps.max(1), ..sc.train.clone() };
    let allowance = 144.0 * eps;
    let outcomes: Vec<Option<f64>> = (0..sc.audit_reps)
        .into_par_iter()
        .map(|r| {
            let data = Labeled::draw(truth, spec, &format!("estprob-{n}"), (r * n) as u64, n).ok()?;
            let f = fit(&arch, &data, &tc, Some(warm)).ok()?;
            let pop = mc_estimate(&population.squared_errors(&f.params).ok()?).mean;
            Some(pop - 2.0 * f.records[f.best].final_risk)
        })
        .collect();
    let failures = outcomes.iter().filter(|o| o.is_none()).count();
    let excess: Vec<f64> = outcomes.into_iter().flatten().collect();
    let holds = excess.iter().filter(|&&e| e <= allowance).count();
    let fraction = holds as f64 / sc.audit_reps.max(1) as f64;
    Ok(EstprobAudit {
        n,
        eps,
        delta: sc.audit_delta,
        reps: sc.audit_reps,
        holds,
        fraction,
        worst_excess: excess.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        allowance,
        vacuous: allowance >= RISK_CEILING,
        failures,
        pass: fraction >= 1.0 - sc.audit_delta,
    })
}

fn run_row(truth: &GroundTruth, spec: &MeasureSpec, sc: &SweepConfig, n: usize, population: &Labeled) -> Result<SweepRow> {
    let tc = TrainConfig { n, ..sc.train.clone() };
    let policy = policy_for(spec, &tc);
    let eps = epsilon_for(n as u64, sc.gamma, sc.audit_delta, &policy)?;
    let data = Labeled::draw(truth, spec, &format!("sweep-{n}"), 0, n)?;
    let (params, report) = train_on(truth, spec, &tc, &data, population, None)?;
    let rhs = 2.0 * report.empirical_risk + 144.0 * eps;
    let audit = if sc.audit_reps > 0 { Some(estprob_audit(truth, spec, sc, n, eps, population, &params)?) } else { None };
    Ok(SweepRow {
        n,
        emp_risk: report.empirical_risk,
        pop_risk: report.population.mean,
        stderr: report.population.stderr,
        epsilon: eps,
        m_theory: class_index(eps, sc.gamma),
        bound_lhs: report.population.mean,
        bound_rhs: rhs,
        pass: report.population.mean <= rhs,
        feasible: report.feasible,
        audit,
        failure: None,
    })
}

/// Train at every n of the schedule on fresh iid data; one Monte Carlo set of
/// `train.mc_size` inputs is shared by all rows. Failed rows are recorded and skipped.
pub fn rate_sweep(truth: &GroundTruth, spec: &MeasureSpec, sc: &SweepConfig) -> Result<RateSweepReport> {
    sc.validate()?;
    let population = Labeled::draw(truth, spec, "population", 0, sc.train.mc_size)?;
    let rows: Vec<SweepRow> = sc
        .schedule
        .iter()
        .map(|&n| {
            run_row(truth, spec, sc, n, &population).unwrap_or_else(|e| SweepRow {
                n,
                emp_risk: f64::NAN,
                pop_risk: f64::NAN,
                stderr: f64::NAN,
                epsilon: f64::NAN,
                m_theory: 0,
                bound_lhs: f64::NAN,
                bound_rhs: f64::NAN,
                pass: false,
                feasible: false,
                audit: None,
                failure: Some(e.to_string()),
            })
        })
        .collect();
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.failure.is_none()).collect();
    let pts: Vec<(f64, f64)> = ok.iter().filter(|r| r.pop_risk > 0.0).map(|r| ((r.n as f64).ln(), r.pop_risk.ln())).collect();
    let monotone: Vec<bool> = ok
        .windows(2)
        .map(|w| w[1].pop_risk <= w[0].pop_risk + 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt())
        .collect();
    let audits: Vec<&EstprobAudit> = ok.iter().filter_map(|r| r.audit.as_ref()).collect();
    Ok(RateSweepReport {
        gamma: sc.gamma,
        slope: ls_slope(&pts),
        predicted_exponent: -predicted_exponent(sc.gamma),
        monotone_pass: ok.len() == rows.len() && monotone.iter().all(|&b| b),
        monotone,
        audit_pass: ok.len() == rows.len() && audits.iter().all(|a| a.pass),
        any_vacuous: audits.iter().any(|a| a.vacuous),
        rows,
    })
}
