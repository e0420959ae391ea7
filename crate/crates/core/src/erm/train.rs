use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{sample_stream, MeasureSpec};
use super::truth::GroundTruth;
use crate::analysis::{sigma_m_config, SamplingPolicy};
use crate::fno::{grad_empirical_risk, project_params, FnoConfig, FnoParams, Operator};
use crate::rng;
use crate::space::{l2, l2_distance, GridFunction};
use crate::{Error, Result};

fn default_b_cap() -> f64 {
    10.0
}

fn default_init() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// class index of Σ'_m
    pub m: usize,
    pub steps: usize,
    pub learning_rate: f64,
    /// weight of the output-norm penalty max(0, ‖Ψ(u)‖ - 2)²
    pub omega: f64,
    pub restarts: usize,
    pub seed: u64,
    /// training set size
    pub n: usize,
    /// Monte Carlo inputs for the population risk
    pub mc_size: usize,
    #[serde(default = "default_b_cap")]
    pub b_cap: f64,
    /// a restart stops once its data term reaches this value
    #[serde(default)]
    pub target_risk: f64,
    #[serde(default = "default_init")]
    pub init_scale: f64,
    /// explicit architecture inside Σ_m; defaults to the ground truth's, else the largest
    /// depth-1 member
    #[serde(default)]
    pub architecture: Option<FnoConfig>,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.steps == 0 || self.restarts == 0 || self.n == 0 || self.mc_size < 2 {
            return Err(Error::Range("m, steps, restarts, n must be positive and mc_size >= 2".into()));
        }
        for (name, v) in [("learning rate", self.learning_rate), ("b_cap", self.b_cap), ("init scale", self.init_scale)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Range(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.omega >= 0.0 && self.target_risk >= 0.0) {
            return Err(Error::Range("omega and target risk must be non-negative".into()));
        }
        Ok(())
    }

    /// B = min(e^m, B_cap), never below 1.
    pub fn bound(&self) -> f64 {
        (self.m as f64).exp().min(self.b_cap).max(1.0)
    }
}

/// Training architecture with its bound set to B; rejects architectures outside Σ_m.
pub fn architecture(truth: &GroundTruth, spec: &MeasureSpec, tc: &TrainConfig) -> Result<FnoConfig> {
    let mut c = match (&tc.architecture, truth) {
        (Some(c), _) => c.clone(),
        (None, GroundTruth::FixedFno { config, .. }) => config.clone(),
        (None, _) => {
            let policy = SamplingPolicy { d: spec.d, ..Default::default() };
            let mut c = sigma_m_config(&policy, tc.m, 1);
            c.resolution = spec.resolution;
            c
        }
    };
    c.bound = tc.bound();
    if c.kappa.pow(c.d as u32) > tc.m || c.d_c > tc.m || c.depth > tc.m {
        return Err(Error::Range(format!("architecture (κ={}, d_c={}, L={}) is not in Σ_{}", c.kappa, c.d_c, c.depth, tc.m)));
    }
    if c.d != spec.d || c.resolution != spec.resolution || c.d_in != 1 || c.d_out != 1 {
        return Err(Error::Shape("training architecture must match the input measure".into()));
    }
    c.validate()?;
    Ok(c)
}

/// Inputs with their ground-truth outputs.
#[derive(Clone, Debug)]
pub struct Labeled {
    pub inputs: Vec<GridFunction>,
    pub targets: Vec<GridFunction>,
}

impl Labeled {
    pub fn draw(truth: &dyn Operator, spec: &MeasureSpec, label: &str, start: u64, count: usize) -> Result<Self> {
        let inputs = sample_stream(spec, label, start, count)?;
        let targets = inputs.par_iter().map(|u| truth.apply(u)).collect::<Result<Vec<_>>>()?;
        Ok(Labeled { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn pairs(&self) -> Vec<(GridFunction, GridFunction)> {
        self.inputs.iter().cloned().zip(self.targets.iter().cloned()).collect()
    }

    /// Per-input squared errors of Ψ, in input order.
    pub fn squared_errors(&self, psi: &dyn Operator) -> Result<Vec<f64>> {
        self.inputs
            .par_iter()
            .zip(&self.targets)
            .map(|(u, y)| l2_distance(&psi.apply(u)?, y).map(|e| e * e))
            .collect()
    }
}

/// 𝓛̂(Ψ;𝒢) = (1/n) Σ ‖Ψ(u_j) - 𝒢(u_j)‖², summed in input order.
pub fn empirical_risk(psi: &dyn Operator, truth: &dyn Operator, inputs: &[GridFunction]) -> Result<f64> {
    if inputs.is_empty() {
        return Err(Error::Domain("empirical risk of an empty input set".into()));
    }
    let errs = inputs
        .par_iter()
        .map(|u| {
            let a = psi.apply(u)?;
            let b = truth.apply(u)?;
            l2_distance(&a, &b).map(|e| e * e)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errs.iter().sum::<f64>() / inputs.len() as f64)
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

pub fn mc_estimate(values: &[f64]) -> McEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    McEstimate { mean, stderr: (var / n).sqrt() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    /// data term at the returned parameters; infinite for a diverged restart
    pub final_risk: f64,
    pub steps: usize,
    pub stopped_early: bool,
    pub failure: Option<String>,
}

/// Probe-restricted surrogate of the estimation-error decomposition for a computed ERM:
/// 𝓛(Ψ) <= 𝓛̂(Ψ) + 2 max_family max(0, 𝓛 - 𝓛̂) + approximation, over the restart family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionAudit {
    pub population_risk: f64,
    pub approximation: Option<f64>,
    pub optimization_slack: f64,
    pub family_gap: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub m: usize,
    pub bound: f64,
    pub architecture: FnoConfig,
    pub n: usize,
    pub restarts: Vec<RestartRecord>,
    pub best_restart: usize,
    pub empirical_risk: f64,
    /// 𝓛̂ of the frozen ground-truth parameters, when they lie in the trained class
    pub truth_risk: Option<f64>,
    pub probe_count: usize,
    pub probe_max_norm: f64,
    pub train_max_norm: f64,
    /// post-hoc Σ'_m check: every probe output has norm <= 2
    pub feasible: bool,
    pub population: McEstimate,
    pub decomposition: DecompositionAudit,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(len: usize) -> Self {
        Adam { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    fn step(&mut self, x: &mut [f64], g: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for i in 0..x.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * g[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * g[i] * g[i];
            x[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-12);
        }
    }
}

/// One projected descent run from `start`. Returns the final parameters.
pub fn descend(start: FnoParams, data: &[(GridFunction, GridFunction)], tc: &TrainConfig, index: usize) -> (RestartRecord, Option<FnoParams>) {
    let bound = start.config().bound;
    let mut p = project_params(&start, bound);
    let mut opt = Adam::new(p.data().len());
    let mut rec = RestartRecord { index, final_risk: f64::INFINITY, steps: 0, stopped_early: false, failure: None };
    for step in 0..tc.steps {
        let g = match grad_empirical_risk(&p, data, tc.omega) {
            Ok(g) if g.risk.is_finite() && g.grad.iter().all(|v| v.is_finite()) => g,
            Ok(g) => {
                rec.failure = Some(format!("non-finite loss {} at step {step}", g.risk));
                return (rec, None);
            }
            Err(e) => {
                rec.failure = Some(format!("step {step}: {e}"));
                return (rec, None);
            }
        };
        rec.steps = step;
        if g.data_term <= tc.target_risk {
            rec.stopped_early = true;
            break;
        }
        // cosine decay to 1% of the initial rate
        let frac = step as f64 / tc.steps as f64;
        let lr = tc.learning_rate * (0.01 + 0.99 * 0.5 * (1.0 + (std::f64::consts::PI * frac).cos()));
        let mut x = p.into_vec();
        opt.step(&mut x, &g.grad, lr);
        p = match FnoParams::from_vec(start.config().clone(), x) {
            Ok(q) => project_params(&q, bound),
            Err(e) => {
                rec.failure = Some(format!("step {step}: {e}"));
                return (rec, None);
            }
        };
        rec.steps = step + 1;
    }
    match grad_empirical_risk(&p, data, 0.0) {
        Ok(g) if g.data_term.is_finite() => {
            rec.final_risk = g.data_term;
            (rec, Some(p))
        }
        _ => {
            rec.failure = Some("non-finite final risk".into());
            (rec, None)
        }
    }
}

fn sup_norm(psi: &dyn Operator, inputs: &[GridFunction]) -> Result<f64> {
    let norms = inputs.par_iter().map(|u| psi.apply(u).map(|y| l2(&y))).collect::<Result<Vec<f64>>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// Multi-restart projected descent on the empirical risk over an explicit dataset.
/// Restarts run in parallel; each draws its start from its own stream.
pub fn fit(arch: &FnoConfig, data: &Labeled, tc: &TrainConfig, warm: Option<&FnoParams>) -> Result<Fit> {
    let pairs = data.pairs();
    let runs: Vec<(RestartRecord, Option<FnoParams>)> = (0..tc.restarts)
        .into_par_iter()
        .map(|r| {
            let start = match (warm, r) {
                (Some(w), 0) => w.with_config(arch.clone()),
                _ => FnoParams::random(arch.clone(), tc.init_scale, &mut rng::stream(tc.seed, "restart", r as u64)),
            };
            match start {
                Ok(s) => descend(s, &pairs, tc, r),
                Err(e) => (RestartRecord { index: r, final_risk: f64::INFINITY, steps: 0, stopped_early: false, failure: Some(e.to_string()) }, None),
            }
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (r, (rec, p)) in runs.iter().enumerate() {
        if p.is_some() && best.map_or(true, |(_, v)| rec.final_risk < v) {
            best = Some((r, rec.final_risk));
        }
    }
    let (b, _) = best.ok_or_else(|| Error::Range(format!("all {} restarts failed", tc.restarts)))?;
    let records: Vec<RestartRecord> = runs.iter().map(|(r, _)| r.clone()).collect();
    let family: Vec<(usize, FnoParams)> = runs.into_iter().enumerate().filter_map(|(r, (_, p))| p.map(|p| (r, p))).collect();
    let params = family.iter().find(|(r, _)| *r == b).map(|(_, p)| p.clone()).expect("best restart has parameters");
    Ok(Fit { params, records, best: b, family })
}

/// Outcome of `fit`: the best restart plus every surviving one.
pub struct Fit {
    pub params: FnoParams,
    pub records: Vec<RestartRecord>,
    pub best: usize,
    pub family: Vec<(usize, FnoParams)>,
}

/// Train the ERM surrogate: data from stream "train", probes (10 n) from "probe",
/// population estimate from "population".
pub fn train_erm(truth: &GroundTruth, spec: &MeasureSpec, tc: &TrainConfig) -> Result<(FnoParams, TrainReport)> {
    tc.validate()?;
    let data = Labeled::draw(truth, spec, "train", 0, tc.n)?;
    let population = Labeled::draw(truth, spec, "population", 0, tc.mc_size)?;
    train_on(truth, spec, tc, &data, &population, None)
}

/// `train_erm` with caller-supplied data and Monte Carlo set.
pub fn train_on(
    truth: &GroundTruth,
    spec: &MeasureSpec,
    tc: &TrainConfig,
    data: &Labeled,
    population: &Labeled,
    warm: Option<&FnoParams>,
) -> Result<(FnoParams, TrainReport)> {
    tc.validate()?;
    let arch = architecture(truth, spec, tc)?;
    let Fit { params, records: restarts, best, family } = fit(&arch, data, tc, warm)?;
    let probes = sample_stream(spec, "probe", 0, 10 * data.len())?;
    let probe_max_norm = sup_norm(&params, &probes)?;
    let train_max_norm = sup_norm(&params, &data.inputs)?;
    let truth_risk = match truth.params() {
        Some(t) if t.config().d_c == arch.d_c && t.config().kappa == arch.kappa && t.config().depth == arch.depth && t.norm_inf() <= arch.bound => {
            Some(data.squared_errors(t)?.iter().sum::<f64>() / data.len() as f64)
        }
        _ => None,
    };
    let pop = mc_estimate(&population.squared_errors(&params)?);
    let empirical = restarts[best].final_risk;
    let mut gap = 0.0f64;
    for (r, p) in &family {
        let l = if *r == best { pop.mean } else { mc_estimate(&population.squared_errors(p)?).mean };
        gap = gap.max(l - restarts[*r].final_risk);
    }
    // zero when the frozen truth lies in the trained class; unknown otherwise
    let approximation = truth_risk.map(|_| 0.0);
    let rhs = approximation.unwrap_or(0.0) + empirical + 2.0 * gap + 1e-6;
    let decomposition = DecompositionAudit {
        population_risk: pop.mean,
        approximation,
        optimization_slack: empirical,
        family_gap: gap,
        rhs,
        pass: approximation.is_none() || pop.mean <= rhs,
    };
    let report = TrainReport {
        m: tc.m,
        bound: arch.bound,
        architecture: arch,
        n: data.len(),
        restarts,
        best_restart: best,
        empirical_risk: empirical,
        truth_risk,
        probe_count: probes.len(),
        probe_max_norm,
        train_max_norm,
        feasible: probe_max_norm <= 2.0,
        population: pop,
        decomposition,
    };
    Ok((params, report))
}
