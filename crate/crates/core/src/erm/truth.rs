use serde::{Deserialize, Serialize};

use super::measure::{sample_stream, MeasureSpec};
use crate::fno::{forward, FnoConfig, FnoParams, Operator};
use crate::rng;
use crate::space::{l2, Domain, GridFunction};
use crate::{Error, Result};

/// Target operator of an ERM experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroundTruth {
    /// A frozen network. `m_star` is the smallest class index containing it.
    FixedFno {
        #[serde(skip)]
        params: Option<FnoParams>,
        config: FnoConfig,
        m_star: usize,
        /// largest ‖𝒢(u)‖ over the normalization probes
        probe_sup: f64,
    },
    /// 𝒢(u) ≡ value, a constant function.
    Constant { value: f64 },
    /// 𝒢(u) = scale · mean(u²), a constant-valued functional.
    MeanSquare { scale: f64 },
    /// 𝒢(u) = scale · u³, pointwise.
    Cubic { scale: f64 },
}

/// Probe count used to normalize frozen networks.
pub const NORMALIZATION_PROBES: usize = 512;
/// Target probe sup-norm of a normalized network.
pub const TARGET_SUP: f64 = 0.9;

fn class_of(params: &FnoParams) -> usize {
    let c = params.config();
    let ln = params.norm_inf().max(1e-300).ln().ceil().max(0.0) as usize;
    c.kappa.pow(c.d as u32).max(c.d_c).max(c.depth).max(ln).max(1)
}

impl GroundTruth {
    /// Random network of architecture `config` whose projection is rescaled so the largest
    /// output norm over probes drawn from μ is `TARGET_SUP`.
    pub fn frozen_fno(config: &FnoConfig, init_scale: f64, spec: &MeasureSpec, seed: u64) -> Result<Self> {
        config.validate()?;
        if config.resolution != spec.resolution || config.d != spec.d || config.d_in != 1 {
            return Err(Error::Shape("network grid must match the input measure".into()));
        }
        let mut r = rng::stream(seed, "ground-truth", 0);
        let mut p = FnoParams::random(config.clone(), init_scale, &mut r)?;
        let probes = sample_stream(spec, "normalization", 0, NORMALIZATION_PROBES)?;
        let sup = probes.iter().map(|u| forward(&p, u).map(|y| l2(&y))).try_fold(0.0f64, |m, v| Ok::<_, Error>(m.max(v?)))?;
        if sup == 0.0 {
            return Err(Error::Range("frozen network is identically zero on the probes".into()));
        }
        let lay = p.layout();
        let s = TARGET_SUP / sup;
        for o in 0..config.d_out {
            for i in 0..config.d_c {
                p.data_mut()[lay.proj(o, i)] *= s;
            }
        }
        let mut cfg = config.clone();
        cfg.bound = cfg.bound.max(p.norm_inf());
        let p = p.with_config(cfg.clone())?;
        let probe_sup = probes.iter().map(|u| forward(&p, u).map(|y| l2(&y))).try_fold(0.0f64, |m, v| Ok::<_, Error>(m.max(v?)))?;
        Ok(GroundTruth::FixedFno { m_star: class_of(&p), params: Some(p), config: cfg, probe_sup })
    }

    pub fn params(&self) -> Option<&FnoParams> {
        match self {
            GroundTruth::FixedFno { params, .. } => params.as_ref(),
            _ => None,
        }
    }

    pub fn is_functional(&self) -> bool {
        matches!(self, GroundTruth::Constant { .. } | GroundTruth::MeanSquare { .. })
    }
}

impl Operator for GroundTruth {
    fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        if u.domain() != Domain::Cube || u.channels() != 1 {
            return Err(Error::Shape("ground truths act on scalar functions on the cube".into()));
        }
        match self {
            GroundTruth::FixedFno { params, .. } => {
                forward(params.as_ref().ok_or_else(|| Error::Range("frozen network not loaded".into()))?, u)
            }
            GroundTruth::Constant { value } => u.map(|_| *value),
            GroundTruth::MeanSquare { scale } => {
                let ms = u.values().iter().map(|v| v * v).sum::<f64>() / u.points() as f64;
                u.map(|_| scale * ms)
            }
            GroundTruth::Cubic { scale } => u.map(|v| scale * v * v * v),
        }
    }
}
