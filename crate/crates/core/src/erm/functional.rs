use serde::{Deserialize, Serialize};

use super::measure::{sample_stream, MeasureSpec};
use super::train::{fit, train_erm, Labeled, TrainConfig, TrainReport};
use super::truth::GroundTruth;
use crate::adversarial::decoder::{Decoder, FnoDecoder, GridSpec, NearestSample};
use crate::adversarial::embed::embed_functional;
use crate::adversarial::fooling::{fooling_witness, FoolingSpec, FoolingWitness};
use crate::adversarial::hypercube::build_trig_hypercube;
use crate::fno::{Activation, FnoConfig, FnoParams, Operator};
use crate::rng;
use crate::space::{l2_distance, Domain, Exponent, GridFunction};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub train: TrainReport,
    /// (𝒢(u_1), ..., 𝒢(u_n)) for the training inputs
    pub encoder: Vec<f64>,
}

fn constant_value(f: &GridFunction) -> Result<f64> {
    let v = f.values();
    let spread = v.iter().fold(0.0f64, |m, x| m.max((x - v[0]).abs()));
    if spread > 1e-12 * v[0].abs().max(1.0) {
        return Err(Error::Range(format!("output is not constant (spread {spread})")));
    }
    Ok(v[0])
}

/// ERM for operators with constant-valued outputs; the report carries the encoder image.
pub fn functional_mode(truth: &GroundTruth, spec: &MeasureSpec, tc: &TrainConfig) -> Result<(FnoParams, FunctionalReport)> {
    let data = Labeled::draw(truth, spec, "train", 0, tc.n)?;
    let encoder = data.targets.iter().map(constant_value).collect::<Result<Vec<f64>>>()?;
    let (params, train) = train_erm(truth, spec, tc)?;
    Ok((params, FunctionalReport { train, encoder }))
}

/// Constant-output operator u ↦ ι w(u), with `w` one member of a fooling pair.
struct EmbeddedTruth<'a> {
    witness: &'a FoolingWitness,
    system: &'a crate::adversarial::hypercube::BiorthSystem,
    use_g: bool,
}

impl EmbeddedTruth<'_> {
    fn value(&self, u: &GridFunction) -> Result<f64> {
        let w = self.witness;
        let e = if self.use_g {
            embed_functional(|y: &[f64]| w.eval_g(y), 1, self.system)?.eval(u)?
        } else {
            embed_functional(|y: &[f64]| w.eval_f(y), 1, self.system)?.eval(u)?
        };
        Ok(e)
    }
}

impl Operator for EmbeddedTruth<'_> {
    fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        let v = self.value(u)?;
        u.map(|_| v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckRow {
    pub n: usize,
    /// |ι f - ι g| at the worst unhit peak
    pub separation: f64,
    pub lower_bound: f64,
    pub err_f: f64,
    pub err_g: f64,
    pub train_risk: f64,
    pub pass: bool,
}

/// Train a functional on samples of an embedded fooling functional ι f and test it at the
/// unhit bump peaks against both ι f and ι g. The two agree on every training input, so
/// the larger error is at least half their separation, whatever the training achieves.
pub fn fooling_cross_check(schedule: &[usize], k: usize, tc: &TrainConfig) -> Result<Vec<CrossCheckRow>> {
    let system = build_trig_hypercube(1, 1, Exponent::Finite(2.0), 1)?;
    let res = system.resolution();
    let arch = FnoConfig {
        d: 1,
        d_in: 1,
        d_out: 1,
        d_c: tc.m.min(4),
        kappa: 1,
        depth: 1,
        bound: tc.bound(),
        resolution: res,
        activation: Activation::SmoothGate,
    };
    let mut rows = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let mut r = rng::stream(tc.seed, "cross-check", n as u64);
        use rand::Rng;
        let ys: Vec<Vec<f64>> = (0..n).map(|_| vec![r.gen::<f64>()]).collect();
        let spec = FoolingSpec { d: 1, k, q: Exponent::Infinity, p: Exponent::Infinity, seed: tc.seed };
        let witness = fooling_witness(&ys, &spec, Domain::Cube)?;
        let tf = EmbeddedTruth { witness: &witness, system: &system, use_g: false };
        let tg = EmbeddedTruth { witness: &witness, system: &system, use_g: true };
        let inputs = ys.iter().map(|y| system.point(y)).collect::<Result<Vec<_>>>()?;
        let targets = inputs.iter().map(|u| tf.apply(u)).collect::<Result<Vec<_>>>()?;
        let data = Labeled { inputs, targets };
        let f = fit(&arch, &data, &TrainConfig { n, ..tc.clone() }, None)?;
        let mut row = CrossCheckRow { n, separation: 0.0, lower_bound: 0.0, err_f: 0.0, err_g: 0.0, train_risk: f.records[f.best].final_risk, pass: true };
        for j in witness.unhit() {
            let u = system.point(&witness.family.peak(j))?;
            let out = f.params.apply(&u)?;
            let (vf, vg) = (tf.apply(&u)?, tg.apply(&u)?);
            let sep = l2_distance(&vf, &vg)?;
            let (ef, eg) = (l2_distance(&out, &vf)?, l2_distance(&out, &vg)?);
            if ef.max(eg) < 0.5 * sep - 1e-9 {
                row.pass = false;
            }
            if sep > row.separation {
                row.separation = sep;
                row.lower_bound = 0.5 * sep;
                row.err_f = ef;
                row.err_g = eg;
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// A small FNO trained to reconstruct draws of μ from their nearest-sample interpolant at
/// eight equispaced nodes; used as the learned member of the decoder zoo.
pub fn fno_decoder(spec: &MeasureSpec, tc: &TrainConfig) -> Result<FnoDecoder> {
    if spec.d != 1 {
        return Err(Error::Range("the learned decoder is one-dimensional".into()));
    }
    let n = spec.resolution;
    let arch = FnoConfig {
        d: 1,
        d_in: 1,
        d_out: 1,
        d_c: 4.min(tc.m),
        kappa: (n / 2).min(tc.m).max(1),
        depth: 1,
        bound: tc.bound(),
        resolution: n,
        activation: Activation::SmoothGate,
    };
    arch.validate()?;
    let nodes: Vec<usize> = (0..8).map(|i| (i * n) / 8 + n / 16).collect();
    let points: Vec<Vec<f64>> = nodes.iter().map(|&i| vec![i as f64 / n as f64]).collect();
    let targets = sample_stream(spec, "decoder", 0, tc.n)?;
    let grid = GridSpec { d: 1, resolution: n, domain: Domain::Cube };
    let inputs = targets
        .iter()
        .map(|u| NearestSample.decode(&points, &nodes.iter().map(|&i| u.values()[i]).collect::<Vec<_>>(), grid))
        .collect::<Result<Vec<_>>>()?;
    let f = fit(&arch, &Labeled { inputs, targets }, tc, None)?;
    Ok(FnoDecoder { params: f.params })
}
