//! Reconstruction maps from point samples back to a grid function. Every decoder sees
//! only `(samples, values)`, so it cannot tell the two members of a fooling pair apart.

use nalgebra::{DMatrix, DVector};

use super::fooling::FoolingPair;
use crate::fno::{forward, FnoParams};
use crate::space::{lp_distance, Domain, GridFunction, NormSpec};
use crate::{Error, Result};

pub trait Decoder: Sync {
    fn name(&self) -> String;

    fn decode(&self, samples: &[Vec<f64>], values: &[f64], grid: GridSpec) -> Result<GridFunction>;
}

/// Target grid of a reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub d: usize,
    pub resolution: usize,
    pub domain: Domain,
}

impl GridSpec {
    pub fn of(f: &GridFunction) -> Self {
        GridSpec { d: f.dim(), resolution: f.resolution(), domain: f.domain() }
    }
}

fn nearest(samples: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, y) in samples.iter().enumerate() {
        let r: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if r < best.1 {
            best = (i, r);
        }
    }
    best.0
}

/// Value of the nearest sample (Euclidean, ties to the lower index).
#[derive(Clone, Copy, Debug, Default)]
pub struct NearestSample;

impl Decoder for NearestSample {
    fn name(&self) -> String {
        "piecewise-constant".into()
    }

    fn decode(&self, samples: &[Vec<f64>], values: &[f64], grid: GridSpec) -> Result<GridFunction> {
        if samples.is_empty() {
            return GridFunction::zeros(grid.d, grid.resolution, 1, grid.domain);
        }
        GridFunction::from_fn(grid.d, grid.resolution, grid.domain, |x| values[nearest(samples, x)])
    }
}

/// Gaussian radial-basis interpolant `Σ c_i exp(-(|x - y_i|/w)²)`.
#[derive(Clone, Copy, Debug)]
pub struct RadialBasis {
    /// kernel width; `None` uses the mean spacing `n^{-1/d}`
    pub width: Option<f64>,
}

impl Decoder for RadialBasis {
    fn name(&self) -> String {
        "radial-basis".into()
    }

    fn decode(&self, samples: &[Vec<f64>], values: &[f64], grid: GridSpec) -> Result<GridFunction> {
        let n = samples.len();
        if n == 0 {
            return GridFunction::zeros(grid.d, grid.resolution, 1, grid.domain);
        }
        let w = self.width.unwrap_or_else(|| (n as f64).powf(-1.0 / grid.d as f64));
        let kern = |a: &[f64], b: &[f64]| {
            let r: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-r / (w * w)).exp()
        };
        // small nugget keeps coincident samples solvable
        let k = DMatrix::from_fn(n, n, |i, j| kern(&samples[i], &samples[j]) + if i == j { 1e-10 } else { 0.0 });
        let rhs = DVector::from_column_slice(values);
        let coef = k
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Range("radial-basis system is singular".into()))?;
        GridFunction::from_fn(grid.d, grid.resolution, grid.domain, |x| {
            samples.iter().zip(coef.iter()).map(|(y, c)| c * kern(y, x)).sum()
        })
    }
}

/// A frozen FNO applied to the nearest-sample interpolant of the data, on the cube.
#[derive(Clone, Debug)]
pub struct FnoDecoder {
    pub params: FnoParams,
}

impl FnoDecoder {
    /// Network input built from samples on the network grid.
    pub fn encode(&self, samples: &[Vec<f64>], values: &[f64]) -> Result<GridFunction> {
        let c = self.params.config();
        NearestSample.decode(samples, values, GridSpec { d: c.d, resolution: c.resolution, domain: Domain::Cube })
    }
}

impl Decoder for FnoDecoder {
    fn name(&self) -> String {
        "fno".into()
    }

    fn decode(&self, samples: &[Vec<f64>], values: &[f64], grid: GridSpec) -> Result<GridFunction> {
        let c = self.params.config();
        if grid.domain != Domain::Cube || grid.d != c.d || c.d_in != 1 || c.d_out != 1 {
            return Err(Error::Shape("FNO decoder needs a scalar network on the cube of matching dimension".into()));
        }
        let out = forward(&self.params, &self.encode(samples, values)?)?;
        let nf = c.resolution;
        // nearest network node on the target grid
        GridFunction::from_fn(grid.d, grid.resolution, grid.domain, |x| {
            let flat = x.iter().fold(0usize, |acc, &t| acc * nf + ((t * nf as f64).round() as usize) % nf);
            out.values()[flat]
        })
    }
}

/// Errors of one decoder against both members of a fooling pair.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DecoderTrial {
    pub decoder: String,
    pub err_f: f64,
    pub err_g: f64,
    pub separation: f64,
    /// `½‖f - g‖_p`
    pub lower_bound: f64,
    pub pass: bool,
}

/// Feed the decoder the common sample values and measure both errors in `L^p`.
pub fn decoder_trial(pair: &FoolingPair, samples: &[Vec<f64>], decoder: &dyn Decoder) -> Result<DecoderTrial> {
    let vf: Vec<f64> = samples.iter().map(|y| pair.witness.eval_f(y)).collect();
    let vg: Vec<f64> = samples.iter().map(|y| pair.witness.eval_g(y)).collect();
    if vf != vg {
        return Err(Error::Range("fooling pair differs on a sample".into()));
    }
    let recon = decoder.decode(samples, &vf, GridSpec::of(&pair.f))?;
    let metric = NormSpec::Lp { p: pair.certificate.p };
    let err_f = lp_distance(&pair.f, &recon, &metric)?;
    let err_g = lp_distance(&pair.g, &recon, &metric)?;
    let separation = pair.certificate.measured_separation;
    let lower_bound = 0.5 * separation;
    Ok(DecoderTrial {
        decoder: decoder.name(),
        err_f,
        err_g,
        separation,
        lower_bound,
        pass: err_f.max(err_g) >= lower_bound - 1e-9,
    })
}
