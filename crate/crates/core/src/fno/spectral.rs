use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::modes::ModeTable;
use super::params::FnoParams;
use crate::space::{Domain, GridFunction};
use crate::{Error, Result};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut p = FftPlanner::new();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        })
        .clone()
}

fn transform(buf: &mut [Complex64], n: usize, d: usize, plan: &Arc<dyn Fft<f64>>) {
    let total = buf.len();
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    // last axis is contiguous
    plan.process_with_scratch(buf, &mut scratch);
    let mut line = vec![Complex64::default(); n];
    for axis in 0..d.saturating_sub(1) {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let start = outer + inner;
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = buf[start + t * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (t, v) in line.iter().enumerate() {
                    buf[start + t * stride] = *v;
                }
            }
        }
    }
}

/// Normalized forward DFT: v̂(k) = N^{-d} Σ_x v(x) e^{-2πi k·x}.
pub(crate) fn dft_forward(v: &[f64], n: usize, d: usize) -> Vec<Complex64> {
    let (fwd, _) = plans(n);
    let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform(&mut buf, n, d, &fwd);
    let s = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}

/// Synthesis v(x) = Σ_k v̂(k) e^{2πi k·x}; the imaginary residue is checked and dropped.
pub(crate) fn dft_inverse(mut spec: Vec<Complex64>, n: usize, d: usize) -> Result<Vec<f64>> {
    let (_, inv) = plans(n);
    transform(&mut spec, n, d, &inv);
    let scale = spec.iter().map(|z| z.re.abs()).fold(1.0, f64::max);
    let resid = spec.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if resid > 1e-10 * scale {
        return Err(Error::Range(format!("imaginary residue {resid:e} after synthesis")));
    }
    Ok(spec.into_iter().map(|z| z.re).collect())
}

/// Mode-wise channel mixing on the retained box. `mult(f, i, j)` is the multiplier at
/// free mode f; the partner mode -k receives its conjugate, likewise for `bias`.
pub(crate) fn mix_modes(
    vhat: &[Vec<Complex64>],
    table: &ModeTable,
    out_channels: usize,
    mult: impl Fn(usize, usize, usize) -> Complex64,
    bias: Option<&dyn Fn(usize, usize) -> Complex64>,
) -> Result<Vec<Vec<f64>>> {
    let n = table.resolution();
    let d = table.d();
    let total = n.pow(d as u32);
    let mut out = Vec::with_capacity(out_channels);
    for i in 0..out_channels {
        let mut spec = vec![Complex64::default(); total];
        for (f, mode) in table.free().iter().enumerate() {
            let mut a = Complex64::default();
            let mut b = Complex64::default();
            for (j, vj) in vhat.iter().enumerate() {
                let m = mult(f, i, j);
                a += m * vj[mode.flat];
                if f > 0 {
                    b += m.conj() * vj[mode.conj_flat];
                }
            }
            if let Some(bias) = bias {
                let c = bias(f, i);
                a += c;
                b += c.conj();
            }
            spec[mode.flat] = a;
            if f > 0 {
                spec[mode.conj_flat] = b;
            }
        }
        out.push(dft_inverse(spec, n, d)?);
    }
    Ok(out)
}

fn check_hidden(params: &FnoParams, layer: usize, v: &GridFunction) -> Result<()> {
    let c = params.config();
    if layer >= c.depth {
        return Err(Error::Shape(format!("layer {layer} of {}", c.depth)));
    }
    if v.dim() != c.d || v.resolution() != c.resolution || v.channels() != c.d_c || v.domain() != Domain::Cube {
        return Err(Error::Shape("hidden state does not match the configuration".into()));
    }
    Ok(())
}

/// K v (+ b when `with_bias`) of one hidden layer through the FFT path.
pub fn spectral_conv(params: &FnoParams, layer: usize, v: &GridFunction, with_bias: bool) -> Result<GridFunction> {
    check_hidden(params, layer, v)?;
    let c = params.config();
    let table = params.modes();
    let vhat: Vec<Vec<Complex64>> = (0..c.d_c).map(|j| dft_forward(v.channel(j), c.resolution, c.d)).collect();
    let bias = |f: usize, i: usize| params.bhat(layer, f, i);
    let out = mix_modes(
        &vhat,
        &table,
        c.d_c,
        |f, i, j| params.phat(layer, f, i, j),
        if with_bias { Some(&bias) } else { None },
    )?;
    GridFunction::from_channels(out, c.d, c.resolution, Domain::Cube)
}

/// Same as [`spectral_conv`] by direct O(N^{2d}) mode sums, no FFT.
pub fn naive_spectral_conv(params: &FnoParams, layer: usize, v: &GridFunction, with_bias: bool) -> Result<GridFunction> {
    check_hidden(params, layer, v)?;
    let c = params.config();
    let (n, d) = (c.resolution, c.d);
    let table = params.modes();
    let pts = v.points();
    let coords: Vec<Vec<i64>> = (0..pts)
        .map(|mut p| {
            let mut x = vec![0i64; d];
            for a in (0..d).rev() {
                x[a] = (p % n) as i64;
                p /= n;
            }
            x
        })
        .collect();
    let phase = |k: &[i64], x: &[i64], sign: f64| {
        let dot: i64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
        let t = sign * 2.0 * std::f64::consts::PI * (dot.rem_euclid(n as i64)) as f64 / n as f64;
        Complex64::new(t.cos(), t.sin())
    };
    let mut modes: Vec<(usize, bool, Vec<i64>)> = Vec::new();
    for (f, m) in table.free().iter().enumerate() {
        modes.push((f, false, m.k.clone()));
        if f > 0 {
            modes.push((f, true, m.k.iter().map(|c| -c).collect()));
        }
    }
    let coef: Vec<Vec<Complex64>> = (0..c.d_c)
        .map(|j| {
            modes
                .iter()
                .map(|(_, _, k)| {
                    let s: Complex64 = (0..pts).map(|p| v.channel(j)[p] * phase(k, &coords[p], -1.0)).sum();
                    s / pts as f64
                })
                .collect()
        })
        .collect();
    let mut out = vec![vec![0.0; pts]; c.d_c];
    for (i, oi) in out.iter_mut().enumerate() {
        for (mi, (f, neg, k)) in modes.iter().enumerate() {
            let mut a = Complex64::default();
            for (j, cj) in coef.iter().enumerate() {
                let m = params.phat(layer, *f, i, j);
                a += if *neg { m.conj() } else { m } * cj[mi];
            }
            if with_bias {
                let b = params.bhat(layer, *f, i);
                a += if *neg { b.conj() } else { b };
            }
            for (p, o) in oi.iter_mut().enumerate() {
                *o += (a * phase(k, &coords[p], 1.0)).re;
            }
        }
    }
    GridFunction::from_channels(out, d, n, Domain::Cube)
}

/// Bias field b(x) = Σ_k b̂_k e^{2πi k·x} of one layer.
pub fn bias_field(params: &FnoParams, layer: usize) -> Result<GridFunction> {
    let c = params.config();
    let table = params.modes();
    let zero: Vec<Vec<Complex64>> = Vec::new();
    let bias = |f: usize, i: usize| params.bhat(layer, f, i);
    let out = mix_modes(&zero, &table, c.d_c, |_, _, _| Complex64::default(), Some(&bias))?;
    GridFunction::from_channels(out, c.d, c.resolution, Domain::Cube)
}
