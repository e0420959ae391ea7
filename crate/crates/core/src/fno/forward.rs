use num_complex::Complex64;
use rayon::prelude::*;

use super::params::FnoParams;
use super::spectral::{dft_forward, mix_modes};
use crate::space::{Domain, GridFunction};
use crate::{Error, Result};

/// Intermediate values of one forward pass, kept for reverse mode.
pub(crate) struct Tape {
    /// v[0] = P u, v[l] = output of hidden layer l
    pub v: Vec<Vec<Vec<f64>>>,
    /// pre-activation of hidden layer l + 1
    pub z: Vec<Vec<Vec<f64>>>,
    /// spectrum of the input to hidden layer l + 1
    pub vhat: Vec<Vec<Vec<Complex64>>>,
    pub out: Vec<Vec<f64>>,
}

/// Hidden states and output of one forward pass.
#[derive(Clone, Debug)]
pub struct Trace {
    /// index 0 is the lifted input, index l the state after hidden layer l
    pub hidden: Vec<GridFunction>,
    pub output: GridFunction,
}

fn check_input(params: &FnoParams, u: &GridFunction) -> Result<()> {
    let c = params.config();
    if u.dim() != c.d || u.resolution() != c.resolution || u.channels() != c.d_in {
        return Err(Error::Shape(format!(
            "input (d={}, N={}, channels={}) does not match config (d={}, N={}, d_in={})",
            u.dim(),
            u.resolution(),
            u.channels(),
            c.d,
            c.resolution,
            c.d_in
        )));
    }
    if u.domain() != Domain::Cube {
        return Err(Error::Shape("FNO inputs live on the periodic cube grid".into()));
    }
    Ok(())
}

fn linear(rows: usize, cols: usize, a: impl Fn(usize, usize) -> f64, v: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let pts = v[0].len();
    (0..rows)
        .map(|i| {
            let mut out = vec![0.0; pts];
            for (j, vj) in v.iter().enumerate().take(cols) {
                let w = a(i, j);
                if w != 0.0 {
                    out.iter_mut().zip(vj).for_each(|(o, x)| *o += w * x);
                }
            }
            out
        })
        .collect()
}

fn hidden_layer(params: &FnoParams, l: usize, v: &[Vec<f64>]) -> Result<(Vec<Vec<Complex64>>, Vec<Vec<f64>>)> {
    let c = params.config();
    let table = params.modes();
    let vhat: Vec<Vec<Complex64>> = v.iter().map(|vj| dft_forward(vj, c.resolution, c.d)).collect();
    let bias = |f: usize, i: usize| params.bhat(l, f, i);
    let kv = mix_modes(&vhat, &table, c.d_c, |f, i, j| params.phat(l, f, i, j), Some(&bias))?;
    let mut z = linear(c.d_c, c.d_c, |i, j| params.w(l, i, j), v);
    for (zi, ki) in z.iter_mut().zip(kv) {
        zi.iter_mut().zip(ki).for_each(|(a, b)| *a += b);
    }
    if z.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("hidden layer {}", l + 1)));
    }
    Ok((vhat, z))
}

pub(crate) fn tape(params: &FnoParams, u: &GridFunction) -> Result<Tape> {
    check_input(params, u)?;
    let c = params.config();
    let act = c.activation;
    let input: Vec<Vec<f64>> = (0..c.d_in).map(|j| u.channel(j).to_vec()).collect();
    let mut v = vec![linear(c.d_c, c.d_in, |i, j| params.lift(i, j), &input)];
    let mut z = Vec::with_capacity(c.depth);
    let mut vhat = Vec::with_capacity(c.depth);
    for l in 0..c.depth {
        let (spec, pre) = hidden_layer(params, l, &v[l])?;
        let post = pre.iter().map(|zi| zi.iter().map(|&x| act.apply(x)).collect()).collect();
        vhat.push(spec);
        z.push(pre);
        v.push(post);
    }
    let out = linear(c.d_out, c.d_c, |o, i| params.proj(o, i), &v[c.depth]);
    if out.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("projection".into()));
    }
    Ok(Tape { v, z, vhat, out })
}

/// Ψ(u; θ) on the configuration grid.
pub fn forward(params: &FnoParams, u: &GridFunction) -> Result<GridFunction> {
    let c = params.config();
    let t = tape(params, u)?;
    GridFunction::from_channels(t.out, c.d, c.resolution, Domain::Cube)
}

/// [`forward`] over many inputs in parallel; results keep the input order.
pub fn forward_batch(params: &FnoParams, inputs: &[GridFunction]) -> Result<Vec<GridFunction>> {
    inputs.par_iter().map(|u| forward(params, u)).collect()
}

pub fn forward_trace(params: &FnoParams, u: &GridFunction) -> Result<Trace> {
    let c = params.config();
    let t = tape(params, u)?;
    let grid = |ch: Vec<Vec<f64>>| GridFunction::from_channels(ch, c.d, c.resolution, Domain::Cube);
    let hidden = t.v.into_iter().map(grid).collect::<Result<Vec<_>>>()?;
    Ok(Trace { hidden, output: grid(t.out)? })
}

/// One hidden layer σ(W v + K v + b) applied to an arbitrary d_c-channel state.
pub fn apply_layer(params: &FnoParams, layer: usize, v: &GridFunction) -> Result<GridFunction> {
    let c = params.config();
    if layer >= c.depth || v.channels() != c.d_c || v.dim() != c.d || v.resolution() != c.resolution {
        return Err(Error::Shape("hidden state does not match the configuration".into()));
    }
    let vs: Vec<Vec<f64>> = (0..c.d_c).map(|j| v.channel(j).to_vec()).collect();
    let (_, z) = hidden_layer(params, layer, &vs)?;
    let post = z.into_iter().map(|zi| zi.into_iter().map(|x| c.activation.apply(x)).collect()).collect();
    GridFunction::from_channels(post, c.d, c.resolution, Domain::Cube)
}
