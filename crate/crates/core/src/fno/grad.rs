use rayon::prelude::*;

use super::forward::tape;
use super::params::FnoParams;
use super::spectral::{dft_forward, mix_modes};
use crate::space::GridFunction;
use crate::{Error, Result};

/// Regularized empirical risk and its gradient in the flat parameter layout.
#[derive(Clone, Debug)]
pub struct RiskGradient {
    pub risk: f64,
    /// (1/n) Σ ‖Ψ(u_j) - y_j‖²
    pub data_term: f64,
    /// ω Σ max(0, ‖Ψ(u_j)‖ - 2)²
    pub penalty: f64,
    pub grad: Vec<f64>,
}

struct SampleLoss {
    data: f64,
    penalty: f64,
    /// dloss/dout, or None when only the value was requested
    g_out: Option<Vec<Vec<f64>>>,
}

fn check_target(params: &FnoParams, y: &GridFunction) -> Result<()> {
    let c = params.config();
    if y.dim() != c.d || y.resolution() != c.resolution || y.channels() != c.d_out {
        return Err(Error::Shape("target does not match the network output".into()));
    }
    Ok(())
}

fn sample_loss(out: &[Vec<f64>], y: &GridFunction, n: usize, omega: f64, want_grad: bool) -> SampleLoss {
    let w = 1.0 / out[0].len() as f64;
    let mut sq = 0.0;
    let mut nsq = 0.0;
    for (o, oc) in out.iter().enumerate() {
        for (a, b) in oc.iter().zip(y.channel(o)) {
            sq += (a - b) * (a - b);
            nsq += a * a;
        }
    }
    let norm = (w * nsq).sqrt();
    let excess = (norm - 2.0).max(0.0);
    let g_out = want_grad.then(|| {
        let a = 2.0 * w / n as f64;
        let b = if excess > 0.0 { 2.0 * omega * excess * w / norm } else { 0.0 };
        out.iter()
            .enumerate()
            .map(|(o, oc)| oc.iter().zip(y.channel(o)).map(|(p, t)| a * (p - t) + b * p).collect())
            .collect()
    });
    SampleLoss { data: w * sq / n as f64, penalty: omega * excess * excess, g_out }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sample_grad(params: &FnoParams, u: &GridFunction, y: &GridFunction, n: usize, omega: f64) -> Result<(f64, f64, Vec<f64>)> {
    check_target(params, y)?;
    let c = params.config();
    let lay = params.layout();
    let table = params.modes();
    let t = tape(params, u)?;
    let loss = sample_loss(&t.out, y, n, omega, true);
    let g_out = loss.g_out.unwrap();
    let pts = t.out[0].len() as f64;
    let mut grad = vec![0.0; lay.len()];

    let last = &t.v[c.depth];
    for o in 0..c.d_out {
        for i in 0..c.d_c {
            grad[lay.proj(o, i)] = dot(&g_out[o], &last[i]);
        }
    }
    let mut g_v: Vec<Vec<f64>> = (0..c.d_c)
        .map(|i| {
            let mut g = vec![0.0; g_out[0].len()];
            for (o, go) in g_out.iter().enumerate() {
                let q = params.proj(o, i);
                g.iter_mut().zip(go).for_each(|(a, b)| *a += q * b);
            }
            g
        })
        .collect();

    for l in (0..c.depth).rev() {
        let g_z: Vec<Vec<f64>> = g_v
            .iter()
            .zip(&t.z[l])
            .map(|(gv, z)| gv.iter().zip(z).map(|(g, &x)| g * c.activation.slope(x)).collect())
            .collect();
        let v_in = &t.v[l];
        for i in 0..c.d_c {
            for j in 0..c.d_c {
                grad[lay.w(l, i, j)] = dot(&g_z[i], &v_in[j]);
            }
        }
        let ghat: Vec<_> = g_z.iter().map(|g| dft_forward(g, c.resolution, c.d)).collect();
        for (f, mode) in table.free().iter().enumerate() {
            for i in 0..c.d_c {
                let gi = ghat[i][mode.flat].conj() * pts;
                if f == 0 {
                    grad[lay.bhat_re(l, f, i)] = gi.re;
                } else {
                    grad[lay.bhat_re(l, f, i)] = 2.0 * gi.re;
                    grad[lay.bhat_im(l, f, i)] = -2.0 * gi.im;
                }
                for j in 0..c.d_c {
                    let a = gi * t.vhat[l][j][mode.flat];
                    if f == 0 {
                        grad[lay.phat_re(l, f, i, j)] = a.re;
                    } else {
                        grad[lay.phat_re(l, f, i, j)] = 2.0 * a.re;
                        grad[lay.phat_im(l, f, i, j)] = -2.0 * a.im;
                    }
                }
            }
        }
        // adjoint of K: conjugate-transposed multipliers
        let mut prev = mix_modes(&ghat, &table, c.d_c, |f, j, i| params.phat(l, f, i, j).conj(), None)?;
        for (j, pj) in prev.iter_mut().enumerate() {
            for (i, gz) in g_z.iter().enumerate() {
                let w = params.w(l, i, j);
                pj.iter_mut().zip(gz).for_each(|(a, b)| *a += w * b);
            }
        }
        g_v = prev;
    }

    for i in 0..c.d_c {
        for j in 0..c.d_in {
            grad[lay.lift(i, j)] = dot(&g_v[i], u.channel(j));
        }
    }
    Ok((loss.data, loss.penalty, grad))
}

fn check_dataset(dataset: &[(GridFunction, GridFunction)], omega: f64) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::Domain("empty dataset".into()));
    }
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!("penalty weight {omega} must be >= 0")));
    }
    Ok(())
}

/// Risk (1/n) Σ ‖Ψ(u_j) - y_j‖² + ω Σ max(0, ‖Ψ(u_j)‖ - 2)² and its exact gradient.
/// Per-sample work runs in parallel; the reduction is sequential in dataset order.
pub fn grad_empirical_risk(params: &FnoParams, dataset: &[(GridFunction, GridFunction)], omega: f64) -> Result<RiskGradient> {
    check_dataset(dataset, omega)?;
    let n = dataset.len();
    let parts: Vec<_> = dataset
        .par_iter()
        .map(|(u, y)| sample_grad(params, u, y, n, omega))
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; params.layout().len()];
    let (mut data_term, mut penalty) = (0.0, 0.0);
    for (d, p, g) in parts {
        data_term += d;
        penalty += p;
        grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
    }
    let risk = data_term + penalty;
    if !risk.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("empirical risk".into()));
    }
    Ok(RiskGradient { risk, data_term, penalty, grad })
}

/// Value of the regularized risk without the gradient.
pub fn risk_value(params: &FnoParams, dataset: &[(GridFunction, GridFunction)], omega: f64) -> Result<f64> {
    check_dataset(dataset, omega)?;
    let n = dataset.len();
    let parts: Vec<f64> = dataset
        .par_iter()
        .map(|(u, y)| {
            check_target(params, y)?;
            let t = tape(params, u)?;
            let l = sample_loss(&t.out, y, n, omega, false);
            Ok(l.data + l.penalty)
        })
        .collect::<Result<_>>()?;
    let risk: f64 = parts.iter().sum();
    if !risk.is_finite() {
        return Err(Error::NonFinite("empirical risk".into()));
    }
    Ok(risk)
}

/// Reverse mode against central differences at random coordinates.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GradCheck {
    pub coords: Vec<usize>,
    pub analytic: Vec<f64>,
    pub finite_diff: Vec<f64>,
    /// max |g - fd| / (1 + |g|)
    pub max_rel_error: f64,
    pub penalty_active: bool,
}

/// Random network, `samples` random input/target pairs and `coords` random coordinates,
/// all drawn from `seed`. With `omega > 0` the projection is inflated so the output-norm
/// penalty is active.
pub fn gradient_check(config: &super::FnoConfig, samples: usize, coords: usize, omega: f64, h: f64, seed: u64) -> Result<GradCheck> {
    use rand::Rng;
    config.validate()?;
    let mut rng = crate::rng::stream(seed, "grad-check", 0);
    let mut p = FnoParams::random(config.clone(), 0.8 * config.bound.min(1.0), &mut rng)?;
    if omega > 0.0 {
        let lay = p.layout();
        for o in 0..config.d_out {
            for i in 0..config.d_c {
                p.data_mut()[lay.proj(o, i)] = 4.0;
            }
        }
    }
    let pts = config.points();
    let mut data = Vec::with_capacity(samples);
    for _ in 0..samples {
        let u: Vec<f64> = (0..config.d_in * pts).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..config.d_out * pts).map(|_| rng.gen_range(-0.5..0.5)).collect();
        data.push((
            GridFunction::new(config.d, config.resolution, config.d_in, crate::space::Domain::Cube, u)?,
            GridFunction::new(config.d, config.resolution, config.d_out, crate::space::Domain::Cube, y)?,
        ));
    }
    let g = grad_empirical_risk(&p, &data, omega)?;
    let mut out = GradCheck { coords: Vec::new(), analytic: Vec::new(), finite_diff: Vec::new(), max_rel_error: 0.0, penalty_active: g.penalty > 0.0 };
    for _ in 0..coords {
        let i = rng.gen_range(0..g.grad.len());
        let mut a = p.clone();
        a.data_mut()[i] += h;
        let mut b = p.clone();
        b.data_mut()[i] -= h;
        let fd = (risk_value(&a, &data, omega)? - risk_value(&b, &data, omega)?) / (2.0 * h);
        out.max_rel_error = out.max_rel_error.max((g.grad[i] - fd).abs() / (1.0 + g.grad[i].abs()));
        out.coords.push(i);
        out.analytic.push(g.grad[i]);
        out.finite_diff.push(fd);
    }
    Ok(out)
}
