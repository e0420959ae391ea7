//! Bi-orthogonal systems and the α-hypercubes they span inside smoothness balls.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use super::bump::BumpFamily;
use crate::rng;
use crate::space::{norm, Domain, Exponent, GridFunction, NormSpec};
use crate::{Error, Result};

/// How dual functionals act on a grid function.
#[derive(Clone, Debug)]
pub enum DualRule {
    /// `φ*_j(u) = M0 <φ_j, u>` with the discrete L² pairing.
    InnerProduct { scale: f64 },
    /// `φ*_j(u) = u(x_j)` at the flat grid index of a bump peak.
    PointEval { flats: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct BiorthSystem {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub p: Exponent,
    /// Largest per-axis basis index plus one (trig) or subdivisions per axis (bumps).
    pub m: usize,
    pub basis: Vec<GridFunction>,
    pub duals: DualRule,
    /// Bound on the dual norms.
    pub m_bound: f64,
    /// Hypercube scale `c` at this `n`.
    pub c: f64,
    pub alpha: f64,
}

/// `t`-th 1-periodic trig function: 1, √2 cos 2πx, √2 sin 2πx, √2 cos 4πx, ...
pub fn trig1(t: usize, x: f64) -> f64 {
    if t == 0 {
        return 1.0;
    }
    let r = ((t + 1) / 2) as f64;
    if t % 2 == 1 {
        2f64.sqrt() * (2.0 * PI * r * x).cos()
    } else {
        2f64.sqrt() * (2.0 * PI * r * x).sin()
    }
}

/// First `n` tensor indices in `d` axes, ordered by largest per-axis index, then lexicographically.
pub fn trig_indices(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut m = 1usize;
    while m.pow(d as u32) < n {
        m += 1;
    }
    let mut all: Vec<Vec<usize>> = (0..m.pow(d as u32))
        .map(|flat| {
            let mut idx = vec![0; d];
            let mut rest = flat;
            for axis in (0..d).rev() {
                idx[axis] = rest % m;
                rest /= m;
            }
            idx
        })
        .collect();
    all.sort_by(|a, b| a.iter().max().cmp(&b.iter().max()).then(a.cmp(b)));
    all.truncate(n);
    all
}

pub fn trig_function(index: &[usize], resolution: usize) -> Result<GridFunction> {
    GridFunction::from_fn(index.len(), resolution, Domain::Cube, |x| {
        index.iter().zip(x).map(|(&t, &xv)| trig1(t, xv)).product()
    })
}

fn max_frequency(indices: &[Vec<usize>]) -> usize {
    indices.iter().flatten().map(|&t| (t + 1) / 2).max().unwrap_or(0)
}

fn lp(p: Exponent) -> NormSpec {
    NormSpec::Lp { p }
}

fn smoothness(s: usize, p: Exponent) -> NormSpec {
    match p {
        Exponent::Infinity => NormSpec::Ck { k: s },
        p => NormSpec::Wkq { k: s, q: p },
    }
}

/// Hypercube of dimension `n` in the unit ball of `W^{s,p}([0,1]^d)` (finite `p`, trig
/// basis, `α = s/d + 1`) or of `C^s([0,1]^d)` (`p = ∞`, bumps with point-evaluation
/// duals, `α = s/d`).
///
/// `c` is chosen so that every point `c n^{-α} Σ y_j φ_j`, `y ∈ [0,1]^n`, lies in the
/// unit ball: from the triangle inequality on discrete norms (trig), or from the
/// analytic derivative bound of disjoint bumps (sup case).
pub fn build_trig_hypercube(n: usize, s: usize, p: Exponent, d: usize) -> Result<BiorthSystem> {
    if n == 0 || n > 64 {
        return Err(Error::Range(format!("hypercube dimension {n} outside 1..=64")));
    }
    if s > 3 {
        return Err(Error::Range(format!("smoothness {s} > 3")));
    }
    if d == 0 || d > 3 {
        return Err(Error::Range(format!("domain dimension {d} outside 1..=3")));
    }
    match p {
        Exponent::Infinity => bump_system(n, s, d),
        Exponent::Finite(pv) if pv >= 1.0 => trig_system(n, s, p, d),
        Exponent::Finite(pv) => Err(Error::Range(format!("exponent {pv} < 1"))),
    }
}

fn trig_system(n: usize, s: usize, p: Exponent, d: usize) -> Result<BiorthSystem> {
    let indices = trig_indices(n, d);
    let m = indices.iter().flatten().max().unwrap() + 1;
    let resolution = (8 * max_frequency(&indices)).next_power_of_two().max(32);
    let raw: Vec<GridFunction> = indices.iter().map(|i| trig_function(i, resolution)).collect::<Result<_>>()?;
    let mut m0 = 0.0f64;
    for f in &raw {
        m0 = m0.max(norm(f, &lp(p))?);
    }
    let basis: Vec<GridFunction> = raw.iter().map(|f| f.scale(1.0 / m0)).collect::<Result<_>>()?;
    let mut dual_norm = 0.0f64;
    for f in &raw {
        dual_norm = dual_norm.max(m0 * norm(f, &lp(p.conjugate()))?);
    }
    let mut total = 0.0;
    for f in &basis {
        total += norm(f, &smoothness(s, p))?;
    }
    let alpha = s as f64 / d as f64 + 1.0;
    Ok(BiorthSystem {
        n,
        d,
        s,
        p,
        m,
        basis,
        duals: DualRule::InnerProduct { scale: m0 },
        m_bound: dual_norm,
        c: (n as f64).powf(alpha) / total,
        alpha,
    })
}

fn bump_system(n: usize, s: usize, d: usize) -> Result<BiorthSystem> {
    let mut m = 1usize;
    while m.pow(d as u32) < n {
        m += 1;
    }
    let family = BumpFamily::unchecked(d, m, 0.5, Domain::Cube)?;
    let resolution = (16 * m).next_power_of_two().max(32);
    let mut basis = Vec::with_capacity(n);
    let mut flats = Vec::with_capacity(n);
    // analytic bound on every |ν| <= s derivative; the discrete norm sits below it
    let worst = family.derivative_bound(s, s).max(1.0);
    for j in 0..n {
        let f = family.grid(j, resolution)?;
        let peak = family.peak(j);
        let flat = peak.iter().fold(0usize, |acc, &x| acc * resolution + (x * resolution as f64).round() as usize);
        flats.push(flat);
        basis.push(f);
    }
    let alpha = s as f64 / d as f64;
    Ok(BiorthSystem {
        n,
        d,
        s,
        p: Exponent::Infinity,
        m,
        basis,
        duals: DualRule::PointEval { flats },
        m_bound: 1.0,
        c: (n as f64).powf(alpha) / worst,
        alpha,
    })
}

impl BiorthSystem {
    pub fn resolution(&self) -> usize {
        self.basis[0].resolution()
    }

    pub fn dual(&self, j: usize, u: &GridFunction) -> Result<f64> {
        match &self.duals {
            DualRule::InnerProduct { scale } => Ok(scale * scale * self.basis[j].inner(u)?),
            DualRule::PointEval { flats } => {
                self.basis[j].same_shape(u)?;
                Ok(u.values()[flats[j]])
            }
        }
    }

    /// Matrix `φ*_k(φ_j)`.
    pub fn gram(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.n).map(|k| (0..self.n).map(|j| self.dual(k, &self.basis[j])).collect()).collect()
    }

    pub fn biorth_error(&self) -> Result<f64> {
        let g = self.gram()?;
        let mut e = 0.0f64;
        for (k, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                e = e.max((v - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        Ok(e)
    }

    /// `c n^{-α} Σ y_j φ_j`.
    pub fn point(&self, y: &[f64]) -> Result<GridFunction> {
        if y.len() != self.n {
            return Err(Error::Shape(format!("{} coordinates for a system of dimension {}", y.len(), self.n)));
        }
        let w = self.c / (self.n as f64).powf(self.alpha);
        let mut values = vec![0.0; self.basis[0].points()];
        for (b, &yj) in self.basis.iter().zip(y) {
            for (v, bv) in values.iter_mut().zip(b.values()) {
                *v += w * yj * bv;
            }
        }
        GridFunction::new(self.d, self.resolution(), 1, Domain::Cube, values)
    }

    pub fn corner(&self) -> Result<GridFunction> {
        self.point(&vec![1.0; self.n])
    }

    pub fn smoothness_norm(&self, f: &GridFunction) -> Result<f64> {
        norm(f, &smoothness(self.s, self.p))
    }

    pub fn basis_norms(&self) -> Result<Vec<f64>> {
        self.basis.iter().map(|f| norm(f, &lp(self.p))).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BernsteinReport {
    pub degree: usize,
    pub trials: usize,
    /// Largest observed `||f||_{W^{s,p}} / (m^s ||f||_{L^p})`.
    pub constant: f64,
}

/// Random trig polynomials in the span of the first `m^d` tensor modes; records the
/// Bernstein ratio `||f||_{W^{s,p}} / (m^s ||f||_p)`.
pub fn bernstein_check(m: usize, s: usize, p: Exponent, d: usize, trials: usize, seed: u64) -> Result<BernsteinReport> {
    let indices = trig_indices(m.pow(d as u32), d);
    let resolution = (8 * max_frequency(&indices)).next_power_of_two().max(32);
    let basis: Vec<GridFunction> = indices.iter().map(|i| trig_function(i, resolution)).collect::<Result<_>>()?;
    let mut rng = rng::stream(seed, "bernstein", 0);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut values = vec![0.0; basis[0].points()];
        for b in &basis {
            let a: f64 = rng.gen_range(-1.0..1.0);
            for (v, bv) in values.iter_mut().zip(b.values()) {
                *v += a * bv;
            }
        }
        let f = GridFunction::new(d, resolution, 1, Domain::Cube, values)?;
        let ratio = norm(&f, &smoothness(s, p))? / ((m as f64).powi(s as i32) * norm(&f, &lp(p))?);
        worst = worst.max(ratio);
    }
    Ok(BernsteinReport { degree: m, trials, constant: worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_element_system_is_identity() {
        let sys = build_trig_hypercube(2, 1, Exponent::Finite(2.0), 1).unwrap();
        let g = sys.gram().unwrap();
        assert!((g[0][0] - 1.0).abs() < 1e-8 && (g[1][1] - 1.0).abs() < 1e-8);
        assert!(g[0][1].abs() < 1e-8 && g[1][0].abs() < 1e-8);
    }

    #[test]
    fn corner_in_unit_ball() {
        let sys = build_trig_hypercube(5, 1, Exponent::Finite(2.0), 1).unwrap();
        let corner = sys.corner().unwrap();
        assert!(sys.smoothness_norm(&corner).unwrap() <= 1.0 + 1e-6);
        assert!(sys.basis_norms().unwrap().iter().all(|&v| v <= 1.0 + 1e-8));
    }

    #[test]
    fn sup_case_uses_point_duals() {
        let sys = build_trig_hypercube(4, 2, Exponent::Infinity, 2).unwrap();
        assert!(matches!(sys.duals, DualRule::PointEval { .. }));
        assert!(sys.biorth_error().unwrap() == 0.0);
        assert!(sys.smoothness_norm(&sys.corner().unwrap()).unwrap() <= 1.0 + 1e-6);
    }

    #[test]
    fn index_order() {
        assert_eq!(trig_indices(4, 2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(trig_indices(3, 1), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn out_of_range() {
        assert!(build_trig_hypercube(65, 1, Exponent::Finite(2.0), 1).is_err());
        assert!(build_trig_hypercube(4, 4, Exponent::Finite(2.0), 1).is_err());
    }
}
