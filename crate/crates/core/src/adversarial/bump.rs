//! Smooth plateau bumps and the cube partition built from them.

use std::sync::OnceLock;

use super::transport::{xi, xi_deriv, xi_inv};
use crate::space::{Domain, GridFunction};
use crate::{Error, Result};

/// Highest derivative order carried by the evaluators.
pub const MAX_ORDER: usize = 4;

/// ψ(t) = e·exp(-1/(1-t²)) and its first four derivatives, for |t| < 1.
///
/// With h = 1/(1-t²) and g = 1 - h, ψ = exp(g), and
/// h^(n) = n!/2 [(1-t)^{-(n+1)} + (-1)^n (1+t)^{-(n+1)}].
fn psi_derivs(t: f64) -> [f64; 5] {
    if t.abs() >= 1.0 {
        return [0.0; 5];
    }
    let psi = (-t * t / (1.0 - t * t)).exp();
    if psi == 0.0 {
        return [0.0; 5];
    }
    let a = 1.0 / (1.0 - t);
    let b = 1.0 / (1.0 + t);
    let g1 = -0.5 * (a * a - b * b);
    let g2 = -(a.powi(3) + b.powi(3));
    let g3 = -3.0 * (a.powi(4) - b.powi(4));
    let g4 = -12.0 * (a.powi(5) + b.powi(5));
    [
        psi,
        g1 * psi,
        (g2 + g1 * g1) * psi,
        (g3 + 3.0 * g1 * g2 + g1.powi(3)) * psi,
        (g4 + 4.0 * g1 * g3 + 3.0 * g2 * g2 + 6.0 * g1 * g1 * g2 + g1.powi(4)) * psi,
    ]
}

/// The one-dimensional plateau `σ_γ`: zero outside (0,1), one on
/// `[(1-γ)/2, (1+γ)/2]`, rescaled bumps in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sigma {
    gamma: f64,
}

impl Sigma {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Range(format!("gamma {gamma} outside (0,1)")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// All derivatives of order 0..=4 at `x`.
    pub fn derivs(&self, x: f64) -> [f64; 5] {
        let g = self.gamma;
        if x <= 0.0 || x >= 1.0 {
            return [0.0; 5];
        }
        let lo = 0.5 * (1.0 - g);
        let hi = 0.5 * (1.0 + g);
        if (lo..=hi).contains(&x) {
            return [1.0, 0.0, 0.0, 0.0, 0.0];
        }
        let a = 2.0 / (1.0 - g);
        // left piece maps (0, lo) onto (-1, 0); right piece maps (hi, 1) onto (0, 1)
        let t = if x < lo { a * x - 1.0 } else { a * x - (1.0 + g) / (1.0 - g) };
        let p = psi_derivs(t);
        let mut out = [0.0; 5];
        let mut s = 1.0;
        for l in 0..5 {
            out[l] = s * p[l];
            s *= a;
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivs(x)[0]
    }

    pub fn deriv(&self, x: f64, l: usize) -> f64 {
        assert!(l <= MAX_ORDER);
        self.derivs(x)[l]
    }
}

/// `β_l = 2^l sup|ψ^(l)|`, so that `sup|σ_γ^(l)| <= β_l/(1-γ)^l` for every γ.
///
/// Estimated by a dense scan of 10⁵ points, refined by golden-section search around the
/// best sample, then inflated by one part in 10⁹.
pub fn beta() -> &'static [f64; 5] {
    static BETA: OnceLock<[f64; 5]> = OnceLock::new();
    BETA.get_or_init(|| {
        let mut out = [1.0; 5];
        let samples = 100_000;
        for (l, slot) in out.iter_mut().enumerate().skip(1) {
            let f = |t: f64| psi_derivs(t)[l].abs();
            let mut best = (0.0, 0.0);
            for i in 1..samples {
                let t = -1.0 + 2.0 * i as f64 / samples as f64;
                let v = f(t);
                if v > best.1 {
                    best = (t, v);
                }
            }
            let h = 2.0 / samples as f64;
            let (mut lo, mut hi) = ((best.0 - h).max(-1.0 + 1e-15), (best.0 + h).min(1.0 - 1e-15));
            let r = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let x1 = hi - r * (hi - lo);
                let x2 = lo + r * (hi - lo);
                if f(x1) > f(x2) {
                    hi = x2;
                } else {
                    lo = x1;
                }
            }
            let refined = f(0.5 * (lo + hi)).max(best.1);
            *slot = 2f64.powi(l as i32) * refined * (1.0 + 1e-9);
        }
        out
    })
}

/// `Γ(k)`: the largest product `Π β_{ν_i}` over ways to split an order `<= k` into
/// positive parts. Bounds `sup|D^ν φ_γ| (1-γ)^k` for every `|ν|_1 <= k`, in any dimension.
pub fn gamma_const(k: usize) -> f64 {
    assert!(k <= MAX_ORDER);
    let b = beta();
    // best[s] = max product over partitions of s
    let mut best = vec![1.0f64; k + 1];
    for s in 1..=k {
        let mut v = 0.0f64;
        for first in 1..=s {
            v = v.max(b[first] * best[s - first]);
        }
        best[s] = v;
    }
    best.into_iter().fold(1.0, f64::max)
}

/// Uniform subdivision of `[0,1]^d` into `m^d` cubes `Q_j`, axis 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSpec {
    pub d: usize,
    pub m: usize,
    pub gamma: f64,
}

impl PartitionSpec {
    pub fn count(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    /// Per-axis cell index of cube `j`.
    pub fn cell(&self, j: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        let mut rest = j;
        for axis in (0..self.d).rev() {
            idx[axis] = rest % self.m;
            rest /= self.m;
        }
        idx
    }

    pub fn center(&self, j: usize) -> Vec<f64> {
        self.cell(j).iter().map(|&c| (c as f64 + 0.5) / self.m as f64).collect()
    }

    /// Shift with `φ_{γ,j}(x) = φ_γ(m(x + q_j))`: `q_j = (½𝟙 - m·center(Q_j))/m`,
    /// the negated lower corner of `Q_j`.
    pub fn offset(&self, j: usize) -> Vec<f64> {
        self.center(j).iter().map(|c| (0.5 - self.m as f64 * c) / self.m as f64).collect()
    }

    /// Cube containing a point of the closed unit cube; the lowest index wins on shared faces.
    pub fn locate(&self, y: &[f64]) -> usize {
        let mut j = 0;
        for &v in y {
            let t = v * self.m as f64;
            // lowest index on a shared face: a point exactly on i/m belongs to cell i-1
            let mut c = t.ceil() as isize - 1;
            c = c.clamp(0, self.m as isize - 1);
            j = j * self.m + c as usize;
        }
        j
    }
}

/// Bumps `φ_{γ,j}` over a partition, on the cube or transported to Gaussian space
/// (`φ̃_{γ,j} = φ_{γ,j} ∘ ξ_d`).
#[derive(Clone, Debug)]
pub struct BumpFamily {
    pub partition: PartitionSpec,
    pub domain: Domain,
    pub beta: [f64; 5],
    sigma: Sigma,
}

impl BumpFamily {
    pub fn new(d: usize, m: usize, gamma: f64, domain: Domain) -> Result<Self> {
        if d == 0 || d > 4 {
            return Err(Error::Range(format!("dimension {d} outside 1..=4")));
        }
        if m == 0 || m > 8 {
            return Err(Error::Range(format!("subdivision {m} outside 1..=8")));
        }
        if !(gamma > 0.05 && gamma < 0.95) {
            return Err(Error::Range(format!("gamma {gamma} outside (0.05, 0.95)")));
        }
        Self::unchecked(d, m, gamma, domain)
    }

    /// Same as [`BumpFamily::new`] without the desk-scale limits on `d` and `m`; used for
    /// point-evaluation witnesses that never touch a grid.
    pub fn unchecked(d: usize, m: usize, gamma: f64, domain: Domain) -> Result<Self> {
        Ok(Self { partition: PartitionSpec { d, m, gamma }, domain, beta: *beta(), sigma: Sigma::new(gamma)? })
    }

    pub fn d(&self) -> usize {
        self.partition.d
    }

    pub fn m(&self) -> usize {
        self.partition.m
    }

    pub fn gamma(&self) -> f64 {
        self.partition.gamma
    }

    pub fn count(&self) -> usize {
        self.partition.count()
    }

    pub fn sigma(&self) -> &Sigma {
        &self.sigma
    }

    /// `Γ(k) m^{|ν|}/(1-γ)^k`, the cube-domain bound on `sup|D^ν φ_{γ,j}|`.
    pub fn derivative_bound(&self, order: usize, k: usize) -> f64 {
        gamma_const(k) * (self.m() as f64).powi(order as i32) / (1.0 - self.gamma()).powi(k as i32)
    }

    /// Derivatives 0..=4 along one axis of the factor belonging to cell `c`, at coordinate `x`
    /// (cube coordinate, or ambient coordinate for the Gaussian domain).
    pub fn axis_derivs(&self, c: usize, x: f64) -> [f64; 5] {
        let m = self.m() as f64;
        match self.domain {
            Domain::Cube => {
                let s = self.sigma.derivs(m * x - c as f64);
                let mut out = [0.0; 5];
                let mut f = 1.0;
                for l in 0..5 {
                    out[l] = f * s[l];
                    f *= m;
                }
                out
            }
            Domain::Gaussian => {
                // Faà di Bruno for σ(u(x)), u = m ξ(x) - c
                let s = self.sigma.derivs(m * xi(x) - c as f64);
                let u1 = m * xi_deriv(x, 1);
                let u2 = m * xi_deriv(x, 2);
                let u3 = m * xi_deriv(x, 3);
                let u4 = m * xi_deriv(x, 4);
                [
                    s[0],
                    s[1] * u1,
                    s[2] * u1 * u1 + s[1] * u2,
                    s[3] * u1.powi(3) + 3.0 * s[2] * u1 * u2 + s[1] * u3,
                    s[4] * u1.powi(4) + 6.0 * s[3] * u1 * u1 * u2 + s[2] * (3.0 * u2 * u2 + 4.0 * u1 * u3) + s[1] * u4,
                ]
            }
        }
    }

    pub fn eval(&self, j: usize, x: &[f64]) -> f64 {
        self.deriv(j, x, &vec![0; self.d()])
    }

    pub fn deriv(&self, j: usize, x: &[f64], nu: &[usize]) -> f64 {
        let cell = self.partition.cell(j);
        let mut v = 1.0;
        for axis in 0..self.d() {
            v *= self.axis_derivs(cell[axis], x[axis])[nu[axis]];
            if v == 0.0 {
                break;
            }
        }
        v
    }

    /// One axis of bump `j` sampled on the grid nodes, for derivative order `l`.
    fn axis_table(&self, c: usize, l: usize, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.axis_derivs(c, self.domain.node(i, n))[l]).collect()
    }

    /// `D^ν φ_{γ,j}` (analytic) on the grid of resolution `n`.
    pub fn grid_deriv(&self, j: usize, nu: &[usize], n: usize) -> Result<GridFunction> {
        let cell = self.partition.cell(j);
        let tables: Vec<Vec<f64>> = (0..self.d()).map(|a| self.axis_table(cell[a], nu[a], n)).collect();
        let points = n.pow(self.d() as u32);
        let mut values = vec![0.0; points];
        for (flat, v) in values.iter_mut().enumerate() {
            let mut rest = flat;
            let mut p = 1.0;
            for axis in (0..self.d()).rev() {
                p *= tables[axis][rest % n];
                rest /= n;
            }
            *v = p;
        }
        GridFunction::new(self.d(), n, 1, self.domain, values)
    }

    pub fn grid(&self, j: usize, n: usize) -> Result<GridFunction> {
        self.grid_deriv(j, &vec![0; self.d()], n)
    }

    /// `Σ_j c_j φ_{γ,j}` on a grid, built axis by axis.
    pub fn combination(&self, coeffs: &[f64], n: usize) -> Result<GridFunction> {
        if coeffs.len() != self.count() {
            return Err(Error::Shape(format!("{} coefficients for {} bumps", coeffs.len(), self.count())));
        }
        let d = self.d();
        let points = n.pow(d as u32);
        // per axis, per cell: the factor table; cells are disjoint so each node touches one cell
        let tables: Vec<Vec<f64>> = (0..self.m()).map(|c| self.axis_table(c, 0, n)).collect();
        let owner: Vec<Option<usize>> =
            (0..n).map(|i| (0..self.m()).find(|&c| tables[c][i] != 0.0)).collect();
        let mut values = vec![0.0; points];
        for (flat, v) in values.iter_mut().enumerate() {
            let mut rest = flat;
            let mut idx = vec![0usize; d];
            for axis in (0..d).rev() {
                idx[axis] = rest % n;
                rest /= n;
            }
            let mut j = 0;
            let mut p = 1.0;
            let mut live = true;
            for &i in &idx {
                match owner[i] {
                    Some(c) => {
                        j = j * self.m() + c;
                        p *= tables[c][i];
                    }
                    None => {
                        live = false;
                        break;
                    }
                }
            }
            if live {
                *v = coeffs[j] * p;
            }
        }
        GridFunction::new(d, n, 1, self.domain, values)
    }

    /// Point in ambient coordinates where bump `j` attains 1 (its cube center, transported).
    pub fn peak(&self, j: usize) -> Vec<f64> {
        let c = self.partition.center(j);
        match self.domain {
            Domain::Cube => c,
            Domain::Gaussian => c.iter().map(|&u| xi_inv(u)).collect(),
        }
    }

    /// Bump index whose closed cell contains `x` (ambient coordinates).
    pub fn locate(&self, x: &[f64]) -> usize {
        match self.domain {
            Domain::Cube => self.partition.locate(x),
            Domain::Gaussian => self.partition.locate(&x.iter().map(|&v| xi(v)).collect::<Vec<_>>()),
        }
    }

    /// Empirical constant `H` relating transported to cube derivatives: the largest ratio
    /// `sup|D^ν φ̃_{γ,j}| / sup|D^ν φ_{γ,j}|` over `|ν|_1 <= k` and all `j`. Sups are
    /// separable, so the ratio is a product of one-dimensional scans.
    pub fn transport_constant(&self, k: usize) -> Result<f64> {
        let gauss = Self { domain: Domain::Gaussian, ..self.clone() };
        let cube = Self { domain: Domain::Cube, ..self.clone() };
        let scans = 20_000;
        let m = self.m() as f64;
        // ratio[c][l] for one axis
        let mut ratio = vec![[1.0f64; 5]; self.m()];
        for (c, r) in ratio.iter_mut().enumerate() {
            let mut sup_g = [0.0f64; 5];
            let mut sup_c = [0.0f64; 5];
            for i in 1..scans {
                let u = (c as f64 + i as f64 / scans as f64) / m;
                let x = xi_inv(u.clamp(1e-15, 1.0 - 1e-15));
                let dg = gauss.axis_derivs(c, x);
                let dc = cube.axis_derivs(c, u);
                for l in 0..=k {
                    sup_g[l] = sup_g[l].max(dg[l].abs());
                    sup_c[l] = sup_c[l].max(dc[l].abs());
                }
            }
            for l in 0..=k {
                r[l] = if sup_c[l] > 0.0 { sup_g[l] / sup_c[l] } else { 1.0 };
            }
        }
        let per_order: Vec<f64> = (0..=k).map(|l| ratio.iter().map(|r| r[l]).fold(0.0, f64::max)).collect();
        let mut h = 1.0f64;
        for nu in crate::space::multi_indices(self.d(), k) {
            h = h.max(nu.iter().map(|&l| per_order[l]).product());
        }
        Ok(h)
    }
}

/// Grid checks of a cube-domain family: disjoint supports, the L^p mass floor
/// `‖φ_{γ,j}‖_p^p >= γ^d/m^d`, and `sup|D^ν φ_{γ,j}| <= Γ(k) m^{|ν|}/(1-γ)^k` for `|ν|_1 <= k`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BumpCertificate {
    pub d: usize,
    pub m: usize,
    pub gamma: f64,
    pub k: usize,
    pub p: f64,
    pub resolution: usize,
    /// grid nodes where two bumps are nonzero at once
    pub overlaps: usize,
    pub mass_floor: f64,
    pub min_mass: f64,
    /// largest measured/bound ratio over bumps and multi-indices
    pub derivative_ratio: f64,
    pub pass: bool,
}

pub fn certify(family: &BumpFamily, k: usize, p: f64, resolution: usize) -> Result<BumpCertificate> {
    if family.domain != Domain::Cube {
        return Err(Error::Domain("certification runs on the cube".into()));
    }
    if k > MAX_ORDER || !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Range(format!("k = {k}, p = {p}")));
    }
    let n = resolution;
    let d = family.d();
    let points = n.pow(d as u32);
    let mut live = vec![0u8; points];
    let mut min_mass = f64::INFINITY;
    let mut ratio = 0.0f64;
    for j in 0..family.count() {
        let f = family.grid(j, n)?;
        let mut mass = 0.0;
        for (flat, v) in f.values().iter().enumerate() {
            if *v != 0.0 {
                live[flat] = live[flat].saturating_add(1);
            }
            mass += v.abs().powf(p);
        }
        min_mass = min_mass.min(mass / points as f64);
        for nu in crate::space::multi_indices(d, k) {
            let order: usize = nu.iter().sum();
            let sup = family.grid_deriv(j, &nu, n)?.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
            ratio = ratio.max(sup / family.derivative_bound(order, k));
        }
    }
    let overlaps = live.iter().filter(|&&c| c > 1).count();
    let mass_floor = family.gamma().powi(d as i32) / family.count() as f64;
    Ok(BumpCertificate {
        d,
        m: family.m(),
        gamma: family.gamma(),
        k,
        p,
        resolution: n,
        overlaps,
        mass_floor,
        min_mass,
        derivative_ratio: ratio,
        pass: overlaps == 0 && min_mass >= mass_floor - 1e-3 && ratio <= 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_closed_form_value() {
        // oracle: e·exp(-1/(1-t²)) at t = 2·0.125/0.5 - 1 = -0.5 gives exp(1 - 4/3)
        let s = Sigma::new(0.5).unwrap();
        assert!((s.eval(0.125) - 0.716_531_310_573_789_3).abs() < 1e-15);
        assert!((s.eval(0.875) - 0.716_531_310_573_789_3).abs() < 1e-15);
    }

    #[test]
    fn sigma_shape() {
        let s = Sigma::new(0.3).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(1.0), 0.0);
        assert_eq!(s.eval(-0.2), 0.0);
        assert_eq!(s.eval(0.35), 1.0);
        assert_eq!(s.eval(0.65), 1.0);
        for i in 0..=1000 {
            let v = s.eval(i as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn sigma_derivatives_match_differences() {
        let s = Sigma::new(0.4).unwrap();
        let h = 1e-6;
        for &x in &[0.05, 0.12, 0.22, 0.71, 0.8, 0.93] {
            let d = s.derivs(x);
            let dp = s.derivs(x + h);
            let dm = s.derivs(x - h);
            for l in 1..=4 {
                let fd = (dp[l - 1] - dm[l - 1]) / (2.0 * h);
                assert!((fd - d[l]).abs() <= 1e-5 * (1.0 + d[l].abs()), "x={x} l={l}: {fd} vs {}", d[l]);
            }
        }
    }

    #[test]
    fn derivative_sup_respects_beta() {
        for &g in &[0.1, 0.5, 0.9] {
            let s = Sigma::new(g).unwrap();
            for l in 0..=4 {
                let bound = beta()[l] / (1.0 - g).powi(l as i32);
                for i in 0..20_000 {
                    let v = s.deriv(i as f64 / 20_000.0, l).abs();
                    assert!(v <= bound, "γ={g} l={l}");
                }
            }
        }
    }

    #[test]
    fn gamma_is_max_over_partitions() {
        let b = beta();
        assert_eq!(gamma_const(0), 1.0);
        assert_eq!(gamma_const(1), b[1].max(1.0));
        let k2 = [1.0, b[1], b[2], b[1] * b[1]].into_iter().fold(0.0, f64::max);
        assert_eq!(gamma_const(2), k2);
    }

    #[test]
    fn first_bump_sits_in_first_cell() {
        let f = BumpFamily::new(1, 2, 0.5, Domain::Cube).unwrap();
        assert_eq!(f.eval(0, &[0.25]), 1.0);
        assert_eq!(f.eval(0, &[0.5]), 0.0);
        assert_eq!(f.eval(0, &[0.6]), 0.0);
        assert_eq!(f.eval(1, &[0.75]), 1.0);
        assert_eq!(f.partition.offset(1), vec![-0.5]);
    }

    #[test]
    fn locate_ties_go_low() {
        let p = PartitionSpec { d: 2, m: 4, gamma: 0.5 };
        assert_eq!(p.locate(&[0.0, 0.0]), 0);
        assert_eq!(p.locate(&[0.25, 0.3]), 1);
        assert_eq!(p.locate(&[0.26, 0.25]), 4);
        assert_eq!(p.locate(&[1.0, 1.0]), 15);
    }

    #[test]
    fn combination_matches_pointwise_sum() {
        let f = BumpFamily::new(2, 3, 0.4, Domain::Cube).unwrap();
        let coeffs: Vec<f64> = (0..9).map(|j| if j % 2 == 0 { 1.0 } else { -0.5 }).collect();
        let g = f.combination(&coeffs, 32).unwrap();
        for flat in 0..g.points() {
            let x = g.point(flat);
            let direct: f64 = (0..9).map(|j| coeffs[j] * f.eval(j, &x)).sum();
            assert!((g.values()[flat] - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn transported_derivatives_match_differences() {
        let f = BumpFamily::new(1, 3, 0.5, Domain::Gaussian).unwrap();
        let h = 1e-6;
        for &x in &[-1.1, -0.6, 0.05, 0.3, 0.9] {
            for c in 0..3 {
                let d = f.axis_derivs(c, x);
                let dp = f.axis_derivs(c, x + h);
                let dm = f.axis_derivs(c, x - h);
                for l in 1..=4 {
                    let fd = (dp[l - 1] - dm[l - 1]) / (2.0 * h);
                    assert!((fd - d[l]).abs() <= 1e-4 * (1.0 + d[l].abs()), "x={x} c={c} l={l}");
                }
            }
        }
    }
}
