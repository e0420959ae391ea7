use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Domain, GridFunction};
use crate::{Error, Result};

/// A Lebesgue exponent; infinity is a state of its own, never a float in arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        }
    }

    /// Hölder conjugate.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    fn check(self) -> Result<()> {
        match self {
            Exponent::Finite(p) if !(p >= 1.0 && p.is_finite()) => Err(Error::Range(format!("exponent {p} < 1"))),
            _ => Ok(()),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Exponent::Finite(p)),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => Ok(Exponent::Infinity),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad exponent {t:?}"))),
        }
    }
}

/// Which norm to measure in.
///
/// On a `Gaussian` grid every Lebesgue-type norm is the `ρ_d`-weighted one, since the
/// nodes are transported midpoints. `L2Mu` is the weighted L² norm and insists on that
/// domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NormSpec {
    Lp { p: Exponent },
    Wkq { k: usize, q: Exponent },
    Ck { k: usize },
    L2mu,
}

impl NormSpec {
    pub fn lp(p: f64) -> Self {
        NormSpec::Lp { p: Exponent::Finite(p) }
    }

    pub fn sup() -> Self {
        NormSpec::Lp { p: Exponent::Infinity }
    }

    pub fn l2() -> Self {
        NormSpec::lp(2.0)
    }
}

/// All multi-indices in `d` variables with `|ν|_1 <= k`, in graded lexicographic order.
pub fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for order in 0..=k {
        let mut cur = vec![0; d];
        compositions(order, 0, &mut cur, &mut out);
    }
    out
}

fn compositions(rest: usize, axis: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if axis + 1 == cur.len() {
        cur[axis] = rest;
        out.push(cur.clone());
        return;
    }
    for v in (0..=rest).rev() {
        cur[axis] = v;
        compositions(rest - v, axis + 1, cur, out);
    }
    cur[axis] = 0;
}

fn single_channel(f: &GridFunction) -> Result<()> {
    if f.channels() != 1 {
        return Err(Error::Shape(format!("expected one channel, got {}", f.channels())));
    }
    Ok(())
}

fn lebesgue(values: &[f64], p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        Exponent::Finite(p) => {
            let n = values.len() as f64;
            if p == 2.0 {
                (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt()
            } else if p == 1.0 {
                values.iter().map(|v| v.abs()).sum::<f64>() / n
            } else {
                (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / n).powf(1.0 / p)
            }
        }
    }
}

/// Norm of a single-channel function.
///
/// Riemann sum with weight `N^{-d}` for Lebesgue norms, grid maximum for sup-type norms,
/// and finite-difference derivatives for `W^{k,q}` and `C^k`.
pub fn norm(f: &GridFunction, spec: &NormSpec) -> Result<f64> {
    single_channel(f)?;
    match *spec {
        NormSpec::Lp { p } => {
            p.check()?;
            Ok(lebesgue(f.values(), p))
        }
        NormSpec::L2mu => {
            if f.domain() != Domain::Gaussian {
                return Err(Error::Domain("L2mu needs a gaussian-ambient function".into()));
            }
            Ok(lebesgue(f.values(), Exponent::Finite(2.0)))
        }
        NormSpec::Ck { k } => {
            let mut best = 0.0f64;
            for nu in multi_indices(f.dim(), k) {
                let g = finite_diff_derivative(f, &nu)?;
                best = best.max(lebesgue(g.values(), Exponent::Infinity));
            }
            Ok(best)
        }
        NormSpec::Wkq { k, q } => {
            q.check()?;
            let mut acc = 0.0f64;
            for nu in multi_indices(f.dim(), k) {
                let g = finite_diff_derivative(f, &nu)?;
                let v = lebesgue(g.values(), q);
                acc = match q {
                    Exponent::Infinity => acc.max(v),
                    Exponent::Finite(q) => acc + v.powf(q),
                };
            }
            Ok(match q {
                Exponent::Infinity => acc,
                Exponent::Finite(q) => acc.powf(1.0 / q),
            })
        }
    }
}

/// Discrete L² norm summed over all channels, `(N^{-d} Σ_c Σ_x f_c(x)²)^{1/2}`.
pub fn l2(f: &GridFunction) -> f64 {
    (f.values().iter().map(|v| v * v).sum::<f64>() / f.points() as f64).sqrt()
}

/// `l2(f - g)` for multi-channel functions of equal shape.
pub fn l2_distance(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.same_shape(g)?;
    let s: f64 = f.values().iter().zip(g.values()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((s / f.points() as f64).sqrt())
}

/// `norm(f - g)`.
pub fn lp_distance(f: &GridFunction, g: &GridFunction, spec: &NormSpec) -> Result<f64> {
    norm(&f.sub(g)?, spec)
}

/// Finite-difference surrogate of `D^ν f`.
///
/// Cube: the centered stencil `(f_{i+1} - f_{i-1})/(2h)` applied `ν_i` times along axis
/// `i`, periodic. Gaussian: three-point non-uniform first derivative on the ambient
/// nodes, one-sided at the two ends, applied the same way.
pub fn finite_diff_derivative(f: &GridFunction, nu: &[usize]) -> Result<GridFunction> {
    single_channel(f)?;
    if nu.len() != f.dim() {
        return Err(Error::Shape(format!("multi-index of length {} for dimension {}", nu.len(), f.dim())));
    }
    let order: usize = nu.iter().sum();
    if order > 4 {
        return Err(Error::Range(format!("derivative order {order} > 4")));
    }
    if order == 0 {
        return Ok(f.clone());
    }
    let n = f.resolution();
    if n < 8 {
        return Err(Error::Range(format!("resolution {n} < 8 for finite differences")));
    }
    let nodes = f.nodes();
    let mut values = f.values().to_vec();
    let mut line = vec![0.0; n];
    let mut out = vec![0.0; n];
    for (axis, &times) in nu.iter().enumerate() {
        let stride = n.pow((f.dim() - 1 - axis) as u32);
        for _ in 0..times {
            for start in line_starts(f.points(), n, stride) {
                for i in 0..n {
                    line[i] = values[start + i * stride];
                }
                match f.domain() {
                    Domain::Cube => centered_periodic(&line, &mut out),
                    Domain::Gaussian => nonuniform(&line, &nodes, &mut out),
                }
                for i in 0..n {
                    values[start + i * stride] = out[i];
                }
            }
        }
    }
    GridFunction::new(f.dim(), n, 1, f.domain(), values)
}

fn line_starts(points: usize, n: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..points).filter(move |&flat| (flat / stride) % n == 0)
}

fn centered_periodic(line: &[f64], out: &mut [f64]) {
    let n = line.len();
    let inv = n as f64 / 2.0;
    for i in 0..n {
        out[i] = (line[(i + 1) % n] - line[(i + n - 1) % n]) * inv;
    }
}

fn nonuniform(line: &[f64], x: &[f64], out: &mut [f64]) {
    let n = line.len();
    for i in 1..n - 1 {
        let h1 = x[i] - x[i - 1];
        let h2 = x[i + 1] - x[i];
        out[i] = -h2 / (h1 * (h1 + h2)) * line[i - 1] + (h2 - h1) / (h1 * h2) * line[i] + h1 / (h2 * (h1 + h2)) * line[i + 1];
    }
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    out[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * line[0] + (h1 + h2) / (h1 * h2) * line[1] - h1 / (h2 * (h1 + h2)) * line[2];
    let (h1, h2) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
    out[n - 1] = h2 / (h1 * (h1 + h2)) * line[n - 3] - (h1 + h2) / (h1 * h2) * line[n - 2] + (2.0 * h2 + h1) / (h2 * (h1 + h2)) * line[n - 1];
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(n: usize) -> GridFunction {
        GridFunction::from_fn(1, n, Domain::Cube, |x| (2.0 * PI * x[0]).sin()).unwrap()
    }

    #[test]
    fn constant_has_unit_l2_norm() {
        let f = GridFunction::from_fn(2, 16, Domain::Cube, |_| 1.0).unwrap();
        assert_eq!(norm(&f, &NormSpec::l2()).unwrap(), 1.0);
    }

    #[test]
    fn sine_norms() {
        // oracle: int_0^1 sin^2 = 1/2; C^1 norm is max(1, 2π) = 2π
        let f = sine(256);
        let l2 = norm(&f, &NormSpec::l2()).unwrap();
        assert!((l2 - 0.5f64.sqrt()).abs() < 1e-6);
        let c1 = norm(&f, &NormSpec::Ck { k: 1 }).unwrap();
        assert!((c1 - 2.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn derivative_of_sine() {
        let f = sine(256);
        let d = finite_diff_derivative(&f, &[1]).unwrap();
        for (i, v) in d.values().iter().enumerate() {
            let x = i as f64 / 256.0;
            assert!((v - 2.0 * PI * (2.0 * PI * x).cos()).abs() < 1e-3);
        }
    }

    #[test]
    fn mixed_derivative_2d() {
        let f = GridFunction::from_fn(2, 256, Domain::Cube, |x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin()).unwrap();
        let d = finite_diff_derivative(&f, &[1, 1]).unwrap();
        for flat in (0..d.points()).step_by(97) {
            let x = d.point(flat);
            let exact = 4.0 * PI * PI * (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos();
            assert!((d.values()[flat] - exact).abs() < 1e-2);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let f = GridFunction::from_fn(2, 8, Domain::Cube, |_| 3.5).unwrap();
        for nu in multi_indices(2, 4).into_iter().skip(1) {
            assert!(finite_diff_derivative(&f, &nu).unwrap().values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rejects_high_order_and_coarse_grids() {
        let f = sine(16);
        assert!(finite_diff_derivative(&f, &[5]).is_err());
        assert!(finite_diff_derivative(&sine(4), &[1]).is_err());
        assert!(norm(&f, &NormSpec::L2mu).is_err());
    }

    #[test]
    fn distance_cases() {
        let f = sine(256);
        let zero = GridFunction::zeros(1, 256, 1, Domain::Cube).unwrap();
        let one = zero.map(|_| 1.0).unwrap();
        assert_eq!(lp_distance(&f, &f, &NormSpec::l2()).unwrap(), 0.0);
        assert_eq!(lp_distance(&one, &zero, &NormSpec::sup()).unwrap(), 1.0);
        let d = lp_distance(&f, &zero, &NormSpec::l2()).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-6);
        assert!(lp_distance(&f, &sine(128), &NormSpec::l2()).is_err());
    }

    #[test]
    fn gaussian_derivative_of_quadratic_is_exact() {
        let f = GridFunction::from_fn(1, 32, Domain::Gaussian, |x| x[0] * x[0]).unwrap();
        let d = finite_diff_derivative(&f, &[1]).unwrap();
        for (i, x) in f.nodes().iter().enumerate() {
            assert!((d.values()[i] - 2.0 * x).abs() < 1e-9);
        }
    }

    #[test]
    fn multi_index_count() {
        // sum_{j<=k} C(d-1+j, d-1)
        assert_eq!(multi_indices(2, 3).len(), 10);
        assert_eq!(multi_indices(3, 2).len(), 10);
        assert_eq!(multi_indices(1, 4).len(), 5);
    }

    #[test]
    fn exponent_json() {
        let s: NormSpec = serde_json::from_str(r#"{"kind":"wkq","k":1,"q":"inf"}"#).unwrap();
        assert_eq!(s, NormSpec::Wkq { k: 1, q: Exponent::Infinity });
        assert_eq!(serde_json::to_string(&NormSpec::l2()).unwrap(), r#"{"kind":"lp","p":2.0}"#);
    }
}
