//! Embedding of boundary-vanishing functions on `[0,1]^dim` into functionals on the
//! hypercube's ambient space: `ι f(u) = f(c^{-1} dim^α φ*_1(u), ...)`, with the section
//! `h(y) = (c/dim^α) Σ y_j φ_j`.

use rand::Rng;

use super::hypercube::BiorthSystem;
use crate::rng;
use crate::space::GridFunction;
use crate::{Error, Result};

pub struct EmbeddedFunctional<'a, F> {
    f: F,
    system: &'a BiorthSystem,
}

/// Wrap `f` as a functional on grid functions. `f` must vanish on the boundary of
/// `[0,1]^dim`; this is checked on 256 random boundary points.
pub fn embed_functional<F: Fn(&[f64]) -> f64>(f: F, dim: usize, system: &BiorthSystem) -> Result<EmbeddedFunctional<'_, F>> {
    if system.n != dim {
        return Err(Error::Shape(format!("function on [0,1]^{dim} against a system of dimension {}", system.n)));
    }
    let mut rng = rng::stream(0, "embed-boundary", dim as u64);
    for _ in 0..256 {
        let mut y: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
        let axis = rng.gen_range(0..dim);
        y[axis] = if rng.gen::<bool>() { 0.0 } else { 1.0 };
        let v = f(&y);
        if v.abs() > 1e-12 {
            return Err(Error::Range(format!("f({y:?}) = {v} does not vanish on the boundary")));
        }
    }
    Ok(EmbeddedFunctional { f, system })
}

impl<F: Fn(&[f64]) -> f64> EmbeddedFunctional<'_, F> {
    fn scale(&self) -> f64 {
        (self.system.n as f64).powf(self.system.alpha) / self.system.c
    }

    /// Rescaled dual coordinates `c^{-1} dim^α φ*_j(u)`.
    pub fn coordinates(&self, u: &GridFunction) -> Result<Vec<f64>> {
        let s = self.scale();
        (0..self.system.n).map(|j| Ok(s * self.system.dual(j, u)?)).collect()
    }

    /// `ι f(u)`, with `f` extended by zero outside the cube.
    pub fn eval(&self, u: &GridFunction) -> Result<f64> {
        let y = self.coordinates(u)?;
        if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Ok(0.0);
        }
        Ok((self.f)(&y))
    }

    pub fn section(&self, y: &[f64]) -> Result<GridFunction> {
        self.system.point(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversarial::hypercube::build_trig_hypercube;
    use crate::space::Exponent;

    fn bump2(y: &[f64]) -> f64 {
        y.iter().map(|&t| (t * (1.0 - t)).max(0.0)).product::<f64>() * 16.0
    }

    #[test]
    fn round_trip() {
        let sys = build_trig_hypercube(2, 1, Exponent::Finite(2.0), 1).unwrap();
        let e = embed_functional(bump2, 2, &sys).unwrap();
        let y = [0.3, 0.7];
        let u = e.section(&y).unwrap();
        assert!((e.eval(&u).unwrap() - bump2(&y)).abs() <= 1e-10);
    }

    #[test]
    fn zero_function_and_mismatch() {
        let sys = build_trig_hypercube(3, 1, Exponent::Infinity, 1).unwrap();
        let e = embed_functional(|_: &[f64]| 0.0, 3, &sys).unwrap();
        assert_eq!(e.eval(&sys.corner().unwrap()).unwrap(), 0.0);
        assert!(embed_functional(|_: &[f64]| 0.0, 2, &sys).is_err());
        assert!(embed_functional(|_: &[f64]| 1.0, 3, &sys).is_err());
    }
}
