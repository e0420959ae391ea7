use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversarial::hypercube::{trig1, trig_indices};
use crate::rng;
use crate::space::{Domain, GridFunction};
use crate::{Error, Result};

/// Input law μ: `u = Σ_{j<=J} j^{-α} y_j φ_j` with `y_j` iid uniform on [-1, 1] and `φ_j`
/// the orthonormal trig functions on the periodic cube ordered by frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub d: usize,
    pub resolution: usize,
    pub alpha: f64,
    pub j_max: usize,
    pub seed: u64,
}

impl MeasureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > 3 || self.j_max == 0 {
            return Err(Error::Range("need d in 1..=3 and j_max >= 1".into()));
        }
        if !(self.alpha > 0.5) || !self.alpha.is_finite() {
            return Err(Error::Range(format!("decay exponent {} must exceed 1/2", self.alpha)));
        }
        if !self.resolution.is_power_of_two() || self.resolution < 2 {
            return Err(Error::Shape(format!("resolution {} is not a power of two", self.resolution)));
        }
        // discrete orthonormality needs every frequency strictly below N/2
        let top = self.indices().iter().flatten().map(|&t| (t + 1) / 2).max().unwrap_or(0);
        if 2 * top >= self.resolution {
            return Err(Error::Range(format!("frequency {top} is not resolved on N = {}", self.resolution)));
        }
        Ok(())
    }

    pub fn indices(&self) -> Vec<Vec<usize>> {
        trig_indices(self.j_max, self.d)
    }

    /// Weights `j^{-α}`, j = 1..J.
    pub fn weights(&self) -> Vec<f64> {
        (1..=self.j_max).map(|j| (j as f64).powf(-self.alpha)).collect()
    }

    /// M = Σ j^{-α} ‖φ_j‖, with ‖φ_j‖ = 1.
    pub fn norm_bound(&self) -> f64 {
        self.weights().iter().sum()
    }

    /// E‖u‖² = Σ j^{-2α} E[y²] = Σ j^{-2α} / 3.
    pub fn second_moment(&self) -> f64 {
        self.weights().iter().map(|w| w * w / 3.0).sum()
    }

    pub fn basis(&self) -> Result<Vec<GridFunction>> {
        let n = self.resolution;
        self.indices()
            .iter()
            .map(|idx| GridFunction::from_fn(self.d, n, Domain::Cube, |x| idx.iter().zip(x).map(|(&t, &v)| trig1(t, v)).product()))
            .collect()
    }

    /// Coefficients `y` of sample `index` under stream `label`.
    pub fn coefficients(&self, label: &str, index: u64) -> Vec<f64> {
        let mut r = rng::stream(self.seed, label, index);
        (0..self.j_max).map(|_| r.gen_range(-1.0..=1.0)).collect()
    }

    pub fn synthesize(&self, basis: &[GridFunction], y: &[f64]) -> Result<GridFunction> {
        let mut values = vec![0.0; basis[0].points()];
        for ((b, w), yj) in basis.iter().zip(self.weights()).zip(y) {
            for (v, bv) in values.iter_mut().zip(b.values()) {
                *v += w * yj * bv;
            }
        }
        GridFunction::new(self.d, self.resolution, 1, Domain::Cube, values)
    }

    /// Project onto the basis and undo the weights: recovers `y`.
    pub fn analyze(&self, basis: &[GridFunction], u: &GridFunction) -> Result<Vec<f64>> {
        basis.iter().zip(self.weights()).map(|(b, w)| Ok(b.inner(u)? / w)).collect()
    }
}

/// Samples `start..start+count` of the stream `label`; each is reproducible from (seed, label, index).
pub fn sample_stream(spec: &MeasureSpec, label: &str, start: u64, count: usize) -> Result<Vec<GridFunction>> {
    spec.validate()?;
    let basis = spec.basis()?;
    (0..count as u64).map(|i| spec.synthesize(&basis, &spec.coefficients(label, start + i))).collect()
}

/// The first `count` draws from μ.
pub fn sample_inputs(spec: &MeasureSpec, count: usize) -> Result<Vec<GridFunction>> {
    sample_stream(spec, "inputs", 0, count)
}
