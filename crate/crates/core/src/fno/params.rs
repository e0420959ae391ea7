use num_complex::Complex64;
use rand::Rng;

use super::config::FnoConfig;
use super::modes::ModeTable;
use crate::{Error, Result};

/// Offsets into the flat parameter vector.
///
/// Canonical order: P; per layer W, P̂ real parts (all free modes), P̂ imaginary parts
/// (non-zero free modes), b̂ real, b̂ imaginary; then Q. Matrices are row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    d_in: usize,
    d_out: usize,
    d_c: usize,
    depth: usize,
    n_free: usize,
}

/// One coordinate of θ for the sup norm: a real entry or a complex (re, im) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entry {
    Real(usize),
    Complex(usize, usize),
}

impl ParamLayout {
    pub fn new(config: &FnoConfig) -> Self {
        let side = 2 * config.kappa - 1;
        let n_free = (side.pow(config.d as u32) + 1) / 2;
        ParamLayout { d_in: config.d_in, d_out: config.d_out, d_c: config.d_c, depth: config.depth, n_free }
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    fn lift_len(&self) -> usize {
        self.d_c * self.d_in
    }

    fn layer_len(&self) -> usize {
        let c2 = self.d_c * self.d_c;
        c2 + (2 * self.n_free - 1) * c2 + (2 * self.n_free - 1) * self.d_c
    }

    pub fn len(&self) -> usize {
        self.lift_len() + self.depth * self.layer_len() + self.d_out * self.d_c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lift(&self, i: usize, j: usize) -> usize {
        i * self.d_in + j
    }

    fn base(&self, l: usize) -> usize {
        self.lift_len() + l * self.layer_len()
    }

    pub fn w(&self, l: usize, i: usize, j: usize) -> usize {
        self.base(l) + i * self.d_c + j
    }

    pub fn phat_re(&self, l: usize, f: usize, i: usize, j: usize) -> usize {
        let c = self.d_c;
        self.base(l) + c * c + (f * c + i) * c + j
    }

    /// Only for non-zero modes (`f >= 1`).
    pub fn phat_im(&self, l: usize, f: usize, i: usize, j: usize) -> usize {
        debug_assert!(f >= 1);
        let c = self.d_c;
        self.base(l) + c * c + self.n_free * c * c + ((f - 1) * c + i) * c + j
    }

    pub fn bhat_re(&self, l: usize, f: usize, i: usize) -> usize {
        let c = self.d_c;
        self.base(l) + (2 * self.n_free) * c * c + f * c + i
    }

    pub fn bhat_im(&self, l: usize, f: usize, i: usize) -> usize {
        debug_assert!(f >= 1);
        let c = self.d_c;
        self.base(l) + (2 * self.n_free) * c * c + self.n_free * c + (f - 1) * c + i
    }

    pub fn proj(&self, o: usize, i: usize) -> usize {
        self.lift_len() + self.depth * self.layer_len() + o * self.d_c + i
    }

    /// Every coordinate of θ exactly once.
    pub fn entries(&self) -> Vec<Entry> {
        let c = self.d_c;
        let mut out = Vec::with_capacity(self.len());
        for i in 0..c {
            for j in 0..self.d_in {
                out.push(Entry::Real(self.lift(i, j)));
            }
        }
        for l in 0..self.depth {
            for i in 0..c {
                for j in 0..c {
                    out.push(Entry::Real(self.w(l, i, j)));
                }
            }
            for f in 0..self.n_free {
                for i in 0..c {
                    for j in 0..c {
                        out.push(if f == 0 {
                            Entry::Real(self.phat_re(l, f, i, j))
                        } else {
                            Entry::Complex(self.phat_re(l, f, i, j), self.phat_im(l, f, i, j))
                        });
                    }
                }
            }
            for f in 0..self.n_free {
                for i in 0..c {
                    out.push(if f == 0 {
                        Entry::Real(self.bhat_re(l, f, i))
                    } else {
                        Entry::Complex(self.bhat_re(l, f, i), self.bhat_im(l, f, i))
                    });
                }
            }
        }
        for o in 0..self.d_out {
            for i in 0..c {
                out.push(Entry::Real(self.proj(o, i)));
            }
        }
        out
    }
}

/// Parameters θ of one FNO, stored flat in the canonical order of [`ParamLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct FnoParams {
    config: FnoConfig,
    data: Vec<f64>,
}

impl FnoParams {
    pub fn from_vec(config: FnoConfig, data: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let len = ParamLayout::new(&config).len();
        if data.len() != len {
            return Err(Error::Shape(format!("expected {len} parameters, got {}", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameter vector".into()));
        }
        Ok(FnoParams { config, data })
    }

    pub fn zeros(config: FnoConfig) -> Result<Self> {
        let len = ParamLayout::new(&config).len();
        Self::from_vec(config, vec![0.0; len])
    }

    /// Uniform draw with every entry of modulus at most `scale`.
    pub fn random<R: Rng>(config: FnoConfig, scale: f64, rng: &mut R) -> Result<Self> {
        let layout = ParamLayout::new(&config);
        let mut data = vec![0.0; layout.len()];
        for e in layout.entries() {
            match e {
                Entry::Real(i) => data[i] = rng.gen_range(-scale..=scale),
                Entry::Complex(r, i) => {
                    let (a, b): (f64, f64) = (rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale));
                    let m = a.hypot(b);
                    let s = if m > scale { scale / m } else { 1.0 };
                    data[r] = a * s;
                    data[i] = b * s;
                }
            }
        }
        Self::from_vec(config, data)
    }

    pub fn config(&self) -> &FnoConfig {
        &self.config
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(&self.config)
    }

    pub fn modes(&self) -> ModeTable {
        ModeTable::new(self.config.d, self.config.kappa, self.config.resolution)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn with_config(&self, config: FnoConfig) -> Result<Self> {
        Self::from_vec(config, self.data.clone())
    }

    pub fn lift(&self, i: usize, j: usize) -> f64 {
        self.data[self.layout().lift(i, j)]
    }

    pub fn w(&self, l: usize, i: usize, j: usize) -> f64 {
        self.data[self.layout().w(l, i, j)]
    }

    pub fn phat(&self, l: usize, f: usize, i: usize, j: usize) -> Complex64 {
        let lay = self.layout();
        let re = self.data[lay.phat_re(l, f, i, j)];
        let im = if f == 0 { 0.0 } else { self.data[lay.phat_im(l, f, i, j)] };
        Complex64::new(re, im)
    }

    pub fn bhat(&self, l: usize, f: usize, i: usize) -> Complex64 {
        let lay = self.layout();
        let re = self.data[lay.bhat_re(l, f, i)];
        let im = if f == 0 { 0.0 } else { self.data[lay.bhat_im(l, f, i)] };
        Complex64::new(re, im)
    }

    pub fn proj(&self, o: usize, i: usize) -> f64 {
        self.data[self.layout().proj(o, i)]
    }

    /// Largest real entry or complex modulus.
    pub fn norm_inf(&self) -> f64 {
        entry_sup(&self.layout(), |i| self.data[i])
    }

    pub fn distance_inf(&self, other: &FnoParams) -> Result<f64> {
        if self.config != other.config {
            return Err(Error::Shape("parameter sets of different architectures".into()));
        }
        Ok(entry_sup(&self.layout(), |i| self.data[i] - other.data[i]))
    }
}

fn entry_sup(layout: &ParamLayout, v: impl Fn(usize) -> f64) -> f64 {
    layout
        .entries()
        .into_iter()
        .map(|e| match e {
            Entry::Real(i) => v(i).abs(),
            Entry::Complex(r, i) => v(r).hypot(v(i)),
        })
        .fold(0.0, f64::max)
}

/// Feasibility projection onto ‖θ‖_inf <= B: real entries are clamped, complex entries
/// are scaled radially. Hermitian symmetry holds by construction of the free layout.
pub fn project_params(params: &FnoParams, bound: f64) -> FnoParams {
    let mut out = params.clone();
    for e in params.layout().entries() {
        match e {
            Entry::Real(i) => out.data[i] = out.data[i].clamp(-bound, bound),
            Entry::Complex(r, i) => {
                let m = out.data[r].hypot(out.data[i]);
                if m > bound {
                    let (a, b) = (out.data[r], out.data[i]);
                    let mut s = bound / m;
                    // rounding can leave the modulus a hair above the bound
                    while (a * s).hypot(b * s) > bound {
                        s *= 1.0 - f64::EPSILON;
                    }
                    out.data[r] = a * s;
                    out.data[i] = b * s;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fno::param_count;
    use rand::SeedableRng;

    #[test]
    fn layout_covers_every_slot_once() {
        for kappa in 1..=3 {
            for d in 1..=2 {
                let c = FnoConfig { d, d_in: 1, d_out: 2, d_c: 3, kappa, depth: 2, bound: 1.0, resolution: 8, activation: Default::default() };
                let lay = ParamLayout::new(&c);
                let mut seen = vec![0; lay.len()];
                for e in lay.entries() {
                    match e {
                        Entry::Real(i) => seen[i] += 1,
                        Entry::Complex(r, i) => {
                            seen[r] += 1;
                            seen[i] += 1
                        }
                    }
                }
                assert!(seen.iter().all(|&s| s == 1));
                assert_eq!(lay.len() as u64, param_count(&c).exact);
            }
        }
    }

    #[test]
    fn projection_clamps_and_is_idempotent() {
        let c = FnoConfig::tiny(2, 2, 1, 8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = FnoParams::random(c, 3.0, &mut rng).unwrap();
        let q = project_params(&p, 1.0);
        assert!(q.norm_inf() <= 1.0 + 1e-15);
        assert_eq!(project_params(&q, 1.0), q);
        let mut r = FnoParams::zeros(FnoConfig::tiny(2, 2, 1, 8)).unwrap();
        r.data_mut()[0] = 2.0;
        assert_eq!(project_params(&r, 1.0).data()[0], 1.0);
    }
}
