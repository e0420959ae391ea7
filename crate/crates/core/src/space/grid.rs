use serde::{Deserialize, Serialize};

use crate::adversarial::transport::TransportMap;
use crate::{Error, Result};

/// Where grid points live.
///
/// `Cube`: periodic grid `x_i = i/N` on `[0,1]^d`. `Gaussian`: ambient points
/// `ξ^{-1}((i+1/2)/N)` per axis, clamped to `|x| <= 6`, so that quadrature against the
/// Gaussian density is a plain midpoint mean.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Cube,
    Gaussian,
}

impl Domain {
    pub(crate) fn tag(self) -> u16 {
        match self {
            Domain::Cube => 0,
            Domain::Gaussian => 1,
        }
    }

    pub(crate) fn from_tag(tag: u16) -> Result<Self> {
        match tag {
            0 => Ok(Domain::Cube),
            1 => Ok(Domain::Gaussian),
            t => Err(Error::Corrupt(format!("unknown domain tag {t}"))),
        }
    }

    /// Coordinate of index `i` along one axis.
    pub fn node(self, i: usize, n: usize) -> f64 {
        match self {
            Domain::Cube => i as f64 / n as f64,
            Domain::Gaussian => TransportMap.node(i, n),
        }
    }
}

/// A real multi-channel function sampled on a uniform grid with `N` points per axis.
///
/// Values are stored channel by channel; inside a channel the flat index is row-major,
/// axis 0 slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    dim: usize,
    resolution: usize,
    channels: usize,
    domain: Domain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dim: usize, resolution: usize, channels: usize, domain: Domain, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || channels == 0 {
            return Err(Error::Shape("dimension and channel count must be positive".into()));
        }
        if !resolution.is_power_of_two() || resolution < 2 {
            return Err(Error::Shape(format!("resolution {resolution} is not a power of two >= 2")));
        }
        let expect = channels * resolution.pow(dim as u32);
        if values.len() != expect {
            return Err(Error::Shape(format!("expected {expect} values, got {}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("value at flat index {i}")));
        }
        Ok(Self { dim, resolution, channels, domain, values })
    }

    pub fn zeros(dim: usize, resolution: usize, channels: usize, domain: Domain) -> Result<Self> {
        let len = channels * resolution.pow(dim as u32);
        Self::new(dim, resolution, channels, domain, vec![0.0; len])
    }

    /// Single-channel function sampled from a closure of the grid point.
    pub fn from_fn(dim: usize, resolution: usize, domain: Domain, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let points = resolution.pow(dim as u32);
        let mut x = vec![0.0; dim];
        let mut values = Vec::with_capacity(points);
        for flat in 0..points {
            point_into(domain, dim, resolution, flat, &mut x);
            values.push(f(&x));
        }
        Self::new(dim, resolution, 1, domain, values)
    }

    /// Stack single-channel functions of equal shape into one multi-channel function.
    pub fn stack(parts: &[GridFunction]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Shape("nothing to stack".into()))?;
        let mut values = Vec::with_capacity(parts.len() * first.points());
        let mut channels = 0;
        for p in parts {
            if p.dim != first.dim || p.resolution != first.resolution || p.domain != first.domain {
                return Err(Error::Shape("stacked parts differ in grid".into()));
            }
            values.extend_from_slice(&p.values);
            channels += p.channels;
        }
        Self::new(first.dim, first.resolution, channels, first.domain, values)
    }

    /// Assemble from per-channel value vectors.
    pub fn from_channels(channels: Vec<Vec<f64>>, dim: usize, resolution: usize, domain: Domain) -> Result<Self> {
        let count = channels.len();
        let values: Vec<f64> = channels.into_iter().flatten().collect();
        Self::new(dim, resolution, count, domain, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Grid points per channel, `N^d`.
    pub fn points(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let p = self.points();
        &self.values[c * p..(c + 1) * p]
    }

    pub fn channel_fn(&self, c: usize) -> GridFunction {
        Self { channels: 1, values: self.channel(c).to_vec(), ..self.clone() }
    }

    /// Coordinates of the grid point with flat index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        point_into(self.domain, self.dim, self.resolution, flat, &mut x);
        x
    }

    /// Per-axis node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.resolution).map(|i| self.domain.node(i, self.resolution)).collect()
    }

    pub fn same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim
            || self.resolution != other.resolution
            || self.channels != other.channels
            || self.domain != other.domain
        {
            return Err(Error::Shape(format!(
                "({}, N={}, c={}, {:?}) vs ({}, N={}, c={}, {:?})",
                self.dim, self.resolution, self.channels, self.domain,
                other.dim, other.resolution, other.channels, other.domain
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        Self::new(self.dim, self.resolution, self.channels, self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.dim, self.resolution, self.channels, self.domain, values)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, a: f64) -> Result<GridFunction> {
        self.map(|v| a * v)
    }

    /// Cyclic shift by `s` cells along `axis`: output(i) = input(i - s).
    pub fn roll(&self, axis: usize, s: isize) -> GridFunction {
        let n = self.resolution;
        let p = self.points();
        let stride = n.pow((self.dim - 1 - axis) as u32);
        let mut values = vec![0.0; self.values.len()];
        for c in 0..self.channels {
            for flat in 0..p {
                let i = (flat / stride) % n;
                let j = (i as isize + s).rem_euclid(n as isize) as usize;
                let target = flat - i * stride + j * stride;
                values[c * p + target] = self.values[c * p + flat];
            }
        }
        Self { values, ..self.clone() }
    }

    /// Discrete L² inner product of two single-channel functions (midpoint or Riemann weight `N^{-d}`).
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.same_shape(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s / self.points() as f64)
    }
}

pub(crate) fn point_into(domain: Domain, dim: usize, n: usize, flat: usize, x: &mut [f64]) {
    let mut rest = flat;
    for axis in (0..dim).rev() {
        x[axis] = domain.node(rest % n, n);
        rest /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridFunction::new(1, 8, 1, Domain::Cube, vec![0.0; 7]).is_err());
        assert!(GridFunction::new(1, 6, 1, Domain::Cube, vec![0.0; 6]).is_err());
        assert!(GridFunction::new(1, 4, 1, Domain::Cube, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn cube_points_have_no_duplicate_endpoint() {
        let f = GridFunction::from_fn(2, 4, Domain::Cube, |x| x[0] + 10.0 * x[1]).unwrap();
        assert_eq!(f.point(0), vec![0.0, 0.0]);
        assert_eq!(f.point(1), vec![0.0, 0.25]);
        assert_eq!(f.point(15), vec![0.75, 0.75]);
        assert_eq!(f.values()[6], 0.25 + 5.0);
    }

    #[test]
    fn roll_moves_values_forward() {
        let f = GridFunction::new(1, 4, 1, Domain::Cube, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(f.roll(0, 1).values(), &[4.0, 1.0, 2.0, 3.0]);
        let g = GridFunction::from_fn(2, 4, Domain::Cube, |x| x[0] + 10.0 * x[1]).unwrap();
        let r = g.roll(1, 1);
        assert_eq!(r.values()[1], g.values()[0]);
        assert_eq!(r.values()[0], g.values()[3]);
    }

    #[test]
    fn gaussian_nodes_are_symmetric() {
        let n = Domain::Gaussian;
        for i in 0..16 {
            assert!((n.node(i, 16) + n.node(15 - i, 16)).abs() < 1e-12);
        }
    }
}
