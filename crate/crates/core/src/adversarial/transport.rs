//! Gaussian transport: the coordinatewise normal CDF `ξ` carrying N(0, I_d) onto the
//! uniform measure on the unit cube.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Ambient coordinates are truncated here; the normal mass beyond is below 1e-8.
pub const TRUNCATION: f64 = 6.0;

const FRAC_2_SQRT_PI: f64 = 1.128_379_167_095_512_6;

/// erfc for z >= 0. Power series below 2, Lentz continued fraction above.
fn erfc_pos(z: f64) -> f64 {
    if z < 2.0 {
        // erf(z) = 2/sqrt(pi) e^{-z^2} sum 2^n z^{2n+1} / (2n+1)!!
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= 2.0 * z2 / (2.0 * n + 1.0);
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
        }
        1.0 - FRAC_2_SQRT_PI * (-z2).exp() * sum
    } else {
        // erfc(z) = e^{-z^2}/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
        let tiny = 1e-300;
        let mut f = z;
        let mut c = z;
        let mut d = 0.0;
        for i in 1..500 {
            let a = i as f64 * 0.5;
            d = z + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = z + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-z * z).exp() / (PI.sqrt() * f)
    }
}

/// Standard normal density.
pub fn rho(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn xi(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * erfc_pos(-x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * erfc_pos(x * FRAC_1_SQRT_2)
    }
}

/// Upper tail 1 - ξ(x), accurate for large x.
fn xi_upper(x: f64) -> f64 {
    if x >= 0.0 {
        0.5 * erfc_pos(x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * erfc_pos(-x * FRAC_1_SQRT_2)
    }
}

/// Inverse CDF on (0, 1): bisection for a bracket, Newton for the last digits.
pub fn xi_inv(u: f64) -> f64 {
    assert!(u > 0.0 && u < 1.0, "xi_inv argument {u} outside (0,1)");
    if u > 0.5 {
        return -xi_inv_lower(1.0 - u);
    }
    xi_inv_lower(u)
}

fn xi_inv_lower(u: f64) -> f64 {
    // u <= 0.5, so the root is <= 0 and the lower tail is computed without cancellation
    let (mut lo, mut hi) = (-40.0f64, 0.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if xi(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let r = rho(x);
        if r == 0.0 {
            break;
        }
        let step = (xi(x) - u) / r;
        x -= step;
        if step.abs() < 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Derivative of order `l <= 4` of ξ: ξ' = ρ, ξ'' = -xρ, ξ''' = (x²-1)ρ, ξ'''' = (3x - x³)ρ.
pub fn xi_deriv(x: f64, l: usize) -> f64 {
    let r = rho(x);
    match l {
        0 => xi(x),
        1 => r,
        2 => -x * r,
        3 => (x * x - 1.0) * r,
        4 => (3.0 * x - x * x * x) * r,
        _ => panic!("xi derivative order {l} > 4"),
    }
}

/// Kolmogorov-Smirnov distance between ξ(x), x ~ N(0,1), and the uniform law on (0,1).
pub fn pushforward_ks(draws: usize, seed: u64) -> f64 {
    use rand::Rng;
    let mut r = crate::rng::stream(seed, "pushforward-ks", 0);
    let mut u: Vec<f64> = (0..draws).map(|_| xi(r.sample::<f64, _>(rand_distr::StandardNormal))).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max)
}

/// The map `ξ_d` and its inverse, applied coordinatewise.
#[derive(Clone, Copy, Debug, Default)]
pub struct TransportMap;

impl TransportMap {
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| xi(v)).collect()
    }

    pub fn inverse(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|&v| xi_inv(v)).collect()
    }

    /// Ambient node for midpoint `(i + 1/2)/n` of a cube axis, clamped to the truncation box.
    pub fn node(&self, i: usize, n: usize) -> f64 {
        xi_inv((i as f64 + 0.5) / n as f64).clamp(-TRUNCATION, TRUNCATION)
    }

    pub fn upper_tail(&self, x: f64) -> f64 {
        xi_upper(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_matches_reference_values() {
        // Phi(1) and Phi(-3) to 16 digits
        assert!((xi(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((xi(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
        assert_eq!(xi(0.0), 0.5);
    }

    #[test]
    fn inverse_round_trip() {
        let mut u = 1e-8;
        while u < 1.0 - 1e-8 {
            let x = xi_inv(u);
            assert!((xi(x) - u).abs() <= 1e-10 * u.max(1e-6), "u={u}");
            u += 0.001_37;
        }
        for &u in &[1e-8, 1.0 - 1e-8, 0.5, 0.975] {
            assert!((xi(xi_inv(u)) - u).abs() <= 1e-10);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-5;
        for &x in &[-2.3, -0.4, 0.0, 0.7, 1.9] {
            for l in 1..=4 {
                let fd = (xi_deriv(x + h, l - 1) - xi_deriv(x - h, l - 1)) / (2.0 * h);
                assert!((fd - xi_deriv(x, l)).abs() < 1e-8, "x={x} l={l}");
            }
        }
    }
}
