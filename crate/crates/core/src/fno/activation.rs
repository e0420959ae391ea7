use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Pointwise nonlinearity; every variant is 1-Lipschitz with σ(0) = 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    /// `x·sigmoid(x)` divided by its largest slope.
    #[default]
    SmoothGate,
    Relu,
    /// Test mode.
    Identity,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn gate_slope(x: f64) -> f64 {
    let s = sigmoid(x);
    s + x * s * (1.0 - s)
}

/// Largest slope of `x·sigmoid(x)`: dense scan on [0, 10], golden-section polish,
/// then a relative nudge upward so the rescaled gate is 1-Lipschitz.
pub fn gate_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let samples = 100_000;
        let mut best = (0.0, 0.0);
        for i in 0..=samples {
            let x = 10.0 * i as f64 / samples as f64;
            let v = gate_slope(x);
            if v > best.1 {
                best = (x, v);
            }
        }
        let (mut lo, mut hi) = (best.0 - 1e-4, best.0 + 1e-4);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let a = hi - r * (hi - lo);
            let b = lo + r * (hi - lo);
            if gate_slope(a) > gate_slope(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        gate_slope(0.5 * (lo + hi)).max(best.1) * (1.0 + 1e-12)
    })
}

impl Activation {
    pub fn code(self) -> u32 {
        match self {
            Activation::SmoothGate => 0,
            Activation::Relu => 1,
            Activation::Identity => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::SmoothGate),
            1 => Some(Activation::Relu),
            2 => Some(Activation::Identity),
            _ => None,
        }
    }

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::SmoothGate => x * sigmoid(x) / gate_constant(),
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    #[inline]
    pub fn slope(self, x: f64) -> f64 {
        match self {
            Activation::SmoothGate => gate_slope(x) / gate_constant(),
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_constant_value() {
        // stationary point of the slope solves 2 + x(1 - 2 sigmoid(x)) = 0, near x = 2.3994
        let c = gate_constant();
        assert!((c - 1.099_839_2).abs() < 1e-6, "{c}");
    }

    #[test]
    fn one_lipschitz_and_zero_at_zero() {
        for a in [Activation::SmoothGate, Activation::Relu, Activation::Identity] {
            assert_eq!(a.apply(0.0), 0.0);
            for i in -2000..2000 {
                let x = i as f64 / 100.0;
                assert!(a.slope(x).abs() <= 1.0);
                let y = x + 0.01;
                assert!((a.apply(y) - a.apply(x)).abs() <= (y - x) + 1e-14);
            }
        }
    }

    #[test]
    fn gate_slope_matches_difference() {
        let a = Activation::SmoothGate;
        for &x in &[-3.0, -0.5, 0.0, 0.7, 2.4, 5.0] {
            let fd = (a.apply(x + 1e-6) - a.apply(x - 1e-6)) / 2e-6;
            assert!((fd - a.slope(x)).abs() < 1e-8);
        }
    }
}
