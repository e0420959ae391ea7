use serde::Serialize;

/// (a - b)_+ / (a + ε) for a, b >= 0.
pub fn flip(a: f64, b: f64, eps: f64) -> f64 {
    (a - b).max(0.0) / (a + eps)
}

/// One-sided partials (∂_a, ∂_b); zero where a <= b.
pub fn flip_grad(a: f64, b: f64, eps: f64) -> (f64, f64) {
    if a > b {
        let s = a + eps;
        ((b + eps) / (s * s), -1.0 / s)
    } else {
        (0.0, 0.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlipAudit {
    pub eps: f64,
    pub grid: usize,
    /// largest central-difference slope seen, in either argument
    pub worst_slope: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Dense finite differences of the flip function on [0, 10]² against the 1/ε bound.
pub fn flip_audit(eps: f64, grid: usize) -> FlipAudit {
    let h = 1e-7;
    let mut worst = 0.0f64;
    for i in 0..=grid {
        for j in 0..=grid {
            let a = 10.0 * i as f64 / grid as f64;
            let b = 10.0 * j as f64 / grid as f64;
            let da = (flip(a + h, b, eps) - flip((a - h).max(0.0), b, eps)) / (a + h - (a - h).max(0.0));
            let db = (flip(a, b + h, eps) - flip(a, (b - h).max(0.0), eps)) / (b + h - (b - h).max(0.0));
            worst = worst.max(da.abs()).max(db.abs());
        }
    }
    let bound = 1.0 / eps;
    FlipAudit { eps, grid, worst_slope: worst, bound, pass: worst <= bound * (1.0 + 1e-6) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes_stay_below_inverse_eps() {
        for eps in [0.01, 0.1, 1.0] {
            let a = flip_audit(eps, 400);
            assert!(a.pass, "{a:?}");
            assert!(a.worst_slope > 0.5 * a.bound);
        }
        let (ga, gb) = flip_grad(3.0, 1.0, 0.1);
        let fd = (flip(3.0 + 1e-7, 1.0, 0.1) - flip(3.0 - 1e-7, 1.0, 0.1)) / 2e-7;
        assert!((ga - fd).abs() < 1e-6);
        assert!((gb + 1.0 / 3.1).abs() < 1e-12);
    }
}
