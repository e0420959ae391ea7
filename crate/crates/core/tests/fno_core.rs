use opwidth::fno::{
    forward, forward_trace, grad_empirical_risk, naive_spectral_conv, param_count, project_params, risk_value,
    sigma_m_member, spectral_conv, Activation, FnoConfig, FnoParams,
};
use opwidth::space::{lp_distance, norm, Domain, GridFunction, NormSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn band_limited(d: usize, n: usize, channels: usize, top: usize, rng: &mut ChaCha8Rng) -> GridFunction {
    let parts: Vec<GridFunction> = (0..channels)
        .map(|_| {
            let terms: Vec<(Vec<f64>, f64, f64)> = (0..6)
                .map(|_| {
                    let k: Vec<f64> = (0..d).map(|_| rng.gen_range(0..top) as f64).collect();
                    (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI))
                })
                .collect();
            GridFunction::from_fn(d, n, Domain::Cube, |x| {
                terms
                    .iter()
                    .map(|(k, a, ph)| a * (2.0 * PI * k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + ph).cos())
                    .sum()
            })
            .unwrap()
        })
        .collect();
    GridFunction::stack(&parts).unwrap()
}

fn rough(d: usize, n: usize, channels: usize, rng: &mut ChaCha8Rng) -> GridFunction {
    let len = channels * n.pow(d as u32);
    GridFunction::new(d, n, channels, Domain::Cube, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn zero_network_gives_zero() {
    let p = FnoParams::zeros(FnoConfig::tiny(3, 2, 2, 16)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let u = rough(1, 16, 1, &mut rng);
    assert!(forward(&p, &u).unwrap().values().iter().all(|&v| v == 0.0));
}

#[test]
fn mean_mode_network_returns_the_mean() {
    let mut c = FnoConfig::tiny(1, 2, 1, 32);
    c.activation = Activation::Identity;
    let mut p = FnoParams::zeros(c).unwrap();
    let lay = p.layout();
    p.data_mut()[lay.lift(0, 0)] = 1.0;
    p.data_mut()[lay.phat_re(0, 0, 0, 0)] = 1.0;
    p.data_mut()[lay.proj(0, 0)] = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = rough(1, 32, 1, &mut rng);
    // zeroth DFT coefficient summed directly
    let mean: f64 = u.values().iter().sum::<f64>() / 32.0;
    for v in forward(&p, &u).unwrap().values() {
        assert!((v - mean).abs() <= 1e-10);
    }
}

#[test]
fn fft_path_matches_naive_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (d, n, kappa) in [(1, 32, 5), (2, 8, 3)] {
        let c = FnoConfig { d, d_in: 1, d_out: 1, d_c: 3, kappa, depth: 1, bound: 1.0, resolution: n, activation: Activation::SmoothGate };
        let p = FnoParams::random(c, 1.0, &mut rng).unwrap();
        let v = rough(d, n, 3, &mut rng);
        for bias in [false, true] {
            let a = spectral_conv(&p, 0, &v, bias).unwrap();
            let b = naive_spectral_conv(&p, 0, &v, bias).unwrap();
            let err = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-9, "d={d} err={err:e}");
        }
    }
}

#[test]
fn translation_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 1..=2 {
        let n = if d == 1 { 32 } else { 16 };
        let c = FnoConfig { d, d_in: 2, d_out: 1, d_c: 3, kappa: 3, depth: 2, bound: 1.0, resolution: n, activation: Activation::SmoothGate };
        let mut p = FnoParams::random(c, 1.0, &mut rng).unwrap();
        // a spatially varying bias b(x) is not shift-equivariant; keep only its mean mode
        let lay = p.layout();
        for l in 0..2 {
            for f in 1..lay.n_free() {
                for i in 0..3 {
                    p.data_mut()[lay.bhat_re(l, f, i)] = 0.0;
                    p.data_mut()[lay.bhat_im(l, f, i)] = 0.0;
                }
            }
        }
        let u = rough(d, n, 2, &mut rng);
        for axis in 0..d {
            let s = 5;
            let a = forward(&p, &u.roll(axis, s)).unwrap();
            let b = forward(&p, &u).unwrap().roll(axis, s);
            let err = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-10, "{err:e}");
        }
    }
}

#[test]
fn output_is_linear_in_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = FnoParams::random(FnoConfig::tiny(2, 2, 2, 16), 1.0, &mut rng).unwrap();
    let u = rough(1, 16, 1, &mut rng);
    let mut q = p.clone();
    let lay = p.layout();
    for i in 0..2 {
        q.data_mut()[lay.proj(0, i)] *= 0.37;
    }
    let a = forward(&p, &u).unwrap();
    let b = forward(&q, &u).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((0.37 * x - y).abs() <= 1e-12 * (1.0 + x.abs()));
    }
}

#[test]
fn refinement_stability() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (act, tol) in [(Activation::Identity, 1e-6), (Activation::SmoothGate, 1e-2)] {
        let mut c = FnoConfig::tiny(2, 3, 2, 16);
        c.activation = act;
        let p = FnoParams::random(c.clone(), 1.0, &mut rng).unwrap();
        let seed: u64 = rng.gen();
        let mut fine = c;
        fine.resolution = 32;
        let pf = p.with_config(fine).unwrap();
        let u16 = band_limited(1, 16, 1, 3, &mut ChaCha8Rng::seed_from_u64(seed));
        let u32 = band_limited(1, 32, 1, 3, &mut ChaCha8Rng::seed_from_u64(seed));
        let a = norm(&forward(&p, &u16).unwrap(), &NormSpec::l2()).unwrap();
        let b = norm(&forward(&pf, &u32).unwrap(), &NormSpec::l2()).unwrap();
        assert!((a - b).abs() <= tol, "{act:?}: {a} vs {b}");
    }
}

#[test]
fn zero_input_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let c = FnoConfig { bound: 2.0, ..FnoConfig::tiny(2, 2, 2, 16) };
        let p = FnoParams::random(c.clone(), 2.0, &mut rng).unwrap();
        let zero = GridFunction::zeros(1, 16, 1, Domain::Cube).unwrap();
        let out = norm(&forward(&p, &zero).unwrap(), &NormSpec::l2()).unwrap();
        let bound = (2.0 * 2.0 * 2.0f64).powi(4) * 4f64.sqrt();
        assert!(out <= bound);
    }
}

#[test]
fn param_count_examples() {
    let c = FnoConfig { d: 1, d_in: 1, d_out: 1, d_c: 2, kappa: 1, depth: 1, bound: 1.0, resolution: 8, activation: Activation::Relu };
    let pc = param_count(&c);
    assert_eq!((pc.exact, pc.paper_bound), (14, 40));
    assert_eq!(FnoParams::zeros(c).unwrap().data().len(), 14);
    let c = FnoConfig { d: 2, d_in: 1, d_out: 1, d_c: 8, kappa: 2, depth: 3, bound: 1.0, resolution: 8, activation: Activation::Relu };
    assert_eq!(param_count(&c).paper_bound, 15360);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]
    #[test]
    fn exact_count_below_paper_bound(d in 1usize..=3, d_c in 1usize..=12, kappa in 1usize..=6, depth in 1usize..=6, dio in 0usize..4) {
        let c = FnoConfig { d, d_in: 1 + dio.min(d_c - 1), d_out: 1, d_c, kappa, depth, bound: 1.0, resolution: 16, activation: Activation::SmoothGate };
        let pc = param_count(&c);
        prop_assert!(pc.exact <= pc.paper_bound);
    }

    #[test]
    fn projection_is_idempotent_and_feasible(seed in 0u64..1000, bound in 1.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = FnoConfig { bound, ..FnoConfig::tiny(2, 2, 2, 8) };
        let p = FnoParams::random(c, 3.0 * bound, &mut rng).unwrap();
        let q = project_params(&p, bound);
        prop_assert!(q.norm_inf() <= bound * (1.0 + 1e-15));
        prop_assert_eq!(project_params(&q, bound), q.clone());
        prop_assert!(sigma_m_member(&q, 4));
    }
}

fn dataset(c: &FnoConfig, n: usize, rng: &mut ChaCha8Rng, scale: f64) -> Vec<(GridFunction, GridFunction)> {
    (0..n)
        .map(|_| {
            let u = band_limited(c.d, c.resolution, c.d_in, 4, rng);
            let y = rough(c.d, c.resolution, c.d_out, rng).scale(scale).unwrap();
            (u, y)
        })
        .collect()
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for omega in [0.0, 0.5] {
        let c = FnoConfig { d_c: 3, bound: 2.0, ..FnoConfig::tiny(3, 3, 2, 16) };
        let mut p = FnoParams::random(c.clone(), 0.8, &mut rng).unwrap();
        if omega > 0.0 {
            // large outputs so the penalty is active
            let lay = p.layout();
            for i in 0..3 {
                p.data_mut()[lay.proj(0, i)] = 4.0;
            }
        }
        let data = dataset(&c, 3, &mut rng, 0.5);
        let g = grad_empirical_risk(&p, &data, omega).unwrap();
        if omega > 0.0 {
            assert!(g.penalty > 0.0);
        }
        for _ in 0..20 {
            let i = rng.gen_range(0..g.grad.len());
            let h = 1e-6;
            let mut a = p.clone();
            a.data_mut()[i] += h;
            let mut b = p.clone();
            b.data_mut()[i] -= h;
            let fd = (risk_value(&a, &data, omega).unwrap() - risk_value(&b, &data, omega).unwrap()) / (2.0 * h);
            let rel = (g.grad[i] - fd).abs() / (1.0 + g.grad[i].abs());
            assert!(rel <= 1e-5, "coord {i}: {} vs {fd}", g.grad[i]);
        }
    }
}

#[test]
fn zero_params_zero_targets() {
    let c = FnoConfig::tiny(2, 2, 1, 16);
    let p = FnoParams::zeros(c.clone()).unwrap();
    let zero = GridFunction::zeros(1, 16, 1, Domain::Cube).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data = vec![(rough(1, 16, 1, &mut rng), zero)];
    let g = grad_empirical_risk(&p, &data, 1.0).unwrap();
    assert_eq!(g.risk, 0.0);
    assert!(g.grad.iter().all(|&v| v == 0.0));
}

#[test]
fn single_sample_risk_is_squared_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let c = FnoConfig::tiny(2, 2, 1, 16);
    let p = FnoParams::random(c.clone(), 0.5, &mut rng).unwrap();
    let data = dataset(&c, 1, &mut rng, 1.0);
    let g = grad_empirical_risk(&p, &data, 0.0).unwrap();
    let dist = lp_distance(&forward(&p, &data[0].0).unwrap(), &data[0].1, &NormSpec::l2()).unwrap();
    assert!((g.risk - dist * dist).abs() <= 1e-14 * (1.0 + g.risk));
}

#[test]
fn trace_agrees_with_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let p = FnoParams::random(FnoConfig::tiny(2, 2, 3, 16), 1.0, &mut rng).unwrap();
    let u = rough(1, 16, 1, &mut rng);
    let t = forward_trace(&p, &u).unwrap();
    assert_eq!(t.hidden.len(), 4);
    assert_eq!(t.output, forward(&p, &u).unwrap());
}

#[test]
fn rejects_mismatched_input() {
    let p = FnoParams::zeros(FnoConfig::tiny(2, 2, 1, 16)).unwrap();
    let u = GridFunction::zeros(1, 32, 1, Domain::Cube).unwrap();
    assert!(forward(&p, &u).is_err());
}
