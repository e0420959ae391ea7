use opwidth::adversarial::bump::BumpFamily;
use opwidth::adversarial::decoder::{decoder_trial, Decoder, NearestSample, RadialBasis};
use opwidth::adversarial::fooling::{fooling_pair, gaussian_fooling_pair, FoolingSpec};
use opwidth::adversarial::hardness::log_hardness;
use opwidth::adversarial::transport::{xi, xi_inv};
use opwidth::erm::{fno_decoder, MeasureSpec, TrainConfig};
use opwidth::space::{norm, Domain, Exponent, GridFunction, NormSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

fn ks_uniform(mut u: Vec<f64>) -> f64 {
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max)
}

// Φ(x) to 20 digits, computed once with 40-digit arithmetic
const PHI: [(f64, f64); 17] = [
    (-8.0, 6.2209605742717841235e-16),
    (-6.0, 9.865876450376981407e-10),
    (-5.0, 2.8665157187919391167e-7),
    (-3.6, 0.00015910859015753382532),
    (-2.5, 0.006209665325776135167),
    (-2.1, 0.017864420562816552877),
    (-1.9, 0.028716559816001805229),
    (-1.0, 0.15865525393145705141),
    (-0.3, 0.38208857781104736693),
    (0.0, 0.5),
    (0.3, 0.61791142218895263307),
    (1.0, 0.84134474606854294859),
    (1.9, 0.97128344018399819477),
    (2.1, 0.98213557943718344712),
    (3.6, 0.99984089140984246617),
    (5.0, 0.99999971334842812081),
    (8.0, 0.9999999999999993779),
];

#[test]
fn transport_matches_reference_cdf() {
    for (x, phi) in PHI {
        let a = xi(x);
        assert!((a - phi).abs() <= 1e-14 * phi.max(1e-2), "x={x}: {a} vs {phi}");
    }
    // independent quantile implementation
    let normal = Normal::new(0.0, 1.0).unwrap();
    for i in 1..1000 {
        let u = i as f64 / 1000.0;
        assert!((xi_inv(u) - normal.inverse_cdf(u)).abs() <= 1e-9);
    }
    for (x, phi) in PHI.iter().filter(|(x, _)| x.abs() <= 6.0) {
        assert!((xi_inv(*phi) - x).abs() <= 1e-10 * (1.0 + x.abs()));
    }
}

#[test]
fn transport_ks_statistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u: Vec<f64> = (0..10_000).map(|_| xi(rng.sample::<f64, _>(StandardNormal))).collect();
    let ks = ks_uniform(u);
    assert!(ks <= 0.02, "KS = {ks}");
}

/// Stratified estimate of ∫ |φ̃_j|^p ρ, with strata cut by the reference quantile function.
fn stratified_gaussian(family: &BumpFamily, j: usize, p: f64, strata: usize, seed: u64) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let d = family.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = strata.pow(d as u32);
    let mut sum = 0.0;
    for c in 0..cells {
        let mut rem = c;
        let mut x = vec![0.0; d];
        for a in (0..d).rev() {
            let i = rem % strata;
            rem /= strata;
            let z = (i as f64 + rng.gen::<f64>()) / strata as f64;
            x[a] = normal.inverse_cdf(z.clamp(1e-300, 1.0 - 1e-16));
        }
        sum += family.eval(j, &x).abs().powf(p);
    }
    sum / cells as f64
}

#[test]
fn transported_bump_norm_matches_cube_norm() {
    for (d, m, strata, grid) in [(1, 2, 4096, 4096), (1, 3, 4096, 4096), (2, 2, 256, 256)] {
        let cube = BumpFamily::new(d, m, 0.5, Domain::Cube).unwrap();
        let gauss = BumpFamily::new(d, m, 0.5, Domain::Gaussian).unwrap();
        for p in [1.0, 2.0] {
            let spec = NormSpec::lp(p);
            for j in [0, cube.count() - 1] {
                let c = norm(&cube.grid(j, grid).unwrap(), &spec).unwrap();
                let g = norm(&gauss.grid(j, grid).unwrap(), &spec).unwrap();
                let mc = stratified_gaussian(&gauss, j, p, strata, 5 + j as u64).powf(1.0 / p);
                assert!((g - c).abs() <= 1e-3 * c, "grid route d={d} m={m} p={p}: {g} vs {c}");
                assert!((mc - c).abs() <= 1e-3 * c, "sampling route d={d} m={m} p={p}: {mc} vs {c}");
                // plateau volume lower bound
                assert!(c.powf(p) >= 0.5f64.powi(d as i32) / cube.count() as f64 - 1e-3);
            }
        }
    }
}

fn random_samples(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
}

#[test]
fn no_decoder_beats_half_the_separation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let spec = MeasureSpec { d: 1, resolution: 64, alpha: 1.5, j_max: 8, seed: 12 };
    let tc = TrainConfig {
        m: 4,
        steps: 300,
        learning_rate: 0.02,
        omega: 0.0,
        restarts: 1,
        seed: 12,
        n: 32,
        mc_size: 2,
        b_cap: 10.0,
        target_risk: 0.0,
        init_scale: 0.5,
        architecture: None,
    };
    let zoo: Vec<Box<dyn Decoder>> =
        vec![Box::new(NearestSample), Box::new(RadialBasis { width: None }), Box::new(fno_decoder(&spec, &tc).unwrap())];
    for trial in 0..50 {
        let n = rng.gen_range(1..6);
        let samples = random_samples(n, 1, &mut rng);
        let spec = FoolingSpec { d: 1, k: 1 + trial % 2, q: Exponent::Finite(2.0), p: Exponent::Finite(2.0), seed: trial as u64 };
        let pair = fooling_pair(&samples, &spec, Some(64)).unwrap();
        assert!(pair.certificate.unit_ball_margin() >= 0.0);
        assert!(pair.certificate.measured_separation >= pair.certificate.certified_separation);
        for dec in &zoo {
            let t = decoder_trial(&pair, &samples, dec.as_ref()).unwrap();
            assert!(t.pass, "{t:?}");
        }
    }
}

#[test]
fn gaussian_pair_agrees_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let samples: Vec<Vec<f64>> = (0..3).map(|_| vec![rng.sample(StandardNormal)]).collect();
    let spec = FoolingSpec { d: 1, k: 1, q: Exponent::Finite(2.0), p: Exponent::Finite(2.0), seed: 1 };
    let pair = gaussian_fooling_pair(&samples, &spec, Some(256)).unwrap();
    let c = &pair.certificate;
    assert_eq!(c.max_sample_mismatch, 0.0);
    assert!(c.transport_constant >= 1.0);
    assert!(c.unit_ball_margin() >= 0.0);
    assert!(c.measured_separation >= c.certified_separation);
    let t = decoder_trial(&pair, &samples, &NearestSample).unwrap();
    assert!(t.pass);
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn separation_slope_follows_bump_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for (d, ms) in [(1usize, vec![2usize, 4, 6]), (2, vec![2, 3, 4, 5, 6])] {
        for k in 1..=2 {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &m in &ms {
                let n = ((m - 1).pow(d as u32) + 2) / 2;
                let samples = random_samples(n, d, &mut rng);
                let spec = FoolingSpec { d, k, q: Exponent::Finite(2.0), p: Exponent::Infinity, seed: m as u64 };
                let pair = fooling_pair(&samples, &spec, Some(if d == 1 { 256 } else { 128 })).unwrap();
                assert_eq!(pair.certificate.m, m);
                xs.push((pair.certificate.bumps as f64).ln());
                ys.push(pair.certificate.certified_separation.ln());
            }
            let s = slope(&xs, &ys);
            let target = -(k as f64) / d as f64;
            assert!((s - target).abs() <= 0.15 * target.abs(), "d={d} k={k}: slope {s}");
        }
    }
}

#[test]
fn witness_error_decays_at_most_polylogarithmically() {
    let r = log_hardness(&[4, 16, 64, 256, 1024, 4096], 1, 1, 1, 4, 3).unwrap();
    for row in &r.rows {
        assert!(row.pass, "{row:?}");
    }
    // larger embedded dimensions win as n grows
    assert!(r.rows.last().unwrap().best_dim > r.rows[0].best_dim);
}

#[test]
fn pair_grids_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let samples = random_samples(4, 2, &mut rng);
    let spec = FoolingSpec { d: 2, k: 2, q: Exponent::Infinity, p: Exponent::Finite(1.0), seed: 2 };
    let pair = fooling_pair(&samples, &spec, None).unwrap();
    let x: &GridFunction = &pair.f;
    assert_eq!(x.dim(), 2);
    assert!(pair.certificate.smoothness_f <= 1.0 && pair.certificate.smoothness_g <= 1.0);
}
