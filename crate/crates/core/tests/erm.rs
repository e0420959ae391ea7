use opwidth::erm::{
    empirical_risk, fooling_cross_check, functional_mode, mc_estimate, sample_inputs, sample_stream, train_erm, GroundTruth,
    MeasureSpec, TrainConfig,
};
use opwidth::fno::{FnoConfig, Operator};
use opwidth::space::l2;

fn spec() -> MeasureSpec {
    MeasureSpec { d: 1, resolution: 32, alpha: 1.5, j_max: 8, seed: 5 }
}

fn tc(n: usize, steps: usize) -> TrainConfig {
    TrainConfig {
        m: 2,
        steps,
        learning_rate: 0.02,
        omega: 1.0,
        restarts: 3,
        seed: 1,
        n,
        mc_size: 500,
        b_cap: 10.0,
        target_risk: 1e-10,
        init_scale: 0.5,
        architecture: None,
    }
}

#[test]
fn samples_are_reproducible_and_in_the_compact_set() {
    let s = MeasureSpec { d: 2, resolution: 16, alpha: 1.0, j_max: 9, seed: 3 };
    let a = sample_inputs(&s, 20).unwrap();
    assert_eq!(a, sample_inputs(&s, 20).unwrap());
    // sample i is the same whether drawn alone or in a batch
    assert_eq!(sample_stream(&s, "inputs", 7, 1).unwrap()[0], a[7]);
    let basis = s.basis().unwrap();
    for u in &a {
        assert!(l2(u) <= s.norm_bound() + 1e-12);
        for y in s.analyze(&basis, u).unwrap() {
            assert!(y.abs() <= 1.0 + 1e-10, "{y}");
        }
    }
}

#[test]
fn second_moment_matches_closed_form() {
    let s = spec();
    let sq: Vec<f64> = sample_inputs(&s, 10_000).unwrap().iter().map(|u| l2(u).powi(2)).collect();
    let e = mc_estimate(&sq);
    let exact = s.second_moment();
    assert!((e.mean - exact).abs() <= 3.0 * e.stderr, "{} vs {exact} ± {}", e.mean, e.stderr);
}

#[test]
fn rejects_unresolved_frequencies() {
    let s = MeasureSpec { d: 1, resolution: 8, alpha: 1.0, j_max: 9, seed: 0 };
    assert!(sample_inputs(&s, 1).is_err());
    assert!(sample_inputs(&MeasureSpec { alpha: 0.5, ..spec() }, 1).is_err());
}

#[test]
fn empirical_risk_examples() {
    let inputs = sample_inputs(&spec(), 10).unwrap();
    let g = GroundTruth::Cubic { scale: 1.0 };
    assert_eq!(empirical_risk(&g, &g, &inputs).unwrap(), 0.0);
    let a = GroundTruth::Constant { value: 0.25 };
    let b = GroundTruth::Constant { value: -0.5 };
    assert!((empirical_risk(&a, &b, &inputs).unwrap() - 0.5625).abs() < 1e-15);
    assert!(empirical_risk(&a, &b, &[]).is_err());
}

#[test]
fn empirical_risk_tracks_population_risk() {
    let s = spec();
    let psi = GroundTruth::Constant { value: 0.1 };
    let g = GroundTruth::Cubic { scale: 1.0 };
    let errs = |label: &str, count: usize| -> Vec<f64> {
        sample_stream(&s, label, 0, count)
            .unwrap()
            .iter()
            .map(|u| opwidth::space::l2_distance(&psi.apply(u).unwrap(), &g.apply(u).unwrap()).unwrap().powi(2))
            .collect()
    };
    let small = errs("train", 10_000);
    let emp = empirical_risk(&psi, &g, &sample_stream(&s, "train", 0, 10_000).unwrap()).unwrap();
    assert!((emp - mc_estimate(&small).mean).abs() < 1e-12);
    let big = mc_estimate(&errs("population", 100_000));
    let se = (mc_estimate(&small).stderr.powi(2) + big.stderr.powi(2)).sqrt();
    assert!((emp - big.mean).abs() <= 3.0 * se, "{emp} vs {} ± {se}", big.mean);
}

#[test]
fn frozen_truth_is_normalized_and_in_class() {
    let t = GroundTruth::frozen_fno(&FnoConfig::tiny(2, 2, 1, 32), 1.0, &spec(), 11).unwrap();
    match &t {
        GroundTruth::FixedFno { m_star, probe_sup, params, .. } => {
            assert!((probe_sup - 0.9).abs() < 1e-12);
            assert!(*m_star >= 2);
            assert!(opwidth::fno::sigma_m_member(params.as_ref().unwrap(), *m_star));
        }
        _ => unreachable!(),
    }
}

#[test]
fn erm_surrogate_beats_its_restarts_and_the_truth() {
    let t = GroundTruth::frozen_fno(&FnoConfig::tiny(2, 2, 1, 32), 1.0, &spec(), 11).unwrap();
    let (_, r) = train_erm(&t, &spec(), &tc(16, 400)).unwrap();
    assert_eq!(r.truth_risk, Some(0.0));
    assert!(r.empirical_risk <= r.truth_risk.unwrap() + 1e-4 || r.restarts.iter().all(|x| x.final_risk >= r.empirical_risk));
    for x in &r.restarts {
        assert!(r.empirical_risk <= x.final_risk);
    }
    assert!(r.decomposition.pass, "{:?}", r.decomposition);
    assert_eq!(r.probe_count, 160);
}

#[test]
fn single_sample_is_interpolated() {
    let (_, r) = train_erm(&GroundTruth::MeanSquare { scale: 2.0 }, &spec(), &tc(1, 3000)).unwrap();
    assert!(r.empirical_risk <= 1e-6, "{}", r.empirical_risk);
}

#[test]
fn training_is_deterministic() {
    let t = GroundTruth::frozen_fno(&FnoConfig::tiny(2, 2, 1, 32), 1.0, &spec(), 11).unwrap();
    let a = train_erm(&t, &spec(), &tc(8, 100)).unwrap();
    let b = train_erm(&t, &spec(), &tc(8, 100)).unwrap();
    assert_eq!(a.0.data(), b.0.data());
    assert_eq!(serde_json::to_string(&a.1).unwrap(), serde_json::to_string(&b.1).unwrap());
}

#[test]
fn constant_functional_is_recovered() {
    let t = GroundTruth::Constant { value: 0.5 };
    let (_, r) = functional_mode(&t, &spec(), &tc(12, 3000)).unwrap();
    assert_eq!(r.encoder.len(), 12);
    assert!(r.encoder.iter().all(|&v| v == 0.5));
    assert!(r.train.empirical_risk <= 1e-8, "{}", r.train.empirical_risk);
    assert!(functional_mode(&GroundTruth::Cubic { scale: 1.0 }, &spec(), &tc(4, 10)).is_err());
}

#[test]
fn embedded_fooling_functional_cannot_be_learned() {
    let rows = fooling_cross_check(&[4, 8, 16, 32], 1, &tc(0, 400)).unwrap();
    for r in &rows {
        assert!(r.pass, "{r:?}");
        assert!(r.err_f.max(r.err_g) >= r.lower_bound - 1e-9);
        assert!(r.separation > 0.0);
    }
}
