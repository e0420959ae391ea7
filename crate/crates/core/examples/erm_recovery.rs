//! In-class recovery: a frozen tiny FNO is learned back from 64 samples.

use std::time::Instant;

use opwidth::erm::{train_erm, GroundTruth, MeasureSpec, TrainConfig};
use opwidth::fno::FnoConfig;

fn main() -> opwidth::Result<()> {
    let spec = MeasureSpec { d: 1, resolution: 32, alpha: 1.5, j_max: 8, seed: 5 };
    let truth = GroundTruth::frozen_fno(&FnoConfig::tiny(2, 2, 1, 32), 1.0, &spec, 11)?;
    if let GroundTruth::FixedFno { m_star, probe_sup, .. } = &truth {
        println!("ground truth: m* = {m_star}, probe sup = {probe_sup:.3}");
    }
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let tc = TrainConfig {
        m: 2,
        steps,
        learning_rate: 0.02,
        omega: 1.0,
        restarts: 5,
        seed: 1,
        n: 64,
        mc_size: 2000,
        b_cap: 10.0,
        target_risk: 1e-9,
        init_scale: 0.5,
        architecture: None,
    };
    let t = Instant::now();
    let (_, report) = train_erm(&truth, &spec, &tc)?;
    for r in &report.restarts {
        println!("restart {}: risk {:.3e} after {} steps{}", r.index, r.final_risk, r.steps, if r.stopped_early { " (target reached)" } else { "" });
    }
    println!("best empirical risk {:.3e}", report.empirical_risk);
    println!("population risk {:.3e} ± {:.1e}", report.population.mean, report.population.stderr);
    println!("probe max ‖Ψ(u)‖ = {:.3} over {} probes, feasible = {}", report.probe_max_norm, report.probe_count, report.feasible);
    println!("elapsed {:.1?}", t.elapsed());
    Ok(())
}
