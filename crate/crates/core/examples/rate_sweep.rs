//! Error against sample size for a frozen-network ground truth, with the
//! high-probability risk audit at each n.

use opwidth::erm::{rate_sweep, GroundTruth, MeasureSpec, SweepConfig, TrainConfig};
use opwidth::fno::FnoConfig;

fn main() -> opwidth::Result<()> {
    let spec = MeasureSpec { d: 1, resolution: 32, alpha: 1.5, j_max: 8, seed: 5 };
    let truth = GroundTruth::frozen_fno(&FnoConfig::tiny(2, 2, 1, 32), 1.0, &spec, 11)?;
    let sc = SweepConfig {
        gamma: 1.0,
        schedule: vec![8, 16, 32, 64, 128],
        train: TrainConfig {
            m: 2,
            steps: 2000,
            learning_rate: 0.02,
            omega: 1.0,
            restarts: 3,
            seed: 1,
            n: 0,
            mc_size: 10_000,
            b_cap: 10.0,
            target_risk: 1e-9,
            init_scale: 0.5,
            architecture: None,
        },
        audit_reps: 40,
        audit_delta: 0.05,
        audit_steps: 200,
    };
    let t = std::time::Instant::now();
    let r = rate_sweep(&truth, &spec, &sc)?;
    println!("{:>5} {:>11} {:>11} {:>9} {:>9} {:>7}", "n", "emp", "pop", "stderr", "eps", "audit");
    for row in &r.rows {
        let a = row.audit.as_ref().map(|a| format!("{}/{}{}", a.holds, a.reps, if a.vacuous { " vacuous" } else { "" }));
        println!(
            "{:>5} {:>11.3e} {:>11.3e} {:>9.1e} {:>9.3} {:>7}",
            row.n,
            row.emp_risk,
            row.pop_risk,
            row.stderr,
            row.epsilon,
            a.unwrap_or_default()
        );
    }
    println!("monotone {:?}, slope {:?}, predicted exponent {:.4}", r.monotone, r.slope, r.predicted_exponent);
    println!("elapsed {:.1?}", t.elapsed());
    Ok(())
}
