//! A small Fourier neural operator: forward pass, parameter count, gradient check and
//! a checkpoint round trip.

use opwidth::fno::{forward, format, gradient_check, param_count, FnoConfig, FnoParams};
use opwidth::space::{l2, Domain, GridFunction};

fn main() -> opwidth::Result<()> {
    let config = FnoConfig::tiny(4, 3, 2, 64);
    let mut rng = opwidth::rng::stream(1, "example", 0);
    let params = FnoParams::random(config.clone(), 0.5, &mut rng)?;
    let pc = param_count(&config);
    println!("d_θ = {} (paper bound {})", pc.exact, pc.paper_bound);
    let u = GridFunction::from_fn(1, 64, Domain::Cube, |x| (2.0 * std::f64::consts::PI * x[0]).sin())?;
    let y = forward(&params, &u)?;
    println!("‖u‖ = {:.4}, ‖Ψ(u)‖ = {:.4}", l2(&u), l2(&y));
    let g = gradient_check(&config, 3, 10, 0.5, 1e-6, 2)?;
    println!("gradient check: max relative error {:.2e} (penalty active: {})", g.max_rel_error, g.penalty_active);
    let bytes = format::to_bytes(&params);
    let back = format::from_bytes(&bytes)?;
    println!("checkpoint: {} bytes, round-trip distance {}", bytes.len(), params.distance_inf(&back)?);
    Ok(())
}
