//! Trigonometric hypercubes and the lift of a function on [0,1]^n to a functional.

use opwidth::adversarial::embed::embed_functional;
use opwidth::adversarial::hypercube::build_trig_hypercube;
use opwidth::space::Exponent;

fn main() -> opwidth::Result<()> {
    for n in [1, 4, 16, 64] {
        let sys = build_trig_hypercube(n, 1, Exponent::Finite(2.0), 1)?;
        println!(
            "n = {n:>2}: biorthogonality error {:.2e}, corner norm {:.4}, c = {:.4}, α = {}",
            sys.biorth_error()?,
            sys.smoothness_norm(&sys.corner()?)?,
            sys.c,
            sys.alpha
        );
    }
    let sys = build_trig_hypercube(3, 1, Exponent::Finite(2.0), 1)?;
    let f = |y: &[f64]| y.iter().map(|t| 4.0 * t * (1.0 - t)).product::<f64>();
    let lifted = embed_functional(f, 3, &sys)?;
    let y = [0.2, 0.5, 0.9];
    let u = lifted.section(&y)?;
    println!("f(y) = {:.12}, lifted at h(y) = {:.12}", f(&y), lifted.eval(&u)?);
    Ok(())
}
