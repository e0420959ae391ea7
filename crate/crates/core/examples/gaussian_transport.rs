//! The coordinatewise Gaussian CDF carries cube bumps to Gaussian-weighted space
//! without changing their norms.

use opwidth::adversarial::bump::BumpFamily;
use opwidth::adversarial::transport::{pushforward_ks, xi, xi_inv};
use opwidth::space::{norm, Domain, NormSpec};

fn main() -> opwidth::Result<()> {
    for x in [-6.0, -1.0, 0.0, 2.5] {
        println!("ξ({x:>4}) = {:.16e}, ξ⁻¹(ξ(x)) = {:.12}", xi(x), xi_inv(xi(x)));
    }
    println!("KS of ξ(X), X ~ N(0,1), 10⁴ draws: {:.4}", pushforward_ks(10_000, 1));
    let cube = BumpFamily::new(1, 3, 0.5, Domain::Cube)?;
    let gauss = BumpFamily::new(1, 3, 0.5, Domain::Gaussian)?;
    for p in [1.0, 2.0] {
        let a = norm(&cube.grid(0, 4096)?, &NormSpec::lp(p))?;
        let b = norm(&gauss.grid(0, 4096)?, &NormSpec::lp(p))?;
        println!("p = {p}: cube {a:.6e}, Gaussian-weighted {b:.6e}");
    }
    Ok(())
}
