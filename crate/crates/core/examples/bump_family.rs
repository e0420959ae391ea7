//! Plateau bumps on a partition of the unit cube: disjointness, mass and derivative
//! bounds for a few (d, m, k).

use opwidth::adversarial::bump::{certify, BumpFamily};
use opwidth::space::Domain;

fn main() -> opwidth::Result<()> {
    println!("{:>2} {:>2} {:>2} {:>9} {:>11} {:>11} {:>7}", "d", "m", "k", "overlaps", "min mass", "floor", "D-ratio");
    for d in 1..=2 {
        for m in [2, 3, 4] {
            let fam = BumpFamily::new(d, m, 0.5, Domain::Cube)?;
            for k in 1..=3 {
                let c = certify(&fam, k, 2.0, if d == 1 { 512 } else { 128 })?;
                println!(
                    "{d:>2} {m:>2} {k:>2} {:>9} {:>11.4e} {:>11.4e} {:>7.3}",
                    c.overlaps, c.min_mass, c.mass_floor, c.derivative_ratio
                );
            }
        }
    }
    Ok(())
}
