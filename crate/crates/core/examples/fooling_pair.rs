//! Two functions that agree at every sample yet sit far apart: no decoder that only
//! sees the sample values can be closer than half their distance to both.

use opwidth::adversarial::decoder::{decoder_trial, Decoder, NearestSample, RadialBasis};
use opwidth::adversarial::fooling::{fooling_pair, FoolingSpec};
use opwidth::space::Exponent;
use rand::Rng;

fn main() -> opwidth::Result<()> {
    let mut rng = opwidth::rng::stream(3, "example", 0);
    let zoo: Vec<Box<dyn Decoder>> = vec![Box::new(NearestSample), Box::new(RadialBasis { width: None })];
    for n in [2usize, 8, 32] {
        let samples: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>()]).collect();
        let spec = FoolingSpec { d: 1, k: 1, q: Exponent::Finite(2.0), p: Exponent::Finite(2.0), seed: n as u64 };
        let pair = fooling_pair(&samples, &spec, None)?;
        let c = &pair.certificate;
        println!(
            "n = {n:>3}: {} bumps, ‖f-g‖ = {:.3e} (certified {:.3e}), |f-g| at samples = {}",
            c.bumps, c.measured_separation, c.certified_separation, c.max_sample_mismatch
        );
        for dec in &zoo {
            let t = decoder_trial(&pair, &samples, dec.as_ref())?;
            println!("    {:<20} err f {:.3e}  err g {:.3e}  floor {:.3e}", t.decoder, t.err_f, t.err_g, t.lower_bound);
        }
    }
    Ok(())
}
