//! Closed-form FNO bounds against sampled probes, and the entropy side: covering
//! numbers of Σ_m and the sample size they imply.

use opwidth::analysis::{audit_lemmas, entropy_report, sample_size, Lemma, SamplingPolicy};
use opwidth::fno::FnoConfig;

fn main() -> opwidth::Result<()> {
    let mut config = FnoConfig::tiny(2, 2, 2, 16);
    config.bound = 1.5;
    for r in audit_lemmas(&config, &Lemma::ALL, 100, 1)? {
        println!("{:<16} {:<14} worst measured/bound {:.3}  violations {}", format!("{:?}", r.lemma), r.part, r.worst_ratio, r.violations);
    }
    let policy = SamplingPolicy { b_cap: Some(10.0), ..Default::default() };
    for m in [1, 2, 4, 8] {
        let e = entropy_report(m, 0.5, &policy)?;
        println!("m = {m}: d_θ = {}, log 𝒩(Σ_m, ½) = {:.1}, n = {}", e.d_theta, e.sigma_m_log, e.n);
    }
    let s = sample_size(1.0, 2.0, &SamplingPolicy::default())?;
    println!("ε = 1, γ = 2: m = {}, n = {}, exponent {}", s.m, s.n, s.exponent);
    Ok(())
}
