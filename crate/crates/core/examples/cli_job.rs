//! Running a job through the same path as the command line, then collecting its sweep
//! points as plot data.

use opwidth::runner::{emit_plot_data, run, JobSpec, Verb};

fn main() -> opwidth::Result<()> {
    let out = std::env::temp_dir().join("opwidth-covering");
    let job = JobSpec::parse(Verb::Covering, r#"{"ms": [1, 2, 3, 4], "eps": [0.5]}"#, None)?;
    let report = run(&job, &out)?;
    for c in &report.body.checks {
        println!("{} {}", if c.pass { "pass" } else { "FAIL" }, c.name);
    }
    let (key, _, csv) = emit_plot_data(std::slice::from_ref(&report.body))?;
    println!("plot data keyed by {key}:\n{}", String::from_utf8_lossy(&csv));
    println!("report written to {}", out.join("report.json").display());
    Ok(())
}
