//! `opwidth <verb> --job <file.json> --out <dir> [--seed N]`
//!
//! Exit status: 0 all checks pass, 1 a check failed, 2 usage, job or parameter error,
//! 3 internal error.
//! `OPWIDTH_THREADS` caps the worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use opwidth::runner::{run_file, Verb};
use opwidth::Error;

#[derive(Parser)]
#[command(name = "opwidth", version, about = "Sample-complexity experiments for operator learning")]
struct Cli {
    /// bump-verify, fooling, gaussian-fooling, hypercube, embed-check, fno-forward,
    /// grad-check, audit, covering, sample-size, erm-train, rate-sweep or report
    verb: String,
    #[arg(long)]
    job: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let verb: Verb = match cli.verb.parse() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("opwidth: {e}");
            return ExitCode::from(2);
        }
    };
    let threads = match std::env::var("OPWIDTH_THREADS") {
        Ok(s) => match s.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                eprintln!("opwidth: OPWIDTH_THREADS={s:?} is not a positive integer");
                return ExitCode::from(2);
            }
        },
        Err(_) => 0,
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("opwidth: thread pool: {e}");
        return ExitCode::from(3);
    }
    match run_file(verb, &cli.job, &cli.out, cli.seed) {
        Ok(report) => {
            for c in &report.body.checks {
                println!("{} {} (measured {:.6e} {} {:.6e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.measured, c.relation, c.bound);
            }
            println!("{}: {} -> {}", verb, if report.pass() { "pass" } else { "FAIL" }, cli.out.join("report.json").display());
            ExitCode::from(if report.pass() { 0 } else { 1 })
        }
        Err(e @ (Error::Job(_) | Error::Range(_) | Error::Domain(_))) => {
            eprintln!("opwidth {verb}: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("opwidth {verb}: {e}");
            ExitCode::from(3)
        }
    }
}
