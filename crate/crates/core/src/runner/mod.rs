//! Verb-dispatched experiments. A job is a JSON object naming the verb's parameters; the
//! runner parses it completely before touching the output directory, runs the owning
//! module, and writes `report.json` plus any artifacts.
//!
//! Every random draw flows from the job seed through [`crate::rng::stream`] with the verb
//! name as label, so a report is a pure function of (verb, params, seed).

mod adversarial;
mod fno;
mod learning;
mod plot;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub use plot::{emit_plot_data, PlotRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    BumpVerify,
    Fooling,
    GaussianFooling,
    Hypercube,
    EmbedCheck,
    FnoForward,
    GradCheck,
    Audit,
    Covering,
    SampleSize,
    ErmTrain,
    RateSweep,
    Report,
}

impl Verb {
    pub const ALL: [Verb; 13] = [
        Verb::BumpVerify,
        Verb::Fooling,
        Verb::GaussianFooling,
        Verb::Hypercube,
        Verb::EmbedCheck,
        Verb::FnoForward,
        Verb::GradCheck,
        Verb::Audit,
        Verb::Covering,
        Verb::SampleSize,
        Verb::ErmTrain,
        Verb::RateSweep,
        Verb::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Verb::BumpVerify => "bump-verify",
            Verb::Fooling => "fooling",
            Verb::GaussianFooling => "gaussian-fooling",
            Verb::Hypercube => "hypercube",
            Verb::EmbedCheck => "embed-check",
            Verb::FnoForward => "fno-forward",
            Verb::GradCheck => "grad-check",
            Verb::Audit => "audit",
            Verb::Covering => "covering",
            Verb::SampleSize => "sample-size",
            Verb::ErmTrain => "erm-train",
            Verb::RateSweep => "rate-sweep",
            Verb::Report => "report",
        }
    }

    /// Verbs that draw random numbers and therefore need a seed.
    pub fn stochastic(self) -> bool {
        !matches!(self, Verb::BumpVerify | Verb::Hypercube | Verb::Covering | Verb::SampleSize | Verb::Report)
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Verb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Verb::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| Error::Job(format!("unknown verb {s:?}")))
    }
}

/// A parsed job. In the file, `verb` and `seed` are optional top-level keys; parameters
/// sit either under `params` or directly at the top level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub verb: Verb,
    pub params: Value,
    pub seed: Option<u64>,
}

impl JobSpec {
    pub fn new(verb: Verb, params: Value, seed: Option<u64>) -> Self {
        JobSpec { verb, params, seed }
    }

    /// Parse job text for `verb`. A `verb` key in the file must agree; `seed` overrides
    /// the file's seed.
    pub fn parse(verb: Verb, text: &str, seed: Option<u64>) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Job(format!("job is not valid JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(Error::Job("job must be a JSON object".into()));
        };
        if let Some(v) = obj.remove("verb") {
            let named = v.as_str().ok_or_else(|| Error::Job("`verb` must be a string".into()))?;
            if named.parse::<Verb>()? != verb {
                return Err(Error::Job(format!("job file is for {named}, not {verb}")));
            }
        }
        let file_seed = match obj.remove("seed") {
            None | Some(Value::Null) => None,
            Some(v) => Some(v.as_u64().ok_or_else(|| Error::Job("`seed` must be a non-negative integer".into()))?),
        };
        let params = match obj.remove("params") {
            Some(Value::Object(p)) => {
                let mut merged = obj;
                merged.extend(p);
                Value::Object(merged)
            }
            Some(_) => return Err(Error::Job("`params` must be an object".into())),
            None => Value::Object(obj),
        };
        Ok(JobSpec { verb, params, seed: seed.or(file_seed) })
    }

    fn typed<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.params.clone()).map_err(|e| Error::Job(format!("bad {} params: {e}", self.verb)))
    }

    fn need_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Job(format!("{} draws random numbers and needs a seed", self.verb)))
    }
}

/// One theory-versus-measurement comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// "<=" (measured must not exceed bound) or ">="
    pub relation: String,
    pub bound: f64,
    pub measured: f64,
    pub tolerance: f64,
    /// distance to failure; negative means violated
    pub margin: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        let margin = bound + tolerance - measured;
        CheckRecord { name: name.into(), relation: "<=".into(), bound, measured, tolerance, margin, pass: margin >= 0.0 }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        let margin = measured - (bound - tolerance);
        CheckRecord { name: name.into(), relation: ">=".into(), bound, measured, tolerance, margin, pass: margin >= 0.0 }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        CheckRecord::at_least(name, v, 1.0, 0.0)
    }
}

/// A point of a sweep, for plot data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    /// which curve inside the report
    pub series: String,
    pub key: String,
    pub x: f64,
    pub measured: f64,
    pub bound: f64,
}

/// What a verb hands back before the report is assembled.
#[derive(Default)]
pub(crate) struct Outcome {
    pub checks: Vec<CheckRecord>,
    pub data: Value,
    pub series: Vec<SeriesPoint>,
    /// (file name, bytes) written to the output directory
    pub artifacts: Vec<(String, Vec<u8>)>,
}

/// The deterministic part of a report; its SHA-256 is recorded in the metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub tool: String,
    pub version: String,
    pub job: JobSpec,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    pub series: Vec<SeriesPoint>,
    pub artifacts: Vec<String>,
    pub data: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub wall_time_s: f64,
    pub threads: usize,
    pub body_sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub body: ReportBody,
    pub meta: ReportMeta,
}

impl ReportBody {
    /// Canonical bytes: compact JSON with sorted object keys.
    pub fn canonical_bytes(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(&serde_json::to_value(self)?)?)
    }

    pub fn sha256(&self) -> Result<String> {
        let digest = Sha256::digest(self.canonical_bytes()?);
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

impl ExperimentReport {
    pub fn pass(&self) -> bool {
        self.body.pass
    }

    /// Re-parse and re-check a written report: hash, and the pass flag against its checks.
    pub fn validate(text: &str) -> Result<ExperimentReport> {
        let r: ExperimentReport = serde_json::from_str(text)?;
        if r.body.sha256()? != r.meta.body_sha256 {
            return Err(Error::Corrupt("report body does not match its hash".into()));
        }
        if r.body.pass != r.body.checks.iter().all(|c| c.pass) {
            return Err(Error::Corrupt("overall pass disagrees with the checks".into()));
        }
        Ok(r)
    }
}

fn dispatch(job: &JobSpec) -> Result<Outcome> {
    match job.verb {
        Verb::BumpVerify => adversarial::bump_verify(job),
        Verb::Fooling => adversarial::fooling(job),
        Verb::GaussianFooling => adversarial::gaussian_fooling(job),
        Verb::Hypercube => adversarial::hypercube(job),
        Verb::EmbedCheck => adversarial::embed_check(job),
        Verb::FnoForward => fno::fno_forward(job),
        Verb::GradCheck => fno::grad_check(job),
        Verb::Audit => fno::audit(job),
        Verb::Covering => fno::covering(job),
        Verb::SampleSize => fno::sample_size(job),
        Verb::ErmTrain => learning::erm_train(job),
        Verb::RateSweep => learning::rate_sweep(job),
        Verb::Report => plot::report(job),
    }
}

/// Run a job in memory. Nothing is written.
pub fn execute(job: &JobSpec) -> Result<(ExperimentReport, Vec<(String, Vec<u8>)>)> {
    let start = Instant::now();
    if job.verb.stochastic() {
        job.need_seed()?;
    }
    let out = dispatch(job)?;
    let mut names: Vec<String> = out.artifacts.iter().map(|(n, _)| n.clone()).collect();
    names.push("report.json".into());
    let body = ReportBody {
        tool: "opwidth".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        job: job.clone(),
        pass: out.checks.iter().all(|c| c.pass),
        checks: out.checks,
        series: out.series,
        artifacts: names,
        data: out.data,
    };
    let meta = ReportMeta { wall_time_s: start.elapsed().as_secs_f64(), threads: rayon::current_num_threads(), body_sha256: body.sha256()? };
    Ok((ExperimentReport { body, meta }, out.artifacts))
}

/// Run a job and write `report.json` and its artifacts into `out`.
pub fn run(job: &JobSpec, out: &Path) -> Result<ExperimentReport> {
    let (report, artifacts) = execute(job)?;
    fs::create_dir_all(out)?;
    for (name, bytes) in &artifacts {
        fs::write(out.join(name), bytes)?;
    }
    fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

/// Read a job file, parse it for `verb`, and run it.
pub fn run_file(verb: Verb, job_file: &Path, out: &Path, seed: Option<u64>) -> Result<ExperimentReport> {
    let text = fs::read_to_string(job_file).map_err(|e| Error::Job(format!("cannot read {}: {e}", job_file.display())))?;
    let job = JobSpec::parse(verb, &text, seed)?;
    run(&job, out)
}

pub(crate) fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}
