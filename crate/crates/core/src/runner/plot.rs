use std::fs;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CheckRecord, ExperimentReport, JobSpec, Outcome, ReportBody};
use crate::{Error, Result};

/// One tidy row of plot data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub series: String,
    pub key: f64,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Gather the sweep points of `bodies` into CSV `(series, <key>, measured, bound, margin)`,
/// sorted ascending by key. All points must share one sweep key; an empty set is an error.
pub fn emit_plot_data(bodies: &[ReportBody]) -> Result<(String, Vec<PlotRow>, Vec<u8>)> {
    let points: Vec<_> = bodies.iter().flat_map(|b| b.series.iter()).collect();
    let Some(first) = points.first() else {
        return Err(Error::Job("no sweep points to emit".into()));
    };
    let key = first.key.clone();
    if let Some(p) = points.iter().find(|p| p.key != key) {
        return Err(Error::Job(format!("inconsistent sweep keys {key:?} and {:?}", p.key)));
    }
    let mut rows: Vec<PlotRow> = points
        .iter()
        .map(|p| PlotRow { series: p.series.clone(), key: p.x, measured: p.measured, bound: p.bound, margin: p.bound - p.measured })
        .collect();
    rows.sort_by(|a, b| a.key.total_cmp(&b.key).then_with(|| a.series.cmp(&b.series)));
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(["series", key.as_str(), "measured", "bound", "margin"]).map_err(io)?;
    for r in &rows {
        w.write_record([r.series.clone(), format!("{}", r.key), format!("{:e}", r.measured), format!("{:e}", r.bound), format!("{:e}", r.margin)])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok((key, rows, bytes))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportParams {
    reports: Vec<String>,
}

pub(crate) fn report(job: &JobSpec) -> Result<Outcome> {
    let rp: ReportParams = job.typed()?;
    let mut bodies = Vec::new();
    let mut out = Outcome::default();
    for path in &rp.reports {
        let text = fs::read_to_string(path).map_err(|e| Error::Job(format!("cannot read report {path}: {e}")))?;
        let r = ExperimentReport::validate(&text)?;
        out.checks.push(CheckRecord::flag(format!("{path}: overall pass"), r.pass()));
        bodies.push(r.body);
    }
    let (key, rows, bytes) = emit_plot_data(&bodies)?;
    out.artifacts.push(("plot.csv".into(), bytes));
    out.data = json!({ "key": key, "rows": rows.len() });
    Ok(out)
}
