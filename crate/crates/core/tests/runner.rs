use std::fs;
use std::process::Command;

use opwidth::runner::{emit_plot_data, execute, run, run_file, ExperimentReport, JobSpec, Verb};
use opwidth::Error;
use serde_json::json;

#[test]
fn sample_size_example() {
    let job = JobSpec::parse(Verb::SampleSize, r#"{"verb": "sample-size", "eps": 1, "gamma": 2}"#, None).unwrap();
    let (r, _) = execute(&job).unwrap();
    assert!(r.pass());
    assert_eq!(r.body.data["m"], 2);
}

#[test]
fn parse_errors_are_job_errors() {
    for (verb, text) in [
        (Verb::SampleSize, "{not json"),
        (Verb::SampleSize, "[1, 2]"),
        (Verb::SampleSize, r#"{"verb": "covering"}"#),
        (Verb::SampleSize, r#"{"verb": "no-such-verb"}"#),
        (Verb::SampleSize, r#"{"seed": -3}"#),
        (Verb::SampleSize, r#"{"params": 4}"#),
    ] {
        assert!(matches!(JobSpec::parse(verb, text, None), Err(Error::Job(_))), "{text}");
    }
    let unknown = JobSpec::new(Verb::Covering, json!({ "epsilon": [0.5] }), None);
    assert!(matches!(execute(&unknown), Err(Error::Job(_))));
    let missing = JobSpec::new(Verb::SampleSize, json!({ "eps": 1 }), None);
    assert!(matches!(execute(&missing), Err(Error::Job(_))));
    let unseeded = JobSpec::new(Verb::GradCheck, json!({}), None);
    assert!(matches!(execute(&unseeded), Err(Error::Job(_))));
    assert!("grad_check".parse::<Verb>().is_err());
}

#[test]
fn params_may_be_nested_and_seed_overridden() {
    let a = JobSpec::parse(Verb::GradCheck, r#"{"seed": 3, "params": {"coords": 4}}"#, Some(9)).unwrap();
    let b = JobSpec::parse(Verb::GradCheck, r#"{"coords": 4}"#, Some(9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seed, Some(9));
}

#[test]
fn written_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let job = JobSpec::new(Verb::GradCheck, json!({}), Some(7));
    let r = run(&job, dir.path()).unwrap();
    assert!(r.pass());
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let back = ExperimentReport::validate(&text).unwrap();
    assert_eq!(back.body, r.body);
    let max_err = back.body.checks[0].measured;
    assert!(max_err <= 1e-5);
    let tampered = text.replacen("\"pass\": true", "\"pass\": false", 1);
    assert!(matches!(ExperimentReport::validate(&tampered), Err(Error::Corrupt(_))));
}

#[test]
fn fno_forward_writes_a_readable_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&JobSpec::new(Verb::FnoForward, json!({ "configs": 10 }), Some(1)), dir.path()).unwrap();
    assert!(r.pass());
    let p = opwidth::fno::format::read(dir.path().join("params.bin")).unwrap();
    assert_eq!(p.config().d_c, 3);
    assert!(r.body.artifacts.contains(&"output.json".to_string()));
}

#[test]
fn malformed_job_leaves_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.json");
    fs::write(&job, "{\"eps\": ").unwrap();
    let out = dir.path().join("out");
    assert!(matches!(run_file(Verb::SampleSize, &job, &out, None), Err(Error::Job(_))));
    assert!(!out.exists());
}

#[test]
fn plot_data_sorted_and_keyed() {
    let (cover, _) = execute(&JobSpec::new(Verb::Covering, json!({ "ms": [4, 1, 2], "eps": [0.5] }), None)).unwrap();
    let (key, rows, csv) = emit_plot_data(std::slice::from_ref(&cover.body)).unwrap();
    assert_eq!(key, "m");
    let xs: Vec<f64> = rows.iter().map(|r| r.key).collect();
    assert_eq!(xs, vec![1.0, 2.0, 4.0]);
    assert!(String::from_utf8(csv).unwrap().starts_with("series,m,measured,bound,margin\n"));
    for r in &rows {
        assert_eq!(r.margin, r.bound - r.measured);
    }
    assert!(emit_plot_data(&[]).is_err());
    let (fool, _) = execute(&JobSpec::new(Verb::Fooling, json!({ "trials": 2, "decoder_steps": 5 }), Some(1))).unwrap();
    assert!(emit_plot_data(&[cover.body, fool.body.clone()]).is_err());
    let (key, rows, _) = emit_plot_data(&[fool.body]).unwrap();
    assert_eq!(key, "n");
    assert!(rows.windows(2).all(|w| w[0].key <= w[1].key));
}

#[test]
fn report_verb_collects_series() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    run(&JobSpec::new(Verb::Covering, json!({ "ms": [1, 2], "eps": [1.0] }), None), &a).unwrap();
    let path = a.join("report.json").to_string_lossy().into_owned();
    let out = dir.path().join("plot");
    let r = run(&JobSpec::new(Verb::Report, json!({ "reports": [path] }), None), &out).unwrap();
    assert!(r.pass());
    assert_eq!(fs::read_to_string(out.join("plot.csv")).unwrap().lines().count(), 3);
}

fn cli(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_opwidth")).args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    fs::write(p("ss.json"), r#"{"eps": 1, "gamma": 2}"#).unwrap();
    fs::write(p("bad.json"), "{").unwrap();
    fs::write(p("strict.json"), r#"{"tolerance": 0, "coords": 3}"#).unwrap();
    assert_eq!(cli(&["sample-size", "--job", &p("ss.json"), "--out", &p("o1")]), 0);
    assert!(dir.path().join("o1/report.json").exists());
    assert_eq!(cli(&["sample-size", "--job", &p("bad.json"), "--out", &p("o2")]), 2);
    assert!(!dir.path().join("o2").exists());
    assert_eq!(cli(&["nonsense", "--job", &p("ss.json"), "--out", &p("o3")]), 2);
    assert_eq!(cli(&["sample-size", "--out", &p("o4")]), 2);
    assert_eq!(cli(&["grad-check", "--job", &p("ss.json"), "--out", &p("o5")]), 2);
    // a zero tolerance cannot be met by finite differences
    assert_eq!(cli(&["grad-check", "--job", &p("strict.json"), "--out", &p("o6"), "--seed", "7"]), 1);
    // ε outside (0, 1] is rejected as a bad parameter
    fs::write(p("range.json"), r#"{"eps": 3, "gamma": 2}"#).unwrap();
    assert_eq!(cli(&["sample-size", "--job", &p("range.json"), "--out", &p("o7")]), 2);
}
