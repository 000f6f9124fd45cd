use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relay-aoi"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn plan_single_link() {
    let out = run(&["plan", "--config", config("single.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let l = v["optimal_location"].as_f64().unwrap();
    assert!((l - 500.0 / (1.0 + 5f64.sqrt())).abs() < 1e-9);
    assert_eq!(v["premise_holds"], true);
}

#[test]
fn plan_many_links_is_an_array() {
    let out = run(&["plan", "--config", config("reference.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out).as_array().unwrap().len(), 81);
}

#[test]
fn simulate_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run(&[
        "simulate",
        "--config",
        config("single.json").to_str().unwrap(),
        "--relay-location",
        "optimal",
        "--trace-csv",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let row = json(&out);
    assert_eq!(row["policy"], "optimal");
    let sim = row["average_instant_aoi_sim_s"].as_f64().unwrap();
    let exact = row["exact_closed_form_s"].as_f64().unwrap();
    assert!((sim - exact).abs() <= 1e-9 * exact);
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time_s,age_s"));
    // Origin, then a pre/post pair per reset. The first delivery carries the
    // same age as the initial clock, so only 99 arrivals reset.
    assert_eq!(lines.count(), 1 + 2 * 99);
}

#[test]
fn simulate_location_forms_agree() {
    let cfg = config("single.json");
    let at = |loc: &str| {
        json(&run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--relay-location",
            loc,
        ]))
    };
    let metres = at("100");
    let suffixed = at("100m");
    let fraction = at("0.2");
    assert_eq!(metres["relay_location_m"], suffixed["relay_location_m"]);
    assert_eq!(metres["relay_location_m"], fraction["relay_location_m"]);
}

#[test]
fn simulate_rejects_location_outside_span() {
    let out = run(&[
        "simulate",
        "--config",
        config("single.json").to_str().unwrap(),
        "--relay-location",
        "900",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_rejects_multi_cell_config() {
    let out = run(&[
        "simulate",
        "--config",
        config("reference.json").to_str().unwrap(),
        "--relay-location",
        "optimal",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_deterministic_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, svg) = (
        dir.path().join("a.csv"),
        dir.path().join("b.csv"),
        dir.path().join("a.svg"),
    );
    let cfg = config("power_interval.json");
    for (csv, extra) in [(&a, Some(&svg)), (&b, None)] {
        let mut args = vec![
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            csv.to_str().unwrap(),
        ];
        if let Some(s) = extra {
            args.extend(["--svg", s.to_str().unwrap()]);
        }
        assert_eq!(run(&args).status.code(), Some(0));
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 1 + 13 * 4);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn missing_config_is_io_failure() {
    let out = run(&["plan", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_io_failure() {
    let out = run(&[
        "sweep",
        "--config",
        config("single.json").to_str().unwrap(),
        "--out",
        "/definitely/not/here/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_is_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("unknown.json", r#"{"p_node": [1]}"#),
        ("negative.json", r#"{"span_values": [-5]}"#),
        ("broken.json", "{"),
        (
            "both_bandwidths.json",
            r#"{"radio": {"bandwidth": 2e7, "bandwidth_mhz": 20}}"#,
        ),
    ] {
        let p = write(dir.path(), name, text);
        let out = run(&["plan", "--config", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{name}");
    }
}

#[test]
fn bad_arguments_are_validation_failures() {
    assert_eq!(
        run(&["simulate", "--config", "x", "--relay-location", "far"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
}

#[test]
fn verify_json_passes() {
    let out = run(&["verify", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() > 20);
}
