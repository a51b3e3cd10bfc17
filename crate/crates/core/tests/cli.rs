use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_escape-lab")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn escape_scan_writes_header_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = run(&["escape-scan", "--points", "5", "--mesh-size", "256", "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# escape-lab escape-scan"));
    assert!(lines.contains(&"# state = kinked-sine"));
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert_eq!(lines[header], "dt,escape_right,escape_left,escape_total,analytic_prediction,ratio,est_error");
    let rows: Vec<&&str> = lines[header + 1..].iter().take_while(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5);
    assert!(text.contains("# summary\n# exponent = "));

    let f = run(&["fit", "--input", path(&out), "--x-col", "dt", "--y-col", "escape_total"]);
    assert!(f.status.success());
    let stdout = String::from_utf8(f.stdout).unwrap();
    let exponent: f64 = stdout.lines().next().unwrap().strip_prefix("exponent = ").unwrap().parse().unwrap();
    assert!((exponent - 1.5).abs() < 0.01, "{stdout}");
}

#[test]
fn json_mirrors_the_csv_schema() {
    let o = run(&["planar", "--points", "2", "--mesh-size", "128", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["state-x"], "kinked-sine");
    assert_eq!(doc["records"].as_array().unwrap().len(), 2);
    assert!(doc["records"][0]["p_b"].as_f64().unwrap() > 0.0);
    assert!(doc["summary"]["p_c.exponent"].is_number());
}

#[test]
fn config_file_supplies_defaults_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.cfg");
    std::fs::write(&cfg, "points = 3\nmesh-size = 128\nconvention = standard\n").unwrap();
    let o = run(&["escape-scan", "--config", path(&cfg), "--points", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("# points = 2\n"));
    assert!(text.contains("# convention = standard\n"));
    assert!(text.contains("# mesh-size = 128\n"));

    std::fs::write(&cfg, "pionts = 3\n").unwrap();
    assert_eq!(run(&["escape-scan", "--config", path(&cfg)]).status.code(), Some(2));
}

#[test]
fn exit_codes_follow_the_failure_class() {
    assert_eq!(run(&["escape-scan", "--points", "0"]).status.code(), Some(2));
    assert_eq!(run(&["escape-scan", "--state", "square-well"]).status.code(), Some(2));
    assert_eq!(run(&["escape-scan", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(run(&["fit", "--input", "/nonexistent/run.csv"]).status.code(), Some(4));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "dt,escape_total\n1e-6,0\n1e-5,0\n").unwrap();
    assert_eq!(run(&["fit", "--input", path(&bad)]).status.code(), Some(3));
    // A time step this small leaves the boundary layer unresolved on any mesh.
    assert_eq!(run(&["zeno", "--T", "1e-12", "--N", "4", "--mesh-size", "64"]).status.code(), Some(3));
}
