use std::path::Path;
use std::process::{Command, Output};

fn kinlink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinlink"))
        .args(args)
        .output()
        .expect("run kinlink")
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("kinlink.toml");
    let text = format!("output_dir = \"out\"\n{extra}\n[synthetic]\nnum_entities = 30\nseed = 3\n");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn full_pipeline_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    for cmd in ["generate", "build-graph", "cluster", "evaluate", "sweep"] {
        let o = kinlink(&[cmd, "-c", &cfg]);
        assert!(
            o.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let out = dir.path().join("out");
    for f in [
        "records.csv",
        "ground_truth.csv",
        "graph.csv",
        "clustering.csv",
        "evaluation.json",
        "sweep.json",
        "sweep.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let o = kinlink(&["evaluate", "-c", &cfg]);
    assert!(stdout(&o).starts_with("precision "));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    assert!(kinlink(&["generate", "-c", &cfg]).status.success());
    let o = kinlink(&[
        "sweep",
        "-c",
        &cfg,
        "--clusterer",
        "greedy",
        "--select-method",
        "max-sim",
        "--temporal",
        "off",
        "--plot-data",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    assert!(!out.join("sweep.json").exists());
    let table = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 14);
    assert!(rows.iter().all(|r| r.contains("greedy:max-sim")));
}

#[test]
fn seed_flag_changes_generated_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let records = dir.path().join("out/records.csv");
    assert!(kinlink(&["generate", "-c", &cfg]).status.success());
    let first = std::fs::read(&records).unwrap();
    assert!(kinlink(&["generate", "-c", &cfg]).status.success());
    assert_eq!(std::fs::read(&records).unwrap(), first);
    assert!(kinlink(&["generate", "-c", &cfg, "--seed", "99"])
        .status
        .success());
    assert_ne!(std::fs::read(&records).unwrap(), first);
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "no_such_key = 1");
    let o = kinlink(&["generate", "-c", &cfg]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn out_of_range_threshold_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = kinlink(&["generate", "-c", &cfg, "--threshold", "1.5"]);
    assert!(!o.status.success());
}

#[test]
fn cluster_without_graph_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    assert!(kinlink(&["generate", "-c", &cfg]).status.success());
    let o = kinlink(&["cluster", "-c", &cfg]);
    assert!(!o.status.success());
}

#[test]
fn unknown_method_is_a_usage_error() {
    let o = kinlink(&["cluster", "--sort-method", "random"]);
    assert!(!o.status.success());
}
