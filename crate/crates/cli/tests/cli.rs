use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn helios(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helios"))
        .args(args)
        .env_remove("HELIOS_OUT")
        .output()
        .unwrap()
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn help_exits_zero() {
    assert_eq!(helios(&["--help"]).status.code(), Some(0));
    assert_eq!(helios(&["run", "--help"]).status.code(), Some(0));
}

#[test]
fn rerun_replaces_outputs_without_leftovers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let path = scenario("storm.json");
    std::fs::write(tmp.path().join("series.csv"), "stale").unwrap();
    for _ in 0..2 {
        let r = helios(&["run", path.to_str().unwrap(), "--out", out]);
        assert_eq!(r.status.code(), Some(0));
    }
    let series = std::fs::read_to_string(tmp.path().join("series.csv")).unwrap();
    assert!(series.starts_with("t,pv_total"));
    let names: Vec<String> = std::fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().all(|n| !n.ends_with(".tmp")), "{names:?}");
    assert_eq!(names.len(), 5);
}

#[test]
fn unreachable_controller_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("storm.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["sensors"].as_array_mut().unwrap().push(serde_json::json!({
        "id": 999,
        "position": {"x": 50000.0, "y": 0.0},
        "radio_range": 100.0
    }));
    let path = tmp.path().join("island.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let path = path.to_str().unwrap();
    assert_eq!(helios(&["validate", path]).status.code(), Some(0));
    let r = helios(&["run", path, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("no route"));
}

#[test]
fn sweep_accepts_dotted_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let r = helios(&[
        "sweep",
        scenario("storm.json").to_str().unwrap(),
        "--param",
        "control.lead_time",
        "--values",
        "60,120",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let values: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(values, ["60", "120"]);
}

#[test]
fn sweep_rejects_values_the_schema_refuses() {
    let r = helios(&[
        "sweep",
        scenario("storm.json").to_str().unwrap(),
        "--param",
        "opacity",
        "--values",
        "1.5",
    ]);
    assert_eq!(r.status.code(), Some(2));
}
