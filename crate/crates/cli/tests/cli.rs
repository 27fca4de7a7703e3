use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"schema_version = 1
seed = 5

[spectrum]
cap = 7.0

[thermo]
window = 6.0

[variance]
n = 100
t = 40.0

[metric]
eps = 0.02
bumps = [{ center = [0.2763, 0.1168], amplitude = 1.5, width = 0.5 }]
"#;

fn stretch(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stretch")).current_dir(dir).args(args).env("RUST_LOG", "info").output().expect("run stretch")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_twice_hits_the_cache_with_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), format!("cache = \"cache\"\n{SMALL}")).unwrap();
    let first = stretch(dir.path(), &["--config", "c.toml", "--out", "a", "spectrum"]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let second = stretch(dir.path(), &["--config", "c.toml", "--out", "b", "spectrum"]);
    assert!(second.status.success());
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache hit"));
    for f in ["spectrum_g.csv", "spectrum_g0.csv", "spectrum.json"] {
        assert_eq!(std::fs::read(dir.path().join("a").join(f)).unwrap(), std::fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("a/spectrum_g.csv")).unwrap();
    assert!(csv.starts_with("# stretch ") && csv.contains("config_hash") && csv.contains("seed 5"));
}

#[test]
fn thermo_reports_psi_and_the_hessian_check() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let out = stretch(dir.path(), &["--config", "c.toml", "--out", "o", "--workers", "1", "thermo"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("o/thermo.json"));
    assert_eq!(v["seed"], 5);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let psi = &v["result"]["metric"]["psi"]["psi"];
    assert!(psi["value"].as_f64().unwrap() >= -psi["truncation"].as_f64().unwrap());
    let h = &v["result"]["hessian_check"];
    for k in ["psi_plus", "psi_minus", "variance_2phi", "ratio"] {
        assert!(h[k]["value"].as_f64().unwrap().is_finite(), "{k}");
    }
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL).unwrap();
    let out = stretch(dir.path(), &["--config", "c.toml", "--out", "o", "--seed", "9", "variance"]);
    assert!(out.status.success());
    let v = json(&dir.path().join("o/variance.json"));
    assert_eq!(v["seed"], 9);
    assert_eq!(v["result"]["variance_2phi"]["seed"], 9);
}

#[test]
fn config_errors_exit_with_two_and_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "schema_version = 1\n[spectrum]\ncap = -1.0\n").unwrap();
    for args in [&["--config", "bad.toml", "spectrum"][..], &["--config", "missing.toml", "thermo"][..]] {
        let out = stretch(dir.path(), args);
        assert_eq!(out.status.code(), Some(2));
        let err: serde_json::Value = serde_json::from_slice(out.stderr.split(|&b| b == b'\n').find(|l| l.starts_with(b"{")).unwrap()).unwrap();
        assert_eq!(err["error"]["kind"], "config");
    }
}

#[test]
fn curvature_gate_is_a_compute_failure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL.replace("eps = 0.02", "eps = 0.5")).unwrap();
    let out = stretch(dir.path(), &["--config", "c.toml", "--out", "o", "spectrum"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"curvature\""));
}
