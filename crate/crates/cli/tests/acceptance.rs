//! Acceptance suite at full size: one PASS/FAIL line per criterion.
//!
//! Criterion 2 is known red on its drift clause only; see the README. Its value
//! clauses are still enforced here so that a regression there fails the run.

use std::path::Path;
use std::process::{Command, Stdio};

use stretch_core::verify::{config_a, config_b, CriterionResult, Lab, VerifySettings};
use stretch_core::FuchsianGroup;

const KNOWN_RED: &[u8] = &[2];

fn cli_verify(config: &Path, out: &Path) -> (bool, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_stretch"))
        .args(["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "verify"])
        .env("RUST_LOG", "warn")
        .stdout(Stdio::null())
        .status()
        .expect("run stretch");
    let bytes = std::fs::read(out.join("verify.json")).unwrap_or_default();
    (status.success(), bytes)
}

/// `stretch verify` twice on one config must give byte-identical artifacts.
fn cli_determinism(r: &mut CriterionResult) {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("verify.toml");
    std::fs::write(&config, "schema_version = 1\nseed = 3\n[verify]\nprofile = \"quick\"\ncriteria = [1, 3, 10]\n").unwrap();
    let (ok_a, a) = cli_verify(&config, &dir.path().join("a"));
    let (ok_b, b) = cli_verify(&config, &dir.path().join("b"));
    let same = !a.is_empty() && a == b;
    r.values.insert("cli_artifact_bytes".into(), a.len() as f64);
    if !(ok_a && ok_b && same) {
        r.pass = false;
        r.summary.push_str(&format!("; cli runs ok = ({ok_a}, {ok_b}), identical = {same}"));
    } else {
        r.summary.push_str(&format!("; two cli verify runs byte-identical ({} bytes)", a.len()));
    }
}

fn main() {
    let lab = Lab::new(VerifySettings::full(), &FuchsianGroup::bolza(), &config_a(), &config_b(), None).expect("lab");
    let mut unexpected = Vec::new();
    for id in 1..=11u8 {
        let mut r = lab.run(id);
        if id == 11 {
            cli_determinism(&mut r);
        }
        println!("{}", r.line());
        if KNOWN_RED.contains(&id) {
            let p = r.values.get("pressure_minus_one").copied().unwrap_or(f64::NAN);
            let h = r.values.get("entropy_minus_one").copied().unwrap_or(f64::NAN);
            println!("   known red on the drift clause; value clauses: |P(-1)| = {:.4}, |h - 1| = {:.4} (band 0.03)", p.abs(), h.abs());
            if !(p.abs() <= 0.03 && h.abs() <= 0.03) {
                unexpected.push(id);
            }
        } else if !r.pass {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
