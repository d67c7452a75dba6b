use std::path::Path;
use std::process::{Command, Output};

use tollsim_core::scenario::ScenarioConfig;

fn tollsim(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tollsim"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn tollsim")
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr:\n{}", String::from_utf8_lossy(&o.stderr));
}

fn tiny_config(dir: &Path) -> String {
    let p = dir.join("tiny.toml");
    std::fs::write(&p, ScenarioConfig::tiny().to_toml_string().unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn stages_in_sequence_produce_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out = dir.path().join("out");

    ok(&tollsim(&out, &["--config", &cfg, "--seed", "5", "synth"]));
    let stored = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(stored.contains("seed = 5"));

    let early = tollsim(&out, &["design-tolls"]);
    assert!(!early.status.success(), "design before baseline must fail");

    ok(&tollsim(&out, &["baseline"]));
    let d = tollsim(&out, &["design-tolls"]);
    ok(&d);
    let text = String::from_utf8_lossy(&d.stdout);
    for k in ["distance", "cordon", "area"] {
        assert!(text.contains(k), "design output lacks {k}: {text}");
    }

    ok(&tollsim(&out, &["run", "area", "--emit-trajectories"]));
    assert!(out.join("runs/area/trajectories.csv").exists());
    let r = tollsim(&out, &["report"]);
    ok(&r);
    assert!(String::from_utf8_lossy(&r.stdout).contains("area"));
    for f in ["report/welfare.csv", "report/groups.csv", "report/indicators.csv", "report/summary.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
}

#[test]
fn bad_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = tollsim(&out, &["run", "toll-everything"]);
    assert!(!o.status.success());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    let o = tollsim(&out, &["--config", bad.to_str().unwrap(), "synth"]);
    assert!(!o.status.success());

    let cfg = tiny_config(dir.path());
    let o = tollsim(&out, &["--config", &cfg, "baseline"]);
    assert!(!o.status.success(), "later stages must refuse --config");
}
