use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dlbounds-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlbounds")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn babel_of_identity_prints_zero() {
    let dir = scratch("babel");
    std::fs::write(dir.join("id3.csv"), "1,0,0\n0,1,0\n0,0,1\n").unwrap();
    let o = run(&["babel", "--dict", "id3.csv", "--k", "2"], &dir);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\n");
    let manifest: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(manifest["subcommand"], "babel");
    assert!(manifest["input_digests"]["id3.csv"].is_string());

    std::fs::write(dir.join("rep.csv"), "1,1,1,0\n0,0,0,1\n").unwrap();
    let o = run(&["babel", "--dict", "rep.csv", "--k", "2", "--brute"], &dir);
    assert_eq!(stdout(&o), "2\n");
}

#[test]
fn invalid_arguments_exit_two() {
    let dir = scratch("args");
    for args in [
        vec!["babel", "--dict", "x.csv", "--k", "1", "--bogus"],
        vec!["frobnicate"],
        vec!["code", "--dict", "a", "--signal", "b"],
        vec!["bounds", "--variant", "medium", "--family", "l1", "--n", "2", "--p", "2", "--m", "10", "--x", "1"],
    ] {
        let o = run(&args, &dir);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("Usage") || err.contains("--help"), "{args:?}");
    }
}

#[test]
fn computation_errors_exit_one_with_one_line() {
    let dir = scratch("errors");
    let o = run(&["babel", "--dict", "missing.csv", "--k", "1"], &dir);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error:"));

    let o = run(
        &["bounds", "--variant", "fast", "--family", "l1", "--n", "2", "--p", "2", "--lambda", "0.25", "--m", "100", "--x", "1", "--K", "2", "--alpha", "1"],
        &dir,
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bounds_prints_json_report() {
    let dir = scratch("bounds");
    let o = run(&["bounds", "--variant", "slow", "--family", "l1", "--n", "2", "--p", "2", "--lambda", "1", "--m", "10000", "--x", "2"], &dir);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r["additive"].as_f64().unwrap() - 0.064617).abs() < 1e-6);
    assert_eq!(r["multiplier"], 1.0);
    assert_eq!(r["vacuous"], false);

    let o = run(&["bounds", "--variant", "maurer", "--family", "ksparse", "--n", "2", "--p", "2", "--k", "2", "--delta", "0.5", "--m", "10000", "--x", "2"], &dir);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["loss_scale"], "squared");
}

#[test]
fn code_and_kcode_write_csv() {
    let dir = scratch("code");
    std::fs::write(dir.join("d.csv"), "1,0,0.6\n0,1,0.8\n").unwrap();
    std::fs::write(dir.join("x.csv"), "0.6,0.8\n1,0\n").unwrap();
    let o = run(&["code", "--dict", "d.csv", "--signal", "x.csv", "--k", "1", "--exact", "--out", "out"], &dir);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("error,a1,a2,a3"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(first[0].abs() < 1e-12);
    assert!((first[3] - 1.0).abs() < 1e-12);
    assert_eq!(std::fs::read_to_string(dir.join("out/codes.csv")).unwrap(), text);
    assert!(dir.join("out/manifest.json").exists());

    let o = run(&["code", "--dict", "d.csv", "--signal", "x.csv", "--lambda", "0.5"], &dir);
    assert_eq!(o.status.code(), Some(0));
    let second = stdout(&o).lines().nth(2).unwrap().to_string();
    let vals: Vec<f64> = second.split(',').map(|v| v.parse().unwrap()).collect();
    assert!((vals[0] - 0.5).abs() < 1e-6);

    let o = run(&["kcode", "--kernel", "linear", "--dict", "x.csv", "--signal", "x.csv", "--k", "1"], &dir);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("error,a1,a2\n"));
    let o = run(&["kcode", "--kernel", "cubic", "--dict", "x.csv", "--signal", "x.csv", "--k", "1"], &dir);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn learn_writes_dictionary_sidecar_and_manifest() {
    let dir = scratch("learn");
    let o = run(
        &["learn", "--synth", "ground:n=4,p=6,k=2,sigma=0,m=300", "--p", "6", "--k", "2", "--iters", "6", "--seed", "3", "--out", "D.csv"],
        &dir,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["trace"].as_array().unwrap().len(), 6);
    let sidecar: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("D.json")).unwrap()).unwrap();
    assert_eq!((sidecar["n"].as_u64(), sidecar["p"].as_u64()), (Some(4), Some(6)));
    assert!(dir.join("D.manifest.json").exists());

    let o = run(&["babel", "--dict", "D.csv", "--k", "1"], &dir);
    assert_eq!(o.status.code(), Some(0));
    let mu: f64 = stdout(&o).trim().parse().unwrap();
    assert!((0.0..=1.0 + 1e-12).contains(&mu));

    let before = std::fs::read(dir.join("D.csv")).unwrap();
    let o = run(&["replay", "--manifest", "D.manifest.json", "--out", "E.csv"], &dir);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.join("E.csv")).unwrap(), before);
}

#[test]
fn replay_rejects_changed_inputs() {
    let dir = scratch("replay");
    std::fs::write(dir.join("d.csv"), "1,0\n0,1\n").unwrap();
    let o = run(&["babel", "--dict", "d.csv", "--k", "1", "--out", "run"], &dir);
    assert_eq!(o.status.code(), Some(0));
    assert!(run(&["replay", "--manifest", "run/manifest.json"], &dir).status.success());
    std::fs::write(dir.join("d.csv"), "1,0.5\n0,1\n").unwrap();
    let o = run(&["replay", "--manifest", "run/manifest.json"], &dir);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("changed"));
}

#[test]
fn mc_babel_and_demo_outputs() {
    let dir = scratch("mc");
    let o = run(&["mc-babel", "--n", "50", "--p", "6", "--k", "1,2", "--trials", "40", "--out", "mc"], &dir);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("mc/mc_babel.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("trial,seed,n,p,k,m,stat,bound,applicable"));
    assert_eq!(csv.lines().count(), 81);
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("mc/manifest.json")).unwrap()).unwrap();
    assert!(manifest["log_base"].as_str().unwrap().contains("natural"));

    let o = run(&["demo-nonlipschitz", "--n", "6", "--p", "6", "--k", "2", "--eps", "0.001"], &dir);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["ratio"].as_f64().unwrap() >= 10.0);
    assert!(r["h_d_prime"].as_f64().unwrap().abs() <= 1e-10);
}
