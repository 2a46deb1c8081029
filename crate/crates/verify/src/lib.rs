//! Helpers for the acceptance suite in `tests/acceptance.rs`.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;

/// Prints one `PASS`/`FAIL` line straight to stdout, bypassing the test
/// harness capture, then asserts.
pub fn report(id: &str, title: &str, pass: bool, detail: &str) {
    let line = format!(
        "ACCEPTANCE criterion {id} ({title}): {} [{detail}]\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

/// Path of the `dlbounds` binary, built on first use into the same target
/// directory as the running test.
pub fn cli_binary() -> PathBuf {
    static BIN: OnceLock<PathBuf> = OnceLock::new();
    BIN.get_or_init(|| {
        let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/Cargo.toml");
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let status = Command::new(cargo)
            .args(["build", "-q", "--bin", "dlbounds", "--manifest-path"])
            .arg(&manifest)
            .status()
            .expect("failed to run cargo build for the dlbounds binary");
        assert!(status.success(), "building the dlbounds binary failed");
        let exe = std::env::current_exe().unwrap();
        let profile_dir = exe.parent().and_then(|deps| deps.parent()).unwrap();
        let bin = profile_dir.join(format!("dlbounds{}", std::env::consts::EXE_SUFFIX));
        assert!(bin.exists(), "{} not found", bin.display());
        bin
    })
    .clone()
}
