//! End-to-end checks of the command-line surface: exit codes, file
//! artifacts, determinism, and format validation.

use std::path::Path;
use std::process::Command;

fn ldg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ldg"))
}

fn solve_small(dir: &Path, out: &str) -> std::process::Output {
    ldg()
        .args([
            "solve",
            "--family",
            "plus",
            "--a",
            "3",
            "--mu",
            "5",
            "--level",
            "-0.95",
            "--n",
            "16",
            "--seed",
            "hedgehog",
            "--grad-tol",
            "1e-3",
            "--max-iters",
            "20000",
            "--out",
        ])
        .arg(dir.join(out))
        .output()
        .expect("spawn ldg")
}

#[test]
fn solve_writes_field_log_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_small(dir.path(), "run.field");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("run.field").exists());
    assert!(dir.path().join("run.log").exists());
    let manifest = std::fs::read_to_string(dir.path().join("run.manifest")).unwrap();
    assert!(manifest.contains("command = solve"));
    assert!(manifest.contains("converged = true"));
    for line in manifest.lines().filter_map(|l| l.strip_prefix("output = ")) {
        assert!(Path::new(line).exists(), "listed artifact missing: {line}");
    }
    let log = std::fs::read_to_string(dir.path().join("run.log")).unwrap();
    assert!(log.starts_with("# iter total dirichlet axis bulk grad_norm"));
}

#[test]
fn solve_is_bit_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    assert!(solve_small(dir.path(), "a.field").status.success());
    assert!(solve_small(dir.path(), "b.field").status.success());
    let a = std::fs::read(dir.path().join("a.field")).unwrap();
    let b = std::fs::read(dir.path().join("b.field")).unwrap();
    assert_eq!(a, b, "identical flags must produce identical bytes");
}

#[test]
fn invalid_level_is_rejected_with_usage_error() {
    let out = ldg()
        .args([
            "solve", "--family", "plus", "--a", "3", "--mu", "5", "--level", "0.2", "--n", "16",
            "--out", "/tmp/never-written.field",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("(-1, -1/2]"), "stderr: {err}");
}

#[test]
fn classify_reports_parity() {
    let dir = tempfile::tempdir().unwrap();
    assert!(solve_small(dir.path(), "c.field").status.success());
    let out = ldg()
        .args(["classify", "--in"])
        .arg(dir.path().join("c.field"))
        .args(["--cores"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("parity = even") || text.contains("parity = odd"), "{text}");
    assert!(text.contains("[phases]"));
}

#[test]
fn classify_rejects_truncated_file() {
    let dir = tempfile::tempdir().unwrap();
    assert!(solve_small(dir.path(), "t.field").status.success());
    let path = dir.path().join("t.field");
    let text = std::fs::read_to_string(&path).unwrap();
    let cut: Vec<&str> = text.lines().take(30).collect();
    std::fs::write(&path, cut.join("\n")).unwrap();
    let out = ldg().args(["classify", "--in"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        "family = plus\na = 3\nmu = 5\nlevel = -0.95\nn = 16\nseed = hedgehog\n\
         grad_tol = 1e-3\nmax_iters = 20000\n",
    )
    .unwrap();
    let out_path = dir.path().join("cfg.field");
    let out = ldg()
        .args(["solve", "--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out_path.exists());
}

#[test]
fn profile_emits_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.txt");
    let out = ldg()
        .args(["profile", "--rmax", "30", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().count() > 2000);
    assert!(text.contains("alpha"));
}

#[test]
fn sweep_emits_stage_artifacts_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = ldg()
        .args([
            "sweep", "--family", "plus", "--mu", "5", "--level", "-0.95", "--schedule", "3,6",
            "--n", "16", "--grad-tol", "2e-3", "--max-iters", "30000", "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for a in ["3", "6"] {
        assert!(dir.path().join(format!("stage_a{a}.field")).exists());
        assert!(dir.path().join(format!("stage_a{a}.log")).exists());
        assert!(dir.path().join(format!("stage_a{a}.manifest")).exists());
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.starts_with("# a total potential_integral zeros parity ring_rho"));
    assert_eq!(summary.lines().count(), 3);
    assert!(dir.path().join("sweep.manifest").exists());
}
