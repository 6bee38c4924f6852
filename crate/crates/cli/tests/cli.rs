use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pmalab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn pmalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmalab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const RUN: &str = r#"
domain.kind = "ball"
domain.dim = 2
domain.radius = 1.0
domain.h = 0.1
op.p = 1.0
init.u0 = "abs(x1) + 0.5*r^2"
run.t_end = 0.02
run.snapshots = [0.005, 0.01]
"#;

fn write_config(dir: &Path) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, RUN).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn list_has_registry_and_filters() {
    let o = pmalab(&["experiment", "list"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().count() >= 10);

    let o = pmalab(&["experiment", "list", "--filter", "separation"]);
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l.contains("separation")));

    let o = pmalab(&["experiment", "list", "--filter", "no-such-topic"]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
}

#[test]
fn noop_experiment_succeeds_with_summary() {
    let dir = scratch("noop");
    let o = pmalab(&["--out", dir.to_str().unwrap(), "experiment", "run", "noop"]);
    assert_eq!(o.status.code(), Some(0));
    let summary = fs::read_to_string(dir.join("noop/summary.txt")).unwrap();
    assert!(summary.contains("result: PASS"));
}

#[test]
fn errors_exit_with_two() {
    assert_eq!(pmalab(&["experiment", "run", "not-registered"]).status.code(), Some(2));
    assert_eq!(pmalab(&["--config", "/nonexistent/run.toml", "solve"]).status.code(), Some(2));
    assert_eq!(pmalab(&["solve"]).status.code(), Some(2));

    let dir = scratch("badkey");
    let path = dir.join("bad.toml");
    fs::write(&path, format!("{RUN}\nop.bogus = 1\n")).unwrap();
    let o = pmalab(&["--config", path.to_str().unwrap(), "--out", dir.to_str().unwrap(), "solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("op.bogus"));
}

#[test]
fn solve_is_identical_across_worker_counts() {
    let dir = scratch("workers");
    let cfg = write_config(&dir);
    let mut outputs = Vec::new();
    for w in ["1", "2"] {
        let out = dir.join(format!("w{w}"));
        let o = pmalab(&["--config", &cfg, "--out", out.to_str().unwrap(), "--workers", w, "solve"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let mut files: Vec<PathBuf> =
            fs::read_dir(out.join("snapshots")).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        assert_eq!(files.len(), 4);
        outputs.push(files.iter().map(|f| fs::read(f).unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn probes_run_on_solver_output() {
    let dir = scratch("probes");
    let cfg = write_config(&dir);
    let out = dir.to_str().unwrap();
    assert!(pmalab(&["--config", &cfg, "--out", out, "solve"]).status.success());
    let last = dir.join("snapshots/u_003.csv");
    let last = last.to_str().unwrap();

    let first = dir.join("snapshots/u_000.csv");
    let o = pmalab(&["--out", out, "analyze", "angle", "--input", first.to_str().unwrap(), "--at", "0,0", "--dir", "1,0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("corner"));
    assert!(dir.join("probes/angle.csv").exists());
    assert!(dir.join("plots/angle.gp").exists());

    let o = pmalab(&["--out", out, "geometry", "section", "--input", last, "--at", "0,0.3", "--height", "0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.join("section.csv").exists());

    let o = pmalab(&["--out", out, "geometry", "legendre", "--input", last, "--spacing", "0.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.join("legendre.csv").exists());
}

#[test]
fn selfsimilar_exports_profile() {
    let dir = scratch("profile");
    let o = pmalab(&["--out", dir.to_str().unwrap(), "selfsimilar", "--cells", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("beta = 6"));
    assert!(dir.join("profile.csv").exists());
}
