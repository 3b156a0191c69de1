use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nmflow::measures::backflow;

const CAVITY: &str = r#"
seed = 11

[model]
kind = "lossy_cavity"
gamma0 = 2.0

[window]
t_max = 12.0
points = 241

[measures]
helstrom = false
"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn nmflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmflow")).args(args).env_remove("NMFLOW_THREADS").output().unwrap()
}

fn run_to(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend(extra);
    nmflow(&args)
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{CAVITY}\n[[sweep.axes]]\nparameter = \"model.gamma0\"\nvalues = [0.3, 2.0]\n");
    let cfg = write(dir.path(), "c.toml", &text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_to("sweep", &cfg, &a, &["--seed", "5", "--threads", "2"]).status.success());
    assert!(run_to("sweep", &cfg, &b, &["--seed", "5", "--threads", "1"]).status.success());
    for f in ["measures.csv", "report.txt", "trajectories/point_0000.csv", "trajectories/point_0001.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn trajectory_file_reproduces_the_measure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", CAVITY);
    let out = dir.path().join("o");
    assert!(run_to("run", &cfg, &out, &[]).status.success());
    let traj = read(&out.join("trajectory.csv"));
    let t: Vec<f64> = column(&traj, "t").iter().map(|x| x.parse().unwrap()).collect();
    let d: Vec<f64> = column(&traj, "D").iter().map(|x| x.parse().unwrap()).collect();
    let blp: f64 = column(&read(&out.join("measures.csv")), "blp")[0].parse().unwrap();
    assert!(blp > 0.1);
    assert!((backflow(&t, &d, 1e-10) - blp).abs() < 1e-9);
    assert!((d[0] - 1.0).abs() < 1e-12);
}

#[test]
fn single_point_sweep_equals_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{CAVITY}\n[[sweep.axes]]\nparameter = \"model.gamma0\"\nvalues = [2.0]\n");
    let cfg = write(dir.path(), "c.toml", &text);
    let (r, s) = (dir.path().join("run"), dir.path().join("sweep"));
    assert!(run_to("run", &cfg, &r, &[]).status.success());
    assert!(run_to("sweep", &cfg, &s, &[]).status.success());
    let run_rows = read(&r.join("measures.csv"));
    let sweep_rows = read(&s.join("measures.csv"));
    for (a, b) in run_rows.lines().zip(sweep_rows.lines()) {
        assert_eq!(a, b.split_once(',').unwrap().1);
    }
    assert_eq!(read(&r.join("trajectory.csv")), read(&s.join("trajectories/point_0000.csv")));
}

#[test]
fn validate_accepts_the_shipped_configs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = nmflow(&["validate", path.to_str().unwrap()]);
            assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_value = write(dir.path(), "a.toml", &CAVITY.replace("points = 241", "points = \"lots\""));
    let out = nmflow(&["validate", bad_value.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 10"));

    let unknown = write(dir.path(), "b.toml", &CAVITY.replace("gamma0 = 2.0", "gamma0 = 2.0\nwarp = 9"));
    assert_eq!(nmflow(&["validate", unknown.to_str().unwrap()]).status.code(), Some(2));

    let negative = write(dir.path(), "c.toml", &CAVITY.replace("gamma0 = 2.0", "gamma0 = -1.0"));
    assert_eq!(run_to("run", &negative, &dir.path().join("o"), &[]).status.code(), Some(2));

    assert_eq!(nmflow(&["validate", "/nonexistent/config.toml"]).status.code(), Some(2));
    assert_eq!(nmflow(&["frobnicate"]).status.code(), Some(2));
}

const DIVERGENT: &str = r#"
[model]
kind = "spectral_dephasing"

[model.spectral]
kind = "ohmic_family"
alpha = 1e3
s = 1.0
cutoff = 1e3

[window]
t_max = 1000.0
points = 32
"#;

#[test]
fn numerical_failures_exit_with_3_and_name_the_operation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", DIVERGENT);
    let out = run_to("run", &cfg, &dir.path().join("o"), &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("analyze failed"));
}

#[test]
fn failing_sweep_points_are_recorded_and_the_rest_complete() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{DIVERGENT}\n[[sweep.axes]]\nparameter = \"model.spectral.cutoff\"\nvalues = [1.0, 1e3]\n")
        .replace("t_max = 1000.0", "t_max = 10.0");
    let cfg = write(dir.path(), "s.toml", &text);
    let out_dir = dir.path().join("o");
    let out = run_to("sweep", &cfg, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(3));
    let measures = read(&out_dir.join("measures.csv"));
    let errors = column(&measures, "errors");
    let blp = column(&measures, "blp");
    assert!(errors[0].is_empty() && !blp[0].is_empty(), "{measures}");
    assert!(errors[1].contains("failed") && blp[1].is_empty());
    assert!(out_dir.join("trajectories/point_0000.csv").exists());
    assert!(!out_dir.join("trajectories/point_0001.csv").exists());
}

#[test]
fn threads_flag_overrides_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", CAVITY);
    let out = dir.path().join("o");
    let with_env = |extra: &[&str]| {
        let mut args = vec!["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend(extra);
        Command::new(env!("CARGO_BIN_EXE_nmflow")).args(&args).env("NMFLOW_THREADS", "many").output().unwrap()
    };
    assert_eq!(with_env(&[]).status.code(), Some(2));
    assert!(with_env(&["--threads", "1"]).status.success());
}

#[test]
fn out_flag_overrides_the_configured_directory() {
    let dir = tempfile::tempdir().unwrap();
    let configured = dir.path().join("configured");
    let text = format!("output = {:?}\n{CAVITY}", configured.to_str().unwrap());
    let cfg = write(dir.path(), "c.toml", &text);
    assert!(nmflow(&["run", cfg.to_str().unwrap()]).status.success());
    assert!(configured.join("measures.csv").exists());
    let flagged = dir.path().join("flagged");
    assert!(run_to("run", &cfg, &flagged, &[]).status.success());
    assert!(flagged.join("trajectory.csv").exists());
}
