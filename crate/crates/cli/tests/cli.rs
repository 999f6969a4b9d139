use std::path::Path;
use std::process::{Command, Output};

use semflow::mesh::generate::write_plot3d;

fn semflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semflow"))
        .args(args)
        .env_remove("SEMFLOW_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_grid(path: &Path, ni: usize, nj: usize, warp: impl Fn(usize, usize) -> [f64; 2]) {
    let mut xs = vec![vec![0.0; ni + 1]; nj + 1];
    let mut ys = xs.clone();
    for j in 0..=nj {
        for i in 0..=ni {
            [xs[j][i], ys[j][i]] = warp(i, j);
        }
    }
    write_plot3d(path, &xs, &ys).unwrap();
}

fn write_channel(path: &Path) {
    write_grid(path, 4, 1, |i, j| [i as f64, j as f64]);
}

const CASE: &str = r#"
[case]
name = "smoke"
reynolds = 100.0
aoa = 0.0
model = "laminar"
t_final = 1.0
max_steps = 4
dt_fixed = DT
[discretization]
order = 4
[mesh]
path = "MESH"
[[mesh.boundary_spec.blocks]]
imin = "inflow"
imax = "outflow"
jmin = "wall"
jmax = "wall"
[output]
directory = "run"
field_every = 0
checkpoint_every = 0
"#;

fn write_case(dir: &Path, mesh: &str, dt: f64) -> std::path::PathBuf {
    let path = dir.join("case.toml");
    std::fs::write(&path, CASE.replace("MESH", mesh).replace("DT", &format!("{dt:e}"))).unwrap();
    path
}

#[test]
fn run_smoke_case_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    write_channel(&dir.path().join("channel.p3d"));
    let case = write_case(dir.path(), "channel.p3d", 0.01);
    let out = semflow(&["run", case.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let run = dir.path().join("run");
    for f in ["time_series.csv", "solver_log.csv", "summary.txt"] {
        assert!(run.join(f).exists(), "{f}");
    }
    assert!(stdout(&out).contains("4 steps"));
}

#[test]
fn output_directory_env_override() {
    let dir = tempfile::tempdir().unwrap();
    write_channel(&dir.path().join("channel.p3d"));
    let case = write_case(dir.path(), "channel.p3d", 0.01);
    let elsewhere = dir.path().join("elsewhere");
    let out = Command::new(env!("CARGO_BIN_EXE_semflow"))
        .args(["run", case.to_str().unwrap()])
        .env("SEMFLOW_OUTPUT_DIR", &elsewhere)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(elsewhere.join("time_series.csv").exists());
    assert!(!dir.path().join("run").exists());
}

#[test]
fn missing_mesh_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("case.toml");
    std::fs::write(&path, CASE.replace("path = \"MESH\"", "").replace("DT", "0.01")).unwrap();
    let out = semflow(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("mesh.path"), "{}", stderr(&out));
}

#[test]
fn inverted_element_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    // centre vertex pushed past the opposite corner
    write_grid(&dir.path().join("bad.p3d"), 2, 2, |i, j| {
        if (i, j) == (1, 1) {
            [2.5, 2.5]
        } else {
            [i as f64, j as f64]
        }
    });
    let case = write_case(dir.path(), "bad.p3d", 0.01);
    let out = semflow(&["run", case.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("inverted"), "{}", stderr(&out));
}

#[test]
fn oversized_step_reports_divergence() {
    let dir = tempfile::tempdir().unwrap();
    write_channel(&dir.path().join("channel.p3d"));
    let case = write_case(dir.path(), "channel.p3d", 1e3);
    let text = std::fs::read_to_string(&case).unwrap();
    std::fs::write(&case, text.replace("t_final = 1.0", "t_final = 1e9").replace("max_steps = 4", "max_steps = 200")).unwrap();
    let out = semflow(&["run", case.to_str().unwrap()]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn verify_fast_suite_passes() {
    let out = semflow(&["verify", "filters"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("overall: PASS"));
}

#[test]
fn verify_unknown_suite_lists_choices() {
    let out = semflow(&["verify", "nope"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("closure-duality"));
}

#[test]
fn extended_suite_requires_flag() {
    let out = semflow(&["verify", "naca-rans"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--extended"));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(code(&semflow(&["run"])), 2);
    assert_eq!(code(&semflow(&["frobnicate"])), 2);
}

#[test]
fn mesh_info_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    write_channel(&dir.path().join("channel.p3d"));
    let case = write_case(dir.path(), "channel.p3d", 0.01);
    let out = semflow(&["mesh-info", case.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("elements 4"), "{text}");
    assert!(text.contains("wall faces 8"), "{text}");
}

fn write_series(path: &Path, n: usize, t_end: f64) {
    let mut s = String::from("t,cl\n");
    for k in 0..n {
        let t = k as f64 * t_end / n as f64;
        let cl = 1.0 + 0.1 * (2.0 * std::f64::consts::PI * 0.19 * t).sin() * (-0.01 * t).exp();
        s.push_str(&format!("{t:e},{cl:e}\n"));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn post_psd_writes_table_and_chart() {
    let dir = tempfile::tempdir().unwrap();
    let cl = dir.path().join("cl.csv");
    write_series(&cl, 4096, 400.0);
    let out = semflow(&["post", "--psd", cl.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("psd.csv").exists());
    assert!(dir.path().join("psd.svg").exists());
    assert!(stdout(&out).contains("peak frequency 1.9"), "{}", stdout(&out));
}

#[test]
fn post_running_average_reports_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let cl = dir.path().join("cl.csv");
    write_series(&cl, 4096, 400.0);
    let out = semflow(&["post", "--running-avg", "--band", "0.002", cl.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("within 0.2% of the mean from t ="), "{}", stdout(&out));
    assert!(dir.path().join("running_avg.csv").exists());
}

#[test]
fn post_histogram_defaults_to_32_bins() {
    let dir = tempfile::tempdir().unwrap();
    let cl = dir.path().join("cl.csv");
    write_series(&cl, 1000, 100.0);
    let out = semflow(&["post", cl.to_str().unwrap(), "--hist"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = std::fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    assert_eq!(table.lines().count(), 33);
}

#[test]
fn post_mixed_sampling_needs_resample() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_series(&a, 512, 100.0);
    write_series(&b, 700, 100.0);
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    assert_eq!(code(&semflow(&["post", "--psd", a, b])), 2);
    let out = semflow(&["post", "--psd", "--resample", a, b]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("psd_a.cl.csv").exists());
}
