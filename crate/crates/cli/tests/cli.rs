use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kinetics(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinetics"))
        .args(args)
        .current_dir(cwd)
        .env_remove("KINETICS_OUT")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = "\
[scenario]
name = small

[grid]
L = 10
N = 50

[kernel.a]
shape = gaussian
mu = 1
sigma = 0.5

[integration]
t_end = 1
snapshots = 0, 0.5, 1
";

#[test]
fn list_presets_names_every_figure() {
    let dir = tempfile::tempdir().unwrap();
    let out = kinetics(&["list-presets"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig1a", "fig2", "fig3a", "fig4d", "fig5f", "fig6d"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn run_writes_outputs_into_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "small.ini", SMALL);
    let out_dir = dir.path().join("out");
    let out = kinetics(
        &["run", &file, "--out", out_dir.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "snapshot_000.tsv",
        "snapshot_001.tsv",
        "snapshot_002.tsv",
        "timeseries.tsv",
        "manifest.ini",
    ] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "small.ini", SMALL);
    let root = dir.path().join("root");
    let out = Command::new(env!("CARGO_BIN_EXE_kinetics"))
        .args(["run", &file])
        .current_dir(dir.path())
        .env("KINETICS_OUT", &root)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(root.join("small").join("manifest.ini").exists());
}

#[test]
fn default_output_is_under_runs() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "small.ini", SMALL);
    assert!(kinetics(&["run", &file], dir.path()).status.success());
    assert!(dir.path().join("runs/small/timeseries.tsv").exists());
}

#[test]
fn invalid_scenario_exits_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "bad.ini",
        "[grid]\nL = 20\nN = abc\n[integration]\nstepper = rk9\n",
    );
    let out = kinetics(&["run", &file], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn unknown_preset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        kinetics(&["run", "fig9z"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn divergence_exits_3_and_keeps_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "blowup.ini",
        "[grid]\nL = 20\nN = 200\n\
         [kernel.a]\nshape = gaussian\nmu = 1\nsigma = 1\n\
         [kernel.b]\nshape = gaussian\nmu = 5\nsigma = 1\n\
         [kernel.phi]\nshape = gaussian\nmu = 20\nsigma = 1\n\
         [initial]\ntype = rectangle\nv = 4\nsigma = 1\n\
         [integration]\ndt = 2.5\nt_end = 100\nsnapshots = 0, 5, 100\n",
    );
    let out_dir = dir.path().join("o");
    let out = kinetics(
        &["run", &file, "--out", out_dir.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let manifest = fs::read_to_string(out_dir.join("manifest.ini")).unwrap();
    assert!(manifest.contains("diverged"));
}

#[test]
fn window_cap_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "cap.ini",
        "[scenario]\npreset = fig5a\n[adaptive]\nmax_n = 400\n",
    );
    let out = kinetics(&["run", &file, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn compare_paths_reports_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "small.ini", SMALL);
    let out = kinetics(&["compare-paths", &file], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rhs_max_diff"));
    assert!(text.contains("spectral_over_direct"));
    assert_eq!(
        kinetics(&["compare-paths", "fig1d"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sweep_errors_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "small.ini", SMALL);
    let out = kinetics(
        &[
            "sweep-errors",
            &file,
            "--h",
            "0.2",
            "--dt",
            "0.1,0.25,0.5",
            "--ref-h",
            "0.2",
            "--ref-dt",
            "0.01",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("h\tdt\ttheta_domain"));
    assert!(text.contains("# slope domain vs dt at fixed 0.2"));
}
