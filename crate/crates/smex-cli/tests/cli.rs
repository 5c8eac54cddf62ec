//! End-to-end tests of the command-line interface, run against the built
//! binary. Outputs are plain text, so determinism is checked byte-for-byte.

use std::path::PathBuf;
use std::process::{Command, Output};

fn smex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smex"))
        .args(args)
        .output()
        .expect("failed to run the smex binary")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("smex-cli-test-{}-{name}", std::process::id()));
    p
}

fn value_of(stdout: &str, key: &str) -> Option<f64> {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .and_then(|v| v.parse().ok())
}

#[test]
fn mesh_command_round_trips() {
    let path = tmp_path("square.txt");
    let out = smex(&[
        "mesh",
        "--geom",
        "square-split",
        "--n",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout_of(&out).contains("conforming=true"));

    let text = std::fs::read_to_string(&path).unwrap();
    let mesh = smex::mesh::read_mesh(&text).unwrap();
    assert_eq!(mesh.num_vertices(), 17 * 17);
    // writing the parsed mesh reproduces the file byte-for-byte
    assert_eq!(smex::mesh::write_mesh(&mesh), text);
    std::fs::remove_file(&path).ok();
}

#[test]
fn mesh_command_rejects_too_small_disk() {
    let path = tmp_path("disk-reject.txt");
    let out = smex(&[
        "mesh",
        "--geom",
        "disk-annulus",
        "--n",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert!(!path.exists());
}

#[test]
fn corner_mesh_reports_conforming() {
    let path = tmp_path("corner.txt");
    let out = smex(&[
        "mesh",
        "--geom",
        "corner",
        "--n",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("conforming=true"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn analyze_corner_reports_exponent_and_interval() {
    let out = smex(&["analyze", "corner", "--kappa", "-5"]);
    assert!(out.status.success());
    let stdout = stdout_of(&out);
    assert!(stdout.contains("verdict=well-posed"));
    // smallest dispersion root (closed form (4/pi) atan(1/sqrt(7)))
    let sigma = value_of(&stdout, "sigma_D").unwrap();
    assert!((sigma - 0.460107).abs() < 1e-3, "sigma_D = {sigma}");
    let interval = stdout
        .lines()
        .find(|l| l.starts_with("q_interval="))
        .unwrap();
    let upper: f64 = interval
        .trim_start_matches("q_interval=(0,")
        .trim_end_matches(')')
        .parse()
        .unwrap();
    assert!(
        (upper - (2.0 * sigma + 1.0)).abs() < 1e-3,
        "interval {interval}"
    );
}

#[test]
fn analyze_annulus_flags_forbidden_contrast() {
    let out = smex(&["analyze", "annulus", "--kappa", "-0.6"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("verdict=ill-posed"));

    let out = smex(&["analyze", "annulus", "--kappa", "-2"]);
    assert!(stdout_of(&out).contains("verdict=well-posed"));
}

#[test]
fn analyze_corner_flags_critical_interval() {
    let out = smex(&["analyze", "corner", "--kappa", "-2"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("verdict=critical-interval"));
}

#[test]
fn solve_summary_and_solution_export() {
    // threshold pinned from the first validated run of this configuration
    // (observed misfit 8.4e-10 at n = 16 with lambda = 0.002 h^2)
    let solution = tmp_path("solution.txt");
    let history = tmp_path("history.csv");
    let out = smex(&[
        "solve",
        "--case",
        "flat",
        "--kappa",
        "-2",
        "--n",
        "16",
        "--out",
        solution.to_str().unwrap(),
        "--history",
        history.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = stdout_of(&out);
    let misfit = value_of(&stdout, "misfit").unwrap();
    assert!(misfit < 1e-6, "misfit {misfit}");
    assert!(value_of(&stdout, "cost").is_some());
    assert!(stdout.contains("iterations="));

    // one solution line per mesh vertex of the 33x33 grid
    let lines = std::fs::read_to_string(&solution).unwrap().lines().count();
    assert_eq!(lines, 33 * 33);

    let hist = std::fs::read_to_string(&history).unwrap();
    assert!(hist.starts_with("iter,cost,misfit,reg,gradnorm,step\n"));
    std::fs::remove_file(&solution).ok();
    std::fs::remove_file(&history).ok();
}

#[test]
fn solve_requires_kappa() {
    let out = smex(&["solve", "--case", "flat"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--kappa"));
}

#[test]
fn bench_writes_csv_with_rate_footer() {
    let csv_path = tmp_path("flat-report.csv");
    let out = smex(&[
        "bench",
        "--case",
        "flat",
        "--kappa",
        "-1.001",
        "--levels",
        "4",
        "--method",
        "cg",
        "--tol",
        "1e-10",
        "--max-iters",
        "4000",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = stdout_of(&out);
    assert!(stdout.contains("relL2_rate="));
    assert!(stdout.contains("relH1_rate="));

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "level,h,N,lambda,iters,cost,misfit,relL2,relH1");
    assert_eq!(lines.len(), 1 + 4 + 1);
    assert!(lines[5].starts_with("# rates"));
    std::fs::remove_file(&csv_path).ok();
}

#[test]
fn bench_rejects_critical_corner_contrast() {
    let out = smex(&[
        "bench", "--case", "corner", "--kappa", "-2", "--levels", "3",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("critical"));
}

#[test]
fn bench_needs_three_levels() {
    let out = smex(&[
        "bench", "--case", "flat", "--kappa", "-2", "--levels", "2", "--n", "2",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("3 levels"));
}

#[test]
fn commands_are_deterministic() {
    // identical arguments must produce identical bytes
    let (p1, p2) = (tmp_path("det1.txt"), tmp_path("det2.txt"));
    for p in [&p1, &p2] {
        let out = smex(&[
            "mesh",
            "--geom",
            "disk-annulus",
            "--n",
            "4",
            "--refine",
            "1",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    std::fs::remove_file(&p1).ok();
    std::fs::remove_file(&p2).ok();

    let run = || {
        let out = smex(&[
            "bench",
            "--case",
            "flat",
            "--kappa",
            "-2.5",
            "--levels",
            "3",
            "--n",
            "2",
            "--method",
            "cg",
            "--tol",
            "1e-11",
            "--max-iters",
            "2000",
        ]);
        assert!(out.status.success());
        stdout_of(&out)
    };
    assert_eq!(run(), run());

    let analyze = || stdout_of(&smex(&["analyze", "corner", "--kappa", "-3.1"]));
    assert_eq!(analyze(), analyze());
}

#[test]
fn solve_accepts_a_mesh_file() {
    let mesh_path = tmp_path("solve-mesh.txt");
    let out = smex(&[
        "mesh",
        "--geom",
        "square-split",
        "--n",
        "4",
        "--out",
        mesh_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = smex(&[
        "solve",
        "--case",
        "flat",
        "--kappa",
        "-2",
        "--mesh",
        mesh_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(value_of(&stdout_of(&out), "misfit").is_some());
    std::fs::remove_file(&mesh_path).ok();
}

#[test]
fn inadmissible_schedule_exponent_warns_but_runs() {
    let out = smex(&[
        "solve", "--case", "flat", "--kappa", "-2", "--n", "4", "--q", "5", "--method", "cg",
        "--tol", "1e-8",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn bench_supports_parallel_levels() {
    let out = smex(&[
        "bench", "--case", "flat", "--kappa", "-2", "--levels", "3", "--n", "2", "--jobs", "3",
        "--method", "cg", "--tol", "1e-10",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout_of(&out).contains("relL2_rate="));
}
