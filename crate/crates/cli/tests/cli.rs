//! End-to-end checks of the binary: exit codes, file outputs, determinism.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_abcd-lab"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("abcd_cli_tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn classify_inline_params() {
    let out = bin()
        .args(["classify", "--params", r#"{"b":0.3,"ac_line":true}"#])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("ConeBand_b_le_crit"), "{text}");
    assert!(text.contains("0.2592592592592592"), "{text}");
}

#[test]
fn malformed_json_exits_with_config_code() {
    let out = bin()
        .args(["classify", "--params", r#"{"b":0.3,"#])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn invalid_parameters_exit_with_config_code() {
    let out = bin()
        .args([
            "classify",
            "--params",
            r#"{"a":-0.1,"b":0.2,"c":-0.1,"d":0.3}"#,
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Hamiltonian"));
}

#[test]
fn atlas_csv_is_deterministic() {
    let path_a = tmp("map_a.csv");
    let path_b = tmp("map_b.csv");
    for path in [&path_a, &path_b] {
        let out = bin()
            .args([
                "atlas",
                "--axes",
                "nu-b",
                "--res",
                "40x30",
                "--predicates",
                "dispersion_like,ellipse",
                "--out",
            ])
            .arg(path)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = fs::read(&path_a).unwrap();
    let b = fs::read(&path_b).unwrap();
    assert_eq!(a, b, "atlas output not byte-identical across runs");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("x,y,predicate,value,boundary\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 40 * 30);
}

#[test]
fn atlas_svg_and_unknown_predicate() {
    let svg_path = tmp("map.svg");
    let out = bin()
        .args([
            "atlas",
            "--res",
            "24x24",
            "--predicates",
            "refined",
            "--out",
        ])
        .arg(&svg_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    let out = bin()
        .args(["atlas", "--predicates", "nonsense", "--out", "x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn waves_csv_has_expected_columns() {
    let path = tmp("dispersion.csv");
    let out = bin()
        .args([
            "waves",
            "--params",
            r#"{"nu":0.3333333333333333,"b":0.25}"#,
            "--kmax",
            "10",
            "--samples",
            "101",
            "--out",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,omega,A,group_velocity");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // k = 0: omega 0, amplitude 1, group velocity 1
    assert_eq!(first[0], "0");
    assert_eq!(first[1], "0");
    assert_eq!(first[2], "1");
    assert_eq!(first[3], "1");
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn simulate_virial_check_decay_report_pipeline() {
    let traj_path = tmp("traj.bin");
    let out = bin()
        .args([
            "simulate",
            "--params",
            r#"{"b":0.25,"ac_line":true}"#,
            "--init",
            "gaussian:0.05,4",
            "--grid",
            "512,314.159265358979",
            "--dt",
            "0.02",
            "--T",
            "8",
            "--stride",
            "25",
            "--out",
        ])
        .arg(&traj_path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let resid_path = tmp("residuals.csv");
    let out = bin()
        .args(["virial-check", "--traj"])
        .arg(&traj_path)
        .args(["--alpha", "auto", "--weight", "tanh", "--v", "0.0", "--out"])
        .arg(&resid_path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&resid_path).unwrap();
    assert!(text.starts_with("t,dH_dt_fd,Q,SQ,NQ,VH,residual\n"));
    // every sampled residual is small relative to the rate
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let (rate, residual) = (cols[1], cols[6]);
        assert!(residual.abs() < 1e-6 * rate.abs().max(1.0), "{line}");
    }

    let report_path = tmp("report.json");
    let series_path = tmp("series.csv");
    let out = bin()
        .args(["decay-report", "--traj"])
        .arg(&traj_path)
        .args(["--velocities", "0.0", "--t-start", "2.0", "--out"])
        .arg(&report_path)
        .args(["--series"])
        .arg(&series_path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = fs::read_to_string(&report_path).unwrap();
    assert!(report.contains("sech4_trend"));
    let series = fs::read_to_string(&series_path).unwrap();
    assert!(series.starts_with("t,frame_id,window_h1,sech2,sech4,eloc\n"));
    assert!(series.lines().count() > 2);
}

#[test]
fn simulate_csv_directory_round_trip() {
    let dir = tmp("traj_csv_dir");
    let _ = fs::remove_dir_all(&dir);
    let out = bin()
        .args([
            "simulate",
            "--params",
            r#"{"nu":0.4,"b":0.3}"#,
            "--init",
            "gaussian:0.02,3",
            "--grid",
            "256,200",
            "--dt",
            "0.05",
            "--T",
            "1",
            "--stride",
            "10",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let count = fs::read_dir(&dir).unwrap().count();
    assert_eq!(count, 3, "expected 3 snapshots");
    let first = fs::read_to_string(dir.join("snap_000000.csv")).unwrap();
    assert!(first.starts_with("# n=256"));
    assert!(first.lines().nth(1).unwrap().starts_with("x,u,eta"));
}

#[test]
fn missing_trajectory_exits_with_io_code() {
    let out = bin()
        .args([
            "virial-check",
            "--traj",
            "/nonexistent/t.bin",
            "--out",
            "/tmp/x.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
