use std::process::Command;

use seepage::cli::{parse_config_str, run};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seepage"))
}

#[test]
fn reservoir_csv_has_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_config_str("scenario = two_reservoir\n[mesh]\ncells_per_unit = 4\n[time]\ndt = 0.1\nt_end = 0.5\n[output]\nvtk_every = 2\n").unwrap();
    let summary = run(&s, dir.path()).unwrap();
    let text = std::fs::read_to_string(summary.csv.unwrap()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,flux_res1,flux_res2,max_Pl"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.len() == 4 && r[1] > 0.0 && r[2] < 0.0));
    for name in ["fluid_00002.vtk", "layer_00004.vtk", "fluid_00005.vtk"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn channel_writes_wall_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "scenario = channel_contact\n[mesh]\nnx = 8\nny = 2\n[time]\nt_end = 0.1\n[output]\nvtk_every = 5\n";
    let summary = run(&parse_config_str(cfg).unwrap(), dir.path()).unwrap();
    assert_eq!(summary.steps, 5);
    let wall = std::fs::read_to_string(dir.path().join("wall_00005.vtk")).unwrap();
    assert!(wall.contains("SCALARS displacement double 1"));
    let text = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert!(text.starts_with("t,min_gap,contact_length,flux_total\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn binary_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "scenario = two_reservoir\n[fluid]\nviscocity = 0.1\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fluid.viscocity"));
}

#[test]
fn binary_verify_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["verify", "--suite", "mms", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("surface Darcy MMS"));
    assert!(dir.path().join("verify_surface_darcy_mms.csv").exists());
    let mesh = dir.path().join("res.seepmesh");
    let out = bin().args(["mesh", "--scenario", "two_reservoir", "--out"]).arg(&mesh).output().unwrap();
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&mesh).unwrap().starts_with("SEEPMESH"));
    let out = bin().args(["verify", "--suite", "stokes"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
