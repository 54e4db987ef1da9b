//! Scenario driver: configuration files, time loops and VTK / CSV output.

mod config;
mod output;

use std::path::{Path, PathBuf};

pub use config::{parse_config, parse_config_str, MeshConfig, Scenario, ScenarioKind};
pub use output::{fluid_vtk, trace_vtk, write_text, CsvSeries};

use crate::error::{Error, Result};
use crate::fsi_contact::{run_channel, ChannelFsi};
use crate::mesh::{generate_channel_mesh, generate_two_reservoir_mesh, ChannelTags, Mesh, Rect, ReservoirGeometry};
use crate::stokes_darcy::{compute_interface_flux, step, StokesDarcyProblem};
use crate::verify::run_suite;

/// What a run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    /// Time series (or, for `verify`, the last table written).
    pub csv: Option<PathBuf>,
    /// Verification thresholds that were missed.
    pub failures: Vec<String>,
}

impl RunSummary {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn reservoir_geometry(mesh: &MeshConfig) -> ReservoirGeometry<f64> {
    let (w, h) = (mesh.reservoir_width, mesh.height);
    ReservoirGeometry {
        left: Rect { x0: 0.0, x1: w, height: h },
        right: Rect { x0: w + mesh.gap, x1: 2.0 * w + mesh.gap, height: h },
        cells_per_unit: mesh.cells_per_unit,
    }
}

/// Reference mesh of a scenario kind with its default geometry.
pub fn scenario_mesh(kind: ScenarioKind) -> Result<Mesh<f64>> {
    let m = Scenario::defaults(kind).mesh;
    match kind {
        ScenarioKind::TwoReservoir => generate_two_reservoir_mesh(&reservoir_geometry(&m)),
        ScenarioKind::ChannelContact => generate_channel_mesh(m.length, m.height, m.nx, m.ny, ChannelTags::default()),
        ScenarioKind::Verify => Err(Error::InvalidArgument("the verify scenario has no single mesh".into())),
    }
}

/// Runs a scenario, writing outputs into `out_dir`.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir)?;
    match scenario.kind {
        ScenarioKind::TwoReservoir => run_two_reservoir(scenario, out_dir),
        ScenarioKind::ChannelContact => run_channel_contact(scenario, out_dir),
        ScenarioKind::Verify => run_verify(scenario, out_dir),
    }
}

fn snapshot_due(scenario: &Scenario, step: usize) -> bool {
    scenario.vtk_every > 0 && (step.is_multiple_of(scenario.vtk_every) || step == scenario.steps())
}

fn run_two_reservoir(scenario: &Scenario, out_dir: &Path) -> Result<RunSummary> {
    let geom = reservoir_geometry(&scenario.mesh);
    let problem = StokesDarcyProblem::two_reservoir(&geom, scenario.right_factor)?;
    let (w1, w2) = geom.windows();
    let layer = problem.layer()?;
    let csv_path = out_dir.join("series.csv");
    let mut csv = CsvSeries::create(&csv_path, &["t", "flux_res1", "flux_res2", "max_Pl"])?;
    let mut state = crate::stokes_darcy::CoupledState::zeros(&problem.dofmap);
    let steps = scenario.steps();
    for k in 1..=steps {
        state = step(&state, scenario.dt, &scenario.params, &problem)?;
        let max_pl = state.p_l.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        csv.row(&[
            state.time,
            compute_interface_flux(&state, &problem, w1)?,
            compute_interface_flux(&state, &problem, w2)?,
            max_pl,
        ])?;
        if snapshot_due(scenario, k) {
            write_text(&out_dir.join(format!("fluid_{k:05}.vtk")), &fluid_vtk(&problem.mesh, &problem.dofmap, &state))?;
            let layer_text = trace_vtk(&problem.mesh, layer, state.time, "porous_pressure", &state.p_l);
            write_text(&out_dir.join(format!("layer_{k:05}.vtk")), &layer_text)?;
        }
    }
    Ok(RunSummary { steps, csv: Some(csv_path), failures: Vec::new() })
}

fn run_channel_contact(scenario: &Scenario, out_dir: &Path) -> Result<RunSummary> {
    let m = &scenario.mesh;
    let problem = ChannelFsi::new(m.length, m.height, m.nx, m.ny)?;
    let g_min = problem.g_min(&scenario.params);
    let csv_path = out_dir.join("series.csv");
    let mut csv = CsvSeries::create(&csv_path, &["t", "min_gap", "contact_length", "flux_total"])?;
    let mut k = 0;
    let steps = scenario.steps();
    run_channel(&problem, &scenario.params, problem.initial_state(), scenario.dt, steps, |state, sample| {
        k += 1;
        csv.row(&[sample.time, sample.min_gap, sample.contact_length, sample.flux_total])?;
        if snapshot_due(scenario, k) {
            let wall = state.wall.as_ref().expect("channel state carries the wall");
            let mesh = problem.deformed_mesh(&wall.eta, g_min)?;
            write_text(&out_dir.join(format!("fluid_{k:05}.vtk")), &fluid_vtk(&mesh, &problem.dofmap, state))?;
            let layer_text = trace_vtk(&mesh, problem.layer(), state.time, "porous_pressure", &state.p_l);
            write_text(&out_dir.join(format!("layer_{k:05}.vtk")), &layer_text)?;
            let wall_text = trace_vtk(&mesh, problem.wall_trace(), state.time, "displacement", &wall.eta);
            write_text(&out_dir.join(format!("wall_{k:05}.vtk")), &wall_text)?;
        }
        Ok(())
    })?;
    Ok(RunSummary { steps, csv: Some(csv_path), failures: Vec::new() })
}

fn run_verify(scenario: &Scenario, out_dir: &Path) -> Result<RunSummary> {
    let mut failures = Vec::new();
    let mut csv_path = None;
    for result in run_suite(scenario.suite)? {
        println!("{}", result.table);
        let name = result.table.name.replace(' ', "_").to_lowercase();
        let path = out_dir.join(format!("verify_{name}.csv"));
        let mut csv = CsvSeries::create(&path, &["h", "error_l2", "error_h1"])?;
        for row in result.table.rows() {
            csv.row(&[row.h, row.error_l2, row.error_h1])?;
        }
        csv_path = Some(path);
        failures.extend(result.failures.iter().map(|f| format!("{}: {f}", result.table.name)));
    }
    Ok(RunSummary { steps: 0, csv: csv_path, failures })
}
