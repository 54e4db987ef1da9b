use seepage::mesh::ReservoirGeometry;
use seepage::stokes_darcy::{
    compute_interface_flux, constant_test_residual, energy_report, interface_normal_velocity_norm, steady_solve, step,
    CoupledState, LoadSchedule, PhysParams, StokesDarcyProblem,
};

fn reservoirs() -> StokesDarcyProblem<f64> {
    let g = ReservoirGeometry { cells_per_unit: 6, ..Default::default() };
    StokesDarcyProblem::two_reservoir(&g, 0.0).unwrap()
}

fn loaded(p: f64) -> PhysParams<f64> {
    PhysParams { pbar: LoadSchedule::constant(p), ..PhysParams::default() }
}

#[test]
fn transient_settles_on_steady_state() {
    let pb = reservoirs();
    let params = loaded(1.0);
    let steady = steady_solve(&params, &pb).unwrap();
    let mut s = CoupledState::zeros(&pb.dofmap);
    for _ in 0..40 {
        s = step(&s, 20.0, &params, &pb).unwrap();
    }
    let scale = steady.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(s.max_abs_diff(&steady) <= 1e-8 * scale.max(1.0), "{}", s.max_abs_diff(&steady));
}

#[test]
fn step_satisfies_its_system() {
    let pb = reservoirs();
    let params = loaded(1.0);
    let s0 = CoupledState::zeros(&pb.dofmap);
    let s1 = step(&s0, 0.1, &params, &pb).unwrap();
    let sys = pb.assemble(&params, Some(0.1), Some(&s0), 1.0).unwrap();
    let r = sys.residual(&s1.to_vector(&pb.dofmap));
    assert!(r.iter().all(|v| v.abs() < 1e-10));
}

#[test]
fn kirchhoff_closure_with_sealed_ends() {
    let pb = reservoirs();
    let params = loaded(2.0);
    let s = steady_solve(&params, &pb).unwrap();
    let len = pb.layer().unwrap().total_length();
    let total = compute_interface_flux(&s, &pb, [0.0, len]).unwrap();
    let left = compute_interface_flux(&s, &pb, [0.0, 1.0]).unwrap();
    assert!(left > 0.0);
    assert!(total.abs() <= 1e-8 * left);
    assert!(constant_test_residual(&s, &params, &pb).unwrap().abs() <= 1e-10 * left);
}

#[test]
fn normal_velocity_falls_with_normal_permeability() {
    let pb = reservoirs();
    let norms: Vec<f64> = [1.0, 1e-2, 1e-4]
        .iter()
        .map(|&k_n| {
            let s = steady_solve(&PhysParams { k_n, ..loaded(1.0) }, &pb).unwrap();
            interface_normal_velocity_norm(&s, &pb).unwrap()
        })
        .collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
}

#[test]
fn flux_falls_as_layer_seals() {
    let pb = reservoirs();
    let fluxes: Vec<f64> = [1.0, 1e-2, 1e-4]
        .iter()
        .map(|&k_tau| {
            let s = steady_solve(&PhysParams { k_tau, ..loaded(1.0) }, &pb).unwrap();
            compute_interface_flux(&s, &pb, [0.0, 1.0]).unwrap()
        })
        .collect();
    assert!(fluxes.windows(2).all(|w| w[1] < w[0]), "{fluxes:?}");
}

#[test]
fn superposition_in_the_load() {
    let pb = reservoirs();
    let a = steady_solve(&loaded(0.7), &pb).unwrap();
    let b = steady_solve(&loaded(-1.9), &pb).unwrap();
    let ab = steady_solve(&loaded(0.7 - 1.9), &pb).unwrap();
    let x = a.to_vector(&pb.dofmap);
    let y = b.to_vector(&pb.dofmap);
    let z = ab.to_vector(&pb.dofmap);
    let scale = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..z.len() {
        assert!((x[i] + y[i] - z[i]).abs() <= 1e-10 * scale);
    }
}

#[test]
fn unloaded_energy_never_grows() {
    let pb = reservoirs();
    let params = PhysParams::default();
    let mut s = steady_solve(&loaded(1.0), &pb).unwrap();
    for _ in 0..15 {
        let next = step(&s, 0.1, &params, &pb).unwrap();
        let e = energy_report(&s, &next, 0.1, &params, &pb).unwrap();
        assert!(e.kinetic <= e.kinetic_prev);
        // discrete balance: rate + dissipation <= 0
        assert!(e.kinetic_rate + e.viscous + e.interface + e.darcy <= 1e-12 * e.kinetic_prev.max(1.0));
        s = next;
    }
}
