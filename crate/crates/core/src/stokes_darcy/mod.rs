//! Bulk Stokes flow coupled to the averaged Darcy pressure on the porous
//! layer: monolithic backward-Euler stepping, stationary solves and flux /
//! energy diagnostics.

mod params;

pub use params::{LoadSchedule, PhysParams, PorousStressSign};

use crate::error::{Error, Result};
use crate::fem::{
    apply_no_slip, apply_zero_tangential, assemble_interface_coupling, assemble_neumann_loads,
    assemble_stokes_block, assemble_surface_darcy, build_dof_map, p1_gradients, segment_normal_velocity,
    solve_linear, DofMap, Field, FieldSelection, Quadrature, SparseSystem, SystemBuilder, StokesCoefficients,
};
use crate::mesh::{
    extract_trace, generate_channel_mesh, generate_two_reservoir_mesh, tags, ChannelTags, Mesh, ReservoirGeometry, Tag,
    TraceMesh,
};
use crate::scalar::Scalar;

/// Wall unknowns of the contact model.
#[derive(Clone, Debug, PartialEq)]
pub struct WallState<T> {
    pub eta: Vec<T>,
    pub eta_dot: Vec<T>,
    /// Contact pressure magnitude (`>= 0`).
    pub lambda: Vec<T>,
}

/// Solution snapshot. `u` stores all x-components followed by all
/// y-components, in the vertex order of the dof map.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledState<T> {
    pub time: T,
    pub u: Vec<T>,
    pub p: Vec<T>,
    pub p_l: Vec<T>,
    pub wall: Option<WallState<T>>,
}

impl<T: Scalar> CoupledState<T> {
    pub fn zeros(dofmap: &DofMap) -> Self {
        Self::from_vector(dofmap, &vec![T::zero(); dofmap.n_dofs()], T::zero())
    }

    /// Splits a global solution vector into fields.
    pub fn from_vector(dofmap: &DofMap, x: &[T], time: T) -> Self {
        let take = |f: Field| x[dofmap.range(f)].to_vec();
        let mut u = take(Field::VelocityX);
        u.extend(take(Field::VelocityY));
        let wall = dofmap.has(Field::WallDisplacement).then(|| WallState {
            eta: take(Field::WallDisplacement),
            eta_dot: take(Field::WallVelocity),
            lambda: if dofmap.has(Field::ContactMultiplier) {
                take(Field::ContactMultiplier)
            } else {
                vec![T::zero(); dofmap.count(Field::WallDisplacement)]
            },
        });
        CoupledState { time, u, p: take(Field::Pressure), p_l: take(Field::PorousPressure), wall }
    }

    /// Global solution vector numbered by `dofmap`.
    pub fn to_vector(&self, dofmap: &DofMap) -> Vec<T> {
        let mut x = vec![T::zero(); dofmap.n_dofs()];
        let nf = dofmap.count(Field::VelocityX);
        let mut put = |f: Field, v: &[T]| {
            let r = dofmap.range(f);
            x[r].copy_from_slice(&v[..dofmap.count(f)]);
        };
        put(Field::VelocityX, &self.u[..nf]);
        put(Field::VelocityY, &self.u[nf..]);
        put(Field::Pressure, &self.p);
        put(Field::PorousPressure, &self.p_l);
        if let Some(w) = &self.wall {
            put(Field::WallDisplacement, &w.eta);
            put(Field::WallVelocity, &w.eta_dot);
            if dofmap.has(Field::ContactMultiplier) {
                put(Field::ContactMultiplier, &w.lambda);
            }
        }
        x
    }

    /// Checks vector lengths against `dofmap`.
    pub fn is_consistent(&self, dofmap: &DofMap) -> bool {
        self.u.len() == 2 * dofmap.count(Field::VelocityX)
            && self.p.len() == dofmap.count(Field::Pressure)
            && self.p_l.len() == dofmap.count(Field::PorousPressure)
            && self.wall.as_ref().is_none_or(|w| w.eta.len() == dofmap.count(Field::WallDisplacement))
    }

    /// Component-wise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let d = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
        d(&self.u, &other.u).max(d(&self.p, &other.p)).max(d(&self.p_l, &other.p_l))
    }
}

/// Geometry, boundary roles and numbering of a Stokes-Darcy problem.
#[derive(Clone, Debug)]
pub struct StokesDarcyProblem<T> {
    pub mesh: Mesh<T>,
    pub layer: Option<TraceMesh<T>>,
    pub dofmap: DofMap,
    pub quad: Quadrature<T>,
    /// Loaded pressure boundaries: `(tag, factor)`; the applied pressure is
    /// `factor * P(t)`.
    pub loads: Vec<(Tag, T)>,
    pub no_slip: Vec<Tag>,
    /// Optional Dirichlet values of `P_l` at the first and last trace vertex;
    /// `None` keeps the sealed (zero-flux) end.
    pub porous_ends: [Option<T>; 2],
}

impl<T: Scalar> StokesDarcyProblem<T> {
    /// Builds a problem on `mesh`. `layer_tag` selects the porous layer
    /// (`None` for pure Stokes; the tag is then treated as slip-free wall).
    pub fn new(mesh: Mesh<T>, layer_tag: Option<Tag>, loads: Vec<(Tag, T)>, no_slip: Vec<Tag>) -> Result<Self> {
        let layer = layer_tag.map(|t| extract_trace(&mesh, t)).transpose()?;
        let fields = if layer.is_some() { FieldSelection::STOKES_DARCY } else { FieldSelection::STOKES };
        let dofmap = build_dof_map(&mesh, layer.as_ref(), None, fields)?;
        Ok(StokesDarcyProblem { mesh, layer, dofmap, quad: Quadrature::new(), loads, no_slip, porous_ends: [None, None] })
    }

    /// Two reservoirs joined by the layer; `P` acts on the left reservoir top
    /// and `right_factor * P` on the right one.
    pub fn two_reservoir(geom: &ReservoirGeometry<T>, right_factor: T) -> Result<Self> {
        let mesh = generate_two_reservoir_mesh(geom)?;
        Self::new(
            mesh,
            Some(tags::POROUS_LAYER),
            vec![(tags::NEUMANN_LEFT, T::one()), (tags::NEUMANN_RIGHT, right_factor)],
            vec![tags::RIGID_WALL],
        )
    }

    /// Channel with pressure `P` on the left end and zero on the right end.
    /// The layer (when `with_layer`) sits on the bottom; the top is rigid.
    pub fn channel(length: T, height: T, nx: usize, ny: usize, with_layer: bool) -> Result<Self> {
        let bottom = if with_layer { tags::POROUS_LAYER } else { tags::RIGID_WALL };
        let t = ChannelTags { bottom, top: tags::RIGID_WALL, ..ChannelTags::default() };
        let mesh = generate_channel_mesh(length, height, nx, ny, t)?;
        Self::new(
            mesh,
            with_layer.then_some(tags::POROUS_LAYER),
            vec![(tags::NEUMANN_LEFT, T::one()), (tags::NEUMANN_RIGHT, T::zero())],
            vec![tags::RIGID_WALL],
        )
    }

    pub fn layer(&self) -> Result<&TraceMesh<T>> {
        self.layer.as_ref().ok_or_else(|| Error::NotFound("problem has no porous layer".into()))
    }

    /// Assembles the linear system for one backward-Euler step (`dt = Some`)
    /// or the stationary problem (`dt = None`) under boundary pressure `pbar`.
    pub fn assemble(&self, params: &PhysParams<T>, dt: Option<T>, prev: Option<&CoupledState<T>>, pbar: T) -> Result<SparseSystem<T>> {
        params.validate()?;
        let mass = match dt {
            Some(dt) if dt > T::zero() => params.rho_f / dt,
            Some(dt) => return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}"))),
            None => T::zero(),
        };
        let d = &self.dofmap;
        let mut b = SystemBuilder::new(d.n_dofs());
        let prev_vec = prev.map(|s| s.to_vector(d));
        let coef = StokesCoefficients { mu: params.mu, mass, delta_stab: params.delta_stab };
        assemble_stokes_block(&mut b, &self.mesh, d, &coef, prev_vec.as_deref());
        let loads: Vec<(Tag, T)> = self.loads.iter().map(|&(t, f)| (t, f * pbar)).collect();
        assemble_neumann_loads(&mut b, &self.mesh, d, &loads);
        if let Some(layer) = &self.layer {
            assemble_surface_darcy(&mut b, layer, d, params.eps_k_tau());
            assemble_interface_coupling(&mut b, layer, d, params.epsilon, params.k_n, &self.quad, |_| false)?;
            let verts = layer.vertices();
            for (end, v) in [(0, verts[0]), (1, verts[verts.len() - 1])] {
                if let Some(val) = self.porous_ends[end] {
                    b.constrain(d.at(Field::PorousPressure, v), val);
                }
            }
        }
        let load_tags: Vec<Tag> = self.loads.iter().map(|(t, _)| *t).collect();
        let layer_verts = self.layer.as_ref().map(|l| l.vertices()).unwrap_or(&[]);
        apply_zero_tangential(&mut b, &self.mesh, d, &load_tags, layer_verts)?;
        apply_no_slip(&mut b, &self.mesh, d, &self.no_slip);
        Ok(b.finish())
    }
}

/// One backward-Euler step from `state` to `state.time + dt`; the boundary
/// pressure is evaluated at the new time.
pub fn step<T: Scalar>(state: &CoupledState<T>, dt: T, params: &PhysParams<T>, problem: &StokesDarcyProblem<T>) -> Result<CoupledState<T>> {
    if !state.is_consistent(&problem.dofmap) {
        return Err(Error::InvalidArgument("state does not match the dof map".into()));
    }
    let t_next = state.time + dt;
    let system = problem.assemble(params, Some(dt), Some(state), params.pbar.value_at(t_next))?;
    let x = solve_linear(&system)?;
    Ok(CoupledState::from_vector(&problem.dofmap, &x, t_next))
}

/// Stationary solution under the final value of the load schedule.
pub fn steady_solve<T: Scalar>(params: &PhysParams<T>, problem: &StokesDarcyProblem<T>) -> Result<CoupledState<T>> {
    let system = problem.assemble(params, None, None, params.pbar.final_value())?;
    let x = solve_linear(&system)?;
    Ok(CoupledState::from_vector(&problem.dofmap, &x, T::zero()))
}

/// `int_window u . n ds` over the fluid-coupled part of the layer; sealed
/// segments contribute nothing. `window` is an arc-length interval.
pub fn compute_interface_flux<T: Scalar>(state: &CoupledState<T>, problem: &StokesDarcyProblem<T>, window: [T; 2]) -> Result<T> {
    let layer = problem.layer()?;
    let tol = T::of(1e-12) * (T::one() + layer.total_length());
    if !(window[0] <= window[1]) || window[0] < -tol || window[1] > layer.total_length() + tol {
        return Err(Error::Range(format!(
            "window [{}, {}] outside trace extent [0, {}]",
            window[0],
            window[1],
            layer.total_length()
        )));
    }
    let x = state.to_vector(&problem.dofmap);
    let arc = layer.arc_coords();
    let mut flux = T::zero();
    for seg in layer.segments().iter().filter(|s| s.triangle.is_some()) {
        let (s0, s1) = (arc[seg.local[0]], arc[seg.local[1]]);
        let lo = s0.max(window[0]);
        let hi = s1.min(window[1]);
        if !(hi > lo) {
            continue;
        }
        for (&q, &w) in problem.quad.seg_points.iter().zip(&problem.quad.seg_weights) {
            let s = lo + (hi - lo) * q;
            let local = (s - s0) / (s1 - s0);
            let un = segment_normal_velocity(&problem.dofmap, seg, local);
            let val = un.iter().fold(T::zero(), |acc, &(i, c)| acc + c * x[i]);
            flux += w * (hi - lo) * val;
        }
    }
    Ok(flux)
}

/// `||u . n||_{L2}` over the fluid-coupled part of the layer.
pub fn interface_normal_velocity_norm<T: Scalar>(state: &CoupledState<T>, problem: &StokesDarcyProblem<T>) -> Result<T> {
    let layer = problem.layer()?;
    let x = state.to_vector(&problem.dofmap);
    let mut acc = T::zero();
    for seg in layer.segments().iter().filter(|s| s.triangle.is_some()) {
        for (&q, &w) in problem.quad.seg_points.iter().zip(&problem.quad.seg_weights) {
            let un = segment_normal_velocity(&problem.dofmap, seg, q);
            let v = un.iter().fold(T::zero(), |a, &(i, c)| a + c * x[i]);
            acc += w * seg.length * v * v;
        }
    }
    Ok(acc.sqrt())
}

/// Residual of the surface equation tested with `q = 1`:
/// `sum_i (eps K_tau A P)_i - int u . n`. Vanishes for converged solutions
/// with sealed ends.
pub fn constant_test_residual<T: Scalar>(state: &CoupledState<T>, params: &PhysParams<T>, problem: &StokesDarcyProblem<T>) -> Result<T> {
    let layer = problem.layer()?;
    let d = &problem.dofmap;
    let mut b = SystemBuilder::new(d.n_dofs());
    assemble_surface_darcy(&mut b, layer, d, params.eps_k_tau());
    assemble_interface_coupling(&mut b, layer, d, params.epsilon, params.k_n, &problem.quad, |_| false)?;
    let a = b.finish().matrix;
    let ax = a.mul_vec(&state.to_vector(d));
    Ok(d.range(Field::PorousPressure).fold(T::zero(), |acc, i| acc + ax[i]))
}

/// Energy bookkeeping of a step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport<T> {
    /// `(rho_f / 2) ||u_prev||^2`.
    pub kinetic_prev: T,
    /// `(rho_f / 2) ||u||^2`.
    pub kinetic: T,
    /// `(mu (grad u + grad u^T), grad u)`.
    pub viscous: T,
    /// `(eps / (4 K_n)) ||u . n||^2` on the layer.
    pub interface: T,
    /// `eps K_tau ||d_s P_l||^2` on the layer.
    pub darcy: T,
    /// `(E_kin - E_kin_prev) / dt`.
    pub kinetic_rate: T,
}

pub fn energy_report<T: Scalar>(
    state_prev: &CoupledState<T>,
    state_next: &CoupledState<T>,
    dt: T,
    params: &PhysParams<T>,
    problem: &StokesDarcyProblem<T>,
) -> Result<EnergyReport<T>> {
    let d = &problem.dofmap;
    let mesh = &problem.mesh;
    let half = T::of(0.5);
    let kinetic = |s: &CoupledState<T>| -> T {
        let x = s.to_vector(d);
        let mut e = T::zero();
        for t in 0..mesh.n_triangles() {
            let tri = mesh.triangles()[t];
            let area = mesh.signed_area(t);
            for f in [Field::VelocityX, Field::VelocityY] {
                let v = tri.map(|k| x[d.at(f, k)]);
                let sum = v[0] + v[1] + v[2];
                // consistent P1 mass: area / 12 (sum^2 + sum v_i^2)
                e += area / T::of(12.0) * (sum * sum + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            }
        }
        half * params.rho_f * e
    };
    let x = state_next.to_vector(d);
    let mut viscous = T::zero();
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangles()[t];
        let p = tri.map(|k| mesh.vertices()[k]);
        let (area, g) = p1_gradients(p);
        let mut grad = [[T::zero(); 2]; 2];
        for (i, &v) in tri.iter().enumerate() {
            let (ux, uy) = (x[d.at(Field::VelocityX, v)], x[d.at(Field::VelocityY, v)]);
            for c in 0..2 {
                grad[0][c] += ux * g[i][c];
                grad[1][c] += uy * g[i][c];
            }
        }
        let mut s = T::zero();
        for a in 0..2 {
            for c in 0..2 {
                s += (grad[a][c] + grad[c][a]) * grad[a][c];
            }
        }
        viscous += params.mu * area * s;
    }
    let (mut interface, mut darcy) = (T::zero(), T::zero());
    if let Some(layer) = &problem.layer {
        interface = params.normal_resistance() * interface_normal_velocity_norm(state_next, problem)?.powi(2);
        for seg in layer.segments() {
            let [a, c] = seg.vertices.map(|v| x[d.at(Field::PorousPressure, v)]);
            let slope = (c - a) / seg.length;
            darcy += params.eps_k_tau() * slope * slope * seg.length;
        }
    }
    let (kinetic_prev, kinetic) = (kinetic(state_prev), kinetic(state_next));
    Ok(EnergyReport { kinetic_prev, kinetic, viscous, interface, darcy, kinetic_rate: (kinetic - kinetic_prev) / dt })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_reservoir() -> StokesDarcyProblem<f64> {
        let g = ReservoirGeometry { cells_per_unit: 4, ..Default::default() };
        StokesDarcyProblem::two_reservoir(&g, 0.0).unwrap()
    }

    #[test]
    fn zero_load_stays_at_rest() {
        let pb = small_reservoir();
        let params = PhysParams::default();
        let mut s = CoupledState::zeros(&pb.dofmap);
        for _ in 0..3 {
            s = step(&s, 0.1, &params, &pb).unwrap();
        }
        assert!(s.u.iter().chain(&s.p).chain(&s.p_l).all(|v| *v == 0.0));
        assert!((s.time - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_state_energy_is_zero() {
        let pb = small_reservoir();
        let s = CoupledState::zeros(&pb.dofmap);
        let e = energy_report(&s, &s, 0.1, &PhysParams::default(), &pb).unwrap();
        assert_eq!((e.kinetic, e.viscous, e.interface, e.darcy), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn flux_of_unit_normal_velocity() {
        let pb = StokesDarcyProblem::<f64>::channel(4.0, 1.0, 8, 2, true).unwrap();
        let mut s = CoupledState::zeros(&pb.dofmap);
        let nf = pb.dofmap.count(Field::VelocityX);
        for v in s.u[nf..].iter_mut() {
            *v = -1.0;
        }
        let f = compute_interface_flux(&s, &pb, [1.0, 3.0]).unwrap();
        assert!((f - 2.0).abs() < 1e-14);
        let part = compute_interface_flux(&s, &pb, [0.3, 0.4]).unwrap();
        assert!((part - 0.1).abs() < 1e-14);
        assert!(matches!(compute_interface_flux(&s, &pb, [1.0, 5.0]), Err(Error::Range(_))));
    }

    #[test]
    fn sealed_window_flux_is_exactly_zero() {
        let pb = small_reservoir();
        let mut params = PhysParams::default();
        params.pbar = LoadSchedule::constant(1.0);
        let s = steady_solve(&params, &pb).unwrap();
        assert_eq!(compute_interface_flux(&s, &pb, [1.1, 1.9]).unwrap(), 0.0);
    }

    #[test]
    fn state_vector_round_trip() {
        let pb = small_reservoir();
        let x: Vec<f64> = (0..pb.dofmap.n_dofs()).map(|i| i as f64).collect();
        let s = CoupledState::from_vector(&pb.dofmap, &x, 1.0);
        assert_eq!(s.to_vector(&pb.dofmap), x);
    }

    #[test]
    fn stationary_doubling() {
        let pb = small_reservoir();
        let mut params = PhysParams::default();
        params.pbar = LoadSchedule::constant(1.0);
        let a = steady_solve(&params, &pb).unwrap();
        params.pbar = LoadSchedule::constant(2.0);
        let b = steady_solve(&params, &pb).unwrap();
        let scale = a.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.u.iter().zip(&b.u).chain(a.p.iter().zip(&b.p)).chain(a.p_l.iter().zip(&b.p_l)) {
            assert!((2.0 * x - y).abs() <= 1e-10 * (1.0 + scale));
        }
    }

    #[test]
    fn negative_dt_rejected() {
        let pb = small_reservoir();
        let s = CoupledState::zeros(&pb.dofmap);
        assert!(step(&s, -0.1, &PhysParams::default(), &pb).is_err());
    }
}
