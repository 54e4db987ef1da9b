use super::contact::{active_set, assemble_contact_rows, contact_point, ContactState};
use super::wall::{assemble_wall, WallModel};
use crate::error::{Error, Result};
use crate::fem::{
    apply_zero_tangential, assemble_interface_coupling, assemble_neumann_loads, assemble_stokes_block,
    assemble_surface_darcy, build_dof_map, p1_gradients, segment_normal_velocity, segment_value, solve_linear,
    DofMap, Field, FieldSelection, LinComb, Quadrature, SparseSystem, StokesCoefficients, SystemBuilder,
};
use crate::mesh::{extract_trace, generate_channel_mesh, tags, ChannelTags, Mesh, TraceMesh, TraceSegment};
use crate::scalar::{vec_norm, Scalar};
use crate::stokes_darcy::{CoupledState, PhysParams, PorousStressSign, WallState};

/// How a column segment of the channel is coupled in a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Wall coupled to the fluid by Nitsche terms; the layer below sees the
    /// fluid normal velocity.
    Separated,
    /// Wall resting on the layer: porous stress with the wall velocity.
    Contact,
}

/// Channel `[0, L] x [0, H]` with the porous layer on the bottom, an elastic
/// wall on top and pressure boundaries at both ends. The fluid mesh follows
/// the wall column by column: vertex `(i, j)` sits at height
/// `y_ref * h_i / H` with `h_i = max(H + eta_i, g_min)`.
#[derive(Clone, Debug)]
pub struct ChannelFsi<T> {
    pub length: T,
    pub height: T,
    pub nx: usize,
    pub ny: usize,
    reference: Mesh<T>,
    layer: TraceMesh<T>,
    wall: TraceMesh<T>,
    pub dofmap: DofMap,
    pub quad: Quadrature<T>,
    /// Factors of the end pressure `P(t)` on the left and right boundary.
    pub load_factors: [T; 2],
    pub max_iter: usize,
}

/// Diagnostics of one coupled step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport<T> {
    pub iterations: usize,
    /// Residual norm before each Newton update and after the last one.
    pub history: Vec<f64>,
    pub contact: ContactState<T>,
    /// Coupling regime used for each column segment.
    pub regimes: Vec<Regime>,
}

#[derive(Clone, Copy, Debug)]
struct StepConsts<T> {
    dt: T,
    pbar: T,
    /// `g = H - g_min`: admissible downward displacement.
    gap0: T,
    g_min: T,
    gamma_c: T,
    gamma_fsi: T,
    /// Signed coefficient of the wall velocity in the contact traction.
    kappa: T,
}

struct Geometry<T> {
    mesh: Mesh<T>,
    layer: TraceMesh<T>,
    wall: TraceMesh<T>,
}

impl<T: Scalar> ChannelFsi<T> {
    pub fn new(length: T, height: T, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 {
            return Err(Error::InvalidArgument(format!("channel needs nx >= 2 for an elastic wall, got {nx}")));
        }
        let reference = generate_channel_mesh(length, height, nx, ny, ChannelTags::default())?;
        let layer = extract_trace(&reference, tags::POROUS_LAYER)?;
        let wall = extract_trace(&reference, tags::ELASTIC_WALL)?;
        for k in 0..=nx {
            if layer.vertices()[k] != k || wall.vertices()[k] != ny * (nx + 1) + k {
                return Err(Error::Topology("layer and wall traces do not follow the mesh columns".into()));
            }
        }
        let dofmap = build_dof_map(&reference, Some(&layer), Some(&wall), FieldSelection::FSI_CONTACT)?;
        Ok(ChannelFsi {
            length,
            height,
            nx,
            ny,
            reference,
            layer,
            wall,
            dofmap,
            quad: Quadrature::new(),
            load_factors: [T::one(), T::one()],
            max_iter: 30,
        })
    }

    pub fn reference_mesh(&self) -> &Mesh<T> {
        &self.reference
    }

    pub fn layer(&self) -> &TraceMesh<T> {
        &self.layer
    }

    pub fn wall_trace(&self) -> &TraceMesh<T> {
        &self.wall
    }

    pub fn initial_state(&self) -> CoupledState<T> {
        CoupledState::zeros(&self.dofmap)
    }

    pub fn g_min(&self, params: &PhysParams<T>) -> T {
        params.g_min.unwrap_or(T::of(1e-3) * self.height)
    }

    /// Contact parameter; `c1 / h` unless configured.
    pub fn gamma_c(&self, params: &PhysParams<T>) -> Result<T> {
        let g = params.gamma_c.unwrap_or(params.c1 * T::of_usize(self.nx) / self.length);
        if !(g > T::zero()) {
            return Err(Error::Config("gamma_c must be positive (set it explicitly when c1 = 0)".into()));
        }
        Ok(g)
    }

    pub fn gamma_fsi(&self, params: &PhysParams<T>) -> T {
        params.gamma_fsi.unwrap_or(T::of(100.0) * params.mu)
    }

    /// Mesh vertices of column `i`, bottom to top.
    pub fn column(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..=self.ny).map(move |j| j * (self.nx + 1) + i)
    }

    /// Fluid mesh for wall displacement `eta`.
    pub fn deformed_mesh(&self, eta: &[T], g_min: T) -> Result<Mesh<T>> {
        let tol = T::of(1e-8) * self.height;
        let mut vertices = self.reference.vertices().to_vec();
        for (i, &e) in eta.iter().enumerate() {
            let h = self.height + e;
            if h < g_min - tol {
                return Err(Error::Geometry(format!("column {i} height {h} below the contact floor {g_min}")));
            }
            let scale = h.max(g_min) / self.height;
            for v in self.column(i) {
                vertices[v][1] = self.reference.vertices()[v][1] * scale;
            }
        }
        self.reference.with_vertices(vertices)
    }

    fn geometry(&self, eta: &[T], g_min: T) -> Result<Geometry<T>> {
        let mesh = self.deformed_mesh(eta, g_min)?;
        Ok(Geometry { layer: self.layer.rebuild(&mesh), wall: self.wall.rebuild(&mesh), mesh })
    }

    /// Coupling regime of each column segment for a given active set.
    pub fn regimes(&self, active: &[bool]) -> Vec<Regime> {
        active
            .windows(2)
            .map(|w| if w[0] && w[1] { Regime::Contact } else { Regime::Separated })
            .collect()
    }

    fn consts(&self, params: &PhysParams<T>, dt: T, t_next: T) -> Result<StepConsts<T>> {
        let g_min = self.g_min(params);
        if !(g_min < self.height) {
            return Err(Error::Config(format!("g_min {g_min} must be below the channel height {}", self.height)));
        }
        let kappa = params.normal_resistance();
        Ok(StepConsts {
            dt,
            pbar: params.pbar.value_at(t_next),
            gap0: self.height - g_min,
            g_min,
            gamma_c: self.gamma_c(params)?,
            gamma_fsi: self.gamma_fsi(params),
            kappa: match params.sigma_p_sign {
                PorousStressSign::Dissipative => kappa,
                PorousStressSign::Flipped => -kappa,
            },
        })
    }

    fn wall_values(&self, x: &[T], field: Field) -> Vec<T> {
        x[self.dofmap.range(field)].to_vec()
    }

    /// Active set from a full solution vector: nodes with
    /// `P_gamma = (d_n - g) + lambda / gamma_c > 0`.
    fn active_set(&self, x: &[T], c: &StepConsts<T>) -> Vec<bool> {
        let eta = self.wall_values(x, Field::WallDisplacement);
        let lambda = self.wall_values(x, Field::ContactMultiplier);
        active_set(&eta, &lambda, c.gap0, c.gamma_c)
    }

    fn contact_state(&self, x: &[T], c: &StepConsts<T>, weights: &[T]) -> ContactState<T> {
        let eta = self.wall_values(x, Field::WallDisplacement);
        let lambda = self.wall_values(x, Field::ContactMultiplier);
        let gap: Vec<T> = eta.iter().map(|&e| c.gap0 + e).collect();
        let points: Vec<_> = gap.iter().zip(&lambda).map(|(&g, &l)| contact_point(-g, -l, c.gamma_c)).collect();
        let n = eta.len();
        ContactState {
            p_gamma: points.iter().map(|p| p.p_gamma).collect(),
            active: points.iter().enumerate().map(|(k, p)| p.active && k != 0 && k + 1 != n).collect(),
            lambda,
            gap,
            weights: weights.to_vec(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        &self,
        params: &PhysParams<T>,
        c: &StepConsts<T>,
        geo: &Geometry<T>,
        wall: &WallModel<T>,
        prev_vec: &[T],
        prev_wall: &WallState<T>,
        regimes: &[Regime],
        active: &[bool],
    ) -> Result<SparseSystem<T>> {
        let d = &self.dofmap;
        let mut b = SystemBuilder::new(d.n_dofs());
        let coef = StokesCoefficients { mu: params.mu, mass: params.rho_f / c.dt, delta_stab: params.delta_stab };
        assemble_stokes_block(&mut b, &geo.mesh, d, &coef, Some(prev_vec));
        let loads = [
            (tags::NEUMANN_LEFT, self.load_factors[0] * c.pbar),
            (tags::NEUMANN_RIGHT, self.load_factors[1] * c.pbar),
        ];
        assemble_neumann_loads(&mut b, &geo.mesh, d, &loads);
        assemble_surface_darcy(&mut b, &geo.layer, d, params.eps_k_tau());

        assemble_interface_coupling(&mut b, &geo.layer, d, params.epsilon, params.k_n, &self.quad, |k| {
            regimes[k] == Regime::Contact
        })?;
        assemble_wall(&mut b, wall, d, Some(c.dt), Some(prev_wall))?;
        for (k, regime) in regimes.iter().enumerate() {
            let (ws, ls) = (&geo.wall.segments()[k], &geo.layer.segments()[k]);
            assert_eq!(ws.local, ls.local, "wall and layer segments must share their column");
            match regime {
                Regime::Separated => self.nitsche_segment(&mut b, &geo.mesh, ws, params.mu, c.gamma_fsi),
                Regime::Contact => self.contact_segment(&mut b, ls, ws, c.kappa),
            }
        }

        assemble_contact_rows(&mut b, wall, d, active, c.gap0);

        apply_zero_tangential(&mut b, &geo.mesh, d, &[tags::NEUMANN_LEFT, tags::NEUMANN_RIGHT], self.layer.vertices())?;
        for (i, _) in regimes.iter().enumerate().filter(|(_, &r)| r == Regime::Contact) {
            for v in self.column(i).chain(self.column(i + 1)) {
                b.constrain(d.at(Field::VelocityX, v), T::zero());
                b.constrain(d.at(Field::VelocityY, v), T::zero());
            }
        }
        Ok(b.finish())
    }

    /// Symmetric Nitsche coupling of fluid and wall on one wall segment:
    /// `-(sigma(u,p) n, v - w) - (u - d_dot, sigma(v,-q) n) + gamma/h (u - d_dot, v - w)`.
    fn nitsche_segment(&self, b: &mut SystemBuilder<T>, mesh: &Mesh<T>, seg: &TraceSegment<T>, mu: T, gamma: T) {
        let d = &self.dofmap;
        let t = seg.triangle.expect("wall segment without fluid");
        let tri = mesh.triangles()[t];
        let (area, g) = p1_gradients(tri.map(|v| mesh.vertices()[v]));
        let n = seg.normal;
        // element height normal to the wall
        let pen = gamma * seg.length / (T::of(2.0) * area);
        let comps = [Field::VelocityX, Field::VelocityY];

        // (mu (grad u + grad u^T) n)_a as a combination of velocity dofs
        let strain: [LinComb<T>; 2] = [0, 1].map(|a| {
            let mut lc = Vec::with_capacity(6);
            for j in 0..3 {
                let gn = g[j][0] * n[0] + g[j][1] * n[1];
                for cc in 0..2 {
                    let diag = if a == cc { gn } else { T::zero() };
                    lc.push((d.at(comps[cc], tri[j]), mu * (diag + n[cc] * g[j][a])));
                }
            }
            lc
        });

        for (&s, &wq) in self.quad.seg_points.iter().zip(&self.quad.seg_weights) {
            let ds = wq * seg.length;
            let pr = segment_value(d, Field::Pressure, seg, s);
            let vel = [segment_value(d, comps[0], seg, s), segment_value(d, comps[1], seg, s)];
            let wdot = segment_value(d, Field::WallVelocity, seg, s);
            let w = segment_value(d, Field::WallDisplacement, seg, s);

            let traction: [LinComb<T>; 2] = [0, 1].map(|a| {
                let mut lc = strain[a].clone();
                lc.extend(pr.iter().map(|&(i, cf)| (i, -cf * n[a])));
                lc
            });
            let mut jump_y = vel[1].clone();
            jump_y.extend(wdot.iter().map(|&(i, cf)| (i, -cf)));
            let jump = [vel[0].clone(), jump_y];
            let jump_n: LinComb<T> = jump[0]
                .iter()
                .map(|&(i, cf)| (i, cf * n[0]))
                .chain(jump[1].iter().map(|&(i, cf)| (i, cf * n[1])))
                .collect();

            for a in 0..2 {
                b.add_product(&vel[a], &traction[a], -ds);
                b.add_product(&strain[a], &jump[a], -ds);
                b.add_product(&vel[a], &jump[a], pen * ds);
            }
            b.add_product(&pr, &jump_n, -ds);
            b.add_product(&w, &traction[1], ds);
            b.add_product(&w, &jump[1], -pen * ds);
        }
    }

    /// Wall resting on the layer: the wall feels `-sigma_p` with the wall
    /// velocity, the layer receives the wall velocity as its source.
    fn contact_segment(&self, b: &mut SystemBuilder<T>, layer_seg: &TraceSegment<T>, wall_seg: &TraceSegment<T>, kappa: T) {
        let d = &self.dofmap;
        for (&s, &wq) in self.quad.seg_points.iter().zip(&self.quad.seg_weights) {
            let ds = wq * layer_seg.length;
            let pl = segment_value(d, Field::PorousPressure, layer_seg, s);
            let wdot = segment_value(d, Field::WallVelocity, wall_seg, s);
            let w = segment_value(d, Field::WallDisplacement, wall_seg, s);
            b.add_product(&w, &pl, -ds);
            b.add_product(&w, &wdot, kappa * ds);
            b.add_product(&pl, &wdot, ds);
        }
    }
}

/// One implicit step of the coupled fluid / layer / wall / contact system.
///
/// The fluid mesh and the coupling regime of every column segment are taken
/// from the state at the start of the step. The contact complementarity is solved by semismooth Newton (primal-dual
/// active set) with a residual-halving line search.
pub fn step_coupled<T: Scalar>(
    state: &CoupledState<T>,
    dt: T,
    params: &PhysParams<T>,
    problem: &ChannelFsi<T>,
) -> Result<(CoupledState<T>, StepReport<T>)> {
    params.validate()?;
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let d = &problem.dofmap;
    let prev_wall = state
        .wall
        .as_ref()
        .filter(|_| state.is_consistent(d))
        .ok_or_else(|| Error::InvalidArgument("state does not match the channel dof map".into()))?;
    let t_next = state.time + dt;
    let c = problem.consts(params, dt, t_next)?;
    let geo = problem.geometry(&prev_wall.eta, c.g_min)?;
    let wall = WallModel::new(&problem.wall, &problem.reference, params)?;
    let prev_vec = state.to_vector(d);
    let regimes = problem.regimes(&problem.active_set(&prev_vec, &c));

    let evaluate = |x: &[T]| -> Result<(SparseSystem<T>, T)> {
        let active = problem.active_set(x, &c);
        let sys = problem.assemble(params, &c, &geo, &wall, &prev_vec, prev_wall, &regimes, &active)?;
        let r = vec_norm(&sys.residual(x));
        Ok((sys, r))
    };

    let mut x = prev_vec.clone();
    let (mut sys, mut r) = evaluate(&x)?;
    // 1e-9 relative, floored at roundoff of the scalar type
    let tol = T::of(1e-9).max(T::of(1e3) * T::epsilon()) * (T::one() + r);
    let mut history = vec![r.as_f64()];
    let mut iterations = 0;
    while r > tol {
        if iterations == problem.max_iter {
            return Err(Error::Convergence { iterations, history });
        }
        iterations += 1;
        let y = solve_linear(&sys)?;
        let mut t = T::one();
        for halving in 0..=5 {
            let xt: Vec<T> = if halving == 0 { y.clone() } else { x.iter().zip(&y).map(|(&a, &b)| a + t * (b - a)).collect() };
            let (st, rt) = evaluate(&xt)?;
            if rt < r || halving == 5 {
                x = xt;
                sys = st;
                r = rt;
                break;
            }
            t *= T::of(0.5);
        }
        history.push(r.as_f64());
    }

    let contact = problem.contact_state(&x, &c, &wall.weights);
    Ok((CoupledState::from_vector(d, &x, t_next), StepReport { iterations, history, contact, regimes }))
}

/// `g - d_n` minimised over the wall nodes.
pub fn min_gap<T: Scalar>(state: &CoupledState<T>, problem: &ChannelFsi<T>, params: &PhysParams<T>) -> T {
    let gap0 = problem.height - problem.g_min(params);
    state.wall.as_ref().map_or(gap0, |w| w.eta.iter().fold(T::infinity(), |m, &e| m.min(gap0 + e)))
}

/// Net normal flux into the layer: fluid normal velocity on separated
/// columns plus the wall velocity towards the layer on contact columns.
pub fn layer_flux<T: Scalar>(state: &CoupledState<T>, problem: &ChannelFsi<T>, regimes: &[Regime]) -> Result<T> {
    let wall = state.wall.as_ref().ok_or_else(|| Error::InvalidArgument("state has no wall".into()))?;
    let d = &problem.dofmap;
    let x = state.to_vector(d);
    let mut flux = T::zero();
    for (k, seg) in problem.layer.segments().iter().enumerate() {
        for (&s, &w) in problem.quad.seg_points.iter().zip(&problem.quad.seg_weights) {
            let val = match regimes[k] {
                Regime::Separated => {
                    segment_normal_velocity(d, seg, s).iter().fold(T::zero(), |a, &(i, cf)| a + cf * x[i])
                }
                Regime::Contact => -(wall.eta_dot[k] * (T::one() - s) + wall.eta_dot[k + 1] * s),
            };
            flux += w * seg.length * val;
        }
    }
    Ok(flux)
}

/// Energy of the channel state: fluid kinetic energy on the current
/// geometry, wall kinetic and elastic energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FsiEnergy<T> {
    pub fluid_kinetic: T,
    pub wall_kinetic: T,
    pub wall_elastic: T,
}

impl<T: Scalar> FsiEnergy<T> {
    pub fn kinetic(&self) -> T {
        self.fluid_kinetic + self.wall_kinetic
    }

    pub fn total(&self) -> T {
        self.fluid_kinetic + self.wall_kinetic + self.wall_elastic
    }
}

pub fn fsi_energy<T: Scalar>(state: &CoupledState<T>, params: &PhysParams<T>, problem: &ChannelFsi<T>) -> Result<FsiEnergy<T>> {
    let wall_state = state.wall.as_ref().ok_or_else(|| Error::InvalidArgument("state has no wall".into()))?;
    let mesh = problem.deformed_mesh(&wall_state.eta, problem.g_min(params))?;
    let d = &problem.dofmap;
    let x = state.to_vector(d);
    let mut e = T::zero();
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangles()[t];
        let area = mesh.signed_area(t);
        for f in [Field::VelocityX, Field::VelocityY] {
            let v = tri.map(|k| x[d.at(f, k)]);
            let sum = v[0] + v[1] + v[2];
            e += area / T::of(12.0) * (sum * sum + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        }
    }
    let wall = WallModel::new(&problem.wall, &problem.reference, params)?;
    let (wall_kinetic, wall_elastic) = wall.energy(wall_state);
    Ok(FsiEnergy { fluid_kinetic: T::of(0.5) * params.rho_f * e, wall_kinetic, wall_elastic })
}

/// One row of a channel time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSample<T> {
    pub time: T,
    pub min_gap: T,
    pub contact_length: T,
    pub flux_total: T,
    pub max_penetration: T,
    pub complementarity: T,
    pub any_active: bool,
    pub iterations: usize,
}

/// Runs `steps` coupled steps from `state`, calling `on_step` after each
/// converged step.
pub fn run_channel<T: Scalar>(
    problem: &ChannelFsi<T>,
    params: &PhysParams<T>,
    mut state: CoupledState<T>,
    dt: T,
    steps: usize,
    mut on_step: impl FnMut(&CoupledState<T>, &ChannelSample<T>) -> Result<()>,
) -> Result<(CoupledState<T>, Vec<ChannelSample<T>>)> {
    let mut samples = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (next, report) = step_coupled(&state, dt, params, problem)?;
        let c = &report.contact;
        let sample = ChannelSample {
            time: next.time,
            min_gap: c.min_gap(),
            contact_length: c.active_length(),
            flux_total: layer_flux(&next, problem, &report.regimes)?,
            max_penetration: c.max_penetration(),
            complementarity: c.complementarity(),
            any_active: c.any_active(),
            iterations: report.iterations,
        };
        on_step(&next, &sample)?;
        samples.push(sample);
        state = next;
    }
    Ok((state, samples))
}
