//! Convergence studies against exact solutions.
//!
//! Exact fields are written out here directly; the solver modules only
//! provide the discrete solutions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::{
    assemble_neumann_loads, assemble_stokes_block, assemble_surface_darcy, build_dof_map, p1_gradients, solve_linear,
    Field, FieldSelection, Quadrature, StokesCoefficients, SystemBuilder,
};
use crate::mesh::{extract_trace, generate_channel_mesh, tags, ChannelTags, Mesh};
use crate::scalar::Scalar;
use crate::stokes_darcy::{steady_solve, CoupledState, LoadSchedule, PhysParams, StokesDarcyProblem};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow<T> {
    pub h: T,
    pub error_l2: T,
    /// `H1` seminorm of the error.
    pub error_h1: T,
    /// Rates against the previous row; `None` on the first row.
    pub rate_l2: Option<T>,
    pub rate_h1: Option<T>,
}

/// Scalar quantity measured on the finest level next to its exact value.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation<T> {
    pub name: &'static str,
    pub computed: T,
    pub exact: T,
}

impl<T: Scalar> Observation<T> {
    pub fn relative_error(&self) -> T {
        (self.computed - self.exact).abs() / self.exact.abs()
    }
}

/// Errors over a sequence of uniform refinements, `h` strictly decreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable<T> {
    pub name: String,
    rows: Vec<ConvergenceRow<T>>,
    pub observations: Vec<Observation<T>>,
}

impl<T: Scalar> ConvergenceTable<T> {
    pub fn new(name: impl Into<String>) -> Self {
        ConvergenceTable { name: name.into(), rows: Vec::new(), observations: Vec::new() }
    }

    pub fn push(&mut self, h: T, error_l2: T, error_h1: T) -> Result<()> {
        let (rate_l2, rate_h1) = match self.rows.last() {
            Some(prev) if !(h < prev.h) => {
                return Err(Error::InvalidArgument(format!("mesh size {h} does not decrease (previous {})", prev.h)));
            }
            Some(prev) => {
                let lh = (prev.h / h).ln();
                (Some((prev.error_l2 / error_l2).ln() / lh), Some((prev.error_h1 / error_h1).ln() / lh))
            }
            None => (None, None),
        };
        self.rows.push(ConvergenceRow { h, error_l2, error_h1, rate_l2, rate_h1 });
        Ok(())
    }

    pub fn rows(&self) -> &[ConvergenceRow<T>] {
        &self.rows
    }

    /// `L2` rate on the last refinement pair.
    pub fn final_rate(&self) -> Option<T> {
        self.rows.last().and_then(|r| r.rate_l2)
    }

    pub fn observation(&self, name: &str) -> Option<&Observation<T>> {
        self.observations.iter().find(|o| o.name == name)
    }
}

impl<T: Scalar> fmt::Display for ConvergenceTable<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        writeln!(f, "{:>12} {:>14} {:>8} {:>14} {:>8}", "h", "L2 error", "rate", "H1 error", "rate")?;
        let rate = |r: Option<T>| r.map_or_else(|| "-".to_string(), |r| format!("{:.3}", r.as_f64()));
        for r in &self.rows {
            writeln!(
                f,
                "{:>12.5e} {:>14.6e} {:>8} {:>14.6e} {:>8}",
                r.h.as_f64(),
                r.error_l2.as_f64(),
                rate(r.rate_l2),
                r.error_h1.as_f64(),
                rate(r.rate_h1)
            )?;
        }
        for o in &self.observations {
            writeln!(f, "  {} = {:.10e} (exact {:.10e})", o.name, o.computed.as_f64(), o.exact.as_f64())?;
        }
        Ok(())
    }
}

/// Manufactured solution of the surface equation on `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MmsMode<T> {
    /// `P = cos(2 pi x)`.
    Cosine,
    /// `P = c`, zero source.
    Constant(T),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceMms<T> {
    pub eps_k_tau: T,
    pub mode: MmsMode<T>,
}

impl<T: Scalar> Default for SurfaceMms<T> {
    /// `eps = 0.01`, `K_tau = 1`, cosine mode.
    fn default() -> Self {
        SurfaceMms { eps_k_tau: T::of(0.01), mode: MmsMode::Cosine }
    }
}

/// Three-point Gauss rule on `[0, 1]`, written out independently of the
/// solver quadrature.
fn gauss3<T: Scalar>() -> [(T, T); 3] {
    let r = T::of(0.6).sqrt() * T::of(0.5);
    let h = T::of(0.5);
    [(h - r, T::of(5.0 / 18.0)), (h, T::of(8.0 / 18.0)), (h + r, T::of(5.0 / 18.0))]
}

fn check_levels(levels: usize, min: usize) -> Result<()> {
    if levels < min {
        return Err(Error::InvalidArgument(format!("need at least {min} refinement levels, got {levels}")));
    }
    if levels > 12 {
        return Err(Error::InvalidArgument(format!("{levels} refinement levels is beyond desk scale")));
    }
    Ok(())
}

/// Surface Darcy MMS with the default coefficients.
pub fn mms_surface_darcy<T: Scalar>(levels: usize) -> Result<ConvergenceTable<T>> {
    mms_surface_darcy_with(levels, &SurfaceMms::default())
}

/// Solves `-(eps K_tau P')' = f` on `(0, 1)` with sealed ends on `8 * 2^k`
/// segments, `k < levels`. The mean of `P` is fixed by a bordering row.
pub fn mms_surface_darcy_with<T: Scalar>(levels: usize, mms: &SurfaceMms<T>) -> Result<ConvergenceTable<T>> {
    check_levels(levels, 3)?;
    if !(mms.eps_k_tau > T::zero()) {
        return Err(Error::InvalidArgument(format!("eps K_tau must be positive, got {}", mms.eps_k_tau)));
    }
    let two_pi = T::of(2.0 * std::f64::consts::PI);
    let exact = |x: T| match mms.mode {
        MmsMode::Cosine => ((two_pi * x).cos(), -two_pi * (two_pi * x).sin()),
        MmsMode::Constant(c) => (c, T::zero()),
    };
    let source = |x: T| match mms.mode {
        MmsMode::Cosine => mms.eps_k_tau * two_pi * two_pi * (two_pi * x).cos(),
        MmsMode::Constant(_) => T::zero(),
    };
    let mean = match mms.mode {
        MmsMode::Cosine => T::zero(),
        MmsMode::Constant(c) => c,
    };

    let mut table = ConvergenceTable::new("surface Darcy MMS");
    for level in 0..levels {
        let n = 8usize << level;
        let mesh = generate_channel_mesh(T::one(), T::one(), n, 1, ChannelTags::default())?;
        let trace = extract_trace(&mesh, tags::POROUS_LAYER)?;
        let sel = FieldSelection { fluid: false, porous: true, wall: false, contact: false };
        let d = build_dof_map(&mesh, Some(&trace), None, sel)?;
        let border = d.n_dofs();
        let mut b = SystemBuilder::new(border + 1);
        assemble_surface_darcy(&mut b, &trace, &d, mms.eps_k_tau);
        let xs: Vec<T> = trace.vertices().iter().map(|&v| mesh.vertices()[v][0]).collect();
        let dofs: Vec<usize> = trace.vertices().iter().map(|&v| d.at(Field::PorousPressure, v)).collect();
        for k in 0..n {
            let hk = xs[k + 1] - xs[k];
            for (s, w) in gauss3::<T>() {
                let fx = source(xs[k] + s * hk) * w * hk;
                b.add_rhs(dofs[k], fx * (T::one() - s));
                b.add_rhs(dofs[k + 1], fx * s);
            }
            for (i, half) in [(dofs[k], hk * T::of(0.5)), (dofs[k + 1], hk * T::of(0.5))] {
                b.add(i, border, half);
                b.add(border, i, half);
            }
        }
        b.add_rhs(border, mean);
        let x = solve_linear(&b.finish())?;

        let (mut e0, mut e1) = (T::zero(), T::zero());
        for k in 0..n {
            let hk = xs[k + 1] - xs[k];
            let (a, c) = (x[dofs[k]], x[dofs[k + 1]]);
            let slope = (c - a) / hk;
            for (s, w) in gauss3::<T>() {
                let (p, dp) = exact(xs[k] + s * hk);
                let ph = a + (c - a) * s;
                e0 += w * hk * (ph - p) * (ph - p);
                e1 += w * hk * (slope - dp) * (slope - dp);
            }
        }
        table.push(T::one() / T::of_usize(n), e0.sqrt(), e1.sqrt())?;
    }
    Ok(table)
}

/// Straight channel flow data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelCase<T> {
    pub length: T,
    pub height: T,
    pub mu: T,
    /// Pressure gradient magnitude `G`; the ends carry `G L` and `0`.
    pub g: T,
}

impl<T: Scalar> Default for ChannelCase<T> {
    fn default() -> Self {
        ChannelCase { length: T::of(4.0), height: T::one(), mu: T::of(0.03), g: T::one() }
    }
}

/// `L2` and `H1`-seminorm velocity errors against `u = (ux(y), 0)`.
fn velocity_errors<T: Scalar>(
    mesh: &Mesh<T>,
    state: &CoupledState<T>,
    problem: &StokesDarcyProblem<T>,
    exact: impl Fn(T) -> (T, T),
) -> (T, T) {
    let d = &problem.dofmap;
    let x = state.to_vector(d);
    let quad = Quadrature::<T>::new();
    let (mut e0, mut e1) = (T::zero(), T::zero());
    for tri in mesh.triangles() {
        let p = tri.map(|v| mesh.vertices()[v]);
        let (area, grads) = p1_gradients(p);
        let ux: Vec<T> = tri.iter().map(|&v| x[d.at(Field::VelocityX, v)]).collect();
        let uy: Vec<T> = tri.iter().map(|&v| x[d.at(Field::VelocityY, v)]).collect();
        let mut g = [[T::zero(); 2]; 2];
        for a in 0..3 {
            for c in 0..2 {
                g[0][c] += ux[a] * grads[a][c];
                g[1][c] += uy[a] * grads[a][c];
            }
        }
        for (q, &w) in quad.tri_points.iter().zip(&quad.tri_weights) {
            let phi = [T::one() - q[0] - q[1], q[0], q[1]];
            let y = phi[0] * p[0][1] + phi[1] * p[1][1] + phi[2] * p[2][1];
            let (ue, due) = exact(y);
            let uhx = phi[0] * ux[0] + phi[1] * ux[1] + phi[2] * ux[2];
            let uhy = phi[0] * uy[0] + phi[1] * uy[1] + phi[2] * uy[2];
            let wt = w * area * T::of(2.0);
            e0 += wt * ((uhx - ue) * (uhx - ue) + uhy * uhy);
            e1 += wt * (g[0][0] * g[0][0] + (g[0][1] - due) * (g[0][1] - due) + g[1][0] * g[1][0] + g[1][1] * g[1][1]);
        }
    }
    (e0.sqrt(), e1.sqrt())
}

fn vertex_at<T: Scalar>(mesh: &Mesh<T>, x: T, y: T) -> Result<usize> {
    let tol = T::of(1e-10);
    mesh.vertices()
        .iter()
        .position(|p| (p[0] - x).abs() < tol && (p[1] - y).abs() < tol)
        .ok_or_else(|| Error::NotFound(format!("no vertex at ({x}, {y})")))
}

fn velocity_x<T: Scalar>(state: &CoupledState<T>, problem: &StokesDarcyProblem<T>, v: usize) -> T {
    let d = &problem.dofmap;
    state.u[d.at(Field::VelocityX, v) - d.range(Field::VelocityX).start]
}

fn velocity_y<T: Scalar>(state: &CoupledState<T>, problem: &StokesDarcyProblem<T>, v: usize) -> T {
    let d = &problem.dofmap;
    state.u[d.count(Field::VelocityX) + d.at(Field::VelocityY, v) - d.range(Field::VelocityY).start]
}

/// Flux `int u_x dy` across the vertical mesh line `x = L/2`.
fn midline_flux<T: Scalar>(mesh: &Mesh<T>, state: &CoupledState<T>, problem: &StokesDarcyProblem<T>, x: T) -> T {
    let tol = T::of(1e-10);
    let mut column: Vec<(T, usize)> = mesh
        .vertices()
        .iter()
        .enumerate()
        .filter(|(_, p)| (p[0] - x).abs() < tol)
        .map(|(v, p)| (p[1], v))
        .collect();
    column.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite coordinates"));
    column
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * T::of(0.5) * (velocity_x(state, problem, w[0].1) + velocity_x(state, problem, w[1].1)))
        .fold(T::zero(), |s, v| s + v)
}

fn channel_params<T: Scalar>(case: &ChannelCase<T>) -> PhysParams<T> {
    PhysParams { mu: case.mu, pbar: LoadSchedule::constant(case.g * case.length), ..PhysParams::default() }
}

/// Poiseuille check with `L = 4`, `H = 1`, `mu = 0.03`, `G = 1`.
pub fn poiseuille_check<T: Scalar>(levels: usize) -> Result<ConvergenceTable<T>> {
    poiseuille_check_with(levels, &ChannelCase::default())
}

/// No-slip channel driven by a pressure drop on `8 * 2^k` by `2 * 2^k`
/// meshes against `u = G (H - y) y / (2 mu)`. The finest level also records
/// the centerline velocity and the flux.
pub fn poiseuille_check_with<T: Scalar>(levels: usize, case: &ChannelCase<T>) -> Result<ConvergenceTable<T>> {
    check_levels(levels, 2)?;
    let (h, g, mu) = (case.height, case.g, case.mu);
    let two = T::of(2.0);
    let exact = |y: T| (g * (h - y) * y / (two * mu), g * (h - two * y) / (two * mu));
    let params = channel_params(case);
    let mut table = ConvergenceTable::new("Poiseuille channel");
    for level in 0..levels {
        let (nx, ny) = (8usize << level, 2usize << level);
        let problem = StokesDarcyProblem::channel(case.length, h, nx, ny, false)?;
        let state = steady_solve(&params, &problem)?;
        let (e0, e1) = velocity_errors(&problem.mesh, &state, &problem, exact);
        table.push(h / T::of_usize(ny), e0, e1)?;
        if level + 1 == levels {
            let mid = case.length * T::of(0.5);
            let centre = vertex_at(&problem.mesh, mid, h * T::of(0.5))?;
            table.observations = vec![
                Observation {
                    name: "centerline_velocity",
                    computed: velocity_x(&state, &problem, centre),
                    exact: g * h * h / (T::of(8.0) * mu),
                },
                Observation {
                    name: "flux",
                    computed: midline_flux(&problem.mesh, &state, &problem, mid),
                    exact: g * h * h * h / (T::of(12.0) * mu),
                },
            ];
        }
    }
    Ok(table)
}

/// Slip-limit check with the default channel.
pub fn slip_channel_check<T: Scalar>(levels: usize) -> Result<ConvergenceTable<T>> {
    slip_channel_check_with(levels, &ChannelCase::default())
}

/// Channel with the porous layer on the bottom, `K_n = 1e-8` and
/// `eps K_tau = 0`, against `u = G (H^2 - y^2) / (2 mu)`. The finest level
/// records the slip-wall velocity, the channel flux, `int |u.n|` over the
/// layer and the tangential traction on the layer from the momentum
/// residual.
pub fn slip_channel_check_with<T: Scalar>(levels: usize, case: &ChannelCase<T>) -> Result<ConvergenceTable<T>> {
    check_levels(levels, 2)?;
    let (h, g, mu) = (case.height, case.g, case.mu);
    let two = T::of(2.0);
    let exact = |y: T| (g * (h * h - y * y) / (two * mu), -g * y / mu);
    let params = PhysParams { k_n: T::of(1e-8), k_tau: T::zero(), ..channel_params(case) };
    let mut table = ConvergenceTable::new("slip channel");
    for level in 0..levels {
        let (nx, ny) = (8usize << level, 2usize << level);
        let problem = StokesDarcyProblem::channel(case.length, h, nx, ny, true)?;
        let state = steady_solve(&params, &problem)?;
        let (e0, e1) = velocity_errors(&problem.mesh, &state, &problem, exact);
        table.push(h / T::of_usize(ny), e0, e1)?;
        if level + 1 != levels {
            continue;
        }
        let mid = case.length * T::of(0.5);
        let layer = problem.layer()?;
        let mut normal_flux = T::zero();
        for seg in layer.segments() {
            let [a, c] = seg.vertices.map(|v| velocity_x(&state, &problem, v) * seg.normal[0] + velocity_y(&state, &problem, v) * seg.normal[1]);
            for (s, w) in gauss3::<T>() {
                normal_flux += w * seg.length * (a + (c - a) * s).abs();
            }
        }

        // Consistent traction: residual of the bulk momentum rows with the
        // end loads, read off at the layer vertices.
        let d = &problem.dofmap;
        let mut b = SystemBuilder::new(d.n_dofs());
        let coef = StokesCoefficients { mu, mass: T::zero(), delta_stab: params.delta_stab };
        assemble_stokes_block(&mut b, &problem.mesh, d, &coef, None);
        let loads: Vec<_> = problem.loads.iter().map(|&(t, f)| (t, f * params.pbar.final_value())).collect();
        assemble_neumann_loads(&mut b, &problem.mesh, d, &loads);
        let r = b.finish().residual(&state.to_vector(d));
        let traction = layer.vertices().iter().fold(T::zero(), |s, &v| s + r[d.at(Field::VelocityX, v)]);

        let bottom = vertex_at(&problem.mesh, mid, T::zero())?;
        table.observations = vec![
            Observation { name: "slip_velocity", computed: velocity_x(&state, &problem, bottom), exact: g * h * h / (two * mu) },
            Observation {
                name: "flux",
                computed: midline_flux(&problem.mesh, &state, &problem, mid),
                exact: g * h * h * h / (T::of(3.0) * mu),
            },
            Observation { name: "normal_flux", computed: normal_flux, exact: T::zero() },
            Observation { name: "tangential_traction", computed: traction, exact: T::zero() },
        ];
    }
    Ok(table)
}

/// Which checks to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Mms,
    Poiseuille,
    Slip,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mms" => Ok(Suite::Mms),
            "poiseuille" => Ok(Suite::Poiseuille),
            "slip" => Ok(Suite::Slip),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidArgument(format!("unknown suite '{other}' (mms, poiseuille, slip, all)"))),
        }
    }
}

/// A table and the thresholds it missed.
#[derive(Clone, Debug)]
pub struct SuiteResult<T> {
    pub table: ConvergenceTable<T>,
    pub failures: Vec<String>,
}

impl<T> SuiteResult<T> {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn require(failures: &mut Vec<String>, ok: bool, what: String) {
    if !ok {
        failures.push(what);
    }
}

fn judge_mms(table: ConvergenceTable<f64>) -> SuiteResult<f64> {
    let mut failures = Vec::new();
    let rate = table.final_rate().unwrap_or(f64::NAN);
    require(&mut failures, rate >= 1.9, format!("L2 rate {rate:.3} < 1.9"));
    SuiteResult { table, failures }
}

fn judge_poiseuille(table: ConvergenceTable<f64>) -> SuiteResult<f64> {
    let mut failures = Vec::new();
    let rate = table.final_rate().unwrap_or(f64::NAN);
    require(&mut failures, rate >= 1.8, format!("L2 rate {rate:.3} < 1.8"));
    for name in ["centerline_velocity", "flux"] {
        let e = table.observation(name).map_or(f64::NAN, |o| o.relative_error());
        require(&mut failures, e <= 0.02, format!("{name} off by {:.3}%", 100.0 * e));
    }
    SuiteResult { table, failures }
}

fn judge_slip(table: ConvergenceTable<f64>, case: &ChannelCase<f64>) -> SuiteResult<f64> {
    let mut failures = Vec::new();
    let get = |n: &str| table.observation(n).map_or(f64::NAN, |o| o.computed);
    let slip = table.observation("slip_velocity").map_or(f64::NAN, |o| o.relative_error());
    require(&mut failures, slip <= 0.02, format!("slip velocity off by {:.3}%", 100.0 * slip));
    let (flux, normal, traction) = (get("flux"), get("normal_flux"), get("tangential_traction"));
    require(&mut failures, normal <= 1e-6 * flux, format!("normal flux {normal:.3e} above 1e-6 of {flux:.3e}"));
    let scale = case.g * case.height * case.length;
    require(&mut failures, traction.abs() <= 1e-6 * scale, format!("tangential traction {traction:.3e}"));
    SuiteResult { table, failures }
}

/// Runs the selected checks at their default resolutions (4 MMS levels,
/// 3 channel levels ending at 32 x 8).
pub fn run_suite(suite: Suite) -> Result<Vec<SuiteResult<f64>>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Mms | Suite::All) {
        out.push(judge_mms(mms_surface_darcy(4)?));
    }
    if matches!(suite, Suite::Poiseuille | Suite::All) {
        out.push(judge_poiseuille(poiseuille_check(3)?));
    }
    if matches!(suite, Suite::Slip | Suite::All) {
        out.push(judge_slip(slip_channel_check(3)?, &ChannelCase::default()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_follow_the_formula() {
        let mut t = ConvergenceTable::<f64>::new("t");
        t.push(0.5, 1.0, 2.0).unwrap();
        t.push(0.25, 0.25, 1.0).unwrap();
        assert!((t.final_rate().unwrap() - 2.0).abs() < 1e-14);
        assert!((t.rows()[1].rate_h1.unwrap() - 1.0).abs() < 1e-14);
        assert!(t.push(0.3, 0.1, 0.1).is_err());
    }

    #[test]
    fn mms_cosine_rate() {
        let t = mms_surface_darcy::<f64>(4).unwrap();
        assert!(t.final_rate().unwrap() >= 1.9, "{t}");
    }

    #[test]
    fn mms_constant_is_exact() {
        let mms = SurfaceMms { eps_k_tau: 0.01, mode: MmsMode::Constant(2.5) };
        let t = mms_surface_darcy_with::<f64>(3, &mms).unwrap();
        assert!(t.rows().iter().all(|r| r.error_l2 < 1e-12 && r.error_h1 < 1e-10), "{t}");
    }

    #[test]
    fn mms_scales_with_coefficient() {
        let a = mms_surface_darcy_with::<f64>(3, &SurfaceMms { eps_k_tau: 0.01, mode: MmsMode::Cosine }).unwrap();
        let b = mms_surface_darcy_with::<f64>(3, &SurfaceMms { eps_k_tau: 0.02, mode: MmsMode::Cosine }).unwrap();
        for (x, y) in a.rows().iter().zip(b.rows()) {
            assert!((x.error_l2 - y.error_l2).abs() <= 1e-10 * x.error_l2);
        }
    }

    #[test]
    fn too_few_levels() {
        assert!(mms_surface_darcy::<f64>(2).is_err());
    }

    #[test]
    fn zero_gradient_gives_rest() {
        let case = ChannelCase { g: 0.0, ..ChannelCase::default() };
        let t = poiseuille_check_with::<f64>(2, &case).unwrap();
        assert!(t.rows().iter().all(|r| r.error_l2 == 0.0));
    }

    #[test]
    fn suite_names() {
        assert_eq!("slip".parse::<Suite>().unwrap(), Suite::Slip);
        assert!("stokes".parse::<Suite>().is_err());
    }
}
#[cfg(test)]
mod suite_tests {
    use super::*;

    #[test]
    fn full_suite_passes() {
        for r in run_suite(Suite::All).unwrap() {
            println!("{}", r.table);
            assert!(r.passed(), "{}: {:?}", r.table.name, r.failures);
        }
    }
}
