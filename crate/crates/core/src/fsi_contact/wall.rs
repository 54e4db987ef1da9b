use crate::error::{Error, Result};
use crate::fem::{DofMap, Field, SystemBuilder};
use crate::mesh::{Mesh, TraceMesh};
use crate::scalar::Scalar;
use crate::stokes_darcy::{PhysParams, WallState};

/// Generalized-string wall carrying the vertical displacement `eta` of the
/// elastic boundary:
///
/// `rho_s h_s eta_tt - c1 eta_xx + c0 eta = f`, clamped at both ends.
///
/// The wall lives on the reference (undeformed) wall trace; `x` holds the
/// reference abscissa of each wall vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct WallModel<T> {
    /// Mesh vertex of every wall node, in trace order.
    pub vertices: Vec<usize>,
    pub x: Vec<T>,
    /// Lumped nodal weights.
    pub weights: Vec<T>,
    pub rho_s_h: T,
    pub c1: T,
    pub c0: T,
    /// Prescribed displacement at the first and last node.
    pub clamped: [T; 2],
}

impl<T: Scalar> WallModel<T> {
    pub fn new(trace: &TraceMesh<T>, mesh: &Mesh<T>, params: &PhysParams<T>) -> Result<Self> {
        let vertices = trace.vertices().to_vec();
        let x: Vec<T> = vertices.iter().map(|&v| mesh.vertices()[v][0]).collect();
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Geometry("wall trace is not monotone in x".into()));
        }
        let mut weights = vec![T::zero(); x.len()];
        for k in 0..x.len() - 1 {
            let half = (x[k + 1] - x[k]) * T::of(0.5);
            weights[k] += half;
            weights[k + 1] += half;
        }
        Ok(WallModel {
            vertices,
            x,
            weights,
            rho_s_h: params.rho_s_h,
            c1: params.c1,
            c0: params.c0,
            clamped: [T::zero(), T::zero()],
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.x.len()
    }

    pub fn is_end(&self, k: usize) -> bool {
        k == 0 || k + 1 == self.x.len()
    }

    /// Kinetic and elastic energy of a wall state.
    pub fn energy(&self, state: &WallState<T>) -> (T, T) {
        let half = T::of(0.5);
        let mut kinetic = T::zero();
        let mut elastic = T::zero();
        for k in 0..self.n_nodes() {
            kinetic += half * self.rho_s_h * self.weights[k] * state.eta_dot[k] * state.eta_dot[k];
            elastic += half * self.c0 * self.weights[k] * state.eta[k] * state.eta[k];
        }
        for k in 0..self.n_nodes() - 1 {
            let slope = (state.eta[k + 1] - state.eta[k]) / (self.x[k + 1] - self.x[k]);
            elastic += half * self.c1 * slope * slope * (self.x[k + 1] - self.x[k]);
        }
        (kinetic, elastic)
    }
}

/// Adds the wall blocks. The `WallDisplacement` row of node `k` holds the
/// momentum balance
/// `(rho_s h_s / dt) w_k (eta_dot_k - eta_dot_k^old) + c1 (eta_x, w_x) + c0 w_k eta_k`,
/// the `WallVelocity` row the kinematic relation
/// `w_k (eta_k - eta_k^old) / dt - w_k eta_dot_k = 0`.
/// With `dt = None` the static balance is assembled and `eta_dot = 0`.
pub fn assemble_wall<T: Scalar>(
    b: &mut SystemBuilder<T>,
    wall: &WallModel<T>,
    dofmap: &DofMap,
    dt: Option<T>,
    prev: Option<&WallState<T>>,
) -> Result<()> {
    if let Some(dt) = dt {
        if !(dt > T::zero()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
    }
    let eta = |k: usize| dofmap.at(Field::WallDisplacement, wall.vertices[k]);
    let vel = |k: usize| dofmap.at(Field::WallVelocity, wall.vertices[k]);
    let n = wall.n_nodes();
    for k in 0..n - 1 {
        let s = wall.c1 / (wall.x[k + 1] - wall.x[k]);
        let (i, j) = (eta(k), eta(k + 1));
        b.add(i, i, s);
        b.add(i, j, -s);
        b.add(j, i, -s);
        b.add(j, j, s);
    }
    for k in 0..n {
        let w = wall.weights[k];
        b.add(eta(k), eta(k), wall.c0 * w);
        match dt {
            Some(dt) => {
                let m = wall.rho_s_h * w / dt;
                b.add(eta(k), vel(k), m);
                b.add(vel(k), eta(k), w / dt);
                b.add(vel(k), vel(k), -w);
                if let Some(p) = prev {
                    b.add_rhs(eta(k), m * p.eta_dot[k]);
                    b.add_rhs(vel(k), w / dt * p.eta[k]);
                }
            }
            None => b.add(vel(k), vel(k), T::one()),
        }
    }
    for (end, k) in [(0, 0), (1, n - 1)] {
        b.constrain(eta(k), wall.clamped[end]);
        b.constrain(vel(k), T::zero());
    }
    Ok(())
}

/// Adds a distributed load `f` (per unit length, positive upward) to the
/// wall momentum rows.
pub fn add_wall_load<T: Scalar>(b: &mut SystemBuilder<T>, wall: &WallModel<T>, dofmap: &DofMap, f: T) {
    for k in 0..wall.n_nodes() {
        b.add_rhs(dofmap.at(Field::WallDisplacement, wall.vertices[k]), f * wall.weights[k]);
    }
}
