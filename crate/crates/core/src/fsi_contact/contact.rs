use super::wall::{add_wall_load, assemble_wall, WallModel};
use crate::error::{Error, Result};
use crate::fem::{solve_linear, DofMap, Field, SystemBuilder};
use crate::scalar::Scalar;
use crate::stokes_darcy::{PhysParams, PorousStressSign};

/// Porous normal stress felt by whatever lies on the layer.
///
/// `velocity` is the normal fluid velocity `u_n` off contact and the wall
/// velocity `d_n` in contact; `in_contact` only records which one was
/// passed. Dissipative sign: `-P_l - (eps / (4 K_n)) velocity`.
pub fn sigma_p<T: Scalar>(p_l: T, velocity: T, params: &PhysParams<T>, in_contact: bool) -> T {
    let _ = in_contact;
    let r = params.normal_resistance() * velocity;
    match params.sigma_p_sign {
        PorousStressSign::Dissipative => -p_l - r,
        PorousStressSign::Flipped => -p_l + r,
    }
}

/// Pointwise contact indicator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactPoint<T> {
    /// `P_gamma = (d_n - g) - sigma / gamma_c`.
    pub p_gamma: T,
    pub active: bool,
    /// `gamma_c [P_gamma]_+`.
    pub lambda: T,
}

/// Evaluates `P_gamma` and `lambda = gamma_c [P_gamma]_+` from the normal
/// penetration `d_n - g` and the normal stress estimate `sigma`.
pub fn contact_point<T: Scalar>(dn_minus_g: T, sigma: T, gamma_c: T) -> ContactPoint<T> {
    let p_gamma = dn_minus_g - sigma / gamma_c;
    let active = p_gamma > T::zero();
    ContactPoint { p_gamma, active, lambda: if active { gamma_c * p_gamma } else { T::zero() } }
}

/// Contact data on the wall nodes after a step.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactState<T> {
    pub p_gamma: Vec<T>,
    pub active: Vec<bool>,
    /// Contact pressure magnitude, `>= 0`.
    pub lambda: Vec<T>,
    /// `g - d_n` per node: distance left before the contact floor.
    pub gap: Vec<T>,
    /// Lumped nodal weights.
    pub weights: Vec<T>,
}

impl<T: Scalar> ContactState<T> {
    /// Measure of the active set.
    pub fn active_length(&self) -> T {
        self.active.iter().zip(&self.weights).filter(|(a, _)| **a).fold(T::zero(), |s, (_, &w)| s + w)
    }

    pub fn any_active(&self) -> bool {
        self.active.iter().any(|&a| a)
    }

    /// `max(d_n - g)` over the nodes.
    pub fn max_penetration(&self) -> T {
        self.gap.iter().fold(T::neg_infinity(), |m, &g| m.max(-g))
    }

    /// `sum |lambda (d_n - g)| w`.
    pub fn complementarity(&self) -> T {
        self.lambda.iter().zip(&self.gap).zip(&self.weights).fold(T::zero(), |s, ((&l, &g), &w)| s + (l * g).abs() * w)
    }

    pub fn min_gap(&self) -> T {
        self.gap.iter().fold(T::infinity(), |m, &g| m.min(g))
    }
}

/// Nodal active set from wall displacements and multipliers; the clamped
/// end nodes are never active. `gap0 = g` is the admissible downward
/// displacement, so `d_n - g = -(gap0 + eta)`.
pub fn active_set<T: Scalar>(eta: &[T], lambda: &[T], gap0: T, gamma_c: T) -> Vec<bool> {
    let n = eta.len();
    (0..n)
        .map(|k| k != 0 && k + 1 != n && contact_point(-(gap0 + eta[k]), -lambda[k], gamma_c).active)
        .collect()
}

/// Multiplier rows for a fixed active set, plus `-lambda_k w_k` in the wall
/// momentum rows. Active nodes sit on the floor (`eta_k = -gap0`), inactive
/// ones carry no pressure.
pub fn assemble_contact_rows<T: Scalar>(
    b: &mut SystemBuilder<T>,
    wall: &WallModel<T>,
    dofmap: &DofMap,
    active: &[bool],
    gap0: T,
) {
    for (k, &v) in wall.vertices.iter().enumerate() {
        let lam = dofmap.at(Field::ContactMultiplier, v);
        if wall.is_end(k) {
            b.constrain(lam, T::zero());
            continue;
        }
        b.add(dofmap.at(Field::WallDisplacement, v), lam, -wall.weights[k]);
        if active[k] {
            b.add(lam, dofmap.at(Field::WallDisplacement, v), T::one());
            b.add_rhs(lam, -gap0);
        } else {
            b.add(lam, lam, T::one());
        }
    }
}

/// Static wall under the uniform load `f` above a rigid floor `gap0` below
/// it, solved by the same primal-dual active set iteration as the coupled
/// channel step. Returns `(eta, lambda, iterations)`.
pub fn solve_wall_obstacle<T: Scalar>(
    wall: &WallModel<T>,
    dofmap: &DofMap,
    f: T,
    gap0: T,
    gamma_c: T,
    max_iter: usize,
) -> Result<(Vec<T>, Vec<T>, usize)> {
    let n = wall.n_nodes();
    let mut active = vec![false; n];
    let mut history = Vec::new();
    for it in 1..=max_iter {
        let mut b = SystemBuilder::new(dofmap.n_dofs());
        assemble_wall(&mut b, wall, dofmap, None, None)?;
        add_wall_load(&mut b, wall, dofmap, f);
        assemble_contact_rows(&mut b, wall, dofmap, &active, gap0);
        let x = solve_linear(&b.finish())?;
        let eta = x[dofmap.range(Field::WallDisplacement)].to_vec();
        let lambda = x[dofmap.range(Field::ContactMultiplier)].to_vec();
        let next = active_set(&eta, &lambda, gap0, gamma_c);
        history.push(next.iter().filter(|&&a| a).count() as f64);
        if next == active {
            return Ok((eta, lambda, it));
        }
        active = next;
    }
    Err(Error::Convergence { iterations: max_iter, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_p_values() {
        let mut p = PhysParams::<f64>::default();
        assert_eq!(sigma_p(1.0, 0.0, &p, false), -1.0);
        assert!((sigma_p(0.0, 4.0, &p, false) + 0.01).abs() < 1e-16);
        p.sigma_p_sign = PorousStressSign::Flipped;
        assert!((sigma_p(0.0, 4.0, &p, true) - 0.01).abs() < 1e-16);
        p.k_n = 1e300;
        assert!((sigma_p(2.0, 5.0, &p, true) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn pointwise_contact() {
        let c = contact_point(0.01f64, 0.0, 100.0);
        assert!(c.active);
        assert!((c.lambda - 1.0).abs() < 1e-14);
        let c = contact_point(-0.5, 0.0, 100.0);
        assert!(!c.active);
        assert_eq!(c.lambda, 0.0);
        // a stored contact pressure keeps the point active at zero gap
        let c = contact_point(0.0f64, -2.0, 100.0);
        assert!(c.active);
        assert!((c.lambda - 2.0).abs() < 1e-14);
    }

    /// Dense projected Gauss-Seidel on the obstacle QP
    /// `min 1/2 eta^T K eta - F^T eta` subject to `eta >= -gap0`.
    fn dense_obstacle(x: &[f64], c1: f64, f: f64, gap0: f64) -> Vec<f64> {
        let n = x.len();
        let mut k = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n - 1 {
            let h = x[i + 1] - x[i];
            k[i][i] += c1 / h;
            k[i + 1][i + 1] += c1 / h;
            k[i][i + 1] -= c1 / h;
            k[i + 1][i] -= c1 / h;
            rhs[i] += f * h / 2.0;
            rhs[i + 1] += f * h / 2.0;
        }
        let mut eta = vec![0.0; n];
        for _ in 0..200_000 {
            let mut change: f64 = 0.0;
            for i in 1..n - 1 {
                let off: f64 = (0..n).filter(|&j| j != i).map(|j| k[i][j] * eta[j]).sum();
                let v = ((rhs[i] - off) / k[i][i]).max(-gap0);
                change = change.max((v - eta[i]).abs());
                eta[i] = v;
            }
            if change < 1e-15 {
                break;
            }
        }
        eta
    }

    #[test]
    fn obstacle_matches_dense_qp() {
        use crate::fem::{build_dof_map, FieldSelection};
        use crate::mesh::{extract_trace, generate_channel_mesh, tags, ChannelTags};
        let m = generate_channel_mesh::<f64>(2.0, 1.0, 9, 1, ChannelTags::default()).unwrap();
        let tr = extract_trace(&m, tags::ELASTIC_WALL).unwrap();
        let sel = FieldSelection { fluid: false, porous: false, wall: true, contact: true };
        let d = build_dof_map(&m, None, Some(&tr), sel).unwrap();
        assert!(d.count(Field::WallDisplacement) + d.count(Field::ContactMultiplier) <= 20);
        let params = PhysParams { c1: 1.0, c0: 0.0, ..PhysParams::default() };
        let wall = WallModel::new(&tr, &m, &params).unwrap();
        let (f, gap0) = (-3.0, 0.2);
        let (eta, lambda, _) = solve_wall_obstacle(&wall, &d, f, gap0, 10.0, 30).unwrap();
        let oracle = dense_obstacle(&wall.x, 1.0, f, gap0);
        let mut touching = 0;
        for k in 0..eta.len() {
            assert!((eta[k] - oracle[k]).abs() < 1e-10, "node {k}: {} vs {}", eta[k], oracle[k]);
            let pen = -(gap0 + eta[k]);
            assert!(pen <= 1e-8);
            assert!(lambda[k] >= -1e-8);
            assert!((lambda[k] * pen).abs() <= 1e-8);
            touching += (lambda[k] > 0.0) as usize;
        }
        assert!(touching > 0 && touching < eta.len() - 2);
    }
}
