//! Element kernels and global assembly for the bulk Stokes block, the
//! surface Darcy operator on the layer trace, and the layer/fluid coupling.

use super::dofmap::{DofMap, Field};
use super::quadrature::Quadrature;
use super::sparse::{LinComb, SystemBuilder};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Tag, TraceMesh, TraceSegment};
use crate::scalar::Scalar;

/// Area and constant gradients of the three P1 basis functions.
pub fn p1_gradients<T: Scalar>(p: [[T; 2]; 3]) -> (T, [[T; 2]; 3]) {
    let (x10, y10) = (p[1][0] - p[0][0], p[1][1] - p[0][1]);
    let (x20, y20) = (p[2][0] - p[0][0], p[2][1] - p[0][1]);
    let det = x10 * y20 - x20 * y10;
    let g1 = [y20 / det, -x20 / det];
    let g2 = [-y10 / det, x10 / det];
    let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
    (det * T::of(0.5), [g0, g1, g2])
}

/// Element matrix of `(mu (grad u + grad u^T), grad v)`, local ordering
/// `(x0, x1, x2, y0, y1, y2)`.
pub fn viscous_element_matrix<T: Scalar>(p: [[T; 2]; 3], mu: T) -> [[T; 6]; 6] {
    let (area, g) = p1_gradients(p);
    let mut k = [[T::zero(); 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            let gg = g[i][0] * g[j][0] + g[i][1] * g[j][1];
            for b in 0..2 {
                for a in 0..2 {
                    let delta = if a == b { gg } else { T::zero() };
                    // row: test (i, b); column: trial (j, a)
                    k[b * 3 + i][a * 3 + j] = mu * area * (delta + g[i][a] * g[j][b]);
                }
            }
        }
    }
    k
}

fn tri_coords<T: Scalar>(mesh: &Mesh<T>, t: usize) -> ([usize; 3], [[T; 2]; 3]) {
    let tri = mesh.triangles()[t];
    let v = mesh.vertices();
    (tri, [v[tri[0]], v[tri[1]], v[tri[2]]])
}

/// Coefficients of the bulk Stokes operator.
#[derive(Clone, Copy, Debug)]
pub struct StokesCoefficients<T> {
    pub mu: T,
    /// `rho_f / dt`; zero for the stationary operator.
    pub mass: T,
    /// Pressure stabilization constant `delta` (zero disables it).
    pub delta_stab: T,
}

/// Adds the backward-Euler Stokes block: mass, viscous, pressure coupling
/// `-(p, div v) + (q, div u)` and the pressure stabilization
/// `sum_K delta h_K^2 / mu (grad p, grad q)_K`. `u_prev` is a full solution
/// vector numbered by `dofmap` and feeds the mass term on the right-hand side.
pub fn assemble_stokes_block<T: Scalar>(
    b: &mut SystemBuilder<T>,
    mesh: &Mesh<T>,
    dofmap: &DofMap,
    coef: &StokesCoefficients<T>,
    u_prev: Option<&[T]>,
) {
    let twelfth = T::one() / T::of(12.0);
    let third = T::one() / T::of(3.0);
    for t in 0..mesh.n_triangles() {
        let (tri, p) = tri_coords(mesh, t);
        let ux = tri.map(|v| dofmap.at(Field::VelocityX, v));
        let uy = tri.map(|v| dofmap.at(Field::VelocityY, v));
        let pr = tri.map(|v| dofmap.at(Field::Pressure, v));
        let vel = |a: usize, i: usize| if a == 0 { ux[i] } else { uy[i] };
        let (area, g) = p1_gradients(p);

        let k = viscous_element_matrix(p, coef.mu);
        for r in 0..6 {
            for c in 0..6 {
                b.add(vel(r / 3, r % 3), vel(c / 3, c % 3), k[r][c]);
            }
        }

        if coef.mass != T::zero() {
            for i in 0..3 {
                for j in 0..3 {
                    let m = coef.mass * area * twelfth * if i == j { T::of(2.0) } else { T::one() };
                    for a in 0..2 {
                        b.add(vel(a, i), vel(a, j), m);
                        if let Some(prev) = u_prev {
                            b.add_rhs(vel(a, i), m * prev[vel(a, j)]);
                        }
                    }
                }
            }
        }

        for i in 0..3 {
            for j in 0..3 {
                for a in 0..2 {
                    // -(p_j, d_a phi_i) in the momentum row (i, a)
                    b.add(vel(a, i), pr[j], -area * third * g[i][a]);
                    // (q_i, d_a phi_j) in the continuity row
                    b.add(pr[i], vel(a, j), area * third * g[j][a]);
                }
            }
        }

        if coef.delta_stab != T::zero() {
            let h = mesh.diameter(t);
            let s = coef.delta_stab * h * h / coef.mu * area;
            for i in 0..3 {
                for j in 0..3 {
                    b.add(pr[i], pr[j], s * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
                }
            }
        }
    }
}

/// Total-stress boundary load `sigma n = -P n` on edges with the given tags.
/// `loads` pairs a tag with its pressure value.
pub fn assemble_neumann_loads<T: Scalar>(b: &mut SystemBuilder<T>, mesh: &Mesh<T>, dofmap: &DofMap, loads: &[(Tag, T)]) {
    let half = T::of(0.5);
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        let Some(&(_, pbar)) = loads.iter().find(|(tag, _)| *tag == edge.tag) else { continue };
        let n = mesh.boundary_normal(e);
        let [a, c] = edge.vertices;
        let (pa, pc) = (mesh.vertices()[a], mesh.vertices()[c]);
        let len = ((pc[0] - pa[0]).powi(2) + (pc[1] - pa[1]).powi(2)).sqrt();
        for v in [a, c] {
            b.add_rhs(dofmap.at(Field::VelocityX, v), -pbar * n[0] * len * half);
            b.add_rhs(dofmap.at(Field::VelocityY, v), -pbar * n[1] * len * half);
        }
    }
}

/// Homogeneous no-slip on all vertices of edges with the given tags.
pub fn apply_no_slip<T: Scalar>(b: &mut SystemBuilder<T>, mesh: &Mesh<T>, dofmap: &DofMap, tags: &[Tag]) {
    for edge in mesh.boundary_edges().iter().filter(|e| tags.contains(&e.tag)) {
        for v in edge.vertices {
            b.constrain(dofmap.at(Field::VelocityX, v), T::zero());
            b.constrain(dofmap.at(Field::VelocityY, v), T::zero());
        }
    }
}

/// Zero tangential velocity on axis-aligned edges with the given tags.
/// Vertices in `skip` stay free; the layer end points are left to the
/// layer multiplier.
pub fn apply_zero_tangential<T: Scalar>(
    b: &mut SystemBuilder<T>,
    mesh: &Mesh<T>,
    dofmap: &DofMap,
    tags: &[Tag],
    skip: &[usize],
) -> Result<()> {
    let tol = T::of(1e-12);
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        if !tags.contains(&edge.tag) {
            continue;
        }
        let n = mesh.boundary_normal(e);
        let field = if n[1].abs() <= tol {
            Field::VelocityY
        } else if n[0].abs() <= tol {
            Field::VelocityX
        } else {
            return Err(Error::Geometry(format!(
                "pressure boundary edge {e} is not axis aligned; tangential constraint unsupported"
            )));
        };
        for v in edge.vertices.into_iter().filter(|v| !skip.contains(v)) {
            b.constrain(dofmap.at(field, v), T::zero());
        }
    }
    Ok(())
}

/// Value of a trace field at parameter `s` in `[0, 1]` along a segment.
pub fn segment_value<T: Scalar>(dofmap: &DofMap, field: Field, seg: &TraceSegment<T>, s: T) -> LinComb<T> {
    let phi = [T::one() - s, s];
    seg.vertices
        .iter()
        .zip(phi)
        .map(|(&v, c)| (dofmap.at(field, v), c))
        .collect()
}

/// Normal fluid velocity `u . n` at parameter `s` along a segment.
pub fn segment_normal_velocity<T: Scalar>(dofmap: &DofMap, seg: &TraceSegment<T>, s: T) -> LinComb<T> {
    let phi = [T::one() - s, s];
    let mut lc = Vec::with_capacity(4);
    for (&v, c) in seg.vertices.iter().zip(phi) {
        lc.push((dofmap.at(Field::VelocityX, v), c * seg.normal[0]));
        lc.push((dofmap.at(Field::VelocityY, v), c * seg.normal[1]));
    }
    lc
}

/// Adds `(eps K_tau d_s P, d_s q)` along every trace segment.
pub fn assemble_surface_darcy<T: Scalar>(b: &mut SystemBuilder<T>, trace: &TraceMesh<T>, dofmap: &DofMap, eps_k_tau: T) {
    for seg in trace.segments() {
        let [a, c] = seg.vertices.map(|v| dofmap.at(Field::PorousPressure, v));
        let inv = T::one() / seg.length;
        let grad = [(a, -inv), (c, inv)];
        b.add_product(&grad, &grad, eps_k_tau * seg.length);
    }
}

/// Adds the layer/fluid coupling on segments that touch fluid:
/// `(P, v.n) + (eps / (4 K_n)) (u.n, v.n)` in the momentum rows and
/// `-(u.n, q)` in the porous rows. Segments for which `skip` returns true
/// (and sealed segments) are left out.
pub fn assemble_interface_coupling<T: Scalar>(
    b: &mut SystemBuilder<T>,
    trace: &TraceMesh<T>,
    dofmap: &DofMap,
    epsilon: T,
    k_n: T,
    quad: &Quadrature<T>,
    skip: impl Fn(usize) -> bool,
) -> Result<()> {
    if !(k_n > T::zero()) {
        return Err(Error::InvalidArgument(format!("normal permeability must be positive, got {k_n}")));
    }
    let kappa = epsilon / (T::of(4.0) * k_n);
    for (k, seg) in trace.segments().iter().enumerate() {
        if seg.triangle.is_none() || skip(k) {
            continue;
        }
        for (&s, &w) in quad.seg_points.iter().zip(&quad.seg_weights) {
            let un = segment_normal_velocity(dofmap, seg, s);
            let pl = segment_value(dofmap, Field::PorousPressure, seg, s);
            let ds = w * seg.length;
            b.add_product(&un, &pl, ds);
            b.add_product(&un, &un, kappa * ds);
            b.add_product(&pl, &un, -ds);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::dofmap::{build_dof_map, FieldSelection};
    use crate::mesh::{extract_trace, generate_channel_mesh, generate_two_reservoir_mesh, tags, ChannelTags, ReservoirGeometry};

    const REF: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn viscous_kernel_symmetric_psd_with_translation_kernel() {
        let k = viscous_element_matrix(REF, 1.0);
        for i in 0..6 {
            for j in 0..6 {
                assert!((k[i][j] - k[j][i]).abs() < 1e-15);
            }
        }
        for t in [[1.0, 1.0, 1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0, 1.0, 1.0]] {
            for row in &k {
                let r: f64 = row.iter().zip(&t).map(|(a, b)| a * b).sum();
                assert!(r.abs() < 1e-14);
            }
        }
        // rotation (-y, x) is a zero-strain mode as well
        let rot = [0.0, 0.0, -1.0, 0.0, 1.0, 0.0];
        let quad: f64 = (0..6).map(|i| (0..6).map(|j| rot[i] * k[i][j] * rot[j]).sum::<f64>()).sum();
        assert!(quad.abs() < 1e-14);
        // PSD on a few probe vectors
        for probe in [[1.0, -2.0, 0.5, 0.3, 0.0, -1.0], [0.0, 1.0, 0.0, 0.0, 0.0, 0.0]] {
            let q: f64 = (0..6).map(|i| (0..6).map(|j| probe[i] * k[i][j] * probe[j]).sum::<f64>()).sum();
            assert!(q >= -1e-14);
        }
    }

    #[test]
    fn constant_velocity_has_zero_residual() {
        let m = generate_channel_mesh::<f64>(2.0, 1.0, 4, 2, ChannelTags::default()).unwrap();
        let d = build_dof_map(&m, None, None, FieldSelection::STOKES).unwrap();
        let mut b = SystemBuilder::new(d.n_dofs());
        let coef = StokesCoefficients { mu: 1.0, mass: 0.0, delta_stab: 0.1 };
        assemble_stokes_block(&mut b, &m, &d, &coef, None);
        let s = b.finish();
        let mut x = vec![0.0; d.n_dofs()];
        for i in d.range(Field::VelocityX) {
            x[i] = 0.7;
        }
        for i in d.range(Field::VelocityY) {
            x[i] = -1.3;
        }
        let ax = s.matrix.mul_vec(&x);
        // momentum rows vanish everywhere; continuity rows vanish in the interior
        for i in d.range(Field::VelocityX).chain(d.range(Field::VelocityY)) {
            assert!(ax[i].abs() < 1e-13);
        }
        let total_div: f64 = d.range(Field::Pressure).map(|i| ax[i]).sum();
        // sum of continuity rows = boundary flux of a constant field = 0
        assert!(total_div.abs() < 1e-13);
    }

    #[test]
    fn saddle_structure_is_antisymmetric() {
        let m = generate_channel_mesh::<f64>(2.0, 1.0, 3, 2, ChannelTags::default()).unwrap();
        let d = build_dof_map(&m, None, None, FieldSelection::STOKES).unwrap();
        let mut b = SystemBuilder::new(d.n_dofs());
        assemble_stokes_block(&mut b, &m, &d, &StokesCoefficients { mu: 0.03, mass: 10.0, delta_stab: 0.0 }, None);
        let a = b.finish().matrix;
        let vel = 0..d.range(Field::VelocityY).end;
        for i in vel.clone() {
            for j in d.range(Field::Pressure) {
                assert_eq!(a.get(i, j), -a.get(j, i));
            }
            for j in vel.clone() {
                assert!((a.get(i, j) - a.get(j, i)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn surface_stiffness_single_segment() {
        let m = generate_channel_mesh::<f64>(0.5, 1.0, 1, 1, ChannelTags::default()).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        let d = build_dof_map(&m, Some(&tr), None, FieldSelection::STOKES_DARCY).unwrap();
        let mut b = SystemBuilder::new(d.n_dofs());
        assemble_surface_darcy(&mut b, &tr, &d, 0.02);
        let a = b.finish().matrix;
        let r = d.range(Field::PorousPressure);
        let blk = a.block(r.clone(), r);
        let k = 0.02 / 0.5;
        assert!((blk[0][0] - k).abs() < 1e-15 && (blk[0][1] + k).abs() < 1e-15);
        assert!((blk[1][1] - k).abs() < 1e-15 && (blk[1][0] + k).abs() < 1e-15);
    }

    #[test]
    fn surface_operator_null_space_and_linear_exactness() {
        let m = generate_channel_mesh::<f64>(2.0, 1.0, 2, 1, ChannelTags::default()).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        let d = build_dof_map(&m, Some(&tr), None, FieldSelection::STOKES_DARCY).unwrap();
        let mut b = SystemBuilder::new(d.n_dofs());
        assemble_surface_darcy(&mut b, &tr, &d, 1.0);
        let a = b.finish().matrix;
        let mut x = vec![0.0; d.n_dofs()];
        for (k, &v) in tr.vertices().iter().enumerate() {
            x[d.at(Field::PorousPressure, v)] = 1.0;
            let _ = k;
        }
        assert!(a.mul_vec(&x).iter().all(|r| r.abs() < 1e-15));
        for (k, &v) in tr.vertices().iter().enumerate() {
            x[d.at(Field::PorousPressure, v)] = tr.arc_coords()[k];
        }
        let mid = d.at(Field::PorousPressure, tr.vertices()[1]);
        assert!(a.mul_vec(&x)[mid].abs() < 1e-15);
    }

    #[test]
    fn interface_blocks_are_negative_transposes() {
        let m = generate_channel_mesh::<f64>(2.0, 1.0, 4, 2, ChannelTags::default()).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        let d = build_dof_map(&m, Some(&tr), None, FieldSelection::STOKES_DARCY).unwrap();
        let mut b = SystemBuilder::new(d.n_dofs());
        assemble_interface_coupling(&mut b, &tr, &d, 0.01, 1.0, &Quadrature::new(), |_| false).unwrap();
        let a = b.finish().matrix;
        for i in 0..d.range(Field::VelocityY).end {
            for j in d.range(Field::PorousPressure) {
                assert_eq!(a.get(i, j), -a.get(j, i));
            }
        }
    }

    #[test]
    fn penalty_integrates_constant() {
        let (l, eps, kn) = (3.0, 0.01, 2.0);
        let m = generate_channel_mesh::<f64>(l, 1.0, 5, 2, ChannelTags::default()).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        let d = build_dof_map(&m, Some(&tr), None, FieldSelection::STOKES_DARCY).unwrap();
        let mut b = SystemBuilder::new(d.n_dofs());
        assemble_interface_coupling(&mut b, &tr, &d, eps, kn, &Quadrature::new(), |_| false).unwrap();
        let a = b.finish().matrix;
        // u . n = 1 on the bottom (n = (0, -1))
        let mut u = vec![0.0; d.n_dofs()];
        for &v in tr.vertices() {
            u[d.at(Field::VelocityY, v)] = -1.0;
        }
        let au = a.mul_vec(&u);
        let val: f64 = u.iter().zip(&au).map(|(x, y)| x * y).sum();
        assert!((val - eps / (4.0 * kn) * l).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_kn_rejected() {
        let m = generate_channel_mesh::<f64>(1.0, 1.0, 1, 1, ChannelTags::default()).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        let d = build_dof_map(&m, Some(&tr), None, FieldSelection::STOKES_DARCY).unwrap();
        let mut b = SystemBuilder::new(d.n_dofs());
        let r = assemble_interface_coupling(&mut b, &tr, &d, 0.01, 0.0, &Quadrature::new(), |_| false);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn sealed_span_rows_are_empty() {
        let g = ReservoirGeometry::<f64> { cells_per_unit: 4, ..Default::default() };
        let m = generate_two_reservoir_mesh(&g).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        let d = build_dof_map(&m, Some(&tr), None, FieldSelection::STOKES_DARCY).unwrap();
        let mut b = SystemBuilder::new(d.n_dofs());
        assemble_interface_coupling(&mut b, &tr, &d, 0.01, 1.0, &Quadrature::new(), |_| false).unwrap();
        let a = b.finish().matrix;
        // interior sealed vertices: trace indices 5..=7
        for k in 5..=7 {
            let row = d.at(Field::PorousPressure, tr.vertices()[k]);
            assert!(a.row(row).1.iter().all(|v| *v == 0.0));
        }
    }
}
