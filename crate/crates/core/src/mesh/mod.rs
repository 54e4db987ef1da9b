//! Triangular meshes with tagged boundaries, and the 1D trace meshes that
//! carry the porous layer.

mod generate;
mod io;
mod trace;

use std::collections::HashMap;

use crate::error::{Error, MeshInvariant, Result};
use crate::scalar::Scalar;

pub use generate::{generate_channel_mesh, generate_two_reservoir_mesh, ChannelTags, Rect, ReservoirGeometry};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};
pub use trace::{extract_trace, ParentEdge, TraceMesh, TraceSegment};

/// Integer boundary tag.
pub type Tag = i32;

/// Default tag encoding.
pub mod tags {
    use super::Tag;
    /// Left pressure boundary.
    pub const NEUMANN_LEFT: Tag = 1;
    /// Right pressure boundary.
    pub const NEUMANN_RIGHT: Tag = 2;
    /// Porous layer.
    pub const POROUS_LAYER: Tag = 3;
    /// Rigid no-slip wall.
    pub const RIGID_WALL: Tag = 4;
    /// Elastic wall.
    pub const ELASTIC_WALL: Tag = 5;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TaggedEdge {
    pub vertices: [usize; 2],
    pub tag: Tag,
}

/// A 2D triangulation.
///
/// Besides the usual boundary edges (each owned by exactly one triangle) a mesh
/// may carry *sealed edges*: tagged segments with no adjacent triangle. They
/// exist only on the trace, e.g. the impermeable span of the porous layer that
/// joins two otherwise disconnected reservoirs.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh<T> {
    vertices: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<TaggedEdge>,
    sealed_edges: Vec<TaggedEdge>,
    /// Owning triangle of each boundary edge.
    edge_owner: Vec<usize>,
}

#[inline]
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl<T: Scalar> Mesh<T> {
    /// Builds a mesh and runs full validation.
    pub fn new(
        vertices: Vec<[T; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<TaggedEdge>,
        sealed_edges: Vec<TaggedEdge>,
    ) -> Result<Self> {
        let mut mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            sealed_edges,
            edge_owner: Vec::new(),
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks every mesh invariant and refreshes the boundary ownership table.
    pub fn validate(&mut self) -> Result<()> {
        let nv = self.vertices.len();
        let fail = |invariant, detail: String| Err(Error::Validation { invariant, detail });

        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= nv) {
                return fail(
                    MeshInvariant::IndexRange,
                    format!("triangle {t} references vertex {v} (have {nv})"),
                );
            }
        }
        for (kind, edges) in [("boundary", &self.boundary_edges), ("sealed", &self.sealed_edges)] {
            for (e, edge) in edges.iter().enumerate() {
                if let Some(&v) = edge.vertices.iter().find(|&&v| v >= nv) {
                    return fail(
                        MeshInvariant::IndexRange,
                        format!("{kind} edge {e} references vertex {v} (have {nv})"),
                    );
                }
                if edge.tag == 0 {
                    return fail(MeshInvariant::ZeroTag, format!("{kind} edge {e} has tag 0"));
                }
            }
        }
        for t in 0..self.triangles.len() {
            let area = self.signed_area(t);
            if !(area > T::zero()) {
                return fail(
                    MeshInvariant::Orientation,
                    format!("triangle {t} has non-positive signed area {area:e}"),
                );
            }
        }

        let mut owners: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                let list = owners.entry(key).or_default();
                list.push(t);
                if list.len() > 2 {
                    return fail(
                        MeshInvariant::NonManifold,
                        format!("edge ({}, {}) is shared by triangles {:?}", key.0, key.1, list),
                    );
                }
            }
        }

        let mut seen = HashMap::new();
        let mut edge_owner = Vec::with_capacity(self.boundary_edges.len());
        for (e, edge) in self.boundary_edges.iter().enumerate() {
            let key = edge_key(edge.vertices[0], edge.vertices[1]);
            if seen.insert(key, e).is_some() {
                return fail(
                    MeshInvariant::BoundaryMismatch,
                    format!("boundary edge {e} ({}, {}) listed twice", key.0, key.1),
                );
            }
            match owners.get(&key).map(|v| v.as_slice()) {
                Some([t]) => edge_owner.push(*t),
                Some(list) => {
                    return fail(
                        MeshInvariant::BoundaryMismatch,
                        format!("boundary edge {e} belongs to {} triangles", list.len()),
                    )
                }
                None => {
                    return fail(
                        MeshInvariant::BoundaryMismatch,
                        format!("boundary edge {e} ({}, {}) belongs to no triangle", key.0, key.1),
                    )
                }
            }
        }
        // Every edge with a single owner must be declared as boundary.
        let mut open: Vec<_> = owners
            .iter()
            .filter(|(k, v)| v.len() == 1 && !seen.contains_key(*k))
            .map(|(k, _)| *k)
            .collect();
        if !open.is_empty() {
            open.sort_unstable();
            let (a, b) = open[0];
            return fail(
                MeshInvariant::BoundaryMismatch,
                format!("edge ({a}, {b}) lies on the boundary but carries no tag"),
            );
        }
        for (e, edge) in self.sealed_edges.iter().enumerate() {
            let key = edge_key(edge.vertices[0], edge.vertices[1]);
            if owners.contains_key(&key) {
                return fail(
                    MeshInvariant::BoundaryMismatch,
                    format!("sealed edge {e} ({}, {}) coincides with a triangle edge", key.0, key.1),
                );
            }
        }

        self.edge_owner = edge_owner;
        Ok(())
    }

    /// Copy of this mesh with moved vertex positions and identical topology.
    ///
    /// Only orientation is re-checked; connectivity is inherited.
    pub fn with_vertices(&self, vertices: Vec<[T; 2]>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} vertices, got {}",
                self.vertices.len(),
                vertices.len()
            )));
        }
        let mesh = Mesh { vertices, ..self.clone() };
        for t in 0..mesh.triangles.len() {
            if !(mesh.signed_area(t) > T::zero()) {
                return Err(Error::Geometry(format!("triangle {t} inverted by vertex motion")));
            }
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[TaggedEdge] {
        &self.boundary_edges
    }

    pub fn sealed_edges(&self) -> &[TaggedEdge] {
        &self.sealed_edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Triangle owning boundary edge `e`.
    pub fn boundary_owner(&self, e: usize) -> usize {
        self.edge_owner[e]
    }

    pub fn signed_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])) * T::of(0.5)
    }

    pub fn total_area(&self) -> T {
        (0..self.triangles.len()).fold(T::zero(), |acc, t| acc + self.signed_area(t))
    }

    /// Triangle diameter (longest edge).
    pub fn diameter(&self, t: usize) -> T {
        let tri = self.triangles[t];
        (0..3).fold(T::zero(), |acc, k| {
            let p = self.vertices[tri[k]];
            let q = self.vertices[tri[(k + 1) % 3]];
            acc.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
        })
    }

    /// Outward unit normal of boundary edge `e` with respect to its owner.
    pub fn boundary_normal(&self, e: usize) -> [T; 2] {
        let [a, b] = self.boundary_edges[e].vertices;
        let tri = self.triangles[self.edge_owner[e]];
        let c = *tri.iter().find(|&&v| v != a && v != b).expect("owner contains edge");
        outward_normal(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Vertices referenced by at least one triangle, in increasing order.
    pub fn triangulated_vertices(&self) -> Vec<usize> {
        let mut used = vec![false; self.vertices.len()];
        for tri in &self.triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        (0..self.vertices.len()).filter(|&v| used[v]).collect()
    }

    /// Edges of the triangulated surface, each listed once as `(min, max)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<_> = self
            .triangles
            .iter()
            .flat_map(|tri| (0..3).map(move |k| edge_key(tri[k], tri[(k + 1) % 3])))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Connected components of the triangulation (triangles joined through
    /// shared edges). Returns a component id per triangle and the count.
    pub fn triangle_components(&self) -> (Vec<usize>, usize) {
        let n = self.triangles.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut first_owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                if let Some(&o) = first_owner.get(&key) {
                    let (ra, rb) = (find(&mut parent, o), find(&mut parent, t));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                } else {
                    first_owner.insert(key, t);
                }
            }
        }
        let mut ids = vec![usize::MAX; n];
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        for t in 0..n {
            let r = find(&mut parent, t);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            ids[t] = label[r];
        }
        (ids, count)
    }
}

/// Unit normal of segment `a -> b` pointing away from `opposite`.
pub(crate) fn outward_normal<T: Scalar>(a: [T; 2], b: [T; 2], opposite: [T; 2]) -> [T; 2] {
    let t = [b[0] - a[0], b[1] - a[1]];
    let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
    let mut n = [t[1] / len, -t[0] / len];
    let to_opp = [opposite[0] - a[0], opposite[1] - a[1]];
    if n[0] * to_opp[0] + n[1] * to_opp[1] > T::zero() {
        n = [-n[0], -n[1]];
    }
    n
}
