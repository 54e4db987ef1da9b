use std::collections::BTreeMap;

use super::{outward_normal, Mesh, Tag};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mesh edge a trace segment was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParentEdge {
    /// Index into [`Mesh::boundary_edges`]; fluid lies on one side.
    Boundary(usize),
    /// Index into [`Mesh::sealed_edges`]; no adjacent fluid.
    Sealed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceSegment<T> {
    /// Local trace vertex indices `[k, k + 1]`.
    pub local: [usize; 2],
    /// Mesh vertex indices.
    pub vertices: [usize; 2],
    pub parent: ParentEdge,
    /// Fluid triangle adjacent to the segment, if any.
    pub triangle: Option<usize>,
    /// Unit normal, outward from the fluid.
    pub normal: [T; 2],
    pub length: T,
}

/// Ordered 1D chain of tagged edges.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceMesh<T> {
    tag: Tag,
    vertices: Vec<usize>,
    arc: Vec<T>,
    segments: Vec<TraceSegment<T>>,
}

impl<T: Scalar> TraceMesh<T> {
    pub fn tag(&self) -> Tag {
        self.tag
    }

    /// Mesh vertex index of every trace vertex, in chain order.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Cumulative arc length at each trace vertex.
    pub fn arc_coords(&self) -> &[T] {
        &self.arc
    }

    pub fn segments(&self) -> &[TraceSegment<T>] {
        &self.segments
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn total_length(&self) -> T {
        *self.arc.last().unwrap_or(&T::zero())
    }

    /// Lumped (trapezoidal) weight of each trace vertex.
    pub fn nodal_weights(&self) -> Vec<T> {
        let mut w = vec![T::zero(); self.vertices.len()];
        let half = T::of(0.5);
        for s in &self.segments {
            w[s.local[0]] += half * s.length;
            w[s.local[1]] += half * s.length;
        }
        w
    }

    /// Same chain with geometry recomputed from `mesh` (e.g. after motion).
    pub fn rebuild(&self, mesh: &Mesh<T>) -> TraceMesh<T> {
        let mut out = self.clone();
        fill_geometry(mesh, &mut out);
        out
    }
}

fn fill_geometry<T: Scalar>(mesh: &Mesh<T>, trace: &mut TraceMesh<T>) {
    let p = mesh.vertices();
    let mut arc = vec![T::zero(); trace.vertices.len()];
    for (k, seg) in trace.segments.iter_mut().enumerate() {
        let (a, b) = (p[seg.vertices[0]], p[seg.vertices[1]]);
        seg.length = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        arc[k + 1] = arc[k] + seg.length;
        if let Some(t) = seg.triangle {
            let tri = mesh.triangles()[t];
            let c = *tri.iter().find(|&&v| v != seg.vertices[0] && v != seg.vertices[1]).unwrap();
            seg.normal = outward_normal(a, b, p[c]);
        }
    }
    // Sealed segments take the orientation convention of the coupled ones.
    let sign = trace
        .segments
        .iter()
        .find(|s| s.triangle.is_some())
        .map(|s| {
            let (a, b) = (p[s.vertices[0]], p[s.vertices[1]]);
            let rot = [b[1] - a[1], a[0] - b[0]];
            if rot[0] * s.normal[0] + rot[1] * s.normal[1] >= T::zero() {
                T::one()
            } else {
                -T::one()
            }
        })
        .unwrap_or(T::one());
    for seg in trace.segments.iter_mut().filter(|s| s.triangle.is_none()) {
        let (a, b) = (p[seg.vertices[0]], p[seg.vertices[1]]);
        seg.normal = [sign * (b[1] - a[1]) / seg.length, sign * (a[0] - b[0]) / seg.length];
    }
    trace.arc = arc;
}

/// Orders all edges carrying `tag` (boundary and sealed) into one chain,
/// starting from the end vertex with the smaller `(x, y)`.
pub fn extract_trace<T: Scalar>(mesh: &Mesh<T>, tag: Tag) -> Result<TraceMesh<T>> {
    let mut edges: Vec<([usize; 2], ParentEdge, Option<usize>)> = Vec::new();
    for (e, edge) in mesh.boundary_edges().iter().enumerate() {
        if edge.tag == tag {
            edges.push((edge.vertices, ParentEdge::Boundary(e), Some(mesh.boundary_owner(e))));
        }
    }
    for (e, edge) in mesh.sealed_edges().iter().enumerate() {
        if edge.tag == tag {
            edges.push((edge.vertices, ParentEdge::Sealed(e), None));
        }
    }
    if edges.is_empty() {
        return Err(Error::NotFound(format!("no edges carry tag {tag}")));
    }

    let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (v, _, _)) in edges.iter().enumerate() {
        incident.entry(v[0]).or_default().push(i);
        incident.entry(v[1]).or_default().push(i);
    }
    if let Some((v, _)) = incident.iter().find(|(_, list)| list.len() > 2) {
        return Err(Error::Topology(format!("vertex {v} joins more than two edges with tag {tag}")));
    }
    let pts = mesh.vertices();
    let start = incident
        .iter()
        .filter(|(_, list)| list.len() == 1)
        .map(|(&v, _)| v)
        .min_by(|&a, &b| {
            let (pa, pb) = (pts[a], pts[b]);
            pa[0].partial_cmp(&pb[0]).unwrap().then(pa[1].partial_cmp(&pb[1]).unwrap())
        })
        .ok_or_else(|| Error::Topology(format!("edges with tag {tag} form a closed loop")))?;

    let mut used = vec![false; edges.len()];
    let mut chain = vec![start];
    let mut segments = Vec::with_capacity(edges.len());
    let mut current = start;
    while let Some(&e) = incident[&current].iter().find(|&&e| !used[e]) {
        used[e] = true;
        let (v, parent, triangle) = edges[e];
        let next = if v[0] == current { v[1] } else { v[0] };
        let k = chain.len() - 1;
        segments.push(TraceSegment {
            local: [k, k + 1],
            vertices: [current, next],
            parent,
            triangle,
            normal: [T::zero(), T::zero()],
            length: T::zero(),
        });
        chain.push(next);
        current = next;
    }
    if segments.len() != edges.len() {
        return Err(Error::Topology(format!(
            "edges with tag {tag} are disconnected ({} of {} reachable from vertex {start})",
            segments.len(),
            edges.len()
        )));
    }
    let mut trace = TraceMesh { tag, vertices: chain, arc: Vec::new(), segments };
    fill_geometry(mesh, &mut trace);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_channel_mesh, generate_two_reservoir_mesh, tags, ChannelTags, ReservoirGeometry};

    #[test]
    fn channel_bottom_trace() {
        let m = generate_channel_mesh::<f64>(4.0, 1.0, 8, 2, ChannelTags::default()).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        assert_eq!(tr.segments().len(), 8);
        assert!((tr.total_length() - 4.0).abs() < 1e-14);
        for s in tr.segments() {
            assert_eq!(s.normal, [0.0, -1.0]);
        }
        let xs: Vec<f64> = tr.vertices().iter().map(|&v| m.vertices()[v][0]).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn top_wall_normal_points_up() {
        let m = generate_channel_mesh::<f64>(4.0, 1.0, 4, 2, ChannelTags::default()).unwrap();
        let tr = extract_trace(&m, tags::ELASTIC_WALL).unwrap();
        assert_eq!(tr.segments()[0].normal, [0.0, 1.0]);
        assert_eq!(m.vertices()[tr.vertices()[0]], [0.0, 1.0]);
    }

    #[test]
    fn missing_tag() {
        let m = generate_channel_mesh::<f64>(1.0, 1.0, 2, 2, ChannelTags::default()).unwrap();
        assert!(matches!(extract_trace(&m, 42), Err(Error::NotFound(_))));
    }

    #[test]
    fn disconnected_tag() {
        let mut t = ChannelTags::default();
        t.top = tags::POROUS_LAYER;
        let m = generate_channel_mesh::<f64>(1.0, 1.0, 2, 2, t).unwrap();
        assert!(matches!(extract_trace(&m, tags::POROUS_LAYER), Err(Error::Topology(_))));
    }

    #[test]
    fn reservoir_trace_spans_sealed_gap() {
        let g = ReservoirGeometry::<f64> { cells_per_unit: 4, ..Default::default() };
        let m = generate_two_reservoir_mesh(&g).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        assert_eq!(tr.segments().len(), 12);
        assert!((tr.total_length() - 3.0).abs() < 1e-14);
        let sealed = tr.segments().iter().filter(|s| s.triangle.is_none()).count();
        assert_eq!(sealed, 4);
        assert!(tr.segments().iter().all(|s| s.normal == [0.0, -1.0]));
    }
}
