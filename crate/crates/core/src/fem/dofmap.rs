use std::ops::Range;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, TraceMesh};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    VelocityX,
    VelocityY,
    Pressure,
    PorousPressure,
    WallDisplacement,
    WallVelocity,
    ContactMultiplier,
}

/// Which fields get degrees of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldSelection {
    /// Velocity and pressure on every triangulated vertex.
    pub fluid: bool,
    /// Averaged porous pressure on the layer trace.
    pub porous: bool,
    /// Wall displacement and velocity on the elastic wall trace.
    pub wall: bool,
    /// Contact multiplier on the elastic wall trace.
    pub contact: bool,
}

impl FieldSelection {
    pub const STOKES: Self = FieldSelection { fluid: true, porous: false, wall: false, contact: false };
    pub const STOKES_DARCY: Self = FieldSelection { fluid: true, porous: true, wall: false, contact: false };
    pub const FSI_CONTACT: Self = FieldSelection { fluid: true, porous: true, wall: true, contact: true };
}

#[derive(Clone, Debug, PartialEq)]
struct FieldBlock {
    field: Field,
    offset: usize,
    /// Owning mesh vertex of each dof in the block.
    vertices: Vec<usize>,
    /// Mesh vertex -> dof.
    lookup: Vec<Option<usize>>,
}

/// Continuous P1 numbering of every selected field; each field occupies one
/// contiguous block of the global index range.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    blocks: Vec<FieldBlock>,
    total: usize,
}

impl DofMap {
    pub fn n_dofs(&self) -> usize {
        self.total
    }

    fn block(&self, field: Field) -> Option<&FieldBlock> {
        self.blocks.iter().find(|b| b.field == field)
    }

    pub fn has(&self, field: Field) -> bool {
        self.block(field).is_some()
    }

    /// Global dof of `field` at mesh vertex `vertex`.
    #[inline]
    pub fn dof(&self, field: Field, vertex: usize) -> Option<usize> {
        self.block(field).and_then(|b| b.lookup.get(vertex).copied().flatten())
    }

    /// Like [`DofMap::dof`] but panics when absent.
    #[inline]
    pub fn at(&self, field: Field, vertex: usize) -> usize {
        self.dof(field, vertex)
            .unwrap_or_else(|| panic!("no {field:?} dof at vertex {vertex}"))
    }

    pub fn range(&self, field: Field) -> Range<usize> {
        self.block(field).map(|b| b.offset..b.offset + b.vertices.len()).unwrap_or(0..0)
    }

    pub fn count(&self, field: Field) -> usize {
        self.range(field).len()
    }

    /// Mesh vertices carrying `field`, in dof order.
    pub fn vertices(&self, field: Field) -> &[usize] {
        self.block(field).map(|b| b.vertices.as_slice()).unwrap_or(&[])
    }

    pub fn fields(&self) -> impl Iterator<Item = Field> + '_ {
        self.blocks.iter().map(|b| b.field)
    }
}

/// Numbers the selected fields. Fluid fields live on triangulated vertices,
/// the porous pressure on `layer` vertices, wall fields on `wall` vertices.
pub fn build_dof_map<T: Scalar>(
    mesh: &Mesh<T>,
    layer: Option<&TraceMesh<T>>,
    wall: Option<&TraceMesh<T>>,
    fields: FieldSelection,
) -> Result<DofMap> {
    let nv = mesh.n_vertices();
    let mut list: Vec<(Field, Vec<usize>)> = Vec::new();
    if fields.fluid {
        let verts = mesh.triangulated_vertices();
        if verts.is_empty() {
            return Err(Error::Config("fluid fields selected but the mesh has no triangles".into()));
        }
        list.push((Field::VelocityX, verts.clone()));
        list.push((Field::VelocityY, verts.clone()));
        list.push((Field::Pressure, verts));
    }
    if fields.porous {
        let tr = layer.ok_or_else(|| Error::Config("porous pressure selected without a layer trace".into()))?;
        list.push((Field::PorousPressure, tr.vertices().to_vec()));
    }
    if fields.wall || fields.contact {
        let tr = wall.ok_or_else(|| Error::Config("wall fields selected without an elastic wall trace".into()))?;
        if fields.wall {
            list.push((Field::WallDisplacement, tr.vertices().to_vec()));
            list.push((Field::WallVelocity, tr.vertices().to_vec()));
        }
        if fields.contact {
            if !fields.wall {
                return Err(Error::Config("contact multiplier requires wall fields".into()));
            }
            list.push((Field::ContactMultiplier, tr.vertices().to_vec()));
        }
    }
    if list.is_empty() {
        return Err(Error::Config("empty field selection".into()));
    }

    let mut blocks = Vec::with_capacity(list.len());
    let mut offset = 0;
    for (field, vertices) in list {
        let mut lookup = vec![None; nv];
        for (k, &v) in vertices.iter().enumerate() {
            if v >= nv {
                return Err(Error::Config(format!("{field:?} vertex {v} outside mesh")));
            }
            lookup[v] = Some(offset + k);
        }
        let count = vertices.len();
        blocks.push(FieldBlock { field, offset, vertices, lookup });
        offset += count;
    }
    Ok(DofMap { blocks, total: offset })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{extract_trace, generate_channel_mesh, generate_two_reservoir_mesh, tags, ChannelTags, ReservoirGeometry};

    #[test]
    fn channel_stokes_darcy_count() {
        let m = generate_channel_mesh::<f64>(4.0, 1.0, 8, 2, ChannelTags::default()).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        let d = build_dof_map(&m, Some(&tr), None, FieldSelection::STOKES_DARCY).unwrap();
        assert_eq!(d.n_dofs(), 90);
        assert_eq!(d.count(Field::PorousPressure), 9);
        assert_eq!(d.range(Field::PorousPressure), 81..90);
    }

    #[test]
    fn stokes_only_has_no_porous_rows() {
        let m = generate_channel_mesh::<f64>(4.0, 1.0, 8, 2, ChannelTags::default()).unwrap();
        let d = build_dof_map(&m, None, None, FieldSelection::STOKES).unwrap();
        assert!(!d.has(Field::PorousPressure));
        assert_eq!(d.n_dofs(), 81);
    }

    #[test]
    fn reservoir_porous_dofs_cover_sealed_span() {
        let g = ReservoirGeometry::<f64> { cells_per_unit: 4, ..Default::default() };
        let m = generate_two_reservoir_mesh(&g).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        let d = build_dof_map(&m, Some(&tr), None, FieldSelection::STOKES_DARCY).unwrap();
        assert_eq!(d.count(Field::PorousPressure), tr.n_vertices());
        assert_eq!(d.count(Field::PorousPressure), 13);
        // sealed-span interior vertices carry no fluid dofs
        let sealed_vertex = tr.vertices()[6];
        assert!(d.dof(Field::VelocityX, sealed_vertex).is_none());
    }

    #[test]
    fn inconsistent_selection() {
        let m = generate_channel_mesh::<f64>(1.0, 1.0, 2, 2, ChannelTags::default()).unwrap();
        let e = build_dof_map(&m, None, None, FieldSelection::STOKES_DARCY).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        let e = build_dof_map(&m, None, None, FieldSelection::FSI_CONTACT).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn contiguous_disjoint_ranges() {
        let m = generate_channel_mesh::<f64>(2.0, 1.0, 4, 2, ChannelTags::default()).unwrap();
        let layer = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        let wall = extract_trace(&m, tags::ELASTIC_WALL).unwrap();
        let d = build_dof_map(&m, Some(&layer), Some(&wall), FieldSelection::FSI_CONTACT).unwrap();
        let mut end = 0;
        for f in d.fields() {
            let r = d.range(f);
            assert_eq!(r.start, end);
            end = r.end;
        }
        assert_eq!(end, d.n_dofs());
    }
}
