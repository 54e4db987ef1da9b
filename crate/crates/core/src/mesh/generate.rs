use super::{tags, Mesh, Tag, TaggedEdge};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tags assigned to the four sides of a structured channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelTags {
    pub bottom: Tag,
    pub right: Tag,
    pub top: Tag,
    pub left: Tag,
}

impl Default for ChannelTags {
    fn default() -> Self {
        ChannelTags {
            bottom: tags::POROUS_LAYER,
            right: tags::NEUMANN_RIGHT,
            top: tags::ELASTIC_WALL,
            left: tags::NEUMANN_LEFT,
        }
    }
}

struct Grid<T> {
    vertices: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    bottom: Vec<[usize; 2]>,
    right: Vec<[usize; 2]>,
    top: Vec<[usize; 2]>,
    left: Vec<[usize; 2]>,
}

/// Structured `nx` x `ny` grid of `[x0, x0 + lx] x [0, ly]`, vertex
/// `(i, j)` numbered `offset + j (nx + 1) + i`. Each cell is split along its
/// lower-left to upper-right diagonal. Boundary edges are oriented with the
/// domain on their left.
fn structured_grid<T: Scalar>(x0: T, lx: T, ly: T, nx: usize, ny: usize, offset: usize) -> Grid<T> {
    let id = |i: usize, j: usize| offset + j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { x0 + lx } else { x0 + lx * T::of_usize(i) / T::of_usize(nx) };
            let y = if j == ny { ly } else { ly * T::of_usize(j) / T::of_usize(ny) };
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Grid {
        vertices,
        triangles,
        bottom: (0..nx).map(|i| [id(i, 0), id(i + 1, 0)]).collect(),
        right: (0..ny).map(|j| [id(nx, j), id(nx, j + 1)]).collect(),
        top: (0..nx).rev().map(|i| [id(i + 1, ny), id(i, ny)]).collect(),
        left: (0..ny).rev().map(|j| [id(0, j + 1), id(0, j)]).collect(),
    }
}

fn tagged(edges: &[[usize; 2]], tag: Tag) -> impl Iterator<Item = TaggedEdge> + '_ {
    edges.iter().map(move |&vertices| TaggedEdge { vertices, tag })
}

/// Rectangular channel `[0, length] x [0, height]` on an `nx` x `ny` grid.
pub fn generate_channel_mesh<T: Scalar>(
    length: T,
    height: T,
    nx: usize,
    ny: usize,
    tags: ChannelTags,
) -> Result<Mesh<T>> {
    if !(length > T::zero()) || !(height > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "channel dimensions must be positive (length {length}, height {height})"
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!("cell counts must be >= 1 (nx {nx}, ny {ny})")));
    }
    let g = structured_grid(T::zero(), length, height, nx, ny, 0);
    let edges = tagged(&g.bottom, tags.bottom)
        .chain(tagged(&g.right, tags.right))
        .chain(tagged(&g.top, tags.top))
        .chain(tagged(&g.left, tags.left))
        .collect();
    Mesh::new(g.vertices, g.triangles, edges, vec![])
}

/// Axis-aligned reservoir `[x0, x1] x [0, height]` resting on the porous layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect<T> {
    pub x0: T,
    pub x1: T,
    pub height: T,
}

impl<T: Scalar> Rect<T> {
    pub fn width(&self) -> T {
        self.x1 - self.x0
    }
}

/// Two reservoirs connected only through the porous layer on `y = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReservoirGeometry<T> {
    pub left: Rect<T>,
    pub right: Rect<T>,
    /// Cells per unit length in both directions.
    pub cells_per_unit: usize,
}

impl<T: Scalar> Default for ReservoirGeometry<T> {
    fn default() -> Self {
        ReservoirGeometry {
            left: Rect { x0: T::zero(), x1: T::one(), height: T::one() },
            right: Rect { x0: T::of(2.0), x1: T::of(3.0), height: T::one() },
            cells_per_unit: 16,
        }
    }
}

impl<T: Scalar> ReservoirGeometry<T> {
    fn cells(&self, len: T) -> usize {
        let n = (len * T::of_usize(self.cells_per_unit)).round();
        n.to_usize().unwrap_or(0).max(1)
    }

    /// Cell counts `(nx, ny)` of the left and right reservoirs and the number
    /// of sealed segments between them.
    pub fn cell_counts(&self) -> ([usize; 2], [usize; 2], usize) {
        (
            [self.cells(self.left.width()), self.cells(self.left.height)],
            [self.cells(self.right.width()), self.cells(self.right.height)],
            self.cells(self.right.x0 - self.left.x1),
        )
    }

    /// Arc-length windows (trace starts at `left.x0`) of the two reservoirs.
    pub fn windows(&self) -> ([T; 2], [T; 2]) {
        let o = self.left.x0;
        ([T::zero(), self.left.x1 - o], [self.right.x0 - o, self.right.x1 - o])
    }
}

/// Two-reservoir geometry: both rectangles are meshed separately; their
/// bottoms and the sealed span between them carry the porous-layer tag.
/// The left reservoir top is the loaded pressure boundary, the right
/// reservoir top the outflow pressure boundary; the sides are rigid walls.
pub fn generate_two_reservoir_mesh<T: Scalar>(geom: &ReservoirGeometry<T>) -> Result<Mesh<T>> {
    let (l, r) = (geom.left, geom.right);
    for (name, rect) in [("left", l), ("right", r)] {
        if !(rect.width() > T::zero()) || !(rect.height > T::zero()) {
            return Err(Error::InvalidArgument(format!("{name} reservoir has non-positive extent")));
        }
    }
    if geom.cells_per_unit == 0 {
        return Err(Error::InvalidArgument("cells_per_unit must be >= 1".into()));
    }
    if r.x0 < l.x1 {
        return Err(Error::InvalidArgument("reservoir rectangles overlap".into()));
    }
    if !(r.x0 > l.x1) {
        return Err(Error::InvalidArgument(
            "reservoirs must be disconnected (gap between rectangles is zero)".into(),
        ));
    }
    let ([lnx, lny], [rnx, rny], ngap) = geom.cell_counts();

    let a = structured_grid(l.x0, l.width(), l.height, lnx, lny, 0);
    let offset = a.vertices.len();
    let b = structured_grid(r.x0, r.width(), r.height, rnx, rny, offset);

    let mut vertices = a.vertices;
    vertices.extend(b.vertices);
    let mut triangles = a.triangles;
    triangles.extend(b.triangles);

    let mut edges: Vec<TaggedEdge> = Vec::new();
    edges.extend(tagged(&a.bottom, tags::POROUS_LAYER));
    edges.extend(tagged(&a.right, tags::RIGID_WALL));
    edges.extend(tagged(&a.top, tags::NEUMANN_LEFT));
    edges.extend(tagged(&a.left, tags::RIGID_WALL));
    edges.extend(tagged(&b.bottom, tags::POROUS_LAYER));
    edges.extend(tagged(&b.right, tags::RIGID_WALL));
    edges.extend(tagged(&b.top, tags::NEUMANN_RIGHT));
    edges.extend(tagged(&b.left, tags::RIGID_WALL));

    // Sealed span on y = 0 from the left reservoir's bottom-right corner to
    // the right reservoir's bottom-left corner.
    let start = lnx;
    let end = offset;
    let gap = r.x0 - l.x1;
    let mut chain = vec![start];
    for k in 1..ngap {
        vertices.push([l.x1 + gap * T::of_usize(k) / T::of_usize(ngap), T::zero()]);
        chain.push(vertices.len() - 1);
    }
    chain.push(end);
    let sealed = chain
        .windows(2)
        .map(|w| TaggedEdge { vertices: [w[0], w[1]], tag: tags::POROUS_LAYER })
        .collect();

    Mesh::new(vertices, triangles, edges, sealed)
}
