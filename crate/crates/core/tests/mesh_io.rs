use std::collections::BTreeSet;

use seepage::cli::{scenario_mesh, ScenarioKind};
use seepage::mesh::{read_mesh, read_mesh_str, write_mesh, write_mesh_string, Mesh};

fn euler_per_component(m: &Mesh<f64>) -> Vec<i64> {
    let (comp, n) = m.triangle_components();
    let mut out = Vec::new();
    for c in 0..n {
        let tris: Vec<[usize; 3]> = m.triangles().iter().zip(&comp).filter(|(_, &k)| k == c).map(|(t, _)| *t).collect();
        let verts: BTreeSet<usize> = tris.iter().flatten().copied().collect();
        let edges: BTreeSet<(usize, usize)> = tris
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i].min(t[(i + 1) % 3]), t[i].max(t[(i + 1) % 3]))))
            .collect();
        out.push(verts.len() as i64 - edges.len() as i64 + tris.len() as i64);
    }
    out
}

#[test]
fn default_meshes_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [ScenarioKind::TwoReservoir, ScenarioKind::ChannelContact] {
        let m = scenario_mesh(kind).unwrap();
        let text = write_mesh_string(&m);
        let back: Mesh<f64> = read_mesh_str(&text).unwrap();
        assert_eq!(back, m);
        let path = dir.path().join(format!("{}.seepmesh", kind.name()));
        write_mesh(&m, &path).unwrap();
        assert_eq!(read_mesh::<f64>(&path).unwrap(), m);
        assert_eq!(write_mesh_string(&back), text);
    }
}

#[test]
fn each_component_is_a_disk() {
    let reservoirs = scenario_mesh(ScenarioKind::TwoReservoir).unwrap();
    assert_eq!(euler_per_component(&reservoirs), vec![1, 1]);
    let channel = scenario_mesh(ScenarioKind::ChannelContact).unwrap();
    assert_eq!(euler_per_component(&channel), vec![1]);
    assert_eq!(channel.edges().len(), 41 * 4 + 40 * 5 + 160);
}

#[test]
fn reservoir_triangle_count_matches_area() {
    let m = scenario_mesh(ScenarioKind::TwoReservoir).unwrap();
    // two unit squares at 16 cells per unit, two triangles per cell
    assert_eq!(m.n_triangles(), 2 * 2 * 16 * 16);
    let area: f64 = (0..m.n_triangles()).map(|t| m.signed_area(t)).sum();
    assert!((area - 2.0).abs() < 1e-12);
}
