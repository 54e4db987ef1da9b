use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::fem::{DofMap, Field};
use crate::mesh::{Mesh, TraceMesh};
use crate::scalar::Scalar;
use crate::stokes_darcy::CoupledState;

fn header(out: &mut String, title: &str, dataset: &str) {
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(title);
    out.push_str("\nASCII\n");
    let _ = writeln!(out, "DATASET {dataset}");
}

fn scalars(out: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(out, "{v:.16e}");
    }
}

/// Fluid snapshot: triangles (cell type 5) with point velocity and pressure.
/// Vertices without fluid dofs get zeros.
pub fn fluid_vtk<T: Scalar>(mesh: &Mesh<T>, dofmap: &DofMap, state: &CoupledState<T>) -> String {
    let x = state.to_vector(dofmap);
    let value = |f: Field, v: usize| dofmap.dof(f, v).map_or(0.0, |i| x[i].as_f64());
    let mut out = String::new();
    header(&mut out, &format!("seepage fluid t={:.16e}", state.time.as_f64()), "UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {} double", mesh.n_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{:.16e} {:.16e} 0", p[0].as_f64(), p[1].as_f64());
    }
    let nt = mesh.n_triangles();
    let _ = writeln!(out, "CELLS {nt} {}", 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {nt}");
    for _ in 0..nt {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "POINT_DATA {}", mesh.n_vertices());
    out.push_str("VECTORS velocity double\n");
    for v in 0..mesh.n_vertices() {
        let _ = writeln!(out, "{:.16e} {:.16e} 0", value(Field::VelocityX, v), value(Field::VelocityY, v));
    }
    scalars(&mut out, "pressure", (0..mesh.n_vertices()).map(|v| value(Field::Pressure, v)));
    out
}

/// Polyline through the trace vertices carrying one point field.
pub fn trace_vtk<T: Scalar>(mesh: &Mesh<T>, trace: &TraceMesh<T>, time: T, name: &str, values: &[T]) -> String {
    let n = trace.n_vertices();
    let mut out = String::new();
    header(&mut out, &format!("seepage {name} t={:.16e}", time.as_f64()), "POLYDATA");
    let _ = writeln!(out, "POINTS {n} double");
    for &v in trace.vertices() {
        let p = mesh.vertices()[v];
        let _ = writeln!(out, "{:.16e} {:.16e} 0", p[0].as_f64(), p[1].as_f64());
    }
    let _ = write!(out, "LINES 1 {}\n{n}", n + 1);
    for k in 0..n {
        let _ = write!(out, " {k}");
    }
    let _ = writeln!(out, "\nPOINT_DATA {n}");
    scalars(&mut out, name, values.iter().map(|v| v.as_f64()));
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

/// CSV time series; every row is flushed as soon as it is written.
pub struct CsvSeries {
    out: BufWriter<File>,
    columns: usize,
}

impl CsvSeries {
    pub fn create(path: &Path, columns: &[&str]) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", columns.join(","))?;
        out.flush()?;
        Ok(CsvSeries { out, columns: columns.len() })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        assert_eq!(values.len(), self.columns, "CSV row width");
        let line: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(self.out, "{}", line.join(","))?;
        self.out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_dof_map, FieldSelection};
    use crate::mesh::{extract_trace, generate_channel_mesh, tags, ChannelTags};

    #[test]
    fn fluid_file_layout() {
        let m = generate_channel_mesh::<f64>(1.0, 1.0, 2, 1, ChannelTags::default()).unwrap();
        let d = build_dof_map(&m, None, None, FieldSelection::STOKES).unwrap();
        let s = CoupledState::zeros(&d);
        let text = fluid_vtk(&m, &d, &s);
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(text.contains("DATASET UNSTRUCTURED_GRID\nPOINTS 6 double"));
        assert!(text.contains("CELLS 4 16"));
        assert!(text.contains("CELL_TYPES 4\n5\n5\n5\n5\n"));
        assert!(text.contains("VECTORS velocity double"));
        assert!(text.contains("SCALARS pressure double 1"));
    }

    #[test]
    fn polyline_layout() {
        let m = generate_channel_mesh::<f64>(1.0, 1.0, 3, 1, ChannelTags::default()).unwrap();
        let tr = extract_trace(&m, tags::POROUS_LAYER).unwrap();
        let text = trace_vtk(&m, &tr, 0.0, "porous_pressure", &[1.0, 2.0, 3.0, 4.0]);
        assert!(text.contains("LINES 1 5\n4 0 1 2 3\n"));
        assert!(text.contains("SCALARS porous_pressure double 1"));
        assert!(text.contains("4.0000000000000000e0"));
    }

    #[test]
    fn csv_rows_use_seventeen_digits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut c = CsvSeries::create(&path, &["t", "a"]).unwrap();
        c.row(&[0.1, 1.0 / 3.0]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "t,a\n1.0000000000000001e-1,3.3333333333333331e-1\n");
    }
}
