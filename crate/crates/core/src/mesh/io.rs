//! Line-oriented ASCII mesh format.
//!
//! ```text
//! SEEPMESH 1
//! $Nodes
//! n
//! id x y            (n lines, ids 0..n-1)
//! $Triangles
//! m
//! id v0 v1 v2       (m lines)
//! $BoundaryEdges
//! k
//! id v0 v1 tag      (k lines)
//! $SealedEdges      (optional section, same layout as $BoundaryEdges)
//! ```
//!
//! Tokens are whitespace separated and `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{Mesh, TaggedEdge};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate(), last: 0 }
    }

    /// Next non-empty line with comments stripped, as (line number, tokens).
    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<_> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        self.next().ok_or_else(|| Error::Parse {
            line: self.last + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn parse<V: FromStr>(line: usize, tok: &str, what: &str) -> Result<V> {
    tok.parse()
        .map_err(|_| Error::Parse { line, message: format!("invalid {what} '{tok}'") })
}

fn expect_header(lines: &mut Lines<'_>, header: &str) -> Result<usize> {
    let (line, toks) = lines.expect(header)?;
    if toks != [header] {
        return Err(Error::Parse { line, message: format!("expected '{header}', found '{}'", toks.join(" ")) });
    }
    let (line, toks) = lines.expect("entry count")?;
    if toks.len() != 1 {
        return Err(Error::Parse { line, message: "expected a single entry count".into() });
    }
    parse(line, toks[0], "entry count")
}

fn parse_rows<'a, R>(
    lines: &mut Lines<'a>,
    count: usize,
    width: usize,
    what: &str,
    mut f: impl FnMut(usize, &[&'a str]) -> Result<R>,
) -> Result<Vec<R>> {
    let mut rows = Vec::with_capacity(count);
    for expected_id in 0..count {
        let (line, toks) = lines.expect(what)?;
        if toks.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("{what} line needs {width} fields, found {}", toks.len()),
            });
        }
        let id: usize = parse(line, toks[0], "id")?;
        if id != expected_id {
            return Err(Error::Parse {
                line,
                message: format!("{what} ids must be 0..{count} in order; expected {expected_id}, found {id}"),
            });
        }
        rows.push(f(line, &toks[1..])?);
    }
    Ok(rows)
}

fn parse_edges(lines: &mut Lines<'_>, count: usize, what: &str) -> Result<Vec<TaggedEdge>> {
    parse_rows(lines, count, 4, what, |line, t| {
        Ok(TaggedEdge {
            vertices: [parse(line, t[0], "vertex index")?, parse(line, t[1], "vertex index")?],
            tag: parse(line, t[2], "tag")?,
        })
    })
}

/// Parses and validates a mesh from text.
pub fn read_mesh_str<T: Scalar + FromStr>(text: &str) -> Result<Mesh<T>> {
    let mut lines = Lines::new(text);
    let (line, toks) = lines.expect("'SEEPMESH 1'")?;
    if toks != ["SEEPMESH", "1"] {
        return Err(Error::Parse { line, message: "missing 'SEEPMESH 1' header".into() });
    }
    let n = expect_header(&mut lines, "$Nodes")?;
    let vertices = parse_rows(&mut lines, n, 3, "node", |line, t| {
        Ok([parse::<T>(line, t[0], "coordinate")?, parse::<T>(line, t[1], "coordinate")?])
    })?;
    let m = expect_header(&mut lines, "$Triangles")?;
    let triangles = parse_rows(&mut lines, m, 4, "triangle", |line, t| {
        Ok([
            parse(line, t[0], "vertex index")?,
            parse(line, t[1], "vertex index")?,
            parse(line, t[2], "vertex index")?,
        ])
    })?;
    let k = expect_header(&mut lines, "$BoundaryEdges")?;
    let boundary = parse_edges(&mut lines, k, "boundary edge")?;
    let mut sealed = Vec::new();
    if let Some((line, toks)) = lines.next() {
        if toks != ["$SealedEdges"] {
            return Err(Error::Parse { line, message: format!("unexpected content '{}'", toks.join(" ")) });
        }
        let (line, toks) = lines.expect("entry count")?;
        let s: usize = parse(line, toks[0], "entry count")?;
        sealed = parse_edges(&mut lines, s, "sealed edge")?;
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse { line, message: "trailing content after $SealedEdges".into() });
        }
    }
    Mesh::new(vertices, triangles, boundary, sealed)
}

pub fn read_mesh<T: Scalar + FromStr>(path: impl AsRef<Path>) -> Result<Mesh<T>> {
    read_mesh_str(&std::fs::read_to_string(path)?)
}

/// Serializes a mesh; coordinates use the shortest round-trip representation.
pub fn write_mesh_string<T: Scalar>(mesh: &Mesh<T>) -> String {
    let mut s = String::new();
    s.push_str("SEEPMESH 1\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.n_vertices());
    for (i, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{i} {} {}", p[0], p[1]);
    }
    let _ = writeln!(s, "$Triangles\n{}", mesh.n_triangles());
    for (i, t) in mesh.triangles().iter().enumerate() {
        let _ = writeln!(s, "{i} {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "$BoundaryEdges\n{}", mesh.boundary_edges().len());
    for (i, e) in mesh.boundary_edges().iter().enumerate() {
        let _ = writeln!(s, "{i} {} {} {}", e.vertices[0], e.vertices[1], e.tag);
    }
    if !mesh.sealed_edges().is_empty() {
        let _ = writeln!(s, "$SealedEdges\n{}", mesh.sealed_edges().len());
        for (i, e) in mesh.sealed_edges().iter().enumerate() {
            let _ = writeln!(s, "{i} {} {} {}", e.vertices[0], e.vertices[1], e.tag);
        }
    }
    s
}

pub fn write_mesh<T: Scalar>(mesh: &Mesh<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::MeshInvariant;

    const SQUARE: &str = "SEEPMESH 1
# unit square
$Nodes
4
0 0 0
1 1 0
2 1 1
3 0 1
$Triangles
2
0 0 1 2
1 0 2 3   # second
$BoundaryEdges
4
0 0 1 3
1 1 2 2
2 2 3 4
3 3 0 1
";

    #[test]
    fn parses_with_comments() {
        let m: Mesh<f64> = read_mesh_str(SQUARE).unwrap();
        assert_eq!(m.n_triangles(), 2);
        assert_eq!(m.boundary_edges()[0].tag, 3);
    }

    #[test]
    fn bad_token_reports_line() {
        let text = SQUARE.replace("2 1 1\n", "2 1 x\n");
        match read_mesh_str::<f64>(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_area_names_triangle() {
        let text = SQUARE.replace("1 0 2 3   # second", "1 0 3 2");
        match read_mesh_str::<f64>(&text) {
            Err(Error::Validation { invariant: MeshInvariant::Orientation, detail }) => {
                assert!(detail.contains("triangle 1"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn edge_shared_by_three_triangles() {
        let text = "SEEPMESH 1
$Nodes
5
0 0 0
1 1 0
2 0.5 1
3 0.5 -1
4 2 0.5
$Triangles
3
0 0 1 2
1 1 0 3
2 0 1 4
$BoundaryEdges
0
";
        match read_mesh_str::<f64>(text) {
            Err(Error::Validation { invariant: MeshInvariant::NonManifold, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_file() {
        let text: String = SQUARE.lines().take(8).collect::<Vec<_>>().join("\n");
        assert!(matches!(read_mesh_str::<f64>(&text), Err(Error::Parse { .. })));
    }
}
