//! Plain-text mesh format.
//!
//! ```text
//! VERTICES <count>
//! <x> <y>
//! TRIANGLES <count>
//! <a> <b> <c>
//! BOUNDARY <count>
//! <a> <b> <tag>
//! ```
//!
//! Sections appear in this order. Blank lines and lines starting with `#`
//! are ignored. Coordinates are written with 17 significant digits so a
//! write/read cycle reproduces the mesh exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{BoundaryTag, Mesh};
use crate::error::{Error, Result};

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_mesh(mesh))?;
    Ok(())
}

pub fn format_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "VERTICES {}", mesh.vertices().len());
    for [x, y] in mesh.vertices() {
        let _ = writeln!(out, "{x:.16e} {y:.16e}");
    }
    let _ = writeln!(out, "TRIANGLES {}", mesh.triangles().len());
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(out, "{a} {b} {c}");
    }
    let _ = writeln!(out, "BOUNDARY {}", mesh.boundary_edges().len());
    for e in mesh.boundary_edges() {
        let _ = writeln!(out, "{} {} {}", e.vertices[0], e.vertices[1], e.tag);
    }
    out
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    MeshReader::new(path).parse(&text)
}

/// Line-oriented parser; errors carry the 1-based line number.
pub struct MeshReader {
    path: PathBuf,
}

impl MeshReader {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        MeshReader { path: path.into() }
    }

    fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    pub fn parse(&self, text: &str) -> Result<Mesh> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let last_line = text.lines().count();

        let nv = self.header(&mut lines, last_line, "VERTICES")?;
        let mut rows = Vec::with_capacity(nv);
        for _ in 0..nv {
            rows.push(self.record(&mut lines, last_line, 2)?);
        }
        let vertices = rows
            .into_iter()
            .map(|(no, f)| {
                let x = self.number::<f64>(no, f[0])?;
                let y = self.number::<f64>(no, f[1])?;
                Ok([x, y])
            })
            .collect::<Result<Vec<_>>>()?;

        let nt = self.header(&mut lines, last_line, "TRIANGLES")?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (no, f) = self.record(&mut lines, last_line, 3)?;
            let mut tri = [0; 3];
            for (slot, field) in tri.iter_mut().zip(&f) {
                *slot = self.index(no, field, nv)?;
            }
            triangles.push(tri);
        }

        let nb = self.header(&mut lines, last_line, "BOUNDARY")?;
        let mut boundary = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (no, f) = self.record(&mut lines, last_line, 3)?;
            let a = self.index(no, f[0], nv)?;
            let b = self.index(no, f[1], nv)?;
            let tag: BoundaryTag = f[2].parse().map_err(|e: String| self.error(no, e))?;
            boundary.push(([a, b], tag));
        }
        if let Some((no, _)) = lines.next() {
            return Err(self.error(no, "unexpected content after BOUNDARY section"));
        }

        Mesh::new(vertices, triangles, boundary)
    }

    fn header<'a>(
        &self,
        lines: &mut impl Iterator<Item = (usize, &'a str)>,
        last_line: usize,
        name: &str,
    ) -> Result<usize> {
        let (no, line) = lines
            .next()
            .ok_or_else(|| self.error(last_line, format!("missing {name} section")))?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some(name) {
            return Err(self.error(no, format!("expected `{name} <count>`")));
        }
        let count = fields
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| self.error(no, format!("{name} needs a count")))?;
        if fields.next().is_some() {
            return Err(self.error(no, "trailing fields"));
        }
        Ok(count)
    }

    fn record<'a>(
        &self,
        lines: &mut impl Iterator<Item = (usize, &'a str)>,
        last_line: usize,
        width: usize,
    ) -> Result<(usize, Vec<&'a str>)> {
        let (no, line) = lines
            .next()
            .ok_or_else(|| self.error(last_line, "unexpected end of file"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != width {
            return Err(self.error(
                no,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        Ok((no, fields))
    }

    fn number<T: std::str::FromStr>(&self, line: usize, field: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.error(line, format!("cannot parse `{field}`")))
    }

    fn index(&self, line: usize, field: &str, nv: usize) -> Result<usize> {
        let i: usize = self.number(line, field)?;
        if i >= nv {
            return Err(self.error(
                line,
                format!("vertex index {i} out of range for {nv} vertices"),
            ));
        }
        Ok(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_annulus, generate_unit_square};

    #[test]
    fn round_trip_square() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let mesh = generate_unit_square(2).unwrap();
        write_mesh(&mesh, &path).unwrap();
        assert_eq!(read_mesh(&path).unwrap(), mesh);
    }

    #[test]
    fn round_trip_annulus_bit_exact() {
        let mesh = generate_annulus(0.37, 5).unwrap();
        let back = MeshReader::new("mem").parse(&format_mesh(&mesh)).unwrap();
        assert_eq!(back, mesh);
        assert_eq!(format_mesh(&back), format_mesh(&mesh));
    }

    const TINY: &str = "\
VERTICES 4
0 0
1 0
1 1
0 1
TRIANGLES 2
0 1 2
0 2 3
BOUNDARY 4
0 1 RobinAll
1 2 RobinAll
2 3 RobinAll
3 0 RobinAll
";

    fn parse(text: &str) -> Result<Mesh> {
        MeshReader::new("t.txt").parse(text)
    }

    #[test]
    fn parses_minimal_file() {
        let m = parse(TINY).unwrap();
        assert_eq!(m.num_vertices(), 4);
    }

    #[test]
    fn triangle_index_out_of_range_names_line() {
        let bad = TINY.replace("0 2 3", "0 2 7");
        match parse(&bad) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 8);
                assert!(message.contains("out of range"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn boundary_edge_off_mesh_is_topology_error() {
        let bad = TINY
            .replace("BOUNDARY 4", "BOUNDARY 5")
            .replace("3 0 RobinAll\n", "3 0 RobinAll\n0 2 RobinAll\n");
        assert!(matches!(parse(&bad), Err(Error::Topology(_))));

        let text = "VERTICES 5\n0 0\n1 0\n1 1\n0 1\n5 5\nTRIANGLES 2\n0 1 2\n0 2 3\n\
                    BOUNDARY 5\n0 1 RobinAll\n1 2 RobinAll\n2 3 RobinAll\n3 0 RobinAll\n3 4 RobinAll\n";
        let err = parse(text).unwrap_err();
        assert!(err.to_string().contains("not on any triangle"), "{err}");
    }

    #[test]
    fn unknown_tag_rejected() {
        let bad = TINY.replace("2 3 RobinAll", "2 3 Insulated");
        match parse(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sections_must_be_ordered() {
        let bad = "TRIANGLES 0\nVERTICES 0\nBOUNDARY 0\n";
        assert!(matches!(parse(bad), Err(Error::Parse { line: 1, .. })));
    }
}
