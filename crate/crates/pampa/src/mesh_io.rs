//! Plain-text mesh files.
//!
//! ```text
//! # comment
//! vertices <n>
//! <x> <y> [<alias>]          one line per vertex
//! polygons <m>
//! <k> <v_1> ... <v_k>        counter-clockwise
//! boundary <b>
//! <v_a> <v_b> <tag>
//! ```
//!
//! The optional alias column groups vertices that are periodic images of each
//! other. The `boundary` section may be omitted.

use std::fmt::Write as _;
use std::path::Path;

use pampa_core::mesh::{FaceSide, PolyMesh};
use pampa_core::Vec2;

use crate::error::{io_err, Error, Result};

pub fn parse_mesh(text: &str, path: &Path) -> Result<PolyMesh> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let body: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty())
        .collect();
    let mut cursor = body.iter();
    let mut section = |name: &str, required: bool| -> Result<Option<(usize, Vec<&(usize, Vec<&str>)>)>> {
        let Some((n, t)) = cursor.next() else {
            return if required { Err(err(0, format!("missing {name} section"))) } else { Ok(None) };
        };
        if t[0] != name || t.len() != 2 {
            return Err(err(*n, format!("expected `{name} <count>`")));
        }
        let count: usize = t[1].parse().map_err(|_| err(*n, format!("bad {name} count")))?;
        let rows: Vec<_> = cursor.by_ref().take(count).collect();
        if rows.len() != count {
            return Err(err(*n, format!("{name}: expected {count} rows, found {}", rows.len())));
        }
        Ok(Some((*n, rows)))
    };

    let num = |n: usize, s: &str| -> Result<f64> { s.parse().map_err(|_| err(n, format!("not a number: {s}"))) };
    let idx = |n: usize, s: &str| -> Result<usize> { s.parse().map_err(|_| err(n, format!("not an index: {s}"))) };

    let (_, vrows) = section("vertices", true)?.unwrap();
    let mut vertices = Vec::with_capacity(vrows.len());
    let mut alias = Vec::with_capacity(vrows.len());
    for (i, (n, t)) in vrows.iter().enumerate() {
        if t.len() != 2 && t.len() != 3 {
            return Err(err(*n, "vertex needs `x y [alias]`".into()));
        }
        vertices.push(Vec2::new(num(*n, t[0])?, num(*n, t[1])?));
        alias.push(if t.len() == 3 { idx(*n, t[2])? } else { i });
    }
    let (_, prows) = section("polygons", true)?.unwrap();
    let mut polygons = Vec::with_capacity(prows.len());
    for (n, t) in prows {
        let k = idx(*n, t[0])?;
        if t.len() != k + 1 {
            return Err(err(*n, format!("polygon declares {k} vertices, lists {}", t.len() - 1)));
        }
        polygons.push(t[1..].iter().map(|s| idx(*n, s)).collect::<Result<Vec<_>>>()?);
    }
    let mut tags = Vec::new();
    if let Some((_, brows)) = section("boundary", false)? {
        for (n, t) in brows {
            if t.len() != 3 {
                return Err(err(*n, "boundary edge needs `a b tag`".into()));
            }
            let tag = t[2].parse().map_err(|_| err(*n, format!("bad tag {}", t[2])))?;
            tags.push((idx(*n, t[0])?, idx(*n, t[1])?, tag));
        }
    }
    Ok(PolyMesh::build_with_alias(vertices, polygons, &tags, alias)?)
}

pub fn read_mesh(path: &Path) -> Result<PolyMesh> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_mesh(&text, path)
}

/// Serialises `mesh`; coordinates use the shortest representation that reads back exactly.
pub fn format_mesh(mesh: &PolyMesh) -> String {
    let mut s = String::new();
    let nv = mesh.vertices().len();
    writeln!(s, "vertices {nv}").unwrap();
    for (v, x) in mesh.vertices().iter().enumerate() {
        let a = mesh.topological_vertex(v);
        // unreferenced vertices keep their own id
        let a = if a == usize::MAX { v } else { a };
        writeln!(s, "{:?} {:?} {}", x.x, x.y, a).unwrap();
    }
    writeln!(s, "polygons {}", mesh.num_elements()).unwrap();
    for el in mesh.elements() {
        write!(s, "{}", el.nodes.len()).unwrap();
        for v in &el.nodes {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    let boundary: Vec<_> = mesh
        .faces()
        .iter()
        .filter_map(|f| match f.right {
            FaceSide::Boundary { tag } => Some((f.nodes, tag)),
            FaceSide::Element { .. } => None,
        })
        .collect();
    writeln!(s, "boundary {}", boundary.len()).unwrap();
    for ([a, b], tag) in boundary {
        writeln!(s, "{a} {b} {tag}").unwrap();
    }
    s
}

pub fn write_mesh(mesh: &PolyMesh, path: &Path) -> Result<()> {
    std::fs::write(path, format_mesh(mesh)).map_err(io_err(path))
}
