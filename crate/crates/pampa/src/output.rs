//! Field writers: legacy ASCII VTK and CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pampa_core::mesh::{DofLayout, PolyMesh};
use pampa_core::SolutionField;

use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Vtk,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vtk" => Ok(Format::Vtk),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Config(format!("unknown output format `{s}` (vtk, csv)"))),
        }
    }
}

fn vtk_header(s: &mut String, title: &str, points: impl ExactSizeIterator<Item = (f64, f64)>) {
    s.push_str("# vtk DataFile Version 3.0\n");
    writeln!(s, "{title}").unwrap();
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {} double", points.len()).unwrap();
    for (x, y) in points {
        writeln!(s, "{x:?} {y:?} 0").unwrap();
    }
}

fn vtk_arrays<const M: usize>(s: &mut String, names: &[&str], values: &[pampa_core::physics::State<M>]) {
    for (c, name) in names.iter().enumerate() {
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for u in values {
            writeln!(s, "{:?}", u[c]).unwrap();
        }
    }
}

/// Averages on the polygons of the mesh.
pub fn vtk_cells<const M: usize>(mesh: &PolyMesh, field: &SolutionField<M>, names: &[&str]) -> String {
    let mut s = String::new();
    vtk_header(&mut s, "cell averages", mesh.vertices().iter().map(|x| (x.x, x.y)));
    let size: usize = mesh.elements().iter().map(|e| e.nodes.len() + 1).sum();
    writeln!(s, "CELLS {} {size}", mesh.num_elements()).unwrap();
    for el in mesh.elements() {
        write!(s, "{}", el.nodes.len()).unwrap();
        for v in &el.nodes {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "CELL_TYPES {}", mesh.num_elements()).unwrap();
    for _ in mesh.elements() {
        s.push_str("7\n");
    }
    writeln!(s, "CELL_DATA {}", mesh.num_elements()).unwrap();
    vtk_arrays(&mut s, names, &field.averages);
    s
}

/// Point values as a cloud of vertex cells at the DOF positions.
pub fn vtk_points<const M: usize>(layout: &DofLayout, field: &SolutionField<M>, names: &[&str]) -> String {
    let mut s = String::new();
    let pos = layout.positions();
    vtk_header(&mut s, "point values", pos.iter().map(|x| (x.x, x.y)));
    writeln!(s, "CELLS {} {}", pos.len(), 2 * pos.len()).unwrap();
    for i in 0..pos.len() {
        writeln!(s, "1 {i}").unwrap();
    }
    writeln!(s, "CELL_TYPES {}", pos.len()).unwrap();
    for _ in pos {
        s.push_str("1\n");
    }
    writeln!(s, "POINT_DATA {}", pos.len()).unwrap();
    vtk_arrays(&mut s, names, &field.points);
    s
}

/// One CSV row per DOF (`kind = point`) and per element (`kind = average`, at the centroid).
pub fn write_csv<const M: usize, W: std::io::Write>(
    out: W,
    mesh: &PolyMesh,
    layout: &DofLayout,
    field: &SolutionField<M>,
    names: &[&str],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x", "y", "kind"];
    header.extend_from_slice(names);
    w.write_record(&header)?;
    let rows = layout
        .positions()
        .iter()
        .zip(&field.points)
        .map(|(x, u)| (x, "point", u))
        .chain(mesh.elements().iter().zip(&field.averages).map(|(el, u)| (&el.centroid, "average", u)));
    for (x, kind, u) in rows {
        let mut rec = vec![x.x.to_string(), x.y.to_string(), kind.to_string()];
        rec.extend(u.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err("csv"))?;
    Ok(())
}

/// Reads a field written by [`write_csv`].
pub fn read_csv<const M: usize, R: std::io::Read>(input: R) -> Result<SolutionField<M>> {
    let mut r = csv::Reader::from_reader(input);
    let mut field = SolutionField { points: Vec::new(), averages: Vec::new() };
    for rec in r.records() {
        let rec = rec?;
        let value = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("csv row {:?}: bad column {i}", rec.position().map(|p| p.line()))))
        };
        let mut u = pampa_core::physics::State::<M>::zeros();
        for c in 0..M {
            u[c] = value(3 + c)?;
        }
        match rec.get(2) {
            Some("point") => field.points.push(u),
            Some("average") => field.averages.push(u),
            other => return Err(Error::Config(format!("csv: unknown row kind {other:?}"))),
        }
    }
    Ok(field)
}

/// Writes `field` under `dir` with file stem `stem`; returns the files written.
pub fn write_outputs<const M: usize>(
    mesh: &PolyMesh,
    layout: &DofLayout,
    field: &SolutionField<M>,
    names: &[&str],
    dir: &Path,
    stem: &str,
    format: Format,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    match format {
        Format::Vtk => {
            let cells = dir.join(format!("{stem}_averages.vtk"));
            let points = dir.join(format!("{stem}_points.vtk"));
            std::fs::write(&cells, vtk_cells(mesh, field, names)).map_err(io_err(&cells))?;
            std::fs::write(&points, vtk_points(layout, field, names)).map_err(io_err(&points))?;
            Ok(vec![cells, points])
        }
        Format::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let file = std::fs::File::create(&path).map_err(io_err(&path))?;
            write_csv(std::io::BufWriter::new(file), mesh, layout, field, names)?;
            Ok(vec![path])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pampa_core::physics::State;
    use pampa_core::Vec2;

    fn two_triangles() -> PolyMesh {
        PolyMesh::build(
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
            &[],
        )
        .unwrap()
    }

    #[test]
    fn vtk_has_both_cells() {
        let mesh = two_triangles();
        let layout = DofLayout::new(&mesh);
        let field = SolutionField::from_fn(&mesh, &layout, |x| State::<1>::new(x.x));
        let s = vtk_cells(&mesh, &field, &["u"]);
        assert!(s.contains("CELLS 2 8\n3 0 1 2\n3 0 2 3\n"));
        assert!(s.contains("CELL_TYPES 2\n7\n7\n"));
        assert!(s.contains("CELL_DATA 2\nSCALARS u double 1"));
        let p = vtk_points(&layout, &field, &["u"]);
        assert!(p.contains(&format!("POINTS {} double", layout.num_points())));
        assert!(p.contains(&format!("POINT_DATA {}", layout.num_points())));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mesh = two_triangles();
        let layout = DofLayout::new(&mesh);
        let field = SolutionField::from_fn(&mesh, &layout, |x| State::<2>::new((x.x * 7.1).sin() / 3.0, 1e-300 * x.y + 0.1));
        let mut buf = Vec::new();
        write_csv(&mut buf, &mesh, &layout, &field, &["a", "b"]).unwrap();
        let back: SolutionField<2> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, field);
    }
}
