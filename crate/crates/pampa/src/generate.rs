//! Mesh generators on top of the structured grids of the core crate.

use pampa_core::mesh::{PolyMesh, StructuredGrid};
use pampa_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// A structured grid whose interior vertices are moved by up to
/// `amplitude` cell widths in each direction. Boundary vertices stay put, so
/// periodic images still match.
pub fn jittered(grid: &StructuredGrid, amplitude: f64, seed: u64) -> Result<PolyMesh> {
    let (mut vertices, polygons, tags, alias) = grid.topology()?;
    let hx = grid.domain.width() / grid.nx as f64;
    let hy = grid.domain.height() / grid.ny as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nx1 = grid.nx + 1;
    for (v, x) in vertices.iter_mut().enumerate() {
        let (i, j) = (v % nx1, v / nx1);
        // draw for every vertex so the stream does not depend on the boundary layout
        let d = Vec2::new(rng.random_range(-1.0..1.0) * hx, rng.random_range(-1.0..1.0) * hy) * amplitude;
        if i > 0 && i < grid.nx && j > 0 && j < grid.ny {
            *x += d;
        }
    }
    Ok(PolyMesh::build_with_alias(vertices, polygons, &tags, alias)?)
}
