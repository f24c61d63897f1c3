use alloc::vec::Vec;

use super::PolyMesh;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rectangle {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, lo, hi)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Quad,
    /// Each quad split along its lower-left to upper-right diagonal.
    Tri,
}

/// Tensor-product grid on a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuredGrid {
    pub nx: usize,
    pub ny: usize,
    pub domain: Rectangle,
    pub kind: CellKind,
    pub periodic_x: bool,
    pub periodic_y: bool,
}

impl StructuredGrid {
    pub const TAG_LEFT: u32 = 1;
    pub const TAG_RIGHT: u32 = 2;
    pub const TAG_BOTTOM: u32 = 3;
    pub const TAG_TOP: u32 = 4;

    pub fn new(nx: usize, ny: usize, domain: Rectangle, kind: CellKind) -> Self {
        Self {
            nx,
            ny,
            domain,
            kind,
            periodic_x: false,
            periodic_y: false,
        }
    }

    pub fn periodic(mut self) -> Self {
        self.periodic_x = true;
        self.periodic_y = true;
        self
    }

    fn vertex(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Vertex coordinates, polygon loops, boundary tags and periodic aliases.
    #[allow(clippy::type_complexity)]
    pub fn topology(&self) -> Result<(Vec<Vec2>, Vec<Vec<usize>>, Vec<(usize, usize, u32)>, Vec<usize>)> {
        let d = &self.domain;
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::EmptyDomain("grid needs nx, ny >= 1".into()));
        }
        if !(d.width() > 0.0 && d.height() > 0.0) {
            return Err(Error::EmptyDomain("rectangle has no area".into()));
        }
        if (self.periodic_x && self.nx < 3) || (self.periodic_y && self.ny < 3) {
            return Err(Error::EmptyDomain("periodic directions need at least 3 cells".into()));
        }
        let (nx, ny) = (self.nx, self.ny);
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut alias = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                // exact endpoints so periodic images match bit for bit
                let x = if i == nx { d.x1 } else { d.x0 + d.width() * i as f64 / nx as f64 };
                let y = if j == ny { d.y1 } else { d.y0 + d.height() * j as f64 / ny as f64 };
                vertices.push(Vec2::new(x, y));
                let ii = if self.periodic_x && i == nx { 0 } else { i };
                let jj = if self.periodic_y && j == ny { 0 } else { j };
                alias.push(self.vertex(ii, jj));
            }
        }
        let mut polygons = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, e) = (
                    self.vertex(i, j),
                    self.vertex(i + 1, j),
                    self.vertex(i + 1, j + 1),
                    self.vertex(i, j + 1),
                );
                match self.kind {
                    CellKind::Quad => polygons.push(alloc::vec![a, b, c, e]),
                    CellKind::Tri => {
                        polygons.push(alloc::vec![a, b, c]);
                        polygons.push(alloc::vec![a, c, e]);
                    }
                }
            }
        }
        let mut tags = Vec::new();
        if !self.periodic_y {
            for i in 0..nx {
                tags.push((self.vertex(i, 0), self.vertex(i + 1, 0), Self::TAG_BOTTOM));
                tags.push((self.vertex(i, ny), self.vertex(i + 1, ny), Self::TAG_TOP));
            }
        }
        if !self.periodic_x {
            for j in 0..ny {
                tags.push((self.vertex(0, j), self.vertex(0, j + 1), Self::TAG_LEFT));
                tags.push((self.vertex(nx, j), self.vertex(nx, j + 1), Self::TAG_RIGHT));
            }
        }
        Ok((vertices, polygons, tags, alias))
    }

    pub fn build(&self) -> Result<PolyMesh> {
        let (v, p, t, a) = self.topology()?;
        PolyMesh::build_with_alias(v, p, &t, a)
    }
}
