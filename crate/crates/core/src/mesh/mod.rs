//! Polygonal meshes: topology, geometric quantities, point-DOF layout and the
//! star-point sub-triangulation used by the low-order point residual.
//!
//! Polygons are stored counter-clockwise. A mesh may be periodic: every
//! geometric vertex then carries an alias (its topological id), and elements
//! keep their own unwrapped coordinates, so the geometry of an element never
//! sees the wrap.

mod dofs;
mod structured;
mod subtri;

pub use dofs::{DofLayout, Incidence};
pub use structured::{CellKind, Rectangle, StructuredGrid};
pub use subtri::SubTriangulation;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{diameter, outward_scaled_normal, polygon_area_centroid, signed_area, Vec2};

/// Boundary tag used for boundary edges that were not tagged explicitly.
pub const DEFAULT_BOUNDARY_TAG: u32 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    /// Geometric vertex indices, counter-clockwise.
    pub nodes: Vec<usize>,
    /// `faces[k]` is the face joining `nodes[k]` and `nodes[k + 1]`.
    pub faces: Vec<usize>,
    pub centroid: Vec2,
    /// Point with respect to which the polygon is star-shaped (the centroid).
    pub star_point: Vec2,
    pub area: f64,
    pub diameter: f64,
}

impl Element {
    pub fn num_vertices(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceSide {
    Element { element: usize, edge: usize },
    Boundary { tag: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Geometric vertices in the orientation of the left element.
    pub nodes: [usize; 2],
    pub left: usize,
    pub left_edge: usize,
    pub right: FaceSide,
    /// Unit normal pointing from the left element to the right side.
    pub normal: Vec2,
    pub length: f64,
    /// Midpoint in the coordinates of the left element.
    pub midpoint: Vec2,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        matches!(self.right, FaceSide::Boundary { .. })
    }

    /// The element across the face, if any.
    pub fn right_element(&self) -> Option<usize> {
        match self.right {
            FaceSide::Element { element, .. } => Some(element),
            FaceSide::Boundary { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    vertices: Vec<Vec2>,
    alias: Vec<usize>,
    num_topological_vertices: usize,
    elements: Vec<Element>,
    faces: Vec<Face>,
}

impl PolyMesh {
    /// Builds a mesh from vertex coordinates, counter-clockwise polygon loops
    /// and tags for boundary edges given as `(v0, v1, tag)` (either orientation).
    /// Boundary edges without a tag get [`DEFAULT_BOUNDARY_TAG`].
    pub fn build(vertices: Vec<Vec2>, polygons: Vec<Vec<usize>>, boundary_tags: &[(usize, usize, u32)]) -> Result<Self> {
        let alias = (0..vertices.len()).collect();
        Self::build_with_alias(vertices, polygons, boundary_tags, alias)
    }

    /// Like [`PolyMesh::build`], with `alias[v]` identifying geometric vertices
    /// that are the same topological vertex (periodic images).
    pub fn build_with_alias(
        vertices: Vec<Vec2>,
        polygons: Vec<Vec<usize>>,
        boundary_tags: &[(usize, usize, u32)],
        alias: Vec<usize>,
    ) -> Result<Self> {
        if polygons.is_empty() {
            return Err(Error::EmptyDomain("no polygons".into()));
        }
        assert_eq!(alias.len(), vertices.len(), "alias must cover every vertex");

        // compress topological ids to 0..n, keeping only referenced vertices
        let mut topo_id = BTreeMap::new();
        for (e, poly) in polygons.iter().enumerate() {
            if poly.len() < 3 {
                return Err(Error::TooFewVertices { element: e });
            }
            for &v in poly {
                if v >= vertices.len() {
                    return Err(Error::InvalidIndex { element: e, index: v });
                }
                let next = topo_id.len();
                topo_id.entry(alias[v]).or_insert(next);
            }
        }
        let alias: Vec<usize> = alias
            .iter()
            .map(|a| topo_id.get(a).copied().unwrap_or(usize::MAX))
            .collect();
        let num_topological_vertices = topo_id.len();

        let mut elements = Vec::with_capacity(polygons.len());
        let mut faces: Vec<Face> = Vec::new();
        let mut edge_map: BTreeMap<(usize, usize), usize> = BTreeMap::new();

        for (e, nodes) in polygons.into_iter().enumerate() {
            let pts: Vec<Vec2> = nodes.iter().map(|&v| vertices[v]).collect();
            let (area, centroid) = polygon_area_centroid(&pts);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement { element: e, area });
            }
            let n = nodes.len();
            for k in 0..n {
                let t = signed_area(&centroid, &pts[k], &pts[(k + 1) % n]);
                if !(t > 1e-14 * area) {
                    return Err(Error::NotStarShaped { element: e });
                }
            }
            let mut elem_faces = Vec::with_capacity(n);
            for k in 0..n {
                let (a, b) = (nodes[k], nodes[(k + 1) % n]);
                let (ta, tb) = (alias[a], alias[b]);
                if ta == tb {
                    return Err(Error::DegenerateElement { element: e, area: 0.0 });
                }
                let key = (ta.min(tb), ta.max(tb));
                match edge_map.get(&key) {
                    None => {
                        let (pa, pb) = (pts[k], pts[(k + 1) % n]);
                        let scaled = outward_scaled_normal(&pa, &pb);
                        let length = scaled.norm();
                        edge_map.insert(key, faces.len());
                        elem_faces.push(faces.len());
                        faces.push(Face {
                            nodes: [a, b],
                            left: e,
                            left_edge: k,
                            right: FaceSide::Boundary { tag: DEFAULT_BOUNDARY_TAG },
                            normal: scaled / length,
                            length,
                            midpoint: (pa + pb) * 0.5,
                        });
                    }
                    Some(&f) => {
                        let face = &mut faces[f];
                        let reversed = alias[face.nodes[0]] == tb && alias[face.nodes[1]] == ta;
                        if !matches!(face.right, FaceSide::Boundary { .. }) || !reversed || face.left == e {
                            return Err(Error::NonManifoldEdge { a: ta, b: tb });
                        }
                        face.right = FaceSide::Element { element: e, edge: k };
                        elem_faces.push(f);
                    }
                }
            }
            elements.push(Element {
                diameter: diameter(&pts),
                nodes,
                faces: elem_faces,
                centroid,
                star_point: centroid,
                area,
            });
        }

        for &(a, b, tag) in boundary_tags {
            if a >= alias.len() || b >= alias.len() {
                return Err(Error::DanglingFace { a, b });
            }
            let (ta, tb) = (alias[a], alias[b]);
            let key = (ta.min(tb), ta.max(tb));
            match edge_map.get(&key) {
                Some(&f) if faces[f].is_boundary() => faces[f].right = FaceSide::Boundary { tag },
                _ => return Err(Error::DanglingFace { a, b }),
            }
        }

        Ok(Self {
            vertices,
            alias,
            num_topological_vertices,
            elements,
            faces,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Topological id of a geometric vertex.
    pub fn topological_vertex(&self, v: usize) -> usize {
        self.alias[v]
    }

    pub fn num_topological_vertices(&self) -> usize {
        self.num_topological_vertices
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn element_points(&self, e: usize) -> impl Iterator<Item = Vec2> + '_ {
        self.elements[e].nodes.iter().map(move |&v| self.vertices[v])
    }

    /// Whether element `e` is the left element of its `k`-th face.
    pub fn is_left(&self, e: usize, k: usize) -> bool {
        let f = &self.faces[self.elements[e].faces[k]];
        f.left == e && f.left_edge == k
    }

    /// `sum_f |f| n_f` with normals pointing out of `e`.
    pub fn closure_defect(&self, e: usize) -> Vec2 {
        let el = &self.elements[e];
        let mut s = Vec2::zeros();
        for (k, &f) in el.faces.iter().enumerate() {
            let face = &self.faces[f];
            let sign = if self.is_left(e, k) { 1.0 } else { -1.0 };
            s += face.normal * (face.length * sign);
        }
        s
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }
}
