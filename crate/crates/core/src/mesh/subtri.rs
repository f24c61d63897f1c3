use alloc::vec;
use alloc::vec::Vec;

use super::{DofLayout, PolyMesh};
use crate::error::{Error, Result};
use crate::geometry::{outward_scaled_normal, perp, signed_area, Vec2};

/// Fan of triangles `T_i = {sigma_i, y_E, sigma_{i+1}}` around each star point.
///
/// Per-ring arrays share the flattened indexing of [`DofLayout::ring_offset`].
/// The spoke normal of ring entry `i` is the normal of `[y_E, sigma_i]`
/// scaled by its length, pointing from `T_{i-1}` into `T_i`; it is `n_i^{i-1,i}`,
/// and `n_i^{i,i+1}` is its negation.
#[derive(Debug, Clone, PartialEq)]
pub struct SubTriangulation {
    spoke_normals: Vec<Vec2>,
    triangle_areas: Vec<f64>,
    segment_normals: Vec<Vec2>,
    dual_areas: Vec<f64>,
    boundary_normals: Vec<Vec2>,
}

impl SubTriangulation {
    pub fn new(mesh: &PolyMesh, layout: &DofLayout) -> Result<Self> {
        let total = layout.total_ring_len();
        let mut spoke_normals = Vec::with_capacity(total);
        let mut triangle_areas = Vec::with_capacity(total);
        let mut segment_normals = Vec::with_capacity(total);
        let mut dual_areas = vec![0.0; layout.num_points()];
        let mut boundary_normals = vec![Vec2::zeros(); layout.num_points()];

        for (e, el) in mesh.elements().iter().enumerate() {
            let y = el.star_point;
            let pts = layout.ring_points(e);
            let ring = layout.ring(e);
            let n = pts.len();
            let start = triangle_areas.len();
            for i in 0..n {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                let area = signed_area(&y, &a, &b);
                if !(area > 0.0) {
                    return Err(Error::NotStarShaped { element: e });
                }
                triangle_areas.push(area);
                spoke_normals.push(perp(&(a - y)));
                segment_normals.push(outward_scaled_normal(&a, &b));
            }
            for i in 0..n {
                let prev = triangle_areas[start + (i + n - 1) % n];
                dual_areas[ring[i]] += (triangle_areas[start + i] + prev) / 3.0;
            }
            for (k, &f) in el.faces.iter().enumerate() {
                if mesh.faces()[f].is_boundary() {
                    for i in [2 * k, 2 * k + 1] {
                        let s = segment_normals[start + i];
                        boundary_normals[ring[i]] += s;
                        boundary_normals[ring[(i + 1) % n]] += s;
                    }
                }
            }
        }
        Ok(Self {
            spoke_normals,
            triangle_areas,
            segment_normals,
            dual_areas,
            boundary_normals,
        })
    }

    /// Spoke normals of element `e` (see the type docs), indexed by ring position.
    pub fn spoke_normals(&self, layout: &DofLayout, e: usize) -> &[Vec2] {
        let o = layout.ring_offset(e);
        &self.spoke_normals[o..o + layout.ring_len(e)]
    }

    /// Areas of `T_i` for element `e`.
    pub fn triangle_areas(&self, layout: &DofLayout, e: usize) -> &[f64] {
        let o = layout.ring_offset(e);
        &self.triangle_areas[o..o + layout.ring_len(e)]
    }

    /// Outward normals of the boundary segments `[sigma_i, sigma_{i+1}]`, scaled by length.
    pub fn segment_normals(&self, layout: &DofLayout, e: usize) -> &[Vec2] {
        let o = layout.ring_offset(e);
        &self.segment_normals[o..o + layout.ring_len(e)]
    }

    /// `n_sigma = n_sigma^+ + n_sigma^-` for ring position `i` of element `e`:
    /// the sum of the scaled outward normals of the two segments meeting at `sigma_i`.
    pub fn dof_normal(&self, layout: &DofLayout, e: usize, i: usize) -> Vec2 {
        let s = self.segment_normals(layout, e);
        let n = s.len();
        s[(i + n - 1) % n] + s[i]
    }

    /// Dual area `|C_sigma|`.
    pub fn dual_area(&self, dof: usize) -> f64 {
        self.dual_areas[dof]
    }

    pub fn dual_areas(&self) -> &[f64] {
        &self.dual_areas
    }

    /// Sum of scaled outward normals of domain-boundary segments touching `dof`
    /// (zero for interior DOFs).
    pub fn boundary_normal(&self, dof: usize) -> Vec2 {
        self.boundary_normals[dof]
    }

    pub fn is_boundary_dof(&self, dof: usize) -> bool {
        self.boundary_normals[dof] != Vec2::zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{CellKind, Rectangle, StructuredGrid};

    fn build(mesh: &PolyMesh) -> (DofLayout, SubTriangulation) {
        let l = DofLayout::new(mesh);
        let s = SubTriangulation::new(mesh, &l).unwrap();
        (l, s)
    }

    #[test]
    fn equilateral_triangle_has_equal_subtriangles() {
        let h = 3f64.sqrt() / 2.0;
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.5, h)];
        let mesh = PolyMesh::build(v, vec![vec![0, 1, 2]], &[]).unwrap();
        let (l, s) = build(&mesh);
        let areas = s.triangle_areas(&l, 0);
        assert_eq!(areas.len(), 6);
        for a in areas {
            assert!((a - mesh.elements()[0].area / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_square_dual_areas_match_direct_formula() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let mesh = PolyMesh::build(v, vec![vec![0, 1, 2, 3]], &[]).unwrap();
        let (l, s) = build(&mesh);
        // every sub-triangle has base 1/2 and height 1/2
        let expected = (1.0 / 8.0 + 1.0 / 8.0) / 3.0;
        for &d in l.ring(0) {
            assert!((s.dual_area(d) - expected).abs() < 1e-16);
        }
    }

    #[test]
    fn dual_areas_account_for_two_thirds_of_the_domain() {
        let mesh = StructuredGrid::new(5, 4, Rectangle::new(0.0, 2.0, -1.0, 1.0), CellKind::Tri)
            .build()
            .unwrap();
        let (l, s) = build(&mesh);
        // brute force: each sub-triangle gives a third of its area to each of its two ring vertices
        let mut brute = vec![0.0; l.num_points()];
        for e in 0..mesh.num_elements() {
            let pts = l.ring_points(e);
            let y = mesh.elements()[e].star_point;
            let n = pts.len();
            for i in 0..n {
                let a = signed_area(&y, &pts[i], &pts[(i + 1) % n]);
                brute[l.ring(e)[i]] += a / 3.0;
                brute[l.ring(e)[(i + 1) % n]] += a / 3.0;
            }
        }
        for d in 0..l.num_points() {
            assert!((brute[d] - s.dual_area(d)).abs() < 1e-15);
            assert!(s.dual_area(d) > 0.0);
        }
        let total: f64 = s.dual_areas().iter().sum();
        assert!((total - 2.0 / 3.0 * mesh.total_area()).abs() < 1e-13);
    }

    #[test]
    fn spoke_normals_are_opposite_across_each_spoke() {
        let mesh = StructuredGrid::new(3, 3, Rectangle::square(0.0, 1.0), CellKind::Quad)
            .build()
            .unwrap();
        let (l, s) = build(&mesh);
        for e in 0..mesh.num_elements() {
            let y = mesh.elements()[e].star_point;
            let pts = l.ring_points(e);
            let n = pts.len();
            for (i, sn) in s.spoke_normals(&l, e).iter().enumerate() {
                // perpendicular to the spoke, same length, pointing towards sigma_{i+1}
                let d = pts[i] - y;
                assert!(sn.dot(&d).abs() < 1e-15);
                assert!((sn.norm() - d.norm()).abs() < 1e-15);
                assert!(sn.dot(&(pts[(i + 1) % n] - y)) > 0.0);
                assert!(sn.dot(&(pts[(i + n - 1) % n] - y)) < 0.0);
            }
        }
    }

    #[test]
    fn boundary_normals_flag_domain_boundary_only() {
        let grid = StructuredGrid::new(3, 3, Rectangle::square(0.0, 1.0), CellKind::Quad);
        let mesh = grid.build().unwrap();
        let (l, s) = build(&mesh);
        let on_boundary = |p: Vec2| p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
        for d in 0..l.num_points() {
            assert_eq!(s.is_boundary_dof(d), on_boundary(l.position(d)), "dof {d}");
        }
        let periodic = grid.periodic().build().unwrap();
        let (l, s) = build(&periodic);
        assert!((0..l.num_points()).all(|d| !s.is_boundary_dof(d)));
        // the normals n_sigma of all elements around a DOF cancel
        for d in 0..l.num_points() {
            let sum: Vec2 = l.incidence(d).iter().map(|i| s.dof_normal(&l, i.element, i.local)).sum();
            assert!(sum.norm() < 1e-15);
        }
    }
}
