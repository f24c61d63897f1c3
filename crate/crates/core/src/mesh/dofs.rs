use alloc::vec;
use alloc::vec::Vec;

use super::PolyMesh;
use crate::geometry::Vec2;

/// One occurrence of a point DOF on an element boundary ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub element: usize,
    /// Position in the element's ring.
    pub local: usize,
}

/// Global numbering of the Gauss–Lobatto point values and per-element rings.
///
/// Vertex DOFs come first (one per topological vertex), followed by one
/// midpoint DOF per face. Each element ring lists `2 N_V` DOFs
/// counter-clockwise, starting at its first vertex: `v0, m0, v1, m1, ...`.
/// The average DOF of element `e` is simply `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    num_vertex_dofs: usize,
    num_points: usize,
    ring_offsets: Vec<usize>,
    ring_dofs: Vec<usize>,
    ring_points: Vec<Vec2>,
    positions: Vec<Vec2>,
    incidence_offsets: Vec<usize>,
    incidence: Vec<Incidence>,
    face_dofs: Vec<[usize; 3]>,
    face_points: Vec<[Vec2; 3]>,
}

impl DofLayout {
    pub fn new(mesh: &PolyMesh) -> Self {
        let nv = mesh.num_topological_vertices();
        let num_points = nv + mesh.num_faces();
        let vertex_dof = |v: usize| mesh.topological_vertex(v);
        let midpoint_dof = |f: usize| nv + f;

        let mut ring_offsets = Vec::with_capacity(mesh.num_elements() + 1);
        let mut ring_dofs = Vec::new();
        let mut ring_points = Vec::new();
        ring_offsets.push(0);
        for el in mesh.elements() {
            let n = el.num_vertices();
            let pts: Vec<Vec2> = el.nodes.iter().map(|&v| mesh.vertices()[v]).collect();
            for k in 0..n {
                ring_dofs.push(vertex_dof(el.nodes[k]));
                ring_points.push(pts[k]);
                ring_dofs.push(midpoint_dof(el.faces[k]));
                ring_points.push((pts[k] + pts[(k + 1) % n]) * 0.5);
            }
            ring_offsets.push(ring_dofs.len());
        }

        let mut positions = vec![Vec2::zeros(); num_points];
        let mut seen = vec![false; nv];
        for (v, p) in mesh.vertices().iter().enumerate() {
            let t = mesh.topological_vertex(v);
            if t != usize::MAX && !seen[t] {
                seen[t] = true;
                positions[t] = *p;
            }
        }
        let mut face_dofs = Vec::with_capacity(mesh.num_faces());
        let mut face_points = Vec::with_capacity(mesh.num_faces());
        for (f, face) in mesh.faces().iter().enumerate() {
            positions[midpoint_dof(f)] = face.midpoint;
            let [a, b] = face.nodes;
            face_dofs.push([vertex_dof(a), midpoint_dof(f), vertex_dof(b)]);
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            face_points.push([pa, face.midpoint, pb]);
        }

        // counting sort by DOF; elements are visited in order, so each list is sorted by element
        let mut counts = vec![0usize; num_points + 1];
        for &d in &ring_dofs {
            counts[d + 1] += 1;
        }
        for i in 0..num_points {
            counts[i + 1] += counts[i];
        }
        let incidence_offsets = counts.clone();
        let mut incidence = vec![Incidence { element: 0, local: 0 }; ring_dofs.len()];
        let mut cursor = counts;
        for e in 0..mesh.num_elements() {
            for local in 0..(ring_offsets[e + 1] - ring_offsets[e]) {
                let d = ring_dofs[ring_offsets[e] + local];
                incidence[cursor[d]] = Incidence { element: e, local };
                cursor[d] += 1;
            }
        }

        Self {
            num_vertex_dofs: nv,
            num_points,
            ring_offsets,
            ring_dofs,
            ring_points,
            positions,
            incidence_offsets,
            incidence,
            face_dofs,
            face_points,
        }
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_vertex_dofs(&self) -> usize {
        self.num_vertex_dofs
    }

    pub fn num_elements(&self) -> usize {
        self.ring_offsets.len() - 1
    }

    /// Index of the first ring entry of element `e` in flattened per-ring arrays.
    pub fn ring_offset(&self, e: usize) -> usize {
        self.ring_offsets[e]
    }

    pub fn ring_len(&self, e: usize) -> usize {
        self.ring_offsets[e + 1] - self.ring_offsets[e]
    }

    pub fn total_ring_len(&self) -> usize {
        self.ring_dofs.len()
    }

    /// Boundary DOF ring `sigma_0 .. sigma_{N_P - 1}` of element `e`.
    pub fn ring(&self, e: usize) -> &[usize] {
        &self.ring_dofs[self.ring_offsets[e]..self.ring_offsets[e + 1]]
    }

    /// Ring DOF positions in the element's own coordinates.
    pub fn ring_points(&self, e: usize) -> &[Vec2] {
        &self.ring_points[self.ring_offsets[e]..self.ring_offsets[e + 1]]
    }

    /// Cyclic access: `ring_dof(e, -1) == ring_dof(e, N_P - 1)`.
    pub fn ring_dof(&self, e: usize, i: isize) -> usize {
        let n = self.ring_len(e) as isize;
        self.ring(e)[i.rem_euclid(n) as usize]
    }

    /// Number of local DOFs of element `e` (boundary ring plus the average).
    pub fn local_dofs(&self, e: usize) -> usize {
        self.ring_len(e) + 1
    }

    /// Representative position of a point DOF.
    pub fn position(&self, dof: usize) -> Vec2 {
        self.positions[dof]
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    /// Elements containing point DOF `dof`, ordered by element index.
    pub fn incidence(&self, dof: usize) -> &[Incidence] {
        &self.incidence[self.incidence_offsets[dof]..self.incidence_offsets[dof + 1]]
    }

    /// The three Gauss–Lobatto DOFs of face `f`, in the left element's orientation.
    pub fn face_dofs(&self, f: usize) -> [usize; 3] {
        self.face_dofs[f]
    }

    /// Positions of the face DOFs in the left element's coordinates.
    pub fn face_points(&self, f: usize) -> [Vec2; 3] {
        self.face_points[f]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{CellKind, Rectangle, StructuredGrid};

    fn hexagon() -> PolyMesh {
        let v = (0..6)
            .map(|k| {
                let t = core::f64::consts::PI / 3.0 * k as f64;
                Vec2::new(libm::cos(t), libm::sin(t))
            })
            .collect();
        PolyMesh::build(v, vec![(0..6).collect()], &[]).unwrap()
    }

    #[test]
    fn single_triangle() {
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let mesh = PolyMesh::build(v, vec![vec![0, 1, 2]], &[]).unwrap();
        let l = DofLayout::new(&mesh);
        assert_eq!(l.num_points(), 6);
        assert_eq!(l.local_dofs(0), 7);
    }

    #[test]
    fn two_triangles_share_an_edge() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let mesh = PolyMesh::build(v, vec![vec![0, 1, 2], vec![0, 2, 3]], &[]).unwrap();
        let l = DofLayout::new(&mesh);
        assert_eq!(l.num_points(), 9);
        let shared: Vec<_> = l.ring(0).iter().filter(|d| l.ring(1).contains(d)).collect();
        assert_eq!(shared.len(), 3);
    }

    #[test]
    fn hexagon_dofs() {
        let l = DofLayout::new(&hexagon());
        assert_eq!(l.num_points(), 12);
        assert_eq!(l.local_dofs(0), 13);
        assert_eq!(l.ring_dof(0, -1), l.ring(0)[11]);
        assert_eq!(l.ring_dof(0, 12), l.ring(0)[0]);
    }

    #[test]
    fn shared_faces_have_identical_dofs() {
        let mesh = StructuredGrid::new(4, 3, Rectangle::square(0.0, 1.0), CellKind::Tri)
            .periodic()
            .build()
            .unwrap();
        let l = DofLayout::new(&mesh);
        for (f, face) in mesh.faces().iter().enumerate() {
            let [a, m, b] = l.face_dofs(f);
            let right = face.right_element().unwrap();
            let ring = l.ring(right);
            let n = ring.len();
            let pos = ring.iter().position(|&d| d == m).unwrap();
            // seen from the right element the face runs b -> m -> a
            assert_eq!(ring[(pos + n - 1) % n], b);
            assert_eq!(ring[(pos + 1) % n], a);
            let lring = l.ring(face.left);
            let lpos = lring.iter().position(|&d| d == m).unwrap();
            assert_eq!(lring[(lpos + n - 1) % n], a);
        }
        for d in 0..l.num_points() {
            let inc = l.incidence(d);
            assert!(inc.windows(2).all(|w| w[0].element < w[1].element));
            for i in inc {
                assert_eq!(l.ring(i.element)[i.local], d);
            }
        }
    }
}
