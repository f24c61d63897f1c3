use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{integrate_triangle, Vec2};
use crate::mesh::{DofLayout, PolyMesh};
use crate::physics::State;

/// Point values at every Gauss–Lobatto DOF and one average per element.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField<const M: usize> {
    pub points: Vec<State<M>>,
    pub averages: Vec<State<M>>,
}

impl<const M: usize> SolutionField<M> {
    pub fn constant(layout: &DofLayout, u: State<M>) -> Self {
        Self {
            points: vec![u; layout.num_points()],
            averages: vec![u; layout.num_elements()],
        }
    }

    /// Samples `f` at the DOFs; averages use the degree-4 rule on the fan
    /// of triangles joining the star point to consecutive ring points.
    pub fn from_fn(mesh: &PolyMesh, layout: &DofLayout, f: impl Fn(&Vec2) -> State<M>) -> Self {
        let points = layout.positions().iter().map(&f).collect();
        let averages = mesh
            .elements()
            .iter()
            .enumerate()
            .map(|(e, el)| {
                let pts = layout.ring_points(e);
                let n = pts.len();
                let total = (0..n).fold(State::<M>::zeros(), |acc, k| {
                    acc + integrate_triangle(&el.star_point, &pts[k], &pts[(k + 1) % n], |x| f(&x))
                });
                total / el.area
            })
            .collect();
        Self { points, averages }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mix = |x: &[State<M>], y: &[State<M>]| x.iter().zip(y).map(|(x, y)| x * a + y * b).collect();
        Self {
            points: mix(&self.points, &other.points),
            averages: mix(&self.averages, &other.averages),
        }
    }

    /// `sum_E |E| u_E`.
    pub fn mass(&self, mesh: &PolyMesh) -> State<M> {
        self.averages
            .iter()
            .zip(mesh.elements())
            .fold(State::zeros(), |acc, (u, el)| acc + u * el.area)
    }

    pub fn states(&self) -> impl Iterator<Item = &State<M>> {
        self.points.iter().chain(&self.averages)
    }

    /// Componentwise minimum and maximum over points and averages.
    pub fn extrema(&self) -> (State<M>, State<M>) {
        self.states().fold(
            (State::repeat(f64::INFINITY), State::repeat(f64::NEG_INFINITY)),
            |(lo, hi), u| (lo.inf(u), hi.sup(u)),
        )
    }
}
