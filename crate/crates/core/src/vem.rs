//! Quadratic virtual element space on a polygon: scaled monomials and the
//! energy projector onto `P2`, built from point values and the average only.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::{integrate_triangle, outward_scaled_normal, Vec2, LOBATTO_WEIGHTS};
use crate::mesh::Element;

/// Number of monomials of degree at most two.
pub const NUM_MONOMIALS: usize = 6;

/// Exponents `(a1, a2)`, ordered by degree.
pub const EXPONENTS: [(i32, i32); NUM_MONOMIALS] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// `m_a(x) = ((x - x_P) / h_P)^a` for `|a| <= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonomialBasis {
    pub center: Vec2,
    pub scale: f64,
}

impl MonomialBasis {
    pub fn new(center: Vec2, scale: f64) -> Self {
        Self { center, scale }
    }

    pub fn for_element(el: &Element) -> Self {
        Self::new(el.centroid, el.diameter)
    }

    pub fn eval(&self, x: &Vec2) -> [f64; NUM_MONOMIALS] {
        let s = (x - self.center) / self.scale;
        [1.0, s.x, s.y, s.x * s.x, s.x * s.y, s.y * s.y]
    }

    pub fn grad(&self, x: &Vec2) -> [Vec2; NUM_MONOMIALS] {
        let s = (x - self.center) / self.scale;
        let k = 1.0 / self.scale;
        [
            Vec2::zeros(),
            Vec2::new(k, 0.0),
            Vec2::new(0.0, k),
            Vec2::new(2.0 * s.x * k, 0.0),
            Vec2::new(s.y * k, s.x * k),
            Vec2::new(0.0, 2.0 * s.y * k),
        ]
    }

    /// Laplacians (constant for each monomial).
    pub fn laplacian(&self) -> [f64; NUM_MONOMIALS] {
        let k = 2.0 / (self.scale * self.scale);
        [0.0, 0.0, 0.0, k, 0.0, k]
    }
}

/// Projector `pi` of one element, with its action pre-evaluated at the ring points.
///
/// Local DOFs are the `2 N_V` ring values (in ring order) followed by the average.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementProjector {
    basis: MonomialBasis,
    n_ring: usize,
    /// `coeff[a * n_local + j]`: coefficient of `m_a` in `pi(phi_j)`.
    coeff: Vec<f64>,
    /// `value[i * n_local + j] = pi(phi_j)(x_i)`.
    value: Vec<f64>,
    grad: Vec<Vec2>,
}

impl ElementProjector {
    /// `ring_points` are the Gauss–Lobatto points of `el` in ring order.
    pub fn new(element: usize, el: &Element, ring_points: &[Vec2]) -> Result<Self> {
        let basis = MonomialBasis::for_element(el);
        let n_ring = ring_points.len();
        let n_local = n_ring + 1;
        let y = el.star_point;

        let mut mean = [0.0; NUM_MONOMIALS];
        let mut stiff = [[0.0; NUM_MONOMIALS]; NUM_MONOMIALS];
        for i in 0..n_ring {
            let (a, b) = (ring_points[i], ring_points[(i + 1) % n_ring]);
            let m: SVector<f64, NUM_MONOMIALS> = integrate_triangle(&y, &a, &b, |x| SVector::from(basis.eval(&x)));
            let g: SMatrix<f64, NUM_MONOMIALS, NUM_MONOMIALS> = integrate_triangle(&y, &a, &b, |x| {
                let g = basis.grad(&x);
                SMatrix::from_fn(|r, c| g[r].dot(&g[c]))
            });
            for r in 0..NUM_MONOMIALS {
                mean[r] += m[r] / el.area;
                for c in 0..NUM_MONOMIALS {
                    stiff[r][c] += g[(r, c)];
                }
            }
        }

        let lhs = SMatrix::<f64, NUM_MONOMIALS, NUM_MONOMIALS>::from_fn(|r, c| if r == 0 { mean[c] } else { stiff[r][c] });
        let lu = lhs.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularProjector { element });
        }

        let lap = basis.laplacian();
        let mut rhs = vec![[0.0; NUM_MONOMIALS]; n_local];
        rhs[n_ring][0] = 1.0;
        for (a, l) in lap.iter().enumerate().skip(1) {
            rhs[n_ring][a] = -l * el.area;
        }
        for k in 0..n_ring / 2 {
            let idx = [2 * k, 2 * k + 1, (2 * k + 2) % n_ring];
            let s = outward_scaled_normal(&ring_points[idx[0]], &ring_points[idx[2]]);
            for (q, &j) in idx.iter().enumerate() {
                let g = basis.grad(&ring_points[j]);
                for a in 1..NUM_MONOMIALS {
                    rhs[j][a] += LOBATTO_WEIGHTS[q] * g[a].dot(&s);
                }
            }
        }

        let mut coeff = vec![0.0; NUM_MONOMIALS * n_local];
        for (j, b) in rhs.iter().enumerate() {
            let c = lu.solve(&SVector::<f64, NUM_MONOMIALS>::from(*b)).ok_or(Error::SingularProjector { element })?;
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularProjector { element });
            }
            for a in 0..NUM_MONOMIALS {
                coeff[a * n_local + j] = c[a];
            }
        }

        let mut value = vec![0.0; n_ring * n_local];
        let mut grad = vec![Vec2::zeros(); n_ring * n_local];
        for (i, x) in ring_points.iter().enumerate() {
            let m = basis.eval(x);
            let g = basis.grad(x);
            for j in 0..n_local {
                for a in 0..NUM_MONOMIALS {
                    let c = coeff[a * n_local + j];
                    value[i * n_local + j] += c * m[a];
                    grad[i * n_local + j] += g[a] * c;
                }
            }
        }
        Ok(Self {
            basis,
            n_ring,
            coeff,
            value,
            grad,
        })
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Number of local DOFs, `2 N_V + 1`.
    pub fn num_local(&self) -> usize {
        self.n_ring + 1
    }

    /// Monomial coefficients of `pi u`, component-wise.
    pub fn coefficients<const M: usize>(&self, ring: &[SVector<f64, M>], average: &SVector<f64, M>) -> [SVector<f64, M>; NUM_MONOMIALS] {
        let n = self.num_local();
        core::array::from_fn(|a| {
            let row = &self.coeff[a * n..(a + 1) * n];
            ring.iter().zip(row).fold(average * row[self.n_ring], |acc, (u, c)| acc + u * *c)
        })
    }

    /// `pi u(x)`.
    pub fn evaluate<const M: usize>(&self, ring: &[SVector<f64, M>], average: &SVector<f64, M>, x: &Vec2) -> SVector<f64, M> {
        let c = self.coefficients(ring, average);
        let m = self.basis.eval(x);
        c.iter().zip(m).fold(SVector::zeros(), |acc, (c, m)| acc + c * m)
    }

    /// `(d/dx pi u, d/dy pi u)` at `x`.
    pub fn project_gradient<const M: usize>(
        &self,
        ring: &[SVector<f64, M>],
        average: &SVector<f64, M>,
        x: &Vec2,
    ) -> (SVector<f64, M>, SVector<f64, M>) {
        let c = self.coefficients(ring, average);
        let g = self.basis.grad(x);
        c.iter()
            .zip(g)
            .fold((SVector::zeros(), SVector::zeros()), |(dx, dy), (c, g)| (dx + c * g.x, dy + c * g.y))
    }

    /// Gradient of `pi u` at ring point `i`, from the precomputed tables.
    pub fn ring_gradient<const M: usize>(
        &self,
        ring: &[SVector<f64, M>],
        average: &SVector<f64, M>,
        i: usize,
    ) -> (SVector<f64, M>, SVector<f64, M>) {
        let n = self.num_local();
        let row = &self.grad[i * n..(i + 1) * n];
        let last = row[self.n_ring];
        ring.iter()
            .zip(row)
            .fold((average * last.x, average * last.y), |(dx, dy), (u, g)| (dx + u * g.x, dy + u * g.y))
    }

    /// `pi u` at ring point `i`.
    pub fn ring_value<const M: usize>(&self, ring: &[SVector<f64, M>], average: &SVector<f64, M>, i: usize) -> SVector<f64, M> {
        let n = self.num_local();
        let row = &self.value[i * n..(i + 1) * n];
        ring.iter().zip(row).fold(average * row[self.n_ring], |acc, (u, c)| acc + u * *c)
    }

    /// `dof_i(u - pi u)` for ring DOF `i`. The average DOF of `u - pi u` is zero.
    pub fn defect<const M: usize>(&self, ring: &[SVector<f64, M>], average: &SVector<f64, M>, i: usize) -> SVector<f64, M> {
        ring[i] - self.ring_value(ring, average, i)
    }

    /// Dofi-dofi stabilization tested with `phi_i`:
    /// `sum_xi dof_xi(phi_i - pi phi_i) dof_xi(u - pi u)`.
    pub fn stabilization<const M: usize>(&self, ring: &[SVector<f64, M>], average: &SVector<f64, M>, i: usize) -> SVector<f64, M> {
        let d: Vec<_> = (0..self.n_ring).map(|k| self.defect(ring, average, k)).collect();
        self.stabilization_from_defects(&d, i)
    }

    /// [`Self::stabilization`] for every ring DOF.
    pub fn stabilizations<const M: usize>(&self, ring: &[SVector<f64, M>], average: &SVector<f64, M>) -> Vec<SVector<f64, M>> {
        let d: Vec<_> = (0..self.n_ring).map(|k| self.defect(ring, average, k)).collect();
        (0..self.n_ring).map(|i| self.stabilization_from_defects(&d, i)).collect()
    }

    fn stabilization_from_defects<const M: usize>(&self, d: &[SVector<f64, M>], i: usize) -> SVector<f64, M> {
        let n = self.num_local();
        d.iter()
            .enumerate()
            .fold(d[i], |acc, (k, dk)| acc - dk * self.value[k * n + i])
    }
}

/// Projectors for every element of a mesh.
pub fn build_projectors(mesh: &crate::mesh::PolyMesh, layout: &crate::mesh::DofLayout) -> Result<Vec<ElementProjector>> {
    mesh.elements()
        .iter()
        .enumerate()
        .map(|(e, el)| ElementProjector::new(e, el, layout.ring_points(e)))
        .collect()
}
