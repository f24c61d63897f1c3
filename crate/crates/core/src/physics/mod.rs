//! Conservation-law models: fluxes, Jacobians, wave-speed bounds and
//! invariant domains.

mod euler;
mod scalar;

pub use euler::{gql_psi, internal_energy as euler_internal_energy, Euler, EulerDomain, Primitive, SpeedEstimate};
pub use scalar::{Advection, Bounds, Burgers, VelocityField};

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub type State<const M: usize> = SVector<f64, M>;
pub type Mat<const M: usize> = SMatrix<f64, M, M>;

/// Diagonalisation `K = right * diag(values) * left` with `left = right^-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen<const M: usize> {
    pub right: Mat<M>,
    pub values: State<M>,
    pub left: Mat<M>,
}

impl<const M: usize> Eigen<M> {
    /// `right * diag(g(values)) * left`.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Mat<M> {
        let d = Mat::<M>::from_diagonal(&self.values.map(g));
        self.right * d * self.left
    }
}

/// `(|l| + |l|_delta) / 2` with Harten's smoothing of `|l|` below `delta`.
pub fn regularized_positive(l: f64, delta: f64) -> f64 {
    let a = if l.abs() >= delta || delta <= 0.0 {
        l.abs()
    } else {
        (l * l + delta * delta) / (2.0 * delta)
    };
    0.5 * (l + a)
}

/// A hyperbolic system with `M` conserved variables.
///
/// Every quantity that may depend on position takes the point `x` at which
/// the model coefficients are evaluated. Normals passed to `jacobian_normal`,
/// `eigen_normal` and `max_speed` need not be unit vectors; results scale with `|n|`.
pub trait Model<const M: usize>: Sync {
    /// Admissible set used by the limiter.
    type Domain: Clone + core::fmt::Debug + Sync;

    /// `(f_x(u), f_y(u))`.
    fn flux(&self, u: &State<M>, x: &Vec2) -> Result<[State<M>; 2]>;

    fn jacobian_normal(&self, u: &State<M>, x: &Vec2, n: &Vec2) -> Result<Mat<M>>;

    fn eigen_normal(&self, u: &State<M>, x: &Vec2, n: &Vec2) -> Result<Eigen<M>>;

    /// Upper bound of the wave speeds of the Riemann problem `(ul, ur)` along `n`.
    fn max_speed(&self, ul: &State<M>, ur: &State<M>, x: &Vec2, n: &Vec2) -> Result<f64>;

    /// Largest `|eigenvalue|` of `J(u) n` over unit `n`.
    fn spectral_radius(&self, u: &State<M>, x: &Vec2) -> Result<f64>;

    /// Invariant domain built from initial data.
    fn domain(&self, states: &[State<M>]) -> Self::Domain;

    /// Membership in the domain (bounds with round-off slack, or strict positivity).
    fn contains(&self, domain: &Self::Domain, u: &State<M>) -> bool;

    /// Largest `theta` in `[0, 1]` such that `ustar - theta / scale * delta` stays in the domain.
    fn theta(&self, domain: &Self::Domain, ustar: &State<M>, delta: &State<M>, scale: f64) -> Result<f64>;

    /// Largest [`Model::max_speed`] between `center` and each `(u, x, n)`, in both orders.
    fn fan_speed<'a>(&self, center: &State<M>, ring: impl Iterator<Item = (&'a State<M>, Vec2, Vec2)>) -> Result<f64> {
        let mut alpha = 0.0f64;
        for (u, x, n) in ring {
            alpha = alpha.max(self.max_speed(center, u, &x, &n)?).max(self.max_speed(u, center, &x, &n)?);
        }
        Ok(alpha)
    }

    fn normal_flux(&self, u: &State<M>, x: &Vec2, n: &Vec2) -> Result<State<M>> {
        let [fx, fy] = self.flux(u, x)?;
        Ok(fx * n.x + fy * n.y)
    }

    /// `R max(L, 0) R^-1` for `K = J(u) n`.
    fn positive_part(&self, u: &State<M>, x: &Vec2, n: &Vec2) -> Result<Mat<M>> {
        Ok(self.eigen_normal(u, x, n)?.map(|l| l.max(0.0)))
    }

    /// Positive part with eigenvalues below `delta` in magnitude smoothed.
    fn regularized_positive_part(&self, u: &State<M>, x: &Vec2, n: &Vec2, delta: f64) -> Result<Mat<M>> {
        Ok(self.eigen_normal(u, x, n)?.map(|l| regularized_positive(l, delta)))
    }
}

/// Positive part of a matrix with real spectrum, from a numerical eigen-decomposition.
pub fn positive_part_of<const M: usize>(k: &Mat<M>) -> Result<Mat<M>> {
    let (q, t) = nalgebra::DMatrix::from_column_slice(M, M, k.as_slice()).schur().unpack();
    let eigen = t.diagonal();
    for i in 0..M.saturating_sub(1) {
        if t[(i + 1, i)].abs() > 1e-12 * (1.0 + k.norm()) {
            return Err(Error::InvalidParameter("matrix has complex eigenvalues".into()));
        }
    }
    // Eigenvectors of the upper-triangular factor by back substitution.
    let mut v = Mat::<M>::identity();
    for j in 0..M {
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for l in i + 1..j {
                s += t[(i, l)] * v[(l, j)];
            }
            let d = eigen[j] - eigen[i];
            if d.abs() < 1e-13 * (1.0 + eigen[j].abs()) {
                if s.abs() > 1e-10 * (1.0 + k.norm()) {
                    return Err(Error::InvalidParameter("matrix is not diagonalizable".into()));
                }
                v[(i, j)] = 0.0;
            } else {
                v[(i, j)] = s / d;
            }
        }
    }
    let right = Mat::<M>::from_column_slice((q * nalgebra::DMatrix::from_column_slice(M, M, v.as_slice())).as_slice());
    let eigen = State::<M>::from_column_slice(eigen.as_slice());
    let left = right
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("matrix is not diagonalizable".into()))?;
    Ok(Eigen { right, values: eigen, left }.map(|l| l.max(0.0)))
}
