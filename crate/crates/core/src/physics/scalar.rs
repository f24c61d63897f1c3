use libm::{fabs, sqrt};

use super::{Eigen, Mat, Model, State};
use crate::blend::theta_scalar;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

type S = State<1>;

/// Global bounds `[min, max]` of a scalar solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
    /// Tolerated round-off outside `[min, max]`.
    pub slack: f64,
}

impl Bounds {
    pub fn new(min: f64, max: f64) -> Self {
        let scale = fabs(min).max(fabs(max)).max(1.0);
        Self { min, max, slack: 1e-13 * scale }
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.min - self.slack && u <= self.max + self.slack
    }
}

fn bounds_of(states: &[S]) -> Bounds {
    let (lo, hi) = states
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| (lo.min(u[0]), hi.max(u[0])));
    Bounds::new(lo, hi)
}

fn check(u: &S) -> Result<f64> {
    if u[0].is_finite() {
        Ok(u[0])
    } else {
        Err(Error::DomainViolation("non-finite scalar".into()))
    }
}

fn scalar_eigen(k: f64) -> Eigen<1> {
    Eigen {
        right: Mat::<1>::identity(),
        values: S::new(k),
        left: Mat::<1>::identity(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityField {
    Uniform(Vec2),
    /// Solid rotation `a(x) = omega (-(y - y_c), x - x_c)`.
    Rotation { center: Vec2, angular_speed: f64 },
}

impl VelocityField {
    pub fn at(&self, x: &Vec2) -> Vec2 {
        match *self {
            VelocityField::Uniform(a) => a,
            VelocityField::Rotation { center, angular_speed } => {
                let r = x - center;
                Vec2::new(-r.y, r.x) * angular_speed
            }
        }
    }
}

/// Linear advection `u_t + div(a(x) u) = 0` with a divergence-free field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advection {
    pub velocity: VelocityField,
}

impl Advection {
    pub fn new(velocity: VelocityField) -> Self {
        Self { velocity }
    }

    pub fn uniform(ax: f64, ay: f64) -> Self {
        Self::new(VelocityField::Uniform(Vec2::new(ax, ay)))
    }
}

impl Model<1> for Advection {
    type Domain = Bounds;

    fn flux(&self, u: &S, x: &Vec2) -> Result<[S; 2]> {
        let v = check(u)?;
        let a = self.velocity.at(x);
        Ok([S::new(a.x * v), S::new(a.y * v)])
    }

    fn jacobian_normal(&self, u: &S, x: &Vec2, n: &Vec2) -> Result<Mat<1>> {
        check(u)?;
        Ok(Mat::<1>::new(self.velocity.at(x).dot(n)))
    }

    fn eigen_normal(&self, u: &S, x: &Vec2, n: &Vec2) -> Result<Eigen<1>> {
        check(u)?;
        Ok(scalar_eigen(self.velocity.at(x).dot(n)))
    }

    fn max_speed(&self, ul: &S, ur: &S, x: &Vec2, n: &Vec2) -> Result<f64> {
        check(ul)?;
        check(ur)?;
        Ok(fabs(self.velocity.at(x).dot(n)))
    }

    fn spectral_radius(&self, u: &S, x: &Vec2) -> Result<f64> {
        check(u)?;
        Ok(self.velocity.at(x).norm())
    }

    // Same `a . n` as `max_speed`, so `|f(u) . n| <= alpha |u|` holds in floating point
    // even when the flow is nearly tangent to `n`.
    fn normal_flux(&self, u: &S, x: &Vec2, n: &Vec2) -> Result<S> {
        Ok(S::new(self.velocity.at(x).dot(n) * check(u)?))
    }

    fn domain(&self, states: &[S]) -> Bounds {
        bounds_of(states)
    }

    fn contains(&self, d: &Bounds, u: &S) -> bool {
        d.contains(u[0])
    }

    fn theta(&self, d: &Bounds, ustar: &S, delta: &S, scale: f64) -> Result<f64> {
        theta_scalar(ustar[0], delta[0], d, scale)
    }
}

/// Burgers' equation with `f(u) = (u^2 / 2, u^2 / 2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Burgers;

impl Model<1> for Burgers {
    type Domain = Bounds;

    fn flux(&self, u: &S, _x: &Vec2) -> Result<[S; 2]> {
        let v = check(u)?;
        let f = 0.5 * v * v;
        Ok([S::new(f), S::new(f)])
    }

    fn jacobian_normal(&self, u: &S, _x: &Vec2, n: &Vec2) -> Result<Mat<1>> {
        Ok(Mat::<1>::new(check(u)? * (n.x + n.y)))
    }

    fn eigen_normal(&self, u: &S, _x: &Vec2, n: &Vec2) -> Result<Eigen<1>> {
        Ok(scalar_eigen(check(u)? * (n.x + n.y)))
    }

    fn max_speed(&self, ul: &S, ur: &S, _x: &Vec2, n: &Vec2) -> Result<f64> {
        Ok(fabs(check(ul)?).max(fabs(check(ur)?)) * fabs(n.x + n.y))
    }

    fn spectral_radius(&self, u: &S, _x: &Vec2) -> Result<f64> {
        Ok(fabs(check(u)?) * sqrt(2.0))
    }

    // `n.x + n.y` is formed once, as in `max_speed`; faces with `n.x ~ -n.y` cancel otherwise.
    fn normal_flux(&self, u: &S, _x: &Vec2, n: &Vec2) -> Result<S> {
        let v = check(u)?;
        Ok(S::new(0.5 * v * v * (n.x + n.y)))
    }

    fn domain(&self, states: &[S]) -> Bounds {
        bounds_of(states)
    }

    fn contains(&self, d: &Bounds, u: &S) -> bool {
        d.contains(u[0])
    }

    fn theta(&self, d: &Bounds, ustar: &S, delta: &S, scale: f64) -> Result<f64> {
        theta_scalar(ustar[0], delta[0], d, scale)
    }
}
