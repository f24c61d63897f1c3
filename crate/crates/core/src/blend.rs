//! Blending coefficients between low- and high-order updates.
//!
//! Every limiter here answers the same question: given an admissible
//! intermediate state `u*` and an increment `delta`, what is the largest
//! `theta` in `[0, 1]` such that `u* - theta / scale * delta` is admissible.

use alloc::format;
use alloc::vec::Vec;

use libm::{fabs, sqrt};
use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::physics::{Bounds, State};

/// Directed scalar limiter: only the bound the increment moves towards is used.
pub fn theta_scalar(ustar: f64, delta: f64, bounds: &Bounds, scale: f64) -> Result<f64> {
    if !bounds.contains(ustar) {
        return Err(Error::DomainViolation(format!(
            "intermediate value {ustar} outside [{}, {}]",
            bounds.min, bounds.max
        )));
    }
    if !delta.is_finite() {
        return Ok(0.0);
    }
    if delta == 0.0 {
        return Ok(1.0);
    }
    let headroom = if delta > 0.0 { ustar - bounds.min } else { bounds.max - ustar };
    Ok((scale * headroom.max(0.0) / fabs(delta)).min(1.0))
}

/// `min(1, scale * min(M - u*, u* - m) / |delta|)`, valid for either sign of the increment.
pub fn theta_scalar_symmetric(ustar: f64, delta: f64, bounds: &Bounds, scale: f64) -> Result<f64> {
    let up = theta_scalar(ustar, delta, bounds, scale)?;
    let down = theta_scalar(ustar, -delta, bounds, scale)?;
    Ok(up.min(down))
}

/// Density limiter with floor `eps`: the blended density stays at least `eps`.
pub fn theta_density(rho_star: f64, delta_rho: f64, scale: f64, eps: f64) -> Result<f64> {
    if !(rho_star > 0.0) {
        return Err(Error::DomainViolation(format!("intermediate density {rho_star:e}")));
    }
    if !delta_rho.is_finite() {
        return Ok(0.0);
    }
    if delta_rho <= 0.0 {
        return Ok(1.0);
    }
    if rho_star <= eps {
        return Ok(0.0);
    }
    Ok((scale * (rho_star - eps) / delta_rho).min(1.0))
}

/// Internal-energy limiter with floor `eps_e`, through the spectrum of the quadratic-form pencil.
pub fn theta_energy(ustar: &State<4>, delta: &State<4>, scale: f64, eps_e: f64) -> Result<f64> {
    let e_star = crate::physics::euler_internal_energy(ustar);
    if !(ustar[0] > 0.0 && e_star > 0.0) {
        return Err(Error::DomainViolation(format!(
            "intermediate state rho {:e}, e {e_star:e}",
            ustar[0]
        )));
    }
    if !delta.iter().all(|d| d.is_finite()) {
        return Ok(0.0);
    }
    if delta.iter().all(|d| *d == 0.0) {
        return Ok(1.0);
    }
    let pair = QuadraticFormPair::new(ustar, delta, eps_e);
    if !pair.is_positive_definite() {
        return Ok(0.0);
    }
    let lmax = pair.generalized_eigenvalues()?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    if lmax <= 0.0 {
        Ok(1.0)
    } else {
        Ok((scale / lmax).min(1.0))
    }
}

pub fn combine_thetas(theta_rho: f64, theta_e: f64) -> f64 {
    theta_rho.min(theta_e)
}

/// Density and energy limiters combined, then checked on the blended state.
///
/// The floors are capped at half of the density and internal energy of `ustar`,
/// so an intermediate state inside the floor band can still move upwards.
/// Close to vacuum the internal energy of `u* - theta / scale * delta` is so
/// sensitive to `theta` that the closed form can overshoot by round-off; the
/// coefficient is then shrunk geometrically until the exact predicate holds.
pub fn theta_euler(ustar: &State<4>, delta: &State<4>, scale: f64, eps_rho: f64, eps_e: f64) -> Result<f64> {
    let eps_rho = eps_rho.min(0.5 * ustar[0].max(0.0));
    let eps_e = eps_e.min(0.5 * crate::physics::euler_internal_energy(ustar).max(0.0));
    let theta = combine_thetas(theta_density(ustar[0], delta[0], scale, eps_rho)?, theta_energy(ustar, delta, scale, eps_e)?);
    if theta == 0.0 {
        return Ok(0.0);
    }
    let ok = |t: f64| {
        let w = ustar - delta * (t / scale);
        let e = crate::physics::euler_internal_energy(&w);
        w[0] > 0.5 * eps_rho && w[0] > 0.0 && e > 0.5 * eps_e && e > 0.0
    };
    let mut shrink = 1e-8;
    let mut t = theta;
    while !ok(t) {
        if shrink > 0.5 {
            return Ok(0.0);
        }
        t = theta * (1.0 - shrink);
        shrink *= 10.0;
    }
    Ok(t)
}

/// The pencil `(A, B)` with `z^T A z = 2 z_3^2 (u* - eps_e e_4) . psi(w)` for `z = (w z_3, z_3)`,
/// and `B` built the same way from the increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFormPair {
    pub alpha0: f64,
    pub a: Vec2,
    pub alpha3: f64,
    pub beta0: f64,
    pub b: Vec2,
    pub beta3: f64,
}

impl QuadraticFormPair {
    pub fn new(ustar: &State<4>, delta: &State<4>, eps_e: f64) -> Self {
        Self {
            alpha0: ustar[0],
            a: Vec2::new(ustar[1], ustar[2]) * 0.5,
            alpha3: ustar[3] - eps_e,
            beta0: delta[0],
            b: Vec2::new(delta[1], delta[2]) * 0.5,
            beta3: delta[3],
        }
    }

    pub fn matrices(&self) -> (Matrix3<f64>, Matrix3<f64>) {
        let m = |c0: f64, v: &Vec2, c3: f64| {
            Matrix3::new(c0, 0.0, -2.0 * v.x, 0.0, c0, -2.0 * v.y, -2.0 * v.x, -2.0 * v.y, 2.0 * c3)
        };
        (m(self.alpha0, &self.a, self.alpha3), m(self.beta0, &self.b, self.beta3))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.alpha0 > 0.0 && 2.0 * self.a.norm_squared() - self.alpha0 * self.alpha3 < 0.0
    }

    /// Coefficients `(c2, c1, c0)` of `c2 l^2 + c1 l + c0 = 0` whose roots are `lambda_pm`.
    pub fn quadratic(&self) -> (f64, f64, f64) {
        let s = self.beta0 * self.alpha3 + self.alpha0 * self.beta3;
        (
            2.0 * self.a.norm_squared() - self.alpha0 * self.alpha3,
            s - 4.0 * self.a.dot(&self.b),
            2.0 * self.b.norm_squared() - self.beta0 * self.beta3,
        )
    }

    pub fn discriminant(&self) -> f64 {
        let (c2, c1, c0) = self.quadratic();
        c1 * c1 - 4.0 * c2 * c0
    }

    /// Signed eigenvalues of `B z = l A z`: `beta0 / alpha0`, `lambda_+`, `lambda_-`.
    pub fn generalized_eigenvalues(&self) -> Result<[f64; 3]> {
        if !self.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        let first = self.beta0 / self.alpha0;
        let (c2, c1, c0) = self.quadratic();
        let disc = c1 * c1 - 4.0 * c2 * c0;
        let tol = 1e-10 * (c1 * c1 + fabs(4.0 * c2 * c0));
        if disc < -tol {
            return self.eigenvalues_direct();
        }
        let root = sqrt(disc.max(0.0));
        let q = -0.5 * (c1 + if c1 >= 0.0 { root } else { -root });
        let (l1, l2) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / c2, c0 / q)
        };
        Ok([first, l1.max(l2), l1.min(l2)])
    }

    /// Eigenvalues through the Cholesky factor of `A`.
    pub fn eigenvalues_direct(&self) -> Result<[f64; 3]> {
        let (a, b) = self.matrices();
        let l = a.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
        let li = l.try_inverse().ok_or(Error::NotPositiveDefinite)?;
        let c = li * b * li.transpose();
        let c = (c + c.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
        Ok([ev[0], ev[1], ev[2]])
    }
}

/// `rho(A^-1/2 B A^-1/2) = max(|beta0| / alpha0, |lambda_+|, |lambda_-|)`.
pub fn spectral_bound(pair: &QuadraticFormPair) -> Result<f64> {
    let ev = pair.generalized_eigenvalues()?;
    Ok(ev.iter().fold(0.0f64, |m, l| m.max(fabs(*l))))
}

/// Blending coefficients of one forward-Euler stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlendReport {
    /// One per face.
    pub face_theta: Vec<f64>,
    /// One per `(element, ring position)`, in flattened ring order.
    pub point_theta: Vec<f64>,
    /// Ring entries whose high-order residual fell back to low order.
    pub fallbacks: usize,
}

impl BlendReport {
    pub fn min_theta(&self) -> f64 {
        self.face_theta.iter().chain(&self.point_theta).copied().fold(1.0, f64::min)
    }

    /// Number of coefficients below one.
    pub fn activations(&self) -> usize {
        self.face_theta.iter().chain(&self.point_theta).filter(|t| **t < 1.0).count()
    }

    pub fn len(&self) -> usize {
        self.face_theta.len() + self.point_theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{euler_internal_energy, Euler};
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type U = State<4>;

    fn unit() -> Bounds {
        Bounds::new(0.0, 1.0)
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(theta_scalar(0.3, 0.0, &unit(), 1.0).unwrap(), 1.0);
        assert_eq!(theta_scalar_symmetric(1.0, 0.5, &unit(), 1.0).unwrap(), 0.0);
        let t = theta_scalar_symmetric(0.5, 2.0, &unit(), 1.0).unwrap();
        assert_eq!(t, 0.25);
        // the blended value hits the lower bound exactly
        assert_eq!(0.5 - t * 2.0, 0.0);
        // directed: moving up from the top has no room, moving down does
        assert_eq!(theta_scalar(1.0, -0.5, &unit(), 1.0).unwrap(), 0.0);
        assert_eq!(theta_scalar(1.0, 0.5, &unit(), 1.0).unwrap(), 1.0);
        assert!(theta_scalar(1.5, 0.1, &unit(), 1.0).is_err());
        assert_eq!(theta_scalar(0.5, f64::NAN, &unit(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn density_examples() {
        assert_eq!(theta_density(1.0, 0.0, 1.0, 0.0).unwrap(), 1.0);
        let t = theta_density(1.0, 4.0, 1.0, 1e-13).unwrap();
        assert!((t - 0.25).abs() < 1e-12 && t < 0.25);
        assert!(1.0 - t * 4.0 >= 1e-13 * (1.0 - 1e-3));
        assert_eq!(theta_density(1.0, -4.0, 1.0, 1e-13).unwrap(), 1.0);
        assert!(theta_density(0.0, 1.0, 1.0, 0.0).is_err());
        assert_eq!(theta_density(1e-14, 1.0, 1.0, 1e-13).unwrap(), 0.0);
    }

    #[test]
    fn combine() {
        assert_eq!(combine_thetas(1.0, 1.0), 1.0);
        assert_eq!(combine_thetas(0.3, 0.7), 0.3);
    }

    fn pair_from(rng: &mut ChaCha8Rng) -> QuadraticFormPair {
        loop {
            let p = QuadraticFormPair {
                alpha0: rng.random_range(0.01..3.0),
                a: Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                alpha3: rng.random_range(0.0..6.0),
                beta0: rng.random_range(-3.0..3.0),
                b: Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                beta3: rng.random_range(-5.0..5.0),
            };
            if p.is_positive_definite() {
                return p;
            }
        }
    }

    /// Largest |z^T B z| / z^T A z by random sampling and a shrinking pattern search.
    fn rayleigh_max(p: &QuadraticFormPair, rng: &mut ChaCha8Rng, samples: usize) -> f64 {
        let (a, b) = p.matrices();
        let q = |z: &Vector3<f64>| (z.dot(&(b * z))).abs() / z.dot(&(a * z));
        let mut best = Vector3::new(1.0, 0.0, 0.0);
        let mut val = q(&best);
        for _ in 0..samples {
            let z = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let v = q(&z);
            if v > val {
                val = v;
                best = z / z.norm();
            }
        }
        let mut step = 0.1;
        while step > 1e-10 {
            let mut improved = false;
            for k in 0..3 {
                for s in [step, -step] {
                    let mut z = best;
                    z[k] += s;
                    let v = q(&z);
                    if v > val {
                        val = v;
                        best = z / z.norm();
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        val
    }

    #[test]
    fn spectral_bound_trivial_cases() {
        let u = Euler::default().conserved(1.0, 0.3, -0.2, 1.0);
        let p = QuadraticFormPair::new(&u, &u, 0.0);
        assert!((spectral_bound(&p).unwrap() - 1.0).abs() < 1e-12);
        let p = QuadraticFormPair::new(&u, &U::zeros(), 0.0);
        assert_eq!(spectral_bound(&p).unwrap(), 0.0);
        let bad = QuadraticFormPair::new(&U::new(1.0, 2.0, 0.0, 1.0), &u, 0.0);
        assert_eq!(spectral_bound(&bad), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn spectral_bound_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let p = pair_from(&mut rng);
            assert!(p.discriminant() >= -1e-10);
            let closed = spectral_bound(&p).unwrap();
            let brute = rayleigh_max(&p, &mut rng, 2000);
            assert!((closed - brute).abs() <= 1e-6 * closed.max(1e-300), "{closed} vs {brute}");
        }
    }

    #[test]
    fn closed_form_matches_direct_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10_000 {
            let p = pair_from(&mut rng);
            let mut c = p.generalized_eigenvalues().unwrap();
            let d = p.eigenvalues_direct().unwrap();
            c.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let scale = d.iter().fold(1e-300f64, |m, l| m.max(l.abs()));
            for k in 0..3 {
                assert!((c[k] - d[k]).abs() <= 1e-8 * scale, "{c:?} vs {d:?}");
            }
        }
    }

    /// Strictly positive, with the floors held up to the round-off of forming
    /// `w = u - t d` and evaluating `E - |m|^2 / (2 rho)`.
    fn admissible_blend(u: &U, d: &U, t: f64, eps_rho: f64, eps_e: f64) -> bool {
        let w = u - d * t;
        let e = euler_internal_energy(&w);
        let roundoff = 256.0 * f64::EPSILON * (u.amax() + d.amax() * t.abs());
        w[0] > 0.0 && e > 0.0 && w[0] >= eps_rho - roundoff && e >= eps_e - roundoff
    }

    #[test]
    fn energy_examples() {
        let g = Euler::default();
        let u = g.conserved(1.0, 0.0, 0.0, 1.0);
        assert_eq!(theta_energy(&u, &U::zeros(), 1.0, 0.0).unwrap(), 1.0);
        let d = -u * 0.5;
        let t = theta_energy(&u, &d, 1.0, 1e-13).unwrap();
        assert!(admissible_blend(&u, &d, t, 0.0, 1e-13));
        assert!(theta_energy(&U::new(1.0, 2.0, 0.0, 1.0), &d, 1.0, 0.0).is_err());
    }

    #[test]
    fn states_inside_the_floor_band_may_recover() {
        let g = Euler::default();
        let u = g.conserved(1e-3, 0.0, 0.0, 1e-9);
        // raises density and energy well above both floors
        let up = -g.conserved(1.0, 0.0, 0.0, 1.0);
        assert_eq!(theta_euler(&u, &up, 1.0, 1e-2, 1e-2).unwrap(), 1.0);
        let down = u * 0.9;
        let t = theta_euler(&u, &down, 1.0, 1e-2, 1e-2).unwrap();
        assert!(t < 1.0 && admissible_blend(&u, &down, t, 0.0, 0.0), "{t}");
    }

    #[test]
    fn energy_theta_is_sharp() {
        let g = Euler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut limited = 0;
        for trial in 0..5000 {
            let u = g.conserved(rng.random_range(0.1..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(0.05..2.0));
            let d = U::from_fn(|_, _| rng.random_range(-3.0..3.0));
            let scale = rng.random_range(0.1..3.0);
            let eps = if trial % 2 == 0 { 1e-13 } else { 1e-6 };
            let t = theta_euler(&u, &d, scale, eps, eps).unwrap();
            assert!(admissible_blend(&u, &d, t / scale, eps, eps), "u {u:?} d {d:?} s {scale} t {t}");
            if t < 1.0 {
                limited += 1;
                // bisection on the exact predicate for the largest admissible theta
                let ok = |s: f64| {
                    let w = u - d * (s / scale);
                    w[0] > eps && euler_internal_energy(&w) > eps
                };
                let (mut lo, mut hi) = (t * (1.0 - 1e-9), 1.0);
                if ok(hi) {
                    panic!("theta {t} not sharp: theta = 1 admissible");
                }
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if ok(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                assert!(lo <= t * 1.05 + 1e-12, "returned {t}, admissible up to {lo}");
            }
        }
        assert!(limited > 500);
    }

    #[test]
    fn blend_report_statistics() {
        let r = BlendReport {
            face_theta: alloc::vec![1.0, 0.5],
            point_theta: alloc::vec![0.2, 1.0, 1.0],
            fallbacks: 0,
        };
        assert_eq!(r.min_theta(), 0.2);
        assert_eq!(r.activations(), 2);
        assert_eq!(BlendReport::default().min_theta(), 1.0);
    }

    proptest! {
        #[test]
        fn scalar_blend_stays_in_bounds(u in 0.0f64..=1.0, d in -10.0f64..10.0, scale in 0.01f64..10.0) {
            let t = theta_scalar(u, d, &unit(), scale).unwrap();
            prop_assert!((0.0..=1.0).contains(&t));
            let w = u - t / scale * d;
            prop_assert!(w >= -1e-15 && w <= 1.0 + 1e-15);
            let ts = theta_scalar_symmetric(u, d, &unit(), scale).unwrap();
            prop_assert!(ts <= t);
        }

        #[test]
        fn scalar_theta_is_monotone_in_increment(u in 0.0f64..=1.0, d in 0.0f64..10.0, extra in 0.0f64..5.0, scale in 0.01f64..10.0) {
            let b = unit();
            prop_assert!(theta_scalar(u, d + extra, &b, scale).unwrap() <= theta_scalar(u, d, &b, scale).unwrap());
            prop_assert!(theta_scalar(u, -d - extra, &b, scale).unwrap() <= theta_scalar(u, -d, &b, scale).unwrap());
        }
    }
}
