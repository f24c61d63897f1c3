use alloc::format;

use libm::{fabs, pow, sqrt};

use super::{Eigen, Mat, Model, State};
use crate::blend::theta_euler;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

type U = State<4>;

/// Which wave-speed bound [`Euler::max_speed`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpeedEstimate {
    /// Two-rarefaction bound, combined with the eigenvalues of both states.
    #[default]
    GuermondPopov,
    /// `max(|v_L.n| + c_L, |v_R.n| + c_R)`; not a guaranteed bound.
    Cheap,
}

/// Compressible Euler equations for a perfect gas, conserved variables `(rho, m_x, m_y, E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler {
    gamma: f64,
    pub speed_estimate: SpeedEstimate,
}

/// Primitive variables of an admissible state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub v: Vec2,
    pub p: f64,
}

/// Density and internal-energy floors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerDomain {
    pub eps_rho: f64,
    pub eps_e: f64,
}

/// Primitive state with its sound speed and `p^(-(gamma - 1) / (2 gamma))`.
struct FanState {
    w: Primitive,
    c: f64,
    p_mz: f64,
}

impl FanState {
    fn new(model: &Euler, w: &Primitive) -> Self {
        let g = model.gamma;
        Self { w: *w, c: model.sound_speed(w), p_mz: pow(w.p, -(g - 1.0) / (2.0 * g)) }
    }
}

/// `psi(w) = (|w|^2 / 2, -w, 1)`, so that `u . psi(w) = rho e + rho |v - w|^2 / 2` with `rho e` the internal energy.
pub fn gql_psi(w: &Vec2) -> U {
    U::new(0.5 * w.norm_squared(), -w.x, -w.y, 1.0)
}

/// Internal energy per unit volume, `E - |m|^2 / (2 rho)`.
pub fn internal_energy(u: &U) -> f64 {
    u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]
}

impl Default for Euler {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            speed_estimate: SpeedEstimate::GuermondPopov,
        }
    }
}

impl Euler {
    /// `gamma` must lie in `(1, 5/3]`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma <= 5.0 / 3.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} outside (1, 5/3]")));
        }
        Ok(Self {
            gamma,
            speed_estimate: SpeedEstimate::GuermondPopov,
        })
    }

    pub fn with_speed_estimate(mut self, s: SpeedEstimate) -> Self {
        self.speed_estimate = s;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn conserved(&self, rho: f64, vx: f64, vy: f64, p: f64) -> U {
        U::new(rho, rho * vx, rho * vy, p / (self.gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy))
    }

    pub fn primitive(&self, u: &U) -> Result<Primitive> {
        let rho = u[0];
        if !(rho > 0.0) || !u.iter().all(|c| c.is_finite()) {
            return Err(Error::DomainViolation(format!("density {rho:e}")));
        }
        let e = internal_energy(u);
        if !(e > 0.0) {
            return Err(Error::DomainViolation(format!("internal energy {e:e}")));
        }
        Ok(Primitive {
            rho,
            v: Vec2::new(u[1] / rho, u[2] / rho),
            p: (self.gamma - 1.0) * e,
        })
    }

    pub fn sound_speed(&self, w: &Primitive) -> f64 {
        sqrt(self.gamma * w.p / w.rho)
    }

    /// Upper bound of `|lambda_1^-|` and `lambda_3^+` along the unit vector `n`
    /// from the two-rarefaction pressure.
    pub fn two_rarefaction_speed(&self, l: &Primitive, r: &Primitive, n: &Vec2) -> f64 {
        self.fan_bound(&FanState::new(self, l), &FanState::new(self, r), n)
    }

    fn fan_bound(&self, l: &FanState, r: &FanState, n: &Vec2) -> f64 {
        let g = self.gamma;
        let (cl, cr) = (l.c, r.c);
        let (ul, ur) = (l.w.v.dot(n), r.w.v.dot(n));
        let num = cl + cr - 0.5 * (g - 1.0) * (ur - ul);
        // p_star^z = num / den; below both p^z neither wave is a shock
        let ratio = num / (cl * l.p_mz + cr * r.p_mz);
        let (lam1, lam3) = if num <= 0.0 || (ratio * l.p_mz <= 1.0 && ratio * r.p_mz <= 1.0) {
            (ul - cl, ur + cr)
        } else {
            let p_star = pow(ratio, 2.0 * g / (g - 1.0));
            let k = (g + 1.0) / (2.0 * g);
            (
                ul - cl * sqrt(1.0 + k * ((p_star - l.w.p) / l.w.p).max(0.0)),
                ur + cr * sqrt(1.0 + k * ((p_star - r.w.p) / r.w.p).max(0.0)),
            )
        };
        (-lam1).max(lam3).max(0.0)
    }

    fn pair_speed(&self, l: &FanState, r: &FanState, n: &Vec2) -> Result<f64> {
        let len = n.norm();
        if len == 0.0 {
            return Ok(0.0);
        }
        let nh = n / len;
        let cheap = (fabs(l.w.v.dot(&nh)) + l.c).max(fabs(r.w.v.dot(&nh)) + r.c);
        let s = match self.speed_estimate {
            SpeedEstimate::Cheap => cheap,
            SpeedEstimate::GuermondPopov => cheap.max(self.fan_bound(l, r, &nh)),
        };
        if s.is_finite() {
            Ok(s * len)
        } else {
            Err(Error::NonFiniteSpeed)
        }
    }
}

impl Model<4> for Euler {
    type Domain = EulerDomain;

    fn flux(&self, u: &U, _x: &Vec2) -> Result<[U; 2]> {
        let w = self.primitive(u)?;
        let (vx, vy) = (w.v.x, w.v.y);
        let h = u[3] + w.p;
        Ok([
            U::new(u[1], u[1] * vx + w.p, u[1] * vy, h * vx),
            U::new(u[2], u[2] * vx, u[2] * vy + w.p, h * vy),
        ])
    }

    fn jacobian_normal(&self, u: &U, _x: &Vec2, n: &Vec2) -> Result<Mat<4>> {
        let w = self.primitive(u)?;
        let g1 = self.gamma - 1.0;
        let (vx, vy) = (w.v.x, w.v.y);
        let (nx, ny) = (n.x, n.y);
        let un = vx * nx + vy * ny;
        let phi = 0.5 * g1 * (vx * vx + vy * vy);
        let h = (u[3] + w.p) / w.rho;
        #[rustfmt::skip]
        let j = Mat::<4>::new(
            0.0, nx, ny, 0.0,
            phi * nx - vx * un, un + vx * nx - g1 * vx * nx, vx * ny - g1 * vy * nx, g1 * nx,
            phi * ny - vy * un, vy * nx - g1 * vx * ny, un + vy * ny - g1 * vy * ny, g1 * ny,
            un * (phi - h), h * nx - g1 * vx * un, h * ny - g1 * vy * un, self.gamma * un,
        );
        Ok(j)
    }

    fn eigen_normal(&self, u: &U, _x: &Vec2, n: &Vec2) -> Result<Eigen<4>> {
        let w = self.primitive(u)?;
        let c = self.sound_speed(&w);
        let len = n.norm();
        let nh = if len > 0.0 { n / len } else { Vec2::new(1.0, 0.0) };
        let t = Vec2::new(-nh.y, nh.x);
        let (vx, vy) = (w.v.x, w.v.y);
        let vn = w.v.dot(&nh);
        let vt = w.v.dot(&t);
        let h = (u[3] + w.p) / w.rho;
        let q2 = 0.5 * w.v.norm_squared();
        #[rustfmt::skip]
        let right = Mat::<4>::new(
            1.0, 1.0, 0.0, 1.0,
            vx - c * nh.x, vx, t.x, vx + c * nh.x,
            vy - c * nh.y, vy, t.y, vy + c * nh.y,
            h - c * vn, q2, vt, h + c * vn,
        );
        let b1 = (self.gamma - 1.0) / (c * c);
        let b2 = b1 * q2;
        #[rustfmt::skip]
        let left = Mat::<4>::new(
            0.5 * (b2 + vn / c), -0.5 * (b1 * vx + nh.x / c), -0.5 * (b1 * vy + nh.y / c), 0.5 * b1,
            1.0 - b2, b1 * vx, b1 * vy, -b1,
            -vt, t.x, t.y, 0.0,
            0.5 * (b2 - vn / c), -0.5 * (b1 * vx - nh.x / c), -0.5 * (b1 * vy - nh.y / c), 0.5 * b1,
        );
        let un = w.v.dot(n);
        Ok(Eigen {
            right,
            values: U::new(un - c * len, un, un, un + c * len),
            left,
        })
    }

    fn max_speed(&self, ul: &U, ur: &U, _x: &Vec2, n: &Vec2) -> Result<f64> {
        let l = FanState::new(self, &self.primitive(ul)?);
        let r = FanState::new(self, &self.primitive(ur)?);
        self.pair_speed(&l, &r, n)
    }

    fn fan_speed<'a>(&self, center: &U, ring: impl Iterator<Item = (&'a U, Vec2, Vec2)>) -> Result<f64> {
        let c = FanState::new(self, &self.primitive(center)?);
        let mut alpha = 0.0f64;
        for (u, _, n) in ring {
            let s = FanState::new(self, &self.primitive(u)?);
            alpha = alpha.max(self.pair_speed(&c, &s, &n)?).max(self.pair_speed(&s, &c, &n)?);
        }
        Ok(alpha)
    }

    fn spectral_radius(&self, u: &U, _x: &Vec2) -> Result<f64> {
        let w = self.primitive(u)?;
        Ok(w.v.norm() + self.sound_speed(&w))
    }

    fn domain(&self, states: &[U]) -> EulerDomain {
        let (rho, e) = states
            .iter()
            .fold((0.0f64, 0.0f64), |(r, e), u| (r.max(u[0]), e.max(internal_energy(u))));
        EulerDomain {
            eps_rho: 1e-13 * rho,
            eps_e: 1e-13 * e,
        }
    }

    fn contains(&self, _d: &EulerDomain, u: &U) -> bool {
        u.iter().all(|c| c.is_finite()) && u[0] > 0.0 && internal_energy(u) > 0.0
    }

    fn theta(&self, d: &EulerDomain, ustar: &U, delta: &U, scale: f64) -> Result<f64> {
        theta_euler(ustar, delta, scale, d.eps_rho, d.eps_e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gas() -> Euler {
        Euler::default()
    }

    fn random_state(rng: &mut ChaCha8Rng, e: &Euler) -> U {
        let rho = pow(10.0, rng.random_range(-2.0..1.0));
        let p = pow(10.0, rng.random_range(-2.0..1.0));
        e.conserved(rho, rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), p)
    }

    fn fd_jacobian(e: &Euler, u: &U, n: &Vec2) -> Mat<4> {
        let mut j = Mat::<4>::zeros();
        for k in 0..4 {
            let h = 1e-6 * u[k].abs().max(1e-3);
            let mut up = *u;
            let mut um = *u;
            up[k] += h;
            um[k] -= h;
            let d = (e.normal_flux(&up, &Vec2::zeros(), n).unwrap() - e.normal_flux(&um, &Vec2::zeros(), n).unwrap()) / (2.0 * h);
            j.set_column(k, &d);
        }
        j
    }

    /// Exact Riemann solver: pressure in the star region and the extreme wave speeds.
    fn exact_fastest_speed(e: &Euler, l: &Primitive, r: &Primitive) -> f64 {
        let g = e.gamma;
        let (cl, cr) = (e.sound_speed(l), e.sound_speed(r));
        let f = |p: f64, s: &Primitive, c: f64| -> (f64, f64) {
            if p > s.p {
                let a = 2.0 / ((g + 1.0) * s.rho);
                let b = (g - 1.0) / (g + 1.0) * s.p;
                let q = sqrt(a / (p + b));
                ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (p + b)))
            } else {
                let z = (g - 1.0) / (2.0 * g);
                let ratio = p / s.p;
                (2.0 * c / (g - 1.0) * (pow(ratio, z) - 1.0), 1.0 / (s.rho * c) * pow(ratio, -(g + 1.0) / (2.0 * g)))
            }
        };
        let du = r.v.x - l.v.x;
        let mut p = 0.5 * (l.p + r.p);
        for _ in 0..200 {
            let (fl, dl) = f(p, l, cl);
            let (fr, dr) = f(p, r, cr);
            let next = (p - (fl + fr + du) / (dl + dr)).max(1e-14);
            if (next - p).abs() < 1e-15 * p {
                p = next;
                break;
            }
            p = next;
        }
        let (fl, _) = f(p, l, cl);
        let (fr, _) = f(p, r, cr);
        let u_star = 0.5 * (l.v.x + r.v.x) + 0.5 * (fr - fl);
        let z = (g - 1.0) / (2.0 * g);
        let left = if p > l.p {
            [l.v.x - cl * sqrt((g + 1.0) / (2.0 * g) * p / l.p + z), f64::NAN]
        } else {
            [l.v.x - cl, u_star - cl * pow(p / l.p, z)]
        };
        let right = if p > r.p {
            [r.v.x + cr * sqrt((g + 1.0) / (2.0 * g) * p / r.p + z), f64::NAN]
        } else {
            [r.v.x + cr, u_star + cr * pow(p / r.p, z)]
        };
        left.iter()
            .chain(&right)
            .chain(&[u_star])
            .filter(|s| s.is_finite())
            .fold(0.0f64, |m, s| m.max(s.abs()))
    }

    #[test]
    fn stagnant_gas() {
        let e = gas();
        let u = U::new(1.0, 0.0, 0.0, 1.0 / 0.4);
        let [fx, fy] = e.flux(&u, &Vec2::zeros()).unwrap();
        assert!((fx - U::new(0.0, 1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((fy - U::new(0.0, 0.0, 1.0, 0.0)).norm() < 1e-15);
        let ev = e.eigen_normal(&u, &Vec2::zeros(), &Vec2::new(1.0, 0.0)).unwrap();
        let c = sqrt(1.4);
        assert!((ev.values - U::new(-c, 0.0, 0.0, c)).norm() < 1e-15);
        let a = e.max_speed(&u, &u, &Vec2::zeros(), &Vec2::new(1.0, 0.0)).unwrap();
        assert!((a - 1.4f64.sqrt()).abs() < 1e-14);
        assert!((a - 1.1832).abs() < 1e-4);
    }

    #[test]
    fn kt_state_one_flux() {
        let e = gas();
        let u = e.conserved(1.5, 0.0, 0.0, 1.5);
        let [fx, fy] = e.flux(&u, &Vec2::zeros()).unwrap();
        assert_eq!((fx[0], fy[0]), (0.0, 0.0));
        assert!((fx[1] - 1.5).abs() < 1e-15 && (fy[2] - 1.5).abs() < 1e-15);
        assert_eq!((fx[2], fy[1]), (0.0, 0.0));
    }

    #[test]
    fn kt_state_three_jacobian() {
        let e = gas();
        let u = e.conserved(0.138, 1.206, 1.206, 0.029);
        let n = Vec2::new(1.0, 0.0);
        let j = e.jacobian_normal(&u, &Vec2::zeros(), &n).unwrap();
        let fd = fd_jacobian(&e, &u, &n);
        assert!((j - fd).norm() < 1e-6 * j.norm());
        let ev = e.eigen_normal(&u, &Vec2::zeros(), &n).unwrap();
        let rebuilt = ev.map(|l| l);
        assert!((rebuilt - j).norm() < 1e-12 * j.norm());
        let mut numeric: alloc::vec::Vec<f64> = fd.complex_eigenvalues().iter().map(|z| z.re).collect();
        numeric.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in numeric.iter().zip(ev.values.iter()) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn invalid_states_and_gamma() {
        let e = gas();
        assert!(e.flux(&U::new(-1.0, 0.0, 0.0, 1.0), &Vec2::zeros()).is_err());
        assert!(e.flux(&U::new(1.0, 2.0, 0.0, 1.0), &Vec2::zeros()).is_err());
        assert!(Euler::new(1.0).is_err());
        assert!(Euler::new(2.0).is_err());
        assert!(Euler::new(5.0 / 3.0).is_ok());
    }

    #[test]
    fn sod_speed_bounds_exact_solution() {
        let e = gas();
        let l = e.primitive(&e.conserved(1.0, 0.0, 0.0, 1.0)).unwrap();
        let r = e.primitive(&e.conserved(0.125, 0.0, 0.0, 0.1)).unwrap();
        let exact = exact_fastest_speed(&e, &l, &r);
        // shock speed of the Sod problem
        assert!((exact - 1.7522).abs() < 1e-3, "{exact}");
        let a = e
            .max_speed(&e.conserved(1.0, 0.0, 0.0, 1.0), &e.conserved(0.125, 0.0, 0.0, 0.1), &Vec2::zeros(), &Vec2::new(1.0, 0.0))
            .unwrap();
        assert!(a >= exact);
    }

    #[test]
    fn two_rarefaction_bound_dominates_exact_speeds() {
        let e = gas();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let (ul, ur) = (random_state(&mut rng, &e), random_state(&mut rng, &e));
            let (l, r) = (e.primitive(&ul).unwrap(), e.primitive(&ur).unwrap());
            let num = e.sound_speed(&l) + e.sound_speed(&r) - 0.2 * (r.v.x - l.v.x);
            if num <= 0.0 {
                continue; // vacuum generated, no star pressure
            }
            let exact = exact_fastest_speed(&e, &l, &r);
            let a = e.max_speed(&ul, &ur, &Vec2::zeros(), &Vec2::new(1.0, 0.0)).unwrap();
            assert!(a >= exact * (1.0 - 1e-10), "{a} < {exact}");
        }
    }

    #[test]
    fn positive_part_splits_the_jacobian() {
        let e = gas();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let u = random_state(&mut rng, &e);
            let n = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let x = Vec2::zeros();
            let k = e.jacobian_normal(&u, &x, &n).unwrap();
            let ev = e.eigen_normal(&u, &x, &n).unwrap();
            let kp = e.positive_part(&u, &x, &n).unwrap();
            let km = ev.map(|l| l.min(0.0));
            let scale = k.norm();
            assert!((kp + km - k).norm() < 1e-10 * scale);
            assert!((kp * km).norm() < 1e-9 * scale * scale);
            // eigenvalues of K+ are max(lambda, 0) on the same eigenvectors
            for i in 0..4 {
                let r = ev.right.column(i);
                let expect = r * ev.values[i].max(0.0);
                assert!((kp * r - expect).norm() < 1e-9 * scale * r.norm());
            }
        }
    }

    #[test]
    fn psi_identities() {
        assert_eq!(gql_psi(&Vec2::zeros()), U::new(0.0, 0.0, 0.0, 1.0));
        let e = gas();
        let u = e.conserved(2.0, 1.0, 1.0, 1.0);
        assert_eq!(u.dot(&gql_psi(&Vec2::zeros())), u[3]);
        assert_eq!(u.dot(&U::new(1.0, 0.0, 0.0, 0.0)), 2.0);
        // w = v leaves only the internal energy p / (gamma - 1)
        let w = Vec2::new(1.0, 1.0);
        assert!((u.dot(&gql_psi(&w)) - 1.0 / 0.4).abs() < 1e-14);
        // expansion: u . psi(w) = rho e + rho |v - w|^2 / 2
        let w = Vec2::new(-0.3, 2.0);
        let expected = 1.0 / 0.4 + 0.5 * 2.0 * (Vec2::new(1.0, 1.0) - w).norm_squared();
        assert!((u.dot(&gql_psi(&w)) - expected).abs() < 1e-13);
    }

    #[test]
    fn gql_characterisation_of_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let rho = rng.random_range(-0.5..2.0);
            let m = Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let big_e = rng.random_range(-1.0..4.0);
            let u = U::new(rho, m.x, m.y, big_e);
            let admissible = rho > 0.0 && internal_energy(&u) > 0.0;
            let mut all_positive = rho > 0.0;
            for _ in 0..1000 {
                let w = Vec2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
                if u.dot(&gql_psi(&w)) <= 0.0 {
                    all_positive = false;
                    break;
                }
            }
            if admissible {
                assert!(all_positive);
            } else if rho > 0.0 {
                // w = v always witnesses e <= 0
                assert!(u.dot(&gql_psi(&(m / rho))) <= 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn jacobian_matches_finite_differences(
            rho in 0.05f64..5.0, vx in -3.0f64..3.0, vy in -3.0f64..3.0, p in 0.05f64..5.0,
            nx in -1.0f64..1.0, ny in -1.0f64..1.0,
        ) {
            let e = gas();
            let u = e.conserved(rho, vx, vy, p);
            let n = Vec2::new(nx, ny);
            let j = e.jacobian_normal(&u, &Vec2::zeros(), &n).unwrap();
            let fd = fd_jacobian(&e, &u, &n);
            prop_assert!((j - fd).norm() <= 1e-6 * (1.0 + j.norm()));
        }

        #[test]
        fn speed_dominates_both_spectra(
            rl in 0.01f64..5.0, vlx in -5.0f64..5.0, vly in -5.0f64..5.0, pl in 0.01f64..5.0,
            rr in 0.01f64..5.0, vrx in -5.0f64..5.0, vry in -5.0f64..5.0, pr in 0.01f64..5.0,
            theta in 0.0f64..6.3, len in 0.1f64..3.0,
        ) {
            let e = gas();
            let (ul, ur) = (e.conserved(rl, vlx, vly, pl), e.conserved(rr, vrx, vry, pr));
            let n = Vec2::new(theta.cos(), theta.sin()) * len;
            let a = e.max_speed(&ul, &ur, &Vec2::zeros(), &n).unwrap();
            for u in [ul, ur] {
                let ev = e.eigen_normal(&u, &Vec2::zeros(), &n).unwrap();
                prop_assert!(ev.values.iter().all(|l| l.abs() <= a * (1.0 + 1e-14)));
            }
        }
    }
}
