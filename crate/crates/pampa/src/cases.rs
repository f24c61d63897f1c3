//! Benchmark problems: initial data, domains, models and boundary conditions.

use std::f64::consts::PI;

use pampa_core::mesh::{CellKind, Rectangle};
use pampa_core::physics::{Euler, State};
use pampa_core::Vec2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    /// Rotating hump, cone and cylinder with radius-squared supports.
    Zalesak,
    /// The same shapes with supports `r <= 0.15`.
    ZalesakClassic,
    /// Four-quadrant Riemann problem of Kurganov and Tadmor (configuration 3).
    Kt,
    /// Periodic translation of a smooth bump.
    Smooth,
    /// Periodic translation of a smooth density bump in a uniform gas flow.
    SmoothEuler,
    /// Planar Euler Riemann problem along x.
    Riemann,
    /// Uniform gas at rest on a periodic square.
    Constant,
}

impl CaseId {
    pub const ALL: [CaseId; 7] = [
        CaseId::Zalesak,
        CaseId::ZalesakClassic,
        CaseId::Kt,
        CaseId::Smooth,
        CaseId::SmoothEuler,
        CaseId::Riemann,
        CaseId::Constant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Zalesak => "zalesak",
            CaseId::ZalesakClassic => "zalesak-classic",
            CaseId::Kt => "kt",
            CaseId::Smooth => "smooth",
            CaseId::SmoothEuler => "smooth-euler",
            CaseId::Riemann => "riemann",
            CaseId::Constant => "constant",
        }
    }

    pub fn is_scalar(self) -> bool {
        matches!(self, CaseId::Zalesak | CaseId::ZalesakClassic | CaseId::Smooth)
    }

    pub fn domain(self) -> Rectangle {
        match self {
            CaseId::Zalesak | CaseId::ZalesakClassic => Rectangle::square(-1.0, 1.0),
            CaseId::Kt => Rectangle::square(-2.0, 2.0),
            CaseId::Smooth | CaseId::SmoothEuler | CaseId::Riemann | CaseId::Constant => Rectangle::square(0.0, 1.0),
        }
    }

    pub fn periodic(self) -> bool {
        matches!(self, CaseId::Smooth | CaseId::SmoothEuler | CaseId::Constant)
    }

    pub fn default_cells(self) -> CellKind {
        match self {
            CaseId::Zalesak | CaseId::ZalesakClassic => CellKind::Tri,
            _ => CellKind::Quad,
        }
    }

    pub fn default_grid(self) -> (usize, usize) {
        match self {
            CaseId::Zalesak | CaseId::ZalesakClassic => (50, 50),
            CaseId::Kt => (100, 100),
            CaseId::Riemann => (100, 4),
            _ => (32, 32),
        }
    }

    pub fn default_final_time(self) -> f64 {
        match self {
            CaseId::Zalesak | CaseId::ZalesakClassic => 1.0,
            CaseId::Kt => 3.0,
            CaseId::Riemann => 0.2,
            CaseId::Smooth | CaseId::SmoothEuler => 1.0,
            CaseId::Constant => 0.1,
        }
    }
}

impl std::str::FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown case `{s}`")))
    }
}

/// One full turn per unit time about the origin.
pub const ZALESAK_ANGULAR_SPEED: f64 = 2.0 * PI;

/// Supports may overlap; a point belongs to the shape with the nearest center.
fn zalesak_shapes(x: &Vec2, radius2: impl Fn(f64) -> Option<f64>) -> f64 {
    let centers = [(0.25, 0.5), (0.5, 0.25), (0.5, 0.75)];
    let (shape, r2) = centers
        .iter()
        .map(|c| (x.x - c.0).powi(2) + (x.y - c.1).powi(2))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    match (shape, radius2(r2)) {
        (_, None) => 0.0,
        (0, Some(s)) => 0.25 * (1.0 + (PI * s).cos()),
        (1, Some(s)) => 1.0 - s,
        (_, Some(_)) => 1.0,
    }
}

/// Hump, cone and cylinder on `r^2 <= 0.15`, profiles in `r^2 / 0.15`.
pub fn zalesak_initial(x: &Vec2) -> f64 {
    zalesak_shapes(x, |r2| (r2 <= 0.15).then_some(r2 / 0.15))
}

/// The same shapes on `r <= 0.15`, profiles in `r / 0.15`.
pub fn zalesak_classic_initial(x: &Vec2) -> f64 {
    zalesak_shapes(x, |r2| {
        let r = r2.sqrt();
        (r <= 0.15).then_some(r / 0.15)
    })
}

/// Primitive quadrant states `(rho, vx, vy, p)`.
pub const KT_STATES: [[f64; 4]; 4] = [
    [1.5, 0.0, 0.0, 1.5],
    [0.5323, 1.206, 0.0, 0.3],
    [0.138, 1.206, 1.206, 0.029],
    [0.5323, 0.0, 1.206, 0.3],
];

pub fn kt_initial(model: &Euler, x: &Vec2) -> State<4> {
    let q = match (x.x >= 1.0, x.y >= 1.0) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    };
    let [r, u, v, p] = KT_STATES[q];
    model.conserved(r, u, v, p)
}

/// Smooth periodic bump on the unit square with values in `[e^-2, e^2] / 7.5`.
pub fn smooth_bump(x: &Vec2) -> f64 {
    let tau = 2.0 * PI;
    ((tau * x.x).cos() + (tau * x.y).cos()).exp() / 7.5
}

pub fn smooth_bump_bounds() -> (f64, f64) {
    ((-2f64).exp() / 7.5, 2f64.exp() / 7.5)
}

/// Default advection velocity of the smooth cases.
pub const SMOOTH_VELOCITY: (f64, f64) = (1.0, 0.5);

/// Density bump `1 + bump / 2` carried by a uniform flow at unit pressure.
pub fn smooth_euler_initial(model: &Euler, (vx, vy): (f64, f64), x: &Vec2) -> State<4> {
    model.conserved(1.0 + 0.5 * smooth_bump(x), vx, vy, 1.0)
}

/// Left and right primitive states and the split position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannData {
    pub left: [f64; 4],
    pub right: [f64; 4],
    pub split: f64,
}

impl Default for RiemannData {
    /// Sod's shock tube.
    fn default() -> Self {
        Self {
            left: [1.0, 0.0, 0.0, 1.0],
            right: [0.125, 0.0, 0.0, 0.1],
            split: 0.5,
        }
    }
}

impl RiemannData {
    pub fn initial(&self, model: &Euler, x: &Vec2) -> State<4> {
        let [r, u, v, p] = if x.x < self.split { self.left } else { self.right };
        model.conserved(r, u, v, p)
    }
}
