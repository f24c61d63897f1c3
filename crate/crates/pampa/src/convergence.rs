//! Mesh-refinement studies for smooth periodic advection.

use pampa_core::mesh::{CellKind, DofLayout, PolyMesh, Rectangle, StructuredGrid};
use pampa_core::physics::{Advection, Bounds, State};
use pampa_core::time::StepController;
use pampa_core::{Order, Scheme, SchemeOptions, SolutionField, Vec2};

use crate::cases::{smooth_bump, smooth_bump_bounds};
use crate::error::{io_err, Result};
use crate::run::{simulate, RunControl};

/// Discrete L1, L2 and max norms of an error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl Norms {
    /// Norms of `(error, weight)` pairs; weights are normalised by their sum.
    pub fn weighted(errors: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let (mut l1, mut l2, mut linf, mut total) = (0.0, 0.0, 0.0f64, 0.0);
        for (e, w) in errors {
            l1 += w * e.abs();
            l2 += w * e * e;
            linf = linf.max(e.abs());
            total += w;
        }
        Self { l1: l1 / total, l2: (l2 / total).sqrt(), linf }
    }

    /// Observed orders `log(e_coarse / e_fine) / log(h_coarse / h_fine)`.
    pub fn orders(coarse: &Self, fine: &Self, refinement: f64) -> Self {
        let o = |a: f64, b: f64| (a / b).ln() / refinement.ln();
        Self { l1: o(coarse.l1, fine.l1), l2: o(coarse.l2, fine.l2), linf: o(coarse.linf, fine.linf) }
    }
}

/// Errors on one mesh of a study, with orders against the previous mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub h: f64,
    pub steps: usize,
    pub averages: Norms,
    pub points: Norms,
    pub average_orders: Option<Norms>,
    pub point_orders: Option<Norms>,
}

/// Setup of a refinement study on `[0,1]^2` with periodic boundaries.
#[derive(Debug, Clone)]
pub struct Study {
    pub cells: CellKind,
    pub order: Order,
    pub cfl: f64,
    pub t_final: f64,
    pub velocity: Vec2,
    pub stabilization: f64,
}

impl Default for Study {
    fn default() -> Self {
        Self {
            cells: CellKind::Tri,
            order: Order::Blended,
            cfl: 0.4,
            t_final: 1.0,
            velocity: Vec2::new(1.0, 0.5),
            stabilization: SchemeOptions::default().stabilization,
        }
    }
}

/// Error norms of `field` against `exact`: point values pointwise,
/// averages against exact cell averages, both weighted by area.
pub fn field_errors(mesh: &PolyMesh, layout: &DofLayout, field: &SolutionField<1>, exact: impl Fn(&Vec2) -> f64) -> (Norms, Norms) {
    let reference = SolutionField::from_fn(mesh, layout, |x| State::<1>::new(exact(x)));
    let averages = Norms::weighted(
        field
            .averages
            .iter()
            .zip(&reference.averages)
            .zip(mesh.elements())
            .map(|((u, r), el)| (u[0] - r[0], el.area)),
    );
    // every DOF gets the mean area of its incident elements
    let mut weight = vec![0.0; layout.num_points()];
    for (e, el) in mesh.elements().iter().enumerate() {
        let ring = layout.ring(e);
        for d in ring {
            weight[*d] += el.area / ring.len() as f64;
        }
    }
    let points = Norms::weighted(
        field
            .points
            .iter()
            .zip(&reference.points)
            .zip(weight)
            .map(|((u, r), w)| (u[0] - r[0], w)),
    );
    (averages, points)
}

impl Study {
    fn exact(&self, t: f64) -> impl Fn(&Vec2) -> f64 + '_ {
        move |x: &Vec2| smooth_bump(&(x - self.velocity * t))
    }

    /// Runs the smooth bump on an `n x n` periodic grid.
    pub fn run_one(&self, n: usize) -> Result<StudyRow> {
        let mesh = StructuredGrid::new(n, n, Rectangle::square(0.0, 1.0), self.cells).periodic().build()?;
        let (lo, hi) = smooth_bump_bounds();
        let options = SchemeOptions { order: self.order, stabilization: self.stabilization, ..SchemeOptions::default() };
        let scheme = Scheme::new(mesh, Advection::uniform(self.velocity.x, self.velocity.y), Bounds::new(lo, hi), options)?;
        let field = scheme.initial_field(|x| State::<1>::new(self.exact(0.0)(x)));
        let control = RunControl {
            t_final: self.t_final,
            controller: StepController { cfl: self.cfl, ..StepController::default() },
            max_steps: None,
            output: None,
        };
        let (end, diag, _) = simulate(&scheme, field, &control, None)?;
        let (averages, points) = field_errors(scheme.mesh(), scheme.layout(), &end, self.exact(self.t_final));
        Ok(StudyRow {
            n,
            h: 1.0 / n as f64,
            steps: diag.steps.len(),
            averages,
            points,
            average_orders: None,
            point_orders: None,
        })
    }

    /// Runs every mesh size and fills in the observed orders.
    pub fn run(&self, sizes: &[usize]) -> Result<Vec<StudyRow>> {
        let mut rows: Vec<StudyRow> = Vec::with_capacity(sizes.len());
        for &n in sizes {
            let mut row = self.run_one(n)?;
            if let Some(prev) = rows.last() {
                let r = prev.h / row.h;
                row.average_orders = Some(Norms::orders(&prev.averages, &row.averages, r));
                row.point_orders = Some(Norms::orders(&prev.points, &row.points, r));
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

/// Writes the order table as CSV; orders of the first row are left empty.
pub fn write_table<W: std::io::Write>(rows: &[StudyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n", "h", "steps", "avg_l1", "avg_l2", "avg_linf", "avg_order_l1", "avg_order_l2", "avg_order_linf", "pt_l1", "pt_l2",
        "pt_linf", "pt_order_l1", "pt_order_l2", "pt_order_linf",
    ])?;
    let f = |x: f64| format!("{x:e}");
    let o = |n: Option<Norms>| -> [String; 3] {
        match n {
            Some(n) => [format!("{:.3}", n.l1), format!("{:.3}", n.l2), format!("{:.3}", n.linf)],
            None => Default::default(),
        }
    };
    for r in rows {
        let mut rec = vec![r.n.to_string(), f(r.h), r.steps.to_string(), f(r.averages.l1), f(r.averages.l2), f(r.averages.linf)];
        rec.extend(o(r.average_orders));
        rec.extend([f(r.points.l1), f(r.points.l2), f(r.points.linf)]);
        rec.extend(o(r.point_orders));
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err("convergence table"))?;
    Ok(())
}
