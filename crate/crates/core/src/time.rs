//! Time-step selection and SSP Runge-Kutta stepping.

use alloc::vec;
use alloc::vec::Vec;

use crate::average_update::{assemble_average_update, average_cfl_numbers, face_fluxes, face_thetas, low_order_face_flux};
use crate::blend::BlendReport;
use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::physics::Model;
use crate::point_update::{assemble_point_update, element_speed, point_cfl_numbers, point_residuals, point_thetas};
use crate::scheme::Scheme;

/// Which constraint fixed the time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Points,
    Averages,
    /// Clipped to reach the final time.
    FinalTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStep {
    pub dt: f64,
    pub constraint: Constraint,
}

/// Largest stable step scaled by `cfl`:
/// `cfl * min(min_sigma |C_sigma| / sum_E alpha_E, min_E |E| / sum_f |f| alpha_f)`.
pub fn compute_dt<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, field: &SolutionField<M>, cfl: f64) -> Result<TimeStep> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("CFL number {cfl} outside (0, 1]")));
    }
    let layout = scheme.layout();
    let mesh = scheme.mesh();
    let mut point_sum = vec![0.0; layout.num_points()];
    for e in 0..mesh.num_elements() {
        let a = element_speed(scheme, field, e)?;
        for &dof in layout.ring(e) {
            point_sum[dof] += a;
        }
    }
    let mut avg_sum = vec![0.0; mesh.num_elements()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let (a, _) = low_order_face_flux(scheme, field, f)?;
        avg_sum[face.left] += face.length * a;
        if let Some(r) = face.right_element() {
            avg_sum[r] += face.length * a;
        }
    }
    let bound = |sums: &[f64], measures: &mut dyn Iterator<Item = f64>| {
        sums.iter().zip(measures).fold(f64::INFINITY, |m, (s, c)| if *s > 0.0 { m.min(c / s) } else { m })
    };
    let tp = bound(&point_sum, &mut scheme.subtriangulation().dual_areas().iter().copied());
    let ta = bound(&avg_sum, &mut mesh.elements().iter().map(|el| el.area));
    let (t, constraint) = if tp <= ta { (tp, Constraint::Points) } else { (ta, Constraint::Averages) };
    if t.is_nan() {
        return Err(Error::NonFiniteSpeed);
    }
    Ok(TimeStep { dt: cfl * t, constraint })
}

/// One forward Euler step: residuals, fluxes, blending coefficients and the two updates.
///
/// Fails with [`Error::CflViolation`] when `dt` exceeds the positivity bound of this
/// stage's own speeds, and with [`Error::Admissibility`] if the result leaves the domain.
pub fn euler_forward_step<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    dt: f64,
    stage: usize,
) -> Result<(SolutionField<M>, BlendReport)> {
    let res = point_residuals(scheme, field)?;
    let fluxes = face_fluxes(scheme, field)?;
    let worst = point_cfl_numbers(scheme, &res, dt)
        .into_iter()
        .chain(average_cfl_numbers(scheme, &fluxes, dt))
        .fold(0.0, f64::max);
    if worst > 1.0 {
        return Err(Error::CflViolation { dt, bound: dt / worst });
    }
    let point_theta = point_thetas(scheme, field, &res)?;
    let face_theta = face_thetas(scheme, field, &fluxes)?;
    let next = SolutionField {
        points: assemble_point_update(scheme, field, &res, &point_theta, dt),
        averages: assemble_average_update(scheme, field, &fluxes, &face_theta, dt),
    };
    scheme.check_admissible(&next, stage)?;
    let fallbacks = scheme
        .layout()
        .positions()
        .iter()
        .enumerate()
        .filter(|(d, _)| res.fallback[*d])
        .map(|(d, _)| scheme.layout().incidence(d).len())
        .sum();
    Ok((next, BlendReport { face_theta, point_theta, fallbacks }))
}

/// Shu-Osher SSP-RK3. `observer` sees every stage result with its blending report.
pub fn ssprk3_step<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    dt: f64,
    mut observer: impl FnMut(usize, &SolutionField<M>, &BlendReport),
) -> Result<SolutionField<M>> {
    let (f1, r1) = euler_forward_step(scheme, field, dt, 1)?;
    let u1 = f1;
    observer(1, &u1, &r1);
    let (f2, r2) = euler_forward_step(scheme, &u1, dt, 2)?;
    let u2 = field.combine(0.75, &f2, 0.25);
    scheme.check_admissible(&u2, 2)?;
    observer(2, &u2, &r2);
    let (f3, r3) = euler_forward_step(scheme, &u2, dt, 3)?;
    let u3 = field.combine(1.0 / 3.0, &f3, 2.0 / 3.0);
    scheme.check_admissible(&u3, 3)?;
    observer(3, &u3, &r3);
    Ok(u3)
}

/// Step-size policy of [`advance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepController {
    pub cfl: f64,
    /// Halvings of `dt` allowed when a stage violates its own CFL bound.
    pub max_retries: usize,
}

impl Default for StepController {
    fn default() -> Self {
        Self { cfl: 0.4, max_retries: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub constraint: Constraint,
    pub retries: usize,
    /// Blending reports of the three stages.
    pub stages: Vec<BlendReport>,
}

impl StepReport {
    pub fn min_theta(&self) -> f64 {
        self.stages.iter().map(BlendReport::min_theta).fold(1.0, f64::min)
    }

    pub fn activations(&self) -> usize {
        self.stages.iter().map(BlendReport::activations).sum()
    }

    pub fn fallbacks(&self) -> usize {
        self.stages.iter().map(|r| r.fallbacks).sum()
    }
}

/// One SSP-RK3 step from time `t`, never past `t_final`.
pub fn advance<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    t: f64,
    t_final: f64,
    controller: &StepController,
    mut observer: impl FnMut(usize, &SolutionField<M>, &BlendReport),
) -> Result<(SolutionField<M>, StepReport)> {
    let mut step = compute_dt(scheme, field, controller.cfl)?;
    if t + step.dt >= t_final {
        step = TimeStep { dt: t_final - t, constraint: Constraint::FinalTime };
    }
    if !(step.dt > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("time step {} at t = {t}", step.dt)));
    }
    let mut retries = 0;
    loop {
        let mut stages = Vec::with_capacity(3);
        let mut seen = Vec::with_capacity(3);
        let result = ssprk3_step(scheme, field, step.dt, |s, u, r| {
            stages.push(r.clone());
            seen.push((s, u.clone()));
        });
        match result {
            Ok(next) => {
                for ((s, u), r) in seen.iter().zip(&stages) {
                    observer(*s, u, r);
                }
                return Ok((
                    next,
                    StepReport {
                        dt: step.dt,
                        constraint: step.constraint,
                        retries,
                        stages,
                    },
                ));
            }
            Err(Error::CflViolation { .. }) if retries < controller.max_retries => {
                retries += 1;
                step.dt *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
}
