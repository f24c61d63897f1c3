//! Residual update of the point values.
//!
//! Residuals `Phi` are stored per `(element, ring position)` in flattened
//! ring order and are normalised by the dual area `|C_sigma|`, so the forward
//! Euler update reads `u_sigma - dt * sum_E Phi_sigma^E`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::geometry::Vec2;
use crate::physics::{Mat, Model, State};
use crate::scheme::{Order, Scheme};

/// Low- and high-order residuals of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResidualSet<const M: usize> {
    /// `alpha_E`, one per element (velocity times length).
    pub alpha: Vec<f64>,
    pub low: Vec<State<M>>,
    pub high: Vec<State<M>>,
    /// DOFs whose high-order residual could not be formed.
    pub fallback: Vec<bool>,
}

impl<const M: usize> PointResidualSet<M> {
    /// `Phi^H - Phi^LO` at flattened ring entry `k`.
    pub fn difference(&self, k: usize) -> State<M> {
        self.high[k] - self.low[k]
    }
}

fn spoke_midpoint(y: &Vec2, x: &Vec2) -> Vec2 {
    (y + x) * 0.5
}

/// `alpha_E`: bound of the Riemann speeds between the average and every ring value
/// across the spokes, evaluated with scaled spoke normals.
pub fn element_speed<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, field: &SolutionField<M>, e: usize) -> Result<f64> {
    let layout = scheme.layout();
    let y = scheme.mesh().elements()[e].star_point;
    let spokes = scheme.subtriangulation().spoke_normals(layout, e);
    let ring = layout
        .ring(e)
        .iter()
        .zip(layout.ring_points(e))
        .zip(spokes)
        .map(|((dof, x), s)| (&field.points[*dof], spoke_midpoint(&y, x), *s));
    let alpha = scheme.model.fan_speed(&field.averages[e], ring)?;
    if alpha.is_finite() {
        Ok(alpha)
    } else {
        Err(Error::NonFiniteSpeed)
    }
}

/// Neighbour term `(f(u_j) - f(ubar)) . n + alpha (ubar - u_j)` across spoke `j`.
fn spoke_term<const M: usize, P: Model<M>>(
    model: &P,
    ubar: &State<M>,
    u: &State<M>,
    xm: &Vec2,
    n: &Vec2,
    alpha: f64,
) -> Result<State<M>> {
    Ok(model.normal_flux(u, xm, n)? - model.normal_flux(ubar, xm, n)? + (ubar - u) * alpha)
}

/// The two neighbour terms of ring position `i`: towards `sigma_{i-1}` and `sigma_{i+1}`.
fn neighbour_terms<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    e: usize,
    i: usize,
    alpha: f64,
) -> Result<(State<M>, State<M>)> {
    let layout = scheme.layout();
    let n = layout.ring_len(e);
    let (prev, next) = ((i + n - 1) % n, (i + 1) % n);
    let y = scheme.mesh().elements()[e].star_point;
    let ring = layout.ring(e);
    let pts = layout.ring_points(e);
    let spokes = scheme.subtriangulation().spoke_normals(layout, e);
    let ubar = &field.averages[e];
    let lo = spoke_term(
        &scheme.model,
        ubar,
        &field.points[ring[prev]],
        &spoke_midpoint(&y, &pts[prev]),
        &-spokes[prev],
        alpha,
    )?;
    let hi = spoke_term(
        &scheme.model,
        ubar,
        &field.points[ring[next]],
        &spoke_midpoint(&y, &pts[next]),
        &spokes[next],
        alpha,
    )?;
    Ok((lo, hi))
}

/// Consolidated low-order residual of ring position `i` of element `e`.
pub fn low_order_residual<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    e: usize,
    i: usize,
    alpha: f64,
) -> Result<State<M>> {
    let (lo, hi) = neighbour_terms(scheme, field, e, i, alpha)?;
    let dof = scheme.layout().ring(e)[i];
    let u = &field.points[dof];
    let total = (lo + hi) / 6.0 + (u - field.averages[e]) * alpha;
    Ok(total / scheme.subtriangulation().dual_area(dof))
}

/// The same residual assembled as the sum of the two sub-triangle contributions
/// `T_{i-1}` and `T_i`, each carrying half of the central diffusion.
pub fn low_order_residual_split<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    e: usize,
    i: usize,
    alpha: f64,
) -> Result<State<M>> {
    let (lo, hi) = neighbour_terms(scheme, field, e, i, alpha)?;
    let dof = scheme.layout().ring(e)[i];
    let centre = (field.points[dof] - field.averages[e]) * (0.5 * alpha);
    let left = lo / 6.0 + centre;
    let right = hi / 6.0 + centre;
    Ok((left + right) / scheme.subtriangulation().dual_area(dof))
}

/// `u*_sigma^E = u_sigma - |C_sigma| / alpha_E * Phi^LO`.
pub fn intermediate_point_state<const M: usize>(u: &State<M>, low: &State<M>, dual_area: f64, alpha: f64) -> Result<State<M>> {
    if alpha > 0.0 {
        Ok(u - low * (dual_area / alpha))
    } else if low.iter().all(|c| *c == 0.0) {
        Ok(*u)
    } else {
        Err(Error::InvalidParameter("zero element speed with nonzero residual".into()))
    }
}

/// `u*` written as `1/3 R(ubar, u_{i-1}) + 1/3 ubar + 1/3 R(ubar, u_{i+1})` with
/// `R(a, b) = (a + b) / 2 - (f(b) - f(a)) . n / (2 alpha)`.
pub fn intermediate_point_state_flux_form<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    e: usize,
    i: usize,
    alpha: f64,
) -> Result<State<M>> {
    let layout = scheme.layout();
    let n = layout.ring_len(e);
    let (prev, next) = ((i + n - 1) % n, (i + 1) % n);
    let y = scheme.mesh().elements()[e].star_point;
    let ring = layout.ring(e);
    let pts = layout.ring_points(e);
    let spokes = scheme.subtriangulation().spoke_normals(layout, e);
    let ubar = field.averages[e];
    let riemann = |j: usize, nj: Vec2| -> Result<State<M>> {
        let u = field.points[ring[j]];
        let xm = spoke_midpoint(&y, &pts[j]);
        let df = scheme.model.normal_flux(&u, &xm, &nj)? - scheme.model.normal_flux(&ubar, &xm, &nj)?;
        Ok((ubar + u) * 0.5 - df / (2.0 * alpha))
    };
    Ok((riemann(prev, -spokes[prev])? + ubar + riemann(next, spokes[next])?) / 3.0)
}

/// Inverse of `m` if `|m|_F |m^-1|_F` does not exceed `max_condition`.
fn guarded_inverse<const M: usize>(m: &Mat<M>, max_condition: f64) -> Option<Mat<M>> {
    m.try_inverse().filter(|inv| m.norm() * inv.norm() <= max_condition)
}

/// Splitting weights `N_sigma K+_{sigma,E}` for every element around every DOF.
///
/// Returns the weights in flattened ring order and the per-DOF fallback flags.
fn splitting_weights<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, field: &SolutionField<M>) -> (Vec<Mat<M>>, Vec<bool>) {
    let layout = scheme.layout();
    let subtri = scheme.subtriangulation();
    let model = &scheme.model;
    let fix = scheme.options.entropy_fix;
    let positive = |u: &State<M>, x: &Vec2, n: &Vec2| -> Result<Mat<M>> {
        let delta = fix * model.spectral_radius(u, x)? * n.norm();
        model.regularized_positive_part(u, x, n, delta)
    };

    let mut kplus = vec![Mat::<M>::zeros(); layout.total_ring_len()];
    let mut sum = vec![Mat::<M>::zeros(); layout.num_points()];
    let mut failed = vec![false; layout.num_points()];
    for e in 0..layout.num_elements() {
        let o = layout.ring_offset(e);
        for (i, (&dof, x)) in layout.ring(e).iter().zip(layout.ring_points(e)).enumerate() {
            match positive(&field.points[dof], x, &subtri.dof_normal(layout, e, i)) {
                Ok(k) => {
                    kplus[o + i] = k;
                    sum[dof] += k;
                }
                Err(_) => failed[dof] = true,
            }
        }
    }
    for (dof, s) in sum.iter_mut().enumerate() {
        if subtri.is_boundary_dof(dof) {
            let x = layout.position(dof);
            match positive(&field.points[dof], &x, &-subtri.boundary_normal(dof)) {
                Ok(k) => *s += k,
                Err(_) => failed[dof] = true,
            }
        }
    }
    let inverse: Vec<Option<Mat<M>>> = sum
        .iter()
        .zip(&failed)
        .map(|(s, f)| if *f { None } else { guarded_inverse(s, scheme.options.max_condition) })
        .collect();
    let fallback: Vec<bool> = inverse.iter().map(Option::is_none).collect();
    for e in 0..layout.num_elements() {
        let o = layout.ring_offset(e);
        for (i, &dof) in layout.ring(e).iter().enumerate() {
            kplus[o + i] = match &inverse[dof] {
                Some(n) => n * kplus[o + i],
                None => Mat::zeros(),
            };
        }
    }
    (kplus, fallback)
}

/// `alpha_P`: largest spectral radius over the ring values and the average.
fn projector_speed<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, field: &SolutionField<M>, e: usize) -> Result<f64> {
    let layout = scheme.layout();
    let el = &scheme.mesh().elements()[e];
    let mut a = scheme.model.spectral_radius(&field.averages[e], &el.centroid)?;
    for (dof, x) in layout.ring(e).iter().zip(layout.ring_points(e)) {
        a = a.max(scheme.model.spectral_radius(&field.points[*dof], x)?);
    }
    Ok(a)
}

/// High-order residuals for every ring entry; entries at fallback DOFs are left at zero.
///
/// The splitting weights `N K+` act on the gradient term and on the projector
/// stabilization together, so a DOF is only relaxed towards upstream projections.
pub fn high_order_residuals<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
) -> Result<(Vec<State<M>>, Vec<bool>)> {
    let layout = scheme.layout();
    let (weights, mut fallback) = splitting_weights(scheme, field);
    let mut high = vec![State::<M>::zeros(); layout.total_ring_len()];
    let ex = Vec2::new(1.0, 0.0);
    let ey = Vec2::new(0.0, 1.0);
    for e in 0..layout.num_elements() {
        let o = layout.ring_offset(e);
        let proj = scheme.projector(e);
        let ring: Vec<State<M>> = layout.ring(e).iter().map(|d| field.points[*d]).collect();
        let avg = &field.averages[e];
        let stab = scheme.options.stabilization * projector_speed(scheme, field, e)? / scheme.mesh().elements()[e].diameter;
        let stabilization = proj.stabilizations(&ring, avg);
        for (i, (&dof, x)) in layout.ring(e).iter().zip(layout.ring_points(e)).enumerate() {
            if fallback[dof] {
                continue;
            }
            let u = &ring[i];
            let (gx, gy) = proj.ring_gradient(&ring, avg, i);
            let jac = scheme
                .model
                .jacobian_normal(u, x, &ex)
                .and_then(|jx| Ok(jx * gx + scheme.model.jacobian_normal(u, x, &ey)? * gy));
            match jac {
                Ok(div) => high[o + i] = weights[o + i] * (div + stabilization[i] * stab),
                Err(_) => fallback[dof] = true,
            }
        }
    }
    Ok((high, fallback))
}

/// All residuals of one stage.
pub fn point_residuals<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, field: &SolutionField<M>) -> Result<PointResidualSet<M>> {
    let layout = scheme.layout();
    let alpha = (0..layout.num_elements())
        .map(|e| element_speed(scheme, field, e))
        .collect::<Result<Vec<_>>>()?;
    let mut low = Vec::with_capacity(layout.total_ring_len());
    for (e, a) in alpha.iter().enumerate() {
        for i in 0..layout.ring_len(e) {
            low.push(low_order_residual(scheme, field, e, i, *a)?);
        }
    }
    let (mut high, fallback) = match scheme.options.order {
        Order::Low => (low.clone(), vec![false; layout.num_points()]),
        Order::High | Order::Blended => high_order_residuals(scheme, field)?,
    };
    if scheme.options.order == Order::High {
        if let Some(dof) = fallback.iter().position(|f| *f) {
            return Err(Error::DomainViolation(alloc::format!("high-order residual undefined at point {dof}")));
        }
    }
    for e in 0..layout.num_elements() {
        let o = layout.ring_offset(e);
        for (i, &dof) in layout.ring(e).iter().enumerate() {
            if fallback[dof] {
                high[o + i] = low[o + i];
            }
        }
    }
    Ok(PointResidualSet { alpha, low, high, fallback })
}

/// `theta` per ring entry.
pub fn point_thetas<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    res: &PointResidualSet<M>,
) -> Result<Vec<f64>> {
    let layout = scheme.layout();
    let subtri = scheme.subtriangulation();
    let mut theta = Vec::with_capacity(layout.total_ring_len());
    for e in 0..layout.num_elements() {
        let o = layout.ring_offset(e);
        let alpha = res.alpha[e];
        for (i, &dof) in layout.ring(e).iter().enumerate() {
            let k = o + i;
            let t = match scheme.options.order {
                Order::Low => 0.0,
                Order::High => 1.0,
                Order::Blended => {
                    let d = res.difference(k);
                    if d.iter().all(|c| *c == 0.0) {
                        1.0
                    } else if !(alpha > 0.0) {
                        0.0
                    } else {
                        let area = subtri.dual_area(dof);
                        let ustar = intermediate_point_state(&field.points[dof], &res.low[k], area, alpha)?;
                        scheme.model.theta(&scheme.domain, &ustar, &d, alpha / area)?
                    }
                }
            };
            theta.push(t);
        }
    }
    Ok(theta)
}

/// `dt * sum_E alpha_E / |C_sigma|` for every DOF.
pub fn point_cfl_numbers<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, res: &PointResidualSet<M>, dt: f64) -> Vec<f64> {
    let layout = scheme.layout();
    let mut sum = vec![0.0; layout.num_points()];
    for e in 0..layout.num_elements() {
        for &dof in layout.ring(e) {
            sum[dof] += res.alpha[e];
        }
    }
    sum.iter()
        .zip(scheme.subtriangulation().dual_areas())
        .map(|(s, c)| dt * s / c)
        .collect()
}

/// `u_sigma - dt * sum_E (Phi^LO + theta dPhi)`, gathered in element order.
pub fn assemble_point_update<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    res: &PointResidualSet<M>,
    theta: &[f64],
    dt: f64,
) -> Vec<State<M>> {
    let layout = scheme.layout();
    let mut acc = vec![State::<M>::zeros(); layout.num_points()];
    for e in 0..layout.num_elements() {
        let o = layout.ring_offset(e);
        for (i, &dof) in layout.ring(e).iter().enumerate() {
            let k = o + i;
            acc[dof] += res.low[k] + res.difference(k) * theta[k];
        }
    }
    field.points.iter().zip(acc).map(|(u, r)| u - r * dt).collect()
}

/// The same update as a combination of `u_sigma` and the blended intermediate states
/// `u* - theta |C_sigma| / alpha_E dPhi`.
pub fn convex_point_update<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    res: &PointResidualSet<M>,
    theta: &[f64],
    dt: f64,
) -> Result<Vec<State<M>>> {
    let layout = scheme.layout();
    let subtri = scheme.subtriangulation();
    let mut weight = vec![0.0; layout.num_points()];
    let mut acc = vec![State::<M>::zeros(); layout.num_points()];
    for e in 0..layout.num_elements() {
        let o = layout.ring_offset(e);
        let alpha = res.alpha[e];
        for (i, &dof) in layout.ring(e).iter().enumerate() {
            let k = o + i;
            let area = subtri.dual_area(dof);
            if alpha > 0.0 {
                let ustar = intermediate_point_state(&field.points[dof], &res.low[k], area, alpha)?;
                let blended = ustar - res.difference(k) * (theta[k] * area / alpha);
                let w = dt * alpha / area;
                weight[dof] += w;
                acc[dof] += blended * w;
            } else {
                acc[dof] -= (res.low[k] + res.difference(k) * theta[k]) * dt;
            }
        }
    }
    Ok(field
        .points
        .iter()
        .zip(weight.iter().zip(acc))
        .map(|(u, (w, a))| u * (1.0 - w) + a)
        .collect())
}
