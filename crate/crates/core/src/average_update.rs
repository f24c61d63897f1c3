//! Conservative update of the cell averages.
//!
//! Fluxes are stored once per face, per unit length, along the unit normal
//! pointing from the left element to the right one.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::geometry::LOBATTO_WEIGHTS;
use crate::physics::{Model, State};
use crate::scheme::{Order, Scheme};

#[derive(Debug, Clone, PartialEq)]
pub struct FaceFluxSet<const M: usize> {
    /// `alpha_f`, one per face (velocity).
    pub alpha: Vec<f64>,
    pub low: Vec<State<M>>,
    pub high: Vec<State<M>>,
    /// Faces where the quadrature flux could not be evaluated.
    pub failed: Vec<bool>,
}

impl<const M: usize> FaceFluxSet<M> {
    pub fn difference(&self, f: usize) -> State<M> {
        self.high[f] - self.low[f]
    }
}

/// Face speed bound and Rusanov flux.
pub fn low_order_face_flux<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, field: &SolutionField<M>, f: usize) -> Result<(f64, State<M>)> {
    let face = &scheme.mesh().faces()[f];
    let ul = &field.averages[face.left];
    let ur = scheme.right_state(field, f);
    let (x, n) = (&face.midpoint, &face.normal);
    let alpha = scheme.model.max_speed(ul, &ur, x, n)?;
    if !alpha.is_finite() {
        return Err(Error::NonFiniteSpeed);
    }
    let flux = (scheme.model.normal_flux(ul, x, n)? + scheme.model.normal_flux(&ur, x, n)?) * 0.5 - (ur - ul) * (0.5 * alpha);
    Ok((alpha, flux))
}

/// Simpson rule on the three point values of the face.
pub fn high_order_face_flux<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, field: &SolutionField<M>, f: usize) -> Result<State<M>> {
    let n = &scheme.mesh().faces()[f].normal;
    let dofs = scheme.layout().face_dofs(f);
    let pts = scheme.layout().face_points(f);
    dofs.iter()
        .zip(&pts)
        .zip(LOBATTO_WEIGHTS)
        .try_fold(State::zeros(), |acc, ((d, x), w)| Ok(acc + scheme.model.normal_flux(&field.points[*d], x, n)? * w))
}

/// `(u_L + u_R) / 2 - (f(u_R) - f(u_L)) . n / (2 alpha_f)`.
pub fn intermediate_face_state<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    f: usize,
    alpha: f64,
) -> Result<State<M>> {
    let face = &scheme.mesh().faces()[f];
    let ul = &field.averages[face.left];
    let ur = scheme.right_state(field, f);
    let mean = (ul + ur) * 0.5;
    if alpha > 0.0 {
        let (x, n) = (&face.midpoint, &face.normal);
        let df = scheme.model.normal_flux(&ur, x, n)? - scheme.model.normal_flux(ul, x, n)?;
        Ok(mean - df / (2.0 * alpha))
    } else if ur == *ul {
        Ok(mean)
    } else {
        Err(Error::InvalidParameter(alloc::format!("face {f}: zero speed bound between distinct states")))
    }
}

pub fn face_fluxes<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, field: &SolutionField<M>) -> Result<FaceFluxSet<M>> {
    let nf = scheme.mesh().num_faces();
    let mut set = FaceFluxSet {
        alpha: Vec::with_capacity(nf),
        low: Vec::with_capacity(nf),
        high: Vec::with_capacity(nf),
        failed: vec![false; nf],
    };
    for f in 0..nf {
        let (alpha, low) = low_order_face_flux(scheme, field, f)?;
        let high = match scheme.options.order {
            Order::Low => low,
            Order::High => high_order_face_flux(scheme, field, f)?,
            Order::Blended => high_order_face_flux(scheme, field, f).unwrap_or_else(|_| {
                set.failed[f] = true;
                low
            }),
        };
        set.alpha.push(alpha);
        set.low.push(low);
        set.high.push(high);
    }
    Ok(set)
}

/// `theta_f`: interior faces are limited for both neighbours, boundary faces for the left one.
pub fn face_thetas<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, field: &SolutionField<M>, fluxes: &FaceFluxSet<M>) -> Result<Vec<f64>> {
    (0..scheme.mesh().num_faces())
        .map(|f| match scheme.options.order {
            Order::Low => Ok(0.0),
            Order::High => Ok(1.0),
            Order::Blended => {
                let d = fluxes.difference(f);
                let alpha = fluxes.alpha[f];
                if fluxes.failed[f] {
                    return Ok(0.0);
                }
                if d.iter().all(|c| *c == 0.0) {
                    return Ok(1.0);
                }
                if !(alpha > 0.0) {
                    return Ok(0.0);
                }
                let ustar = intermediate_face_state(scheme, field, f, alpha)?;
                let left = scheme.model.theta(&scheme.domain, &ustar, &d, alpha)?;
                if scheme.mesh().faces()[f].is_boundary() {
                    Ok(left)
                } else {
                    Ok(left.min(scheme.model.theta(&scheme.domain, &ustar, &-d, alpha)?))
                }
            }
        })
        .collect()
}

/// `dt * sum_f |f| alpha_f / |E|` for every element.
pub fn average_cfl_numbers<const M: usize, P: Model<M>>(scheme: &Scheme<M, P>, fluxes: &FaceFluxSet<M>, dt: f64) -> Vec<f64> {
    let mesh = scheme.mesh();
    let mut sum = vec![0.0; mesh.num_elements()];
    for (face, a) in mesh.faces().iter().zip(&fluxes.alpha) {
        sum[face.left] += face.length * a;
        if let Some(r) = face.right_element() {
            sum[r] += face.length * a;
        }
    }
    sum.iter().zip(mesh.elements()).map(|(s, el)| dt * s / el.area).collect()
}

/// `u_E - dt / |E| sum_f |f| (F^LO + theta dF)`, each face flux signed by orientation.
pub fn assemble_average_update<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    fluxes: &FaceFluxSet<M>,
    theta: &[f64],
    dt: f64,
) -> Vec<State<M>> {
    let mesh = scheme.mesh();
    let mut acc = vec![State::<M>::zeros(); mesh.num_elements()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let flux = (fluxes.low[f] + fluxes.difference(f) * theta[f]) * face.length;
        acc[face.left] += flux;
        if let Some(r) = face.right_element() {
            acc[r] -= flux;
        }
    }
    field
        .averages
        .iter()
        .zip(acc)
        .zip(mesh.elements())
        .map(|((u, a), el)| u - a * (dt / el.area))
        .collect()
}

/// The same update as a combination of `u_E` and the blended face states
/// `u^{f*} -+ theta dF / alpha_f`.
pub fn convex_average_update<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    field: &SolutionField<M>,
    fluxes: &FaceFluxSet<M>,
    theta: &[f64],
    dt: f64,
) -> Result<Vec<State<M>>> {
    let mesh = scheme.mesh();
    let mut weight = vec![0.0; mesh.num_elements()];
    let mut acc = vec![State::<M>::zeros(); mesh.num_elements()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let alpha = fluxes.alpha[f];
        let d = fluxes.difference(f) * theta[f];
        let sides = [(face.left, 1.0)].into_iter().chain(face.right_element().map(|r| (r, -1.0)));
        if alpha > 0.0 {
            let ustar = intermediate_face_state(scheme, field, f, alpha)?;
            for (e, sign) in sides {
                let w = dt * face.length * alpha / mesh.elements()[e].area;
                weight[e] += w;
                acc[e] += (ustar - d * (sign / alpha)) * w;
            }
        } else {
            // no diffusion: only the central and high-order parts remain
            for (e, sign) in sides {
                let u = &field.averages[e];
                let central = scheme.model.normal_flux(u, &face.midpoint, &face.normal)?;
                let flux = (fluxes.low[f] - central + d) * sign;
                acc[e] -= flux * (dt * face.length / mesh.elements()[e].area);
            }
        }
    }
    Ok(field
        .averages
        .iter()
        .zip(weight.iter().zip(acc))
        .map(|(u, (w, a))| u * (1.0 - w) + a)
        .collect())
}
