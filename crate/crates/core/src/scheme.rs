//! The discretisation: geometry, projectors, model, boundary data and options.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Location, Result};
use crate::field::SolutionField;
use crate::mesh::{DofLayout, FaceSide, PolyMesh, SubTriangulation};
use crate::physics::{Model, State};
use crate::vem::{build_projectors, ElementProjector};

/// Which update is used for points and averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    /// Low-order residuals and Rusanov fluxes only (`theta = 0`).
    Low,
    /// High-order residuals and fluxes without limiting (`theta = 1`).
    High,
    /// Convex blending with `theta` from the limiters.
    #[default]
    Blended,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOptions {
    pub order: Order,
    /// Multiplier of the projector stabilisation `alpha_P / h_P (u - pi u)`.
    pub stabilization: f64,
    /// Relative width of the eigenvalue smoothing in the high-order splitting.
    pub entropy_fix: f64,
    /// Condition number of `N_sigma^-1` above which a DOF falls back to low order.
    pub max_condition: f64,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            order: Order::Blended,
            stabilization: 1.0,
            entropy_fix: 0.1,
            max_condition: 1e12,
        }
    }
}

/// Ghost state on a domain-boundary face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition<const M: usize> {
    /// Copy of the interior average.
    Transmissive,
    Dirichlet(State<M>),
}

/// A conservation law discretised on a polygonal mesh.
#[derive(Debug, Clone)]
pub struct Scheme<const M: usize, P: Model<M>> {
    mesh: PolyMesh,
    layout: DofLayout,
    subtri: SubTriangulation,
    projectors: Vec<ElementProjector>,
    pub model: P,
    pub domain: P::Domain,
    pub options: SchemeOptions,
    boundary: BTreeMap<u32, BoundaryCondition<M>>,
    pub default_boundary: BoundaryCondition<M>,
}

impl<const M: usize, P: Model<M>> Scheme<M, P> {
    pub fn new(mesh: PolyMesh, model: P, domain: P::Domain, options: SchemeOptions) -> Result<Self> {
        let layout = DofLayout::new(&mesh);
        let subtri = SubTriangulation::new(&mesh, &layout)?;
        let projectors = build_projectors(&mesh, &layout)?;
        Ok(Self {
            mesh,
            layout,
            subtri,
            projectors,
            model,
            domain,
            options,
            boundary: BTreeMap::new(),
            default_boundary: BoundaryCondition::Transmissive,
        })
    }

    /// Sets the ghost state for boundary faces with `tag`.
    pub fn set_boundary(&mut self, tag: u32, bc: BoundaryCondition<M>) {
        self.boundary.insert(tag, bc);
    }

    pub fn mesh(&self) -> &PolyMesh {
        &self.mesh
    }

    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }

    pub fn subtriangulation(&self) -> &SubTriangulation {
        &self.subtri
    }

    pub fn projector(&self, e: usize) -> &ElementProjector {
        &self.projectors[e]
    }

    /// State behind face `f` as seen from its left element.
    pub fn right_state(&self, field: &SolutionField<M>, f: usize) -> State<M> {
        let face = &self.mesh.faces()[f];
        match face.right {
            FaceSide::Element { element, .. } => field.averages[element],
            FaceSide::Boundary { tag } => match self.boundary.get(&tag).unwrap_or(&self.default_boundary) {
                BoundaryCondition::Transmissive => field.averages[face.left],
                BoundaryCondition::Dirichlet(u) => *u,
            },
        }
    }

    /// Interpolates `u0` at the DOFs and averages it over each element.
    pub fn initial_field(&self, u0: impl Fn(&crate::geometry::Vec2) -> State<M>) -> SolutionField<M> {
        SolutionField::from_fn(&self.mesh, &self.layout, u0)
    }

    /// First DOF or average outside the invariant domain.
    pub fn find_violation(&self, field: &SolutionField<M>) -> Option<Location> {
        if let Some(i) = field.points.iter().position(|u| !self.model.contains(&self.domain, u)) {
            return Some(Location::Point(i));
        }
        field
            .averages
            .iter()
            .position(|u| !self.model.contains(&self.domain, u))
            .map(Location::Average)
    }

    pub(crate) fn check_admissible(&self, field: &SolutionField<M>, stage: usize) -> Result<()> {
        let violation = match self.options.order {
            Order::High => field
                .states()
                .position(|u| !u.iter().all(|c| c.is_finite()))
                .map(|i| if i < field.points.len() { Location::Point(i) } else { Location::Average(i - field.points.len()) }),
            Order::Low | Order::Blended => self.find_violation(field),
        };
        match violation {
            Some(location) => Err(Error::Admissibility { location, stage }),
            None => Ok(()),
        }
    }
}
