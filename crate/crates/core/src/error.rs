use alloc::string::String;

/// Errors raised by the core solver.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("vertex index {index} out of range in polygon {element}")]
    InvalidIndex { element: usize, index: usize },
    #[error("polygon {element} has fewer than 3 vertices")]
    TooFewVertices { element: usize },
    #[error("polygon {element} is degenerate (area {area:e})")]
    DegenerateElement { element: usize, area: f64 },
    #[error("polygon {element} is not star-shaped with respect to its centroid")]
    NotStarShaped { element: usize },
    #[error("edge ({a}, {b}) is shared by more than two polygons")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("boundary tag given for ({a}, {b}), which is not a boundary edge of the mesh")]
    DanglingFace { a: usize, b: usize },
    #[error("empty domain: {0}")]
    EmptyDomain(String),
    #[error("singular local projector system on element {element}")]
    SingularProjector { element: usize },
    #[error("state outside the invariant domain: {0}")]
    DomainViolation(String),
    #[error("quadratic form A is not positive definite")]
    NotPositiveDefinite,
    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("non-finite wave speed")]
    NonFiniteSpeed,
    #[error("{location} left the invariant domain at stage {stage}")]
    Admissibility { location: Location, stage: usize },
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
}

/// Where an admissibility failure was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Point(usize),
    Average(usize),
}

impl core::fmt::Display for Location {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Location::Point(i) => write!(f, "point value {i}"),
            Location::Average(i) => write!(f, "average of element {i}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
