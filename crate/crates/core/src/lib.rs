#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod average_update;
pub mod blend;
pub mod error;
pub mod field;
pub mod geometry;
pub mod mesh;
pub mod physics;
pub mod point_update;
pub mod scheme;
pub mod time;
pub mod vem;

pub use error::{Error, Result};
pub use geometry::Vec2;
pub use field::SolutionField;
pub use scheme::{BoundaryCondition, Order, Scheme, SchemeOptions};
