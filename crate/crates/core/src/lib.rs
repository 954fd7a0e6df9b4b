//! Central configurations of the Newtonian n-body problem in mutual-distance
//! coordinates: the five-body isosceles-trapezoid system and the collinear case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod collinear;
pub mod constraints;
pub mod distgeo;
pub mod energetics;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod report;
pub mod trapezoid5;

pub use distgeo::{DistanceVector, PlanarConfiguration};
pub use energetics::{MassVector, MultiplierSet};
pub use error::{Error, Result};
