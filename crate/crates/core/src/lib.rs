//! Exact decision procedures and certificates for surfaces in graph manifolds.

pub mod covers;
pub mod decision;
pub mod generate;
pub mod input;
pub mod linalg;
pub mod manifold;
pub mod rational;
pub mod reduction;
pub mod report;
pub mod surface;
