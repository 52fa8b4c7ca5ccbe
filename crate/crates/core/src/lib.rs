//! Proportional-edge proximity catch digraphs over a Delaunay triangulation,
//! their domination number, and the resulting tests of complete spatial
//! randomness against segregation and association.
//!
//! The pipeline is: triangulate the reference points `Y`
//! ([`geometry::delaunay_triangulate`]), build one digraph per triangle from
//! the target points `X` ([`pcd::build_pcd`]), take the domination number
//! ([`pcd::domination_number`]) and compare it with its null distribution
//! ([`inference::run_test`]).

pub mod distribution;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod io;
pub mod pcd;
pub mod quadrature;
pub mod simulation;

pub use error::{ErrorClass, PcdError, Result};
pub use pcd::{domination_number, DominationResult, Expansion, PcdParams};
pub use geometry::{
    delaunay_triangulate, Barycentric, CenterSpec, Point2, Triangle, Triangulation,
};
