//! Shared fixtures for the benchmarks.

use pcd_core::simulation::rng::replicate_rng;
use pcd_core::simulation::{sample_uniform_hull, sample_unit_square};
use pcd_core::{delaunay_triangulate, Point2, Triangulation};

/// `m` reference points on the unit square and their triangulation.
pub fn reference(m: usize, seed: u64) -> (Vec<Point2>, Triangulation) {
    let y = sample_unit_square(m, &mut replicate_rng(seed, 0, 0));
    let tri = delaunay_triangulate(&y).expect("random points are in general position");
    (y, tri)
}

/// `n` uniform target points inside the hull of `tri`.
pub fn targets(tri: &Triangulation, n: usize, seed: u64) -> Vec<Point2> {
    sample_uniform_hull(tri, n, &mut replicate_rng(seed, 1, 0))
}
