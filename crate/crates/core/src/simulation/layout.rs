//! Reference point layouts.

use crate::geometry::Point2;
use crate::io::parse_points;

const FROZEN_Y10: &str = include_str!("../../data/frozen_y10.csv");

/// Frozen layout of 10 reference points (5 on the hull) whose Delaunay
/// triangulation has 13 triangles.
pub fn frozen_y10() -> Vec<Point2> {
    parse_points(FROZEN_Y10.as_bytes()).expect("bundled layout parses")
}
