//! Orientation and in-circle tests with adaptive exact arithmetic.

use robust::Coord;

use super::Point2;

fn c(p: Point2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Positive when `a, b, c` turn counterclockwise, zero when collinear.
/// The sign is exact.
pub fn orient2d(a: Point2, b: Point2, p: Point2) -> f64 {
    robust::orient2d(c(a), c(b), c(p))
}

/// Positive when `d` lies strictly inside the circumcircle of the
/// counterclockwise triangle `a, b, c`; zero when cocircular. The sign is exact.
pub fn incircle(a: Point2, b: Point2, cc: Point2, d: Point2) -> f64 {
    robust::incircle(c(a), c(b), c(cc), c(d))
}
