use super::predicates::orient2d;
use super::Point2;
use crate::error::{PcdError, Result};

/// Convex hull as counterclockwise vertex indices (monotone chain), starting
/// at the lexicographically smallest point. Collinear boundary points are
/// dropped.
pub fn convex_hull(points: &[Point2]) -> Result<Vec<usize>> {
    if points.len() < 3 {
        return Err(PcdError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(PcdError::NonFinite(i));
    }
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].lex_cmp(&points[b]).then(a.cmp(&b)));
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return Err(PcdError::CollinearInput);
    }

    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for &i in idx.iter() {
        while hull.len() >= 2
            && orient2d(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= 0.0
        {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in idx.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && orient2d(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= 0.0
        {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    if hull.len() < 3 {
        return Err(PcdError::CollinearInput);
    }
    Ok(hull)
}

/// Shoelace area of a simple polygon (positive when counterclockwise).
pub fn polygon_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Closed containment in a counterclockwise convex polygon.
pub fn point_in_convex_polygon(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    (0..n).all(|i| orient2d(poly[i], poly[(i + 1) % n], p) >= 0.0)
}
