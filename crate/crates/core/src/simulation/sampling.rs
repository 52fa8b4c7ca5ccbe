//! Point pattern generators: complete spatial randomness on the convex hull
//! and the segregation and association alternatives.
//!
//! Alternatives are defined in the standard equilateral triangle and carried
//! to every Delaunay triangle through barycentric coordinates. With altitude
//! `h = √3/2`, a point at height fraction `1 - b_i` from vertex `i` lies at
//! distance `(1 - b_i) h` from it, so:
//!
//! * segregation `H^S_ε` removes the three corners within distance `ε` of a
//!   vertex, keeping `b_i ≤ 1 - 2ε/√3` for all `i`;
//! * association `H^A_ε` keeps only those corners at level `√3/3 - ε`,
//!   i.e. `b_i ≥ 1/3 + 2ε/√3` for some `i`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PcdError, Result};
use crate::geometry::{Barycentric, Point2, Triangle, Triangulation, EQUILATERAL};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Upper limit (exclusive) of `ε` for both alternatives.
pub const EPSILON_MAX: f64 = SQRT3 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlternativeSpec {
    Csr,
    Segregation { epsilon: f64 },
    Association { epsilon: f64 },
}

impl AlternativeSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AlternativeSpec::Csr => Ok(()),
            AlternativeSpec::Segregation { epsilon } | AlternativeSpec::Association { epsilon } => {
                if epsilon > 0.0 && epsilon < EPSILON_MAX {
                    Ok(())
                } else {
                    Err(PcdError::EpsilonOutOfRange(epsilon))
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            AlternativeSpec::Csr => "csr".into(),
            AlternativeSpec::Segregation { epsilon } => format!("segregation(eps={epsilon})"),
            AlternativeSpec::Association { epsilon } => format!("association(eps={epsilon})"),
        }
    }

    /// Whether a point with barycentric coordinates `b` lies in the support.
    pub fn in_support(&self, b: &Barycentric, tol: f64) -> bool {
        match *self {
            AlternativeSpec::Csr => b.min() >= -tol,
            AlternativeSpec::Segregation { epsilon } => {
                let c = 1.0 - 2.0 * epsilon / SQRT3;
                b.min() >= -tol && b.0.iter().all(|&w| w <= c + tol)
            }
            AlternativeSpec::Association { epsilon } => {
                let c = 1.0 / 3.0 + 2.0 * epsilon / SQRT3;
                b.min() >= -tol && b.0.iter().any(|&w| w >= c - tol)
            }
        }
    }

    /// Fraction of each triangle's area covered by the support.
    pub fn support_fraction(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            AlternativeSpec::Csr => 1.0,
            AlternativeSpec::Segregation { epsilon } => 1.0 - segregation_delta(epsilon)?,
            AlternativeSpec::Association { epsilon } => segregation_delta(EPSILON_MAX - epsilon)?,
        })
    }
}

/// Area fraction removed by segregation at level `ε`: `4ε²` while the
/// corners are disjoint (`ε ≤ √3/4`), `1 - 4(1 - √3ε)²` beyond.
pub fn segregation_delta(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < EPSILON_MAX) {
        return Err(PcdError::EpsilonOutOfRange(epsilon));
    }
    Ok(if epsilon <= SQRT3 / 4.0 {
        4.0 * epsilon * epsilon
    } else {
        1.0 - 4.0 * (1.0 - SQRT3 * epsilon).powi(2)
    })
}

/// Inverse of [`segregation_delta`].
pub fn segregation_epsilon(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(PcdError::InvalidParameter(format!("delta {delta} outside (0, 1)")));
    }
    Ok(if delta <= 0.75 {
        delta.sqrt() / 2.0
    } else {
        (1.0 - ((1.0 - delta) / 4.0).sqrt()) / SQRT3
    })
}

/// Area fraction of the association support at level `ε`: the corner union
/// at level `√3/3 - ε`, i.e. the segregation `δ` of that level.
pub fn association_delta(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < EPSILON_MAX) {
        return Err(PcdError::EpsilonOutOfRange(epsilon));
    }
    segregation_delta(EPSILON_MAX - epsilon)
}

/// Inverse of [`association_delta`].
pub fn association_epsilon(delta: f64) -> Result<f64> {
    Ok(EPSILON_MAX - segregation_epsilon(delta)?)
}

/// Uniform point in a triangle by the square-root construction.
#[inline]
pub fn uniform_barycentric<R: Rng + ?Sized>(rng: &mut R) -> Barycentric {
    let s = rng.random::<f64>().sqrt();
    let u = rng.random::<f64>();
    Barycentric([1.0 - s, s * (1.0 - u), s * u])
}

fn clip(poly: &[Point2], keep: impl Fn(&Barycentric) -> f64) -> Vec<Point2> {
    let val = |p: Point2| keep(&EQUILATERAL.barycentric(p));
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fa, fb) = (val(a), val(b));
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let t = fa / (fa - fb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// The support in `T_e` split into triangles, with cumulative sampling
/// weights.
#[derive(Debug, Clone)]
pub struct SupportPieces {
    pieces: Vec<Triangle>,
    chooser: Option<WeightedIndex<f64>>,
}

impl SupportPieces {
    pub fn new(spec: &AlternativeSpec) -> Result<Self> {
        spec.validate()?;
        let te = EQUILATERAL.vertices().to_vec();
        let polys: Vec<Vec<Point2>> = match *spec {
            AlternativeSpec::Csr => vec![te],
            AlternativeSpec::Segregation { epsilon } => {
                let c = 1.0 - 2.0 * epsilon / SQRT3;
                let mut p = te;
                for i in 0..3 {
                    p = clip(&p, |b| c - b.0[i]);
                }
                vec![p]
            }
            AlternativeSpec::Association { epsilon } => {
                // corner i minus the corners already taken
                let c = 1.0 / 3.0 + 2.0 * epsilon / SQRT3;
                (0..3)
                    .map(|i| {
                        let mut p = clip(&te, |b| b.0[i] - c);
                        for j in 0..i {
                            p = clip(&p, |b| c - b.0[j]);
                        }
                        p
                    })
                    .collect()
            }
        };
        let pieces: Vec<Triangle> = polys
            .iter()
            .filter(|p| p.len() >= 3)
            .flat_map(|p| (1..p.len() - 1).map(move |k| Triangle::new(p[0], p[k], p[k + 1])))
            .filter_map(|t| t.ok())
            .collect();
        if pieces.is_empty() {
            return Err(PcdError::EpsilonOutOfRange(match *spec {
                AlternativeSpec::Segregation { epsilon } | AlternativeSpec::Association { epsilon } => epsilon,
                AlternativeSpec::Csr => 0.0,
            }));
        }
        let chooser = if pieces.len() > 1 {
            Some(
                WeightedIndex::new(pieces.iter().map(Triangle::area))
                    .map_err(|e| PcdError::NumericalBreakdown(e.to_string()))?,
            )
        } else {
            None
        };
        Ok(SupportPieces { pieces, chooser })
    }

    pub fn pieces(&self) -> &[Triangle] {
        &self.pieces
    }

    pub fn area(&self) -> f64 {
        self.pieces.iter().map(Triangle::area).sum()
    }

    /// Uniform draw from the support, as barycentric coordinates in `T_e`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Barycentric {
        let k = self.chooser.as_ref().map_or(0, |c| c.sample(rng));
        let p = self.pieces[k].point_at(uniform_barycentric(rng));
        EQUILATERAL.barycentric(p)
    }
}

/// Draws `n` points from `spec` over the triangulation: each point picks a
/// triangle with probability proportional to its area, then a uniform
/// position in that triangle's copy of the support.
pub fn sample_alternative<R: Rng + ?Sized>(
    tri: &Triangulation,
    n: usize,
    spec: &AlternativeSpec,
    rng: &mut R,
) -> Result<Vec<Point2>> {
    let support = SupportPieces::new(spec)?;
    let pick = WeightedIndex::new(tri.triangles().iter().map(Triangle::area))
        .map_err(|e| PcdError::NumericalBreakdown(e.to_string()))?;
    Ok((0..n)
        .map(|_| {
            let t = tri.triangle(pick.sample(rng));
            t.point_at(support.sample(rng))
        })
        .collect())
}

/// `n` points uniform on the convex hull of the triangulation.
pub fn sample_uniform_hull<R: Rng + ?Sized>(tri: &Triangulation, n: usize, rng: &mut R) -> Vec<Point2> {
    sample_alternative(tri, n, &AlternativeSpec::Csr, rng).expect("CSR support is never empty")
}

/// `n` points uniform on the unit square.
pub fn sample_unit_square<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Point2> {
    (0..n)
        .map(|_| Point2::new(rng.random(), rng.random()))
        .collect()
}

/// Rejection sampler for the same alternatives, kept as a reference.
pub fn sample_alternative_rejection<R: Rng + ?Sized>(
    tri: &Triangulation,
    n: usize,
    spec: &AlternativeSpec,
    rng: &mut R,
) -> Result<Vec<Point2>> {
    spec.validate()?;
    let pick = WeightedIndex::new(tri.triangles().iter().map(Triangle::area))
        .map_err(|e| PcdError::NumericalBreakdown(e.to_string()))?;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let b = uniform_barycentric(rng);
        if spec.in_support(&b, 0.0) {
            out.push(tri.triangle(pick.sample(rng)).point_at(b));
        }
    }
    Ok(out)
}
