use serde::{Deserialize, Serialize};

use super::predicates::orient2d;
use super::Point2;
use crate::error::{PcdError, Result};

pub(crate) const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Tolerance on barycentric weights for the closed point-in-triangle test.
pub const BARY_TOL: f64 = 1e-12;

/// The standard equilateral triangle `T_e = {(0,0), (1,0), (1/2, √3/2)}`.
pub const EQUILATERAL: Triangle = Triangle {
    v: [
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(0.5, SQRT3 / 2.0),
    ],
    area: SQRT3 / 4.0,
};

/// Barycentric weights of a point with respect to a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barycentric(pub [f64; 3]);

impl Barycentric {
    pub const CENTROID: Barycentric = Barycentric([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);

    pub fn new(b1: f64, b2: f64, b3: f64) -> Self {
        Self([b1, b2, b3])
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn min(&self) -> f64 {
        self.0[0].min(self.0[1]).min(self.0[2])
    }

    pub fn sum(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    /// Closed containment test with tolerance [`BARY_TOL`].
    pub fn is_inside(&self) -> bool {
        self.min() >= -BARY_TOL
    }

    /// Weights rescaled to sum to one; used for user supplied centers.
    pub fn normalized(&self) -> Self {
        let s = self.sum();
        Self([self.0[0] / s, self.0[1] / s, self.0[2] / s])
    }

    /// Fraction of the vertex-to-opposite-edge height covered by the line
    /// through this point parallel to the edge opposite vertex `v`.
    #[inline]
    pub fn height_fraction(&self, v: usize) -> f64 {
        1.0 - self.0[v]
    }
}

/// A non-degenerate triangle with counterclockwise vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    v: [Point2; 3],
    area: f64,
}

impl Triangle {
    /// Builds a triangle, reordering `b` and `c` if needed so the vertices are
    /// counterclockwise. The first vertex keeps its label.
    pub fn new(a: Point2, b: Point2, c: Point2) -> Result<Self> {
        for (i, p) in [a, b, c].iter().enumerate() {
            if !p.is_finite() {
                return Err(PcdError::NonFinite(i));
            }
        }
        let o = orient2d(a, b, c);
        if o == 0.0 {
            return Err(PcdError::DegenerateTriangle);
        }
        let v = if o > 0.0 { [a, b, c] } else { [a, c, b] };
        let area = 0.5 * (v[1] - v[0]).cross(v[2] - v[0]);
        if !(area > 0.0) {
            return Err(PcdError::DegenerateTriangle);
        }
        Ok(Self { v, area })
    }

    /// Counterclockwise vertices rotated to start at the lexicographically
    /// smallest one, so labels are stable regardless of input order.
    pub fn normalized(a: Point2, b: Point2, c: Point2) -> Result<Self> {
        let t = Self::new(a, b, c)?;
        let start = (0..3)
            .min_by(|&i, &j| t.v[i].lex_cmp(&t.v[j]))
            .unwrap_or(0);
        Ok(Self {
            v: [t.v[start], t.v[(start + 1) % 3], t.v[(start + 2) % 3]],
            area: t.area,
        })
    }

    pub fn vertices(&self) -> [Point2; 3] {
        self.v
    }

    #[inline]
    pub fn vertex(&self, i: usize) -> Point2 {
        self.v[i]
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn centroid(&self) -> Point2 {
        self.point_at(Barycentric::CENTROID)
    }

    pub fn diameter(&self) -> f64 {
        let [a, b, c] = self.v;
        a.dist(b).max(b.dist(c)).max(c.dist(a))
    }

    /// Barycentric weights of `p`; the third weight is `1 - b1 - b2`.
    #[inline]
    pub fn barycentric(&self, p: Point2) -> Barycentric {
        let [a, b, c] = self.v;
        let d = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
        let b1 = ((b.y - c.y) * (p.x - c.x) + (c.x - b.x) * (p.y - c.y)) / d;
        let b2 = ((c.y - a.y) * (p.x - c.x) + (a.x - c.x) * (p.y - c.y)) / d;
        Barycentric([b1, b2, 1.0 - b1 - b2])
    }

    #[inline]
    pub fn point_at(&self, b: Barycentric) -> Point2 {
        let [p, q, r] = self.v;
        Point2::new(
            b.0[0] * p.x + b.0[1] * q.x + b.0[2] * r.x,
            b.0[0] * p.y + b.0[1] * q.y + b.0[2] * r.y,
        )
    }

    /// Closed containment (boundary counts as inside).
    pub fn contains(&self, p: Point2) -> bool {
        self.barycentric(p).is_inside()
    }

    /// Index of the vertex equal to `p`, if any.
    pub fn vertex_index_of(&self, p: Point2) -> Option<usize> {
        self.v.iter().position(|&v| v == p)
    }
}

/// Affine map `p -> A p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: [[f64; 2]; 2],
    pub t: Point2,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        a: [[1.0, 0.0], [0.0, 1.0]],
        t: Point2::new(0.0, 0.0),
    };

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        Point2::new(
            self.a[0][0] * p.x + self.a[0][1] * p.y + self.t.x,
            self.a[1][0] * p.x + self.a[1][1] * p.y + self.t.y,
        )
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let [[a, b], [c, d]] = self.a;
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(PcdError::DegenerateTriangle);
        }
        let inv = [[d / det, -b / det], [-c / det, a / det]];
        let t = Point2::new(
            -(inv[0][0] * self.t.x + inv[0][1] * self.t.y),
            -(inv[1][0] * self.t.x + inv[1][1] * self.t.y),
        );
        Ok(AffineMap { a: inv, t })
    }

    fn from_frames(src: &Triangle, dst: &Triangle) -> Result<AffineMap> {
        // Columns are the edge vectors from vertex 1.
        let (s1, s2) = (src.v[1] - src.v[0], src.v[2] - src.v[0]);
        let (d1, d2) = (dst.v[1] - dst.v[0], dst.v[2] - dst.v[0]);
        let det = s1.x * s2.y - s2.x * s1.y;
        if det == 0.0 {
            return Err(PcdError::DegenerateTriangle);
        }
        let si = [[s2.y / det, -s2.x / det], [-s1.y / det, s1.x / det]];
        let a = [
            [
                d1.x * si[0][0] + d2.x * si[1][0],
                d1.x * si[0][1] + d2.x * si[1][1],
            ],
            [
                d1.y * si[0][0] + d2.y * si[1][0],
                d1.y * si[0][1] + d2.y * si[1][1],
            ],
        ];
        let moved = Point2::new(
            a[0][0] * src.v[0].x + a[0][1] * src.v[0].y,
            a[1][0] * src.v[0].x + a[1][1] * src.v[0].y,
        );
        Ok(AffineMap {
            a,
            t: dst.v[0] - moved,
        })
    }
}

/// The affine map taking `tri` onto the standard equilateral triangle with
/// `v1 -> (0,0)`, `v2 -> (1,0)`, `v3 -> (1/2, √3/2)`, and its inverse.
pub fn map_to_equilateral(tri: &Triangle) -> Result<(AffineMap, AffineMap)> {
    let fwd = AffineMap::from_frames(tri, &EQUILATERAL)?;
    let inv = AffineMap::from_frames(&EQUILATERAL, tri)?;
    Ok((fwd, inv))
}

/// How the center `M` of the vertex regions is chosen. Interpreted in the
/// standard equilateral triangle and carried to each triangle through its
/// barycentric coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterSpec {
    /// Centroid `M_C`.
    CenterOfMass,
    /// Vertex `t_{i+1}(r)` of the inner triangle `𝒯_r` (index 0, 1 or 2).
    TauVertex(usize),
    /// Explicit barycentric weights, all strictly positive.
    Explicit(Barycentric),
}

impl CenterSpec {
    /// Barycentric weights of `M` for expansion parameter `r`.
    pub fn resolve(&self, r: f64) -> Result<Barycentric> {
        match *self {
            CenterSpec::CenterOfMass => Ok(Barycentric::CENTROID),
            CenterSpec::TauVertex(i) => {
                if i > 2 {
                    return Err(PcdError::InvalidParameter(format!(
                        "tau vertex index {i} (expected 0, 1 or 2)"
                    )));
                }
                let b = tau_barycentric(r)?[i];
                if b.min() <= 0.0 {
                    // r = 1 puts t_i on a triangle vertex
                    return Err(PcdError::MOutsideTriangle);
                }
                Ok(b)
            }
            CenterSpec::Explicit(b) => {
                if !(b.0.iter().all(|w| w.is_finite() && *w > 0.0)) {
                    return Err(PcdError::MOutsideTriangle);
                }
                Ok(b.normalized())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            CenterSpec::CenterOfMass => "M_C".to_string(),
            CenterSpec::TauVertex(i) => format!("t{}", i + 1),
            CenterSpec::Explicit(b) => format!("bary({:.6},{:.6},{:.6})", b.0[0], b.0[1], b.0[2]),
        }
    }
}

impl std::str::FromStr for CenterSpec {
    type Err = PcdError;

    /// Accepts `mc`, `t1`..`t3`, or `bary:b1,b2,b3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "mc" | "m_c" | "centroid" | "center-of-mass" => Ok(CenterSpec::CenterOfMass),
            "t1" => Ok(CenterSpec::TauVertex(0)),
            "t2" => Ok(CenterSpec::TauVertex(1)),
            "t3" => Ok(CenterSpec::TauVertex(2)),
            _ => {
                let rest = s.strip_prefix("bary:").ok_or_else(|| {
                    PcdError::InvalidParameter(format!("unknown center '{s}'"))
                })?;
                let w: Vec<f64> = rest
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| PcdError::InvalidParameter(format!("center weights: {e}")))?;
                if w.len() != 3 {
                    return Err(PcdError::InvalidParameter(
                        "center needs three barycentric weights".into(),
                    ));
                }
                let c = CenterSpec::Explicit(Barycentric::new(w[0], w[1], w[2]));
                c.resolve(1.0)?;
                Ok(c)
            }
        }
    }
}

/// Barycentric weights of `t_1(r), t_2(r), t_3(r)`.
///
/// `𝒯_r` is cut out by `b_i >= (r-1)/r` for every `i`, so `t_i` has weight
/// `(2-r)/r` on vertex `i` and `(r-1)/r` on the other two.
pub fn tau_barycentric(r: f64) -> Result<[Barycentric; 3]> {
    if !(1.0..=1.5).contains(&r) {
        return Err(PcdError::ROutOfRange(r, "[1, 3/2]"));
    }
    let lo = (r - 1.0) / r;
    let hi = (2.0 - r) / r;
    Ok([
        Barycentric([hi, lo, lo]),
        Barycentric([lo, hi, lo]),
        Barycentric([lo, lo, hi]),
    ])
}

/// Vertices of `𝒯_r` in the standard equilateral triangle:
/// `t_1 = (3(r-1)/(2r), √3(r-1)/(2r))`, `t_2 = ((3-r)/(2r), √3(r-1)/(2r))`,
/// `t_3 = (1/2, √3(2-r)/(2r))`.
pub fn tau_vertices(r: f64) -> Result<[Point2; 3]> {
    let b = tau_barycentric(r)?;
    Ok([
        EQUILATERAL.point_at(b[0]),
        EQUILATERAL.point_at(b[1]),
        EQUILATERAL.point_at(b[2]),
    ])
}

/// Vertex region of a point given barycentric weights of the point and of
/// `M`. The region of vertex `i` is where `b_i / m_i` is largest; ties go to
/// the lowest index.
#[inline]
pub fn region_from_bary(p: &Barycentric, m: &Barycentric) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if p.0[i] * m.0[best] > p.0[best] * m.0[i] {
            best = i;
        }
    }
    best
}

/// Index (0-based) of the `M`-vertex region containing `p`. Regions are
/// bounded by the cevians through `M`; boundary points go to the lowest index.
pub fn vertex_region_of(tri: &Triangle, m: Point2, p: Point2) -> Result<usize> {
    let mb = tri.barycentric(m);
    if !(mb.min() > 0.0) {
        return Err(PcdError::MOutsideTriangle);
    }
    let pb = tri.barycentric(p);
    if !pb.is_inside() {
        return Err(PcdError::POutsideTriangle);
    }
    Ok(region_from_bary(&pb, &mb))
}
