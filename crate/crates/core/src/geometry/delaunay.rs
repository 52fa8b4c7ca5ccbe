use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, Triangulation as _};

use super::hull::{convex_hull, polygon_area};
use super::predicates::{incircle, orient2d};
use super::{Point2, Triangle};
use crate::error::{PcdError, Result};

const DUPLICATE_TOL: f64 = 1e-12;

/// Delaunay triangulation of the reference points together with their
/// convex hull.
#[derive(Debug, Clone)]
pub struct Triangulation {
    points: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    geometry: Vec<Triangle>,
    bboxes: Vec<[f64; 4]>,
    hull: Vec<usize>,
    hull_area: f64,
    warnings: Vec<String>,
}

/// JSON form of a triangulation: `points`, `triangles` (index triples) and
/// `hull` (index list).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangulationExport {
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub hull: Vec<usize>,
}

impl Triangulation {
    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Index triples; each is counterclockwise and starts at its
    /// lexicographically smallest vertex.
    pub fn triangle_indices(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.geometry
    }

    pub fn triangle(&self, j: usize) -> &Triangle {
        &self.geometry[j]
    }

    /// Number of Delaunay triangles, `J_m`.
    pub fn j_m(&self) -> usize {
        self.geometry.len()
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// Hull vertex indices, counterclockwise.
    pub fn hull(&self) -> &[usize] {
        &self.hull
    }

    pub fn hull_points(&self) -> Vec<Point2> {
        self.hull.iter().map(|&i| self.points[i]).collect()
    }

    pub fn hull_area(&self) -> f64 {
        self.hull_area
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Lowest-index triangle containing `p` (closed), or `None` when `p` is
    /// outside the convex hull.
    #[inline]
    pub fn locate(&self, p: Point2) -> Option<usize> {
        self.bboxes
            .iter()
            .zip(&self.geometry)
            .position(|(bb, t)| {
                p.x >= bb[0] && p.x <= bb[1] && p.y >= bb[2] && p.y <= bb[3] && t.contains(p)
            })
    }

    pub fn export(&self) -> TriangulationExport {
        TriangulationExport {
            points: self.points.iter().map(|p| [p.x, p.y]).collect(),
            triangles: self.triangles.clone(),
            hull: self.hull.clone(),
        }
    }
}

fn bbox(t: &Triangle) -> [f64; 4] {
    let v = t.vertices();
    let pad = 1e-12 * t.diameter();
    let (mut x0, mut x1, mut y0, mut y1) = (v[0].x, v[0].x, v[0].y, v[0].y);
    for p in &v[1..] {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    [x0 - pad, x1 + pad, y0 - pad, y1 + pad]
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Orders an index triple counterclockwise starting at the lexicographically
/// smallest point.
fn normalize_triple(points: &[Point2], t: [usize; 3]) -> [usize; 3] {
    let mut t = t;
    if orient2d(points[t[0]], points[t[1]], points[t[2]]) < 0.0 {
        t.swap(1, 2);
    }
    let start = (0..3)
        .min_by(|&i, &j| points[t[i]].lex_cmp(&points[t[j]]))
        .unwrap_or(0);
    [t[start], t[(start + 1) % 3], t[(start + 2) % 3]]
}

fn check_duplicates(points: &[Point2]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].lex_cmp(&points[b]));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x > DUPLICATE_TOL {
                break;
            }
            if (points[j].y - points[i].y).abs() <= DUPLICATE_TOL {
                return Err(PcdError::DuplicatePoints(i.min(j), i.max(j)));
            }
        }
    }
    Ok(())
}

/// Delaunay triangulation of `points`.
///
/// Output is deterministic for a fixed input ordering. Groups of four or more
/// cocircular points (where the Delaunay cell is not a triangle) are
/// re-triangulated as a fan from the cell's lowest-index vertex and reported
/// in [`Triangulation::warnings`].
pub fn delaunay_triangulate(points: &[Point2]) -> Result<Triangulation> {
    if points.len() < 3 {
        return Err(PcdError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(PcdError::NonFinite(i));
    }
    check_duplicates(points)?;
    let hull = convex_hull(points)?;
    let hull_area = polygon_area(&hull.iter().map(|&i| points[i]).collect::<Vec<_>>());

    let mut dt: DelaunayTriangulation<spade::Point2<f64>> = DelaunayTriangulation::new();
    let mut handle_to_input = vec![usize::MAX; points.len()];
    for (i, p) in points.iter().enumerate() {
        let h = dt
            .insert(spade::Point2::new(p.x, p.y))
            .map_err(|e| PcdError::InvalidParameter(format!("point {i}: {e:?}")))?;
        handle_to_input[h.index()] = i;
    }

    let faces: Vec<_> = dt.inner_faces().collect();
    let mut face_slot = BTreeMap::new();
    let mut raw: Vec<[usize; 3]> = Vec::with_capacity(faces.len());
    for f in &faces {
        let v = f.vertices().map(|h| handle_to_input[h.fix().index()]);
        face_slot.insert(f.fix().index(), raw.len());
        raw.push(v);
    }

    // Merge faces across edges whose quadrilateral is exactly cocircular.
    let mut parent: Vec<usize> = (0..raw.len()).collect();
    let mut merged_any = false;
    for e in dt.directed_edges() {
        let (Some(f), Some(g)) = (e.face().as_inner(), e.rev().face().as_inner()) else {
            continue;
        };
        let (fs, gs) = (face_slot[&f.fix().index()], face_slot[&g.fix().index()]);
        if fs > gs {
            continue;
        }
        let Some(opp) = e.rev().opposite_vertex() else {
            continue;
        };
        let d = points[handle_to_input[opp.fix().index()]];
        let t = normalize_triple(points, raw[fs]);
        if incircle(points[t[0]], points[t[1]], points[t[2]], d) == 0.0 {
            let (a, b) = (find(&mut parent, fs), find(&mut parent, gs));
            if a != b {
                parent[a.max(b)] = a.min(b);
                merged_any = true;
            }
        }
    }

    let mut warnings = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(raw.len());
    if merged_any {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..raw.len() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        for faces in groups.values() {
            if faces.len() == 1 {
                triangles.push(normalize_triple(points, raw[faces[0]]));
                continue;
            }
            let mut verts: Vec<usize> = faces.iter().flat_map(|&f| raw[f]).collect();
            verts.sort_unstable();
            verts.dedup();
            let cx = verts.iter().map(|&v| points[v].x).sum::<f64>() / verts.len() as f64;
            let cy = verts.iter().map(|&v| points[v].y).sum::<f64>() / verts.len() as f64;
            verts.sort_by(|&a, &b| {
                let ta = (points[a].y - cy).atan2(points[a].x - cx);
                let tb = (points[b].y - cy).atan2(points[b].x - cx);
                ta.total_cmp(&tb)
            });
            let lowest = verts.iter().enumerate().min_by_key(|(_, &v)| v).map(|(k, _)| k).unwrap_or(0);
            verts.rotate_left(lowest);
            warnings.push(format!(
                "{} cocircular points {:?}: cell fanned from point {}",
                verts.len(),
                verts,
                verts[0]
            ));
            for k in 1..verts.len() - 1 {
                triangles.push(normalize_triple(points, [verts[0], verts[k], verts[k + 1]]));
            }
        }
    } else {
        triangles.extend(raw.iter().map(|&t| normalize_triple(points, t)));
    }
    triangles.sort_unstable();

    let geometry = triangles
        .iter()
        .map(|t| Triangle::new(points[t[0]], points[t[1]], points[t[2]]))
        .collect::<Result<Vec<_>>>()?;
    let bboxes = geometry.iter().map(bbox).collect();

    Ok(Triangulation {
        points: points.to_vec(),
        triangles,
        geometry,
        bboxes,
        hull,
        hull_area,
        warnings,
    })
}
