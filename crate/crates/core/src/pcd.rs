//! Proportional-edge proximity catch digraphs and their domination number.
//!
//! For `x` in vertex region `v` of its triangle, the proximity region
//! `N(x)` is the part of the triangle whose height fraction from `v` is at
//! most `r` times that of `x`. The digraph has an arc `x -> z` whenever
//! `z ∈ N(x)`. Digraphs of different triangles are disconnected, so the
//! domination number is a sum over triangles, each term at most 3.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PcdError, Result};
use crate::geometry::{region_from_bary, Barycentric, CenterSpec, Point2, Triangle, Triangulation};

/// Expansion parameter `r ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expansion {
    Finite(f64),
    Infinite,
}

impl Expansion {
    pub fn new(r: f64) -> Result<Self> {
        if r.is_nan() || r < 1.0 {
            return Err(PcdError::ROutOfRange(r, "[1, inf]"));
        }
        Ok(if r.is_infinite() {
            Expansion::Infinite
        } else {
            Expansion::Finite(r)
        })
    }

    pub fn value(self) -> f64 {
        match self {
            Expansion::Finite(r) => r,
            Expansion::Infinite => f64::INFINITY,
        }
    }

    /// Height threshold of a proximity region whose anchor has height
    /// fraction `h`.
    #[inline]
    pub fn threshold(self, h: f64) -> f64 {
        match self {
            Expansion::Finite(r) => r * h,
            Expansion::Infinite if h > 0.0 => f64::INFINITY,
            Expansion::Infinite => 0.0,
        }
    }
}

impl fmt::Display for Expansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expansion::Finite(r) => write!(f, "{r}"),
            Expansion::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Expansion {
    type Err = PcdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Expansion::Infinite),
            t => {
                let r: f64 = t
                    .parse()
                    .map_err(|_| PcdError::InvalidParameter(format!("r: cannot parse '{s}'")))?;
                Expansion::new(r)
            }
        }
    }
}

impl Serialize for Expansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Expansion::Finite(r) => s.serialize_f64(*r),
            Expansion::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Expansion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(r) => Expansion::new(r),
            Raw::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Expansion parameter and center of the vertex regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcdParams {
    pub r: Expansion,
    pub center: CenterSpec,
}

impl PcdParams {
    pub fn new(r: f64, center: CenterSpec) -> Result<Self> {
        let p = PcdParams {
            r: Expansion::new(r)?,
            center,
        };
        p.center_weights()?;
        Ok(p)
    }

    /// Barycentric weights of `M`, shared by every triangle.
    pub fn center_weights(&self) -> Result<Barycentric> {
        match (self.center, self.r) {
            (CenterSpec::TauVertex(_), Expansion::Infinite) => {
                Err(PcdError::ROutOfRange(f64::INFINITY, "[1, 3/2]"))
            }
            (c, r) => c.resolve(r.value()),
        }
    }
}

/// Fixed-length bitset backed by 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Bitset {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        b.trim();
        b
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn is_subset_of(&self, other: &Bitset) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    fn covers_with(rows: &[&Bitset], len: usize) -> bool {
        let words = len.div_ceil(64);
        (0..words).all(|w| {
            let want = if w + 1 == words && len % 64 != 0 {
                (1u64 << (len % 64)) - 1
            } else {
                u64::MAX
            };
            rows.iter().fold(0u64, |acc, r| acc | r.words[w]) == want
        })
    }
}

/// Digraph on the target points inside one triangle.
#[derive(Debug, Clone)]
pub struct TriangleDigraph {
    pub triangle_index: usize,
    /// Indices into the global `X` array.
    pub x_indices: Vec<usize>,
    /// Row `i` holds the out-neighbors of local point `i`, itself included.
    pub coverage: Vec<Bitset>,
}

impl TriangleDigraph {
    /// Digraph from explicit coverage rows, for arbitrary relations.
    pub fn from_coverage(triangle_index: usize, coverage: Vec<Bitset>) -> Self {
        let x_indices = (0..coverage.len()).collect();
        TriangleDigraph {
            triangle_index,
            x_indices,
            coverage,
        }
    }

    pub fn n_j(&self) -> usize {
        self.coverage.len()
    }

    pub fn arc_count(&self) -> usize {
        self.coverage.iter().map(Bitset::count).sum()
    }
}

/// Height fraction `1 - b_v` of a point from vertex `v`, clamped at zero.
#[inline]
fn height(b: &Barycentric, v: usize) -> f64 {
    (1.0 - b.0[v]).max(0.0)
}

/// Arc rule in barycentric coordinates: `z ∈ N(x)`.
#[inline]
pub fn arc_present_bary(x: &Barycentric, z: &Barycentric, m: &Barycentric, r: Expansion) -> bool {
    let v = region_from_bary(x, m);
    height(z, v) <= r.threshold(height(x, v))
}

/// Whether `z` lies in the proportional-edge proximity region of `x` with
/// respect to `tri` and center `m`.
pub fn arc_present(
    tri: &Triangle,
    m: Point2,
    params: &PcdParams,
    x: Point2,
    z: Point2,
) -> Result<bool> {
    let mb = tri.barycentric(m);
    if !(mb.min() > 0.0) {
        return Err(PcdError::MOutsideTriangle);
    }
    let (xb, zb) = (tri.barycentric(x), tri.barycentric(z));
    if !xb.is_inside() || !zb.is_inside() {
        return Err(PcdError::POutsideTriangle);
    }
    Ok(arc_present_bary(&xb, &zb, &mb, params.r))
}

/// Target points grouped by the triangle containing them.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    /// Per triangle: global indices and barycentric coordinates.
    pub members: Vec<(Vec<usize>, Vec<Barycentric>)>,
    /// Global indices of points outside the convex hull.
    pub outside: Vec<usize>,
}

/// Assigns every point to the lowest-index triangle containing it, or to the
/// outside list.
pub fn assign_points(x: &[Point2], tri: &Triangulation) -> Result<Assignment> {
    if let Some(i) = x.iter().position(|p| !p.is_finite()) {
        return Err(PcdError::NonFinite(i));
    }
    let mut a = Assignment {
        members: vec![(Vec::new(), Vec::new()); tri.j_m()],
        outside: Vec::new(),
    };
    for (i, &p) in x.iter().enumerate() {
        match tri.locate(p) {
            Some(j) => {
                a.members[j].0.push(i);
                a.members[j].1.push(tri.triangle(j).barycentric(p));
            }
            None => a.outside.push(i),
        }
    }
    Ok(a)
}

fn digraph_from_bary(
    triangle_index: usize,
    x_indices: Vec<usize>,
    bary: &[Barycentric],
    m: &Barycentric,
    r: Expansion,
) -> TriangleDigraph {
    let n = bary.len();
    let mut coverage = Vec::with_capacity(n);
    let mut extremum: [Option<(f64, usize)>; 3] = [None; 3];
    for (i, x) in bary.iter().enumerate() {
        let v = region_from_bary(x, m);
        let hx = height(x, v);
        let t = r.threshold(hx);
        let mut row = Bitset::new(n);
        for (j, z) in bary.iter().enumerate() {
            if height(z, v) <= t {
                row.set(j);
            }
        }
        if extremum[v].is_none_or(|(h, _)| hx > h) {
            extremum[v] = Some((hx, i));
        }
        coverage.push(row);
    }
    for (v, ext) in extremum.iter().enumerate() {
        if let Some((_, e)) = *ext {
            for (j, z) in bary.iter().enumerate() {
                if region_from_bary(z, m) == v {
                    assert!(
                        coverage[e].get(j),
                        "edge extremum of region {v} misses point {j} in triangle {triangle_index}"
                    );
                }
            }
        }
    }
    TriangleDigraph {
        triangle_index,
        x_indices,
        coverage,
    }
}

/// Builds one digraph per triangle. Returns the digraphs (indexed by
/// triangle) and the indices of points outside the convex hull.
pub fn build_pcd(
    x: &[Point2],
    tri: &Triangulation,
    params: &PcdParams,
) -> Result<(Vec<TriangleDigraph>, Vec<usize>)> {
    let m = params.center_weights()?;
    let a = assign_points(x, tri)?;
    let digraphs = a
        .members
        .into_par_iter()
        .enumerate()
        .map(|(j, (idx, bary))| digraph_from_bary(j, idx, &bary, &m, params.r))
        .collect();
    Ok((digraphs, a.outside))
}

/// Minimum number of rows whose union is full, by exhaustive search over
/// the Pareto-maximal rows.
fn min_cover(rows: &[Bitset], n: usize) -> u32 {
    if n == 0 {
        return 0;
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let counts: Vec<usize> = rows.iter().map(Bitset::count).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut maximal: Vec<&Bitset> = Vec::new();
    for &i in &order {
        if !maximal.iter().any(|p| rows[i].is_subset_of(p)) {
            maximal.push(&rows[i]);
        }
    }
    let mut chosen = Vec::new();
    for k in 1..=maximal.len() as u32 {
        if choose_cover(&maximal, n, k as usize, 0, &mut chosen) {
            return k;
        }
    }
    unreachable!("the diagonal guarantees the full row set covers")
}

fn choose_cover<'a>(
    rows: &[&'a Bitset],
    n: usize,
    k: usize,
    start: usize,
    chosen: &mut Vec<&'a Bitset>,
) -> bool {
    if chosen.len() == k {
        return Bitset::covers_with(chosen, n);
    }
    for i in start..rows.len() {
        chosen.push(rows[i]);
        let hit = choose_cover(rows, n, k, i + 1, chosen);
        chosen.pop();
        if hit {
            return true;
        }
    }
    false
}

/// Exact domination number of a triangle digraph.
///
/// Rows dominated by another row are discarded first; the search then tries
/// single rows, pairs and triples of the remaining ones.
pub fn gamma_triangle(dg: &TriangleDigraph) -> u32 {
    min_cover(&dg.coverage, dg.n_j())
}

/// Exhaustive minimum dominating set size over all subsets, without any
/// pruning. Limited to 20 vertices.
pub fn gamma_brute_force(dg: &TriangleDigraph) -> Result<u32> {
    let n = dg.n_j();
    if n > 20 {
        return Err(PcdError::TooLarge { n, max: 20 });
    }
    let masks: Vec<u32> = dg
        .coverage
        .iter()
        .map(|row| row.iter_ones().fold(0u32, |m, j| m | 1 << j))
        .collect();
    let full: u32 = if n == 0 { 0 } else { u32::MAX >> (32 - n) };
    let mut best = n as u32;
    for subset in 0u32..(1u32 << n) {
        let size = subset.count_ones();
        if size >= best {
            continue;
        }
        let cover = (0..n)
            .filter(|&i| subset >> i & 1 == 1)
            .fold(0u32, |c, i| c | masks[i]);
        if cover == full {
            best = size;
        }
    }
    Ok(best)
}

/// Domination number straight from barycentric coordinates in `O(n)`.
///
/// Within a vertex region the proximity regions are nested, so a minimum
/// dominating set can always be drawn from the three edge extrema. Each
/// extremum covers the points whose height from its vertex is below its
/// threshold; the answer is the smallest number of extrema that cover every
/// point.
pub fn gamma_extremal(bary: &[Barycentric], m: &Barycentric, r: Expansion) -> u32 {
    if bary.is_empty() {
        return 0;
    }
    let mut thresholds = [f64::NEG_INFINITY; 3];
    let mut present = 0u8;
    for b in bary {
        let v = region_from_bary(b, m);
        present |= 1 << v;
        thresholds[v] = thresholds[v].max(r.threshold(height(b, v)));
    }
    // Which combinations of extrema cover each point, as a set of 3-bit masks.
    let mut seen = 0u8;
    for b in bary {
        let mut mask = 0u8;
        for (v, &t) in thresholds.iter().enumerate() {
            if height(b, v) <= t {
                mask |= 1 << v;
            }
        }
        seen |= 1 << mask;
        if seen & 1 == 1 {
            unreachable!("a point is always covered by its own region's extremum");
        }
    }
    let covers = |s: u8| (1..8u8).all(|mask| seen >> mask & 1 == 0 || mask & s != 0);
    (1..8u8)
        .filter(|&s| s & !present == 0 && covers(s))
        .map(u8::count_ones)
        .min()
        .expect("all present extrema together cover every point")
}

/// Whether a single point dominates the sample: some edge extremum's region
/// reaches every point's height from that vertex.
pub fn has_dominating_point(bary: &[Barycentric], m: &Barycentric, r: Expansion) -> bool {
    let mut thresholds = [f64::NEG_INFINITY; 3];
    let mut max_h = [0.0f64; 3];
    for b in bary {
        let v = region_from_bary(b, m);
        thresholds[v] = thresholds[v].max(r.threshold(height(b, v)));
        for (u, mh) in max_h.iter_mut().enumerate() {
            *mh = mh.max(height(b, u));
        }
    }
    !bary.is_empty() && (0..3).any(|v| max_h[v] <= thresholds[v])
}

/// Domination count of one triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleGamma {
    pub tri: usize,
    pub n_j: usize,
    pub gamma: u32,
}

/// Domination number of the whole PCD with per-triangle detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationResult {
    pub gamma_total: u64,
    pub g_bar: f64,
    pub j_m: usize,
    pub n_inside: usize,
    pub n_outside: usize,
    pub per_triangle: Vec<TriangleGamma>,
}

impl DominationResult {
    /// Aggregates per-triangle counts.
    pub fn from_parts(per_triangle: Vec<TriangleGamma>, n_outside: usize) -> Self {
        let j_m = per_triangle.len();
        let gamma_total: u64 = per_triangle.iter().map(|t| t.gamma as u64).sum();
        DominationResult {
            gamma_total,
            g_bar: gamma_total as f64 / j_m as f64,
            j_m,
            n_inside: per_triangle.iter().map(|t| t.n_j).sum(),
            n_outside,
            per_triangle,
        }
    }

    pub fn min_n_j(&self) -> usize {
        self.per_triangle.iter().map(|t| t.n_j).min().unwrap_or(0)
    }
}

/// Algorithm used for the per-triangle domination numbers. Both are exact
/// and agree on every input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Full coverage bitsets with Pareto pruning, `O(n_j² / 64)` per row.
    #[default]
    Bitset,
    /// Edge extrema only, `O(n_j)`.
    Extremal,
}

/// Domination number `γ = Σ_j γ_j` over all triangles.
pub fn domination_number(
    x: &[Point2],
    tri: &Triangulation,
    params: &PcdParams,
) -> Result<DominationResult> {
    domination_number_with(x, tri, params, Method::Bitset)
}

pub fn domination_number_with(
    x: &[Point2],
    tri: &Triangulation,
    params: &PcdParams,
    method: Method,
) -> Result<DominationResult> {
    let m = params.center_weights()?;
    let a = assign_points(x, tri)?;
    let per_triangle = match method {
        Method::Bitset => a
            .members
            .into_par_iter()
            .enumerate()
            .map(|(j, (idx, bary))| {
                let n_j = idx.len();
                let dg = digraph_from_bary(j, idx, &bary, &m, params.r);
                TriangleGamma {
                    tri: j,
                    n_j,
                    gamma: gamma_triangle(&dg),
                }
            })
            .collect(),
        Method::Extremal => a
            .members
            .iter()
            .enumerate()
            .map(|(j, (idx, bary))| TriangleGamma {
                tri: j,
                n_j: idx.len(),
                gamma: gamma_extremal(bary, &m, params.r),
            })
            .collect(),
    };
    Ok(DominationResult::from_parts(per_triangle, a.outside.len()))
}
