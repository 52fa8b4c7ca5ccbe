//! Monte Carlo experiment drivers. Replicates run in parallel and are
//! reduced in replicate order, so outputs depend only on the seed and
//! configuration.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::layout::frozen_y10;
use super::rng::{replicate_rng, SimRng};
use super::sampling::{sample_alternative, sample_unit_square, AlternativeSpec};
use crate::distribution::{NullDistribution, QuadratureConfig, Side};
use crate::error::{PcdError, Result};
use crate::geometry::{delaunay_triangulate, Barycentric, Point2, Triangulation, EQUILATERAL};
use crate::inference::{expected_pi_out, test_with_null, Alternative, Statistic, TestConfig};
use crate::pcd::{assign_points, gamma_extremal, DominationResult, Expansion, PcdParams, TriangleGamma};

/// Where the reference points come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum YSource {
    /// The bundled 10-point layout (13 triangles).
    Frozen,
    /// The standard equilateral triangle alone.
    Equilateral,
    File { path: PathBuf },
    Points { points: Vec<[f64; 2]> },
    /// `m` fresh uniform points on the unit square in every replicate.
    UniformSquare { m: usize },
}

impl YSource {
    /// Reference points when they do not change between replicates.
    pub fn fixed_points(&self) -> Result<Option<Vec<Point2>>> {
        Ok(match self {
            YSource::Frozen => Some(frozen_y10()),
            YSource::Equilateral => Some(EQUILATERAL.vertices().to_vec()),
            YSource::File { path } => Some(crate::io::read_points(path)?),
            YSource::Points { points } => Some(points.iter().map(|&[x, y]| Point2::new(x, y)).collect()),
            YSource::UniformSquare { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub y_source: YSource,
    pub n: usize,
    pub alternative: AlternativeSpec,
    pub params: PcdParams,
    pub n_mc: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_mc == 0 {
            return Err(PcdError::InvalidParameter("n_mc must be at least 1".into()));
        }
        if let YSource::UniformSquare { m } = self.y_source {
            if m < 3 {
                return Err(PcdError::TooFewPoints { needed: 3, got: m });
            }
        }
        self.alternative.validate()?;
        self.params.center_weights()?;
        Ok(())
    }
}

/// Reference triangulation shared by all replicates, or `None` when it is
/// redrawn per replicate.
struct Scene {
    fixed: Option<Triangulation>,
    m: usize,
}

impl Scene {
    fn new(src: &YSource) -> Result<Self> {
        match src.fixed_points()? {
            Some(y) => Ok(Scene {
                m: y.len(),
                fixed: Some(delaunay_triangulate(&y)?),
            }),
            None => match src {
                YSource::UniformSquare { m } => Ok(Scene { fixed: None, m: *m }),
                _ => unreachable!(),
            },
        }
    }

    fn triangulation(&self, rng: &mut SimRng) -> Result<Cow<'_, Triangulation>> {
        match &self.fixed {
            Some(t) => Ok(Cow::Borrowed(t)),
            None => Ok(Cow::Owned(delaunay_triangulate(&sample_unit_square(self.m, rng))?)),
        }
    }
}

/// Per-triangle barycentric coordinates of one replicate's sample.
struct Replicate {
    members: Vec<Vec<Barycentric>>,
    n_outside: usize,
}

impl Replicate {
    fn draw(scene: &Scene, cfg: &SimConfig, n: usize, rng: &mut SimRng) -> Result<Self> {
        let tri = scene.triangulation(rng)?;
        let x = sample_alternative(&tri, n, &cfg.alternative, rng)?;
        let a = assign_points(&x, &tri)?;
        Ok(Replicate {
            members: a.members.into_iter().map(|(_, b)| b).collect(),
            n_outside: a.outside.len(),
        })
    }

    fn domination(&self, m: &Barycentric, r: Expansion) -> DominationResult {
        let per = self
            .members
            .iter()
            .enumerate()
            .map(|(tri, b)| TriangleGamma {
                tri,
                n_j: b.len(),
                gamma: gamma_extremal(b, m, r),
            })
            .collect();
        DominationResult::from_parts(per, self.n_outside)
    }
}

/// Counts of `γ = k` in one `(n, r)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub n: usize,
    pub r: Expansion,
    pub center: String,
    /// `counts[k]` replicates had `γ = k`.
    pub counts: Vec<u64>,
}

impl FrequencyRow {
    pub fn fraction(&self, k: usize) -> f64 {
        let total: u64 = self.counts.iter().sum();
        self.counts.get(k).copied().unwrap_or(0) as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub rows: Vec<FrequencyRow>,
    /// Replicates where `γ` increased along the increasing `r` grid for a
    /// fixed sample and center.
    pub monotonicity_violations: u64,
}

/// Frequencies of `γ = k` over `cfg.n_mc` replicates for each `n` in
/// `n_grid` and each `r` in `r_grid` (default: `cfg.params.r`). All values
/// of `r` are evaluated on the same samples with the center fixed at its
/// position for `cfg.params.r`.
pub fn gamma_frequency_experiment(
    cfg: &SimConfig,
    n_grid: &[usize],
    r_grid: &[Expansion],
) -> Result<FrequencyTable> {
    cfg.validate()?;
    let scene = Scene::new(&cfg.y_source)?;
    let m = cfg.params.center_weights()?;
    let mut rs: Vec<Expansion> = if r_grid.is_empty() {
        vec![cfg.params.r]
    } else {
        r_grid.to_vec()
    };
    rs.sort_by(|a, b| a.value().total_cmp(&b.value()));
    let label = cfg.params.center.label();
    let mut rows = Vec::new();
    let mut violations = 0;
    for (cell, &n) in n_grid.iter().enumerate() {
        let gammas: Vec<Vec<u64>> = (0..cfg.n_mc as u64)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replicate_rng(cfg.seed, cell as u64, rep);
                let r = Replicate::draw(&scene, cfg, n, &mut rng)?;
                Ok(rs.iter().map(|&x| r.domination(&m, x).gamma_total).collect())
            })
            .collect::<Result<_>>()?;
        violations += gammas
            .iter()
            .filter(|g| g.windows(2).any(|w| w[1] > w[0]))
            .count() as u64;
        for (k, &r) in rs.iter().enumerate() {
            let max = gammas.iter().map(|g| g[k]).max().unwrap_or(0) as usize;
            let mut counts = vec![0u64; max.max(3) + 1];
            for g in &gammas {
                counts[g[k] as usize] += 1;
            }
            rows.push(FrequencyRow {
                n,
                r,
                center: label.clone(),
                counts,
            });
        }
    }
    Ok(FrequencyTable {
        rows,
        monotonicity_violations: violations,
    })
}

/// Size classification of an empirical rejection rate against the nominal
/// level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    Conservative,
    Nominal,
    Liberal,
}

/// Band `α ∓ z_{0.95} sqrt(α(1-α)/N)` outside which an empirical size is
/// significantly off; `(.039, .061)` for `α = .05`, `N = 1000`.
pub fn size_band(alpha: f64, n_mc: usize) -> (f64, f64) {
    let half = crate::distribution::normal_quantile(0.95) * (alpha * (1.0 - alpha) / n_mc as f64).sqrt();
    (alpha - half, alpha + half)
}

pub fn classify_size(rate: f64, alpha: f64, n_mc: usize) -> SizeClass {
    let (lo, hi) = size_band(alpha, n_mc);
    if rate < lo {
        SizeClass::Conservative
    } else if rate > hi {
        SizeClass::Liberal
    } else {
        SizeClass::Nominal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePowerRow {
    pub r: f64,
    pub pattern: String,
    pub n: usize,
    pub n_mc: usize,
    pub statistic: Statistic,
    pub side: Side,
    pub rejections: u64,
    pub rate: f64,
    pub se: f64,
    /// Present for CSR runs, where the rate is an empirical size.
    pub class: Option<SizeClass>,
}

/// Rejection rates of the binomial and normal tests, both one-sided
/// directions, at level `alpha` for every `r` in `r_grid`. The same samples
/// serve all `r`.
pub fn size_power_experiment(
    cfg: &SimConfig,
    r_grid: &[f64],
    alpha: f64,
    quadrature: &QuadratureConfig,
) -> Result<Vec<SizePowerRow>> {
    cfg.validate()?;
    let scene = Scene::new(&cfg.y_source)?;
    let setups: Vec<(PcdParams, Barycentric, NullDistribution)> = r_grid
        .iter()
        .map(|&r| {
            let params = PcdParams {
                r: Expansion::new(r)?,
                center: cfg.params.center,
            };
            let null = NullDistribution::for_params(&params, 1, quadrature)?;
            Ok((params, params.center_weights()?, null))
        })
        .collect::<Result<_>>()?;
    const COMBOS: [(Statistic, Alternative); 4] = [
        (Statistic::Binomial, Alternative::Segregation),
        (Statistic::Binomial, Alternative::Association),
        (Statistic::Normal, Alternative::Segregation),
        (Statistic::Normal, Alternative::Association),
    ];
    let rejections: Vec<Vec<[bool; 4]>> = (0..cfg.n_mc as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(cfg.seed, 0, rep);
            let rp = Replicate::draw(&scene, cfg, cfg.n, &mut rng)?;
            setups
                .iter()
                .map(|(params, m, null)| {
                    let dom = rp.domination(m, params.r);
                    let mut out = [false; 4];
                    for (k, &(statistic, alternative)) in COMBOS.iter().enumerate() {
                        let tc = TestConfig {
                            params: *params,
                            alpha,
                            alternative,
                            statistic,
                            hull_correction: false,
                            small_sample_correction: false,
                            quadrature: *quadrature,
                        };
                        out[k] = test_with_null(&dom, cfg.n, scene.m, &tc, null)?.reject;
                    }
                    Ok(out)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let csr = cfg.alternative == AlternativeSpec::Csr;
    let mut rows = Vec::new();
    for (i, &r) in r_grid.iter().enumerate() {
        for (k, &(statistic, alternative)) in COMBOS.iter().enumerate() {
            let count = rejections.iter().filter(|rep| rep[i][k]).count() as u64;
            let rate = count as f64 / cfg.n_mc as f64;
            rows.push(SizePowerRow {
                r,
                pattern: cfg.alternative.label(),
                n: cfg.n,
                n_mc: cfg.n_mc,
                statistic,
                side: alternative.side(),
                rejections: count,
                rate,
                se: (rate * (1.0 - rate) / cfg.n_mc as f64).sqrt(),
                class: csr.then(|| classify_size(rate, alpha, cfg.n_mc)),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiOutRow {
    pub m: usize,
    pub n_values: Vec<usize>,
    pub n_mc: usize,
    pub pi_out: f64,
    pub se: f64,
    pub fitted: f64,
    pub residual: f64,
}

/// Mean fraction of target points outside the convex hull of the reference
/// points when both are uniform on the unit square, averaged over `n_grid`
/// and `n_mc` replicates, next to the fit `1.7932/m + 1.2229/√m`.
pub fn pi_out_experiment(m_grid: &[usize], n_grid: &[usize], n_mc: usize, seed: u64) -> Result<Vec<PiOutRow>> {
    if n_mc == 0 || n_grid.is_empty() || n_grid.contains(&0) {
        return Err(PcdError::InvalidParameter("need n_mc ≥ 1 and positive n values".into()));
    }
    m_grid
        .iter()
        .enumerate()
        .map(|(cell, &m)| {
            let fractions: Vec<f64> = (0..n_mc as u64)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = replicate_rng(seed, cell as u64, rep);
                    let tri = delaunay_triangulate(&sample_unit_square(m, &mut rng))?;
                    let mut acc = 0.0;
                    for &n in n_grid {
                        let x = sample_unit_square(n, &mut rng);
                        let out = x.iter().filter(|&&p| tri.locate(p).is_none()).count();
                        acc += out as f64 / n as f64;
                    }
                    Ok(acc / n_grid.len() as f64)
                })
                .collect::<Result<_>>()?;
            let mean = fractions.iter().sum::<f64>() / n_mc as f64;
            let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n_mc.max(2) - 1) as f64;
            let fitted = expected_pi_out(m);
            Ok(PiOutRow {
                m,
                n_values: n_grid.to_vec(),
                n_mc,
                pi_out: mean,
                se: (var / n_mc as f64).sqrt(),
                fitted,
                residual: mean - fitted,
            })
        })
        .collect()
}

/// One bin of the `Ḡ` histogram: replicates with the given `γ` and `J_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub j_m: usize,
    pub gamma_total: u64,
    pub g_bar: f64,
    pub count: u64,
}

/// Exact histogram of `Ḡ = γ/J_m` over `cfg.n_mc` replicates.
pub fn gbar_histogram(cfg: &SimConfig) -> Result<Vec<HistogramRow>> {
    cfg.validate()?;
    let scene = Scene::new(&cfg.y_source)?;
    let m = cfg.params.center_weights()?;
    let doms: Vec<(usize, u64)> = (0..cfg.n_mc as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(cfg.seed, 0, rep);
            let rp = Replicate::draw(&scene, cfg, cfg.n, &mut rng)?;
            let d = rp.domination(&m, cfg.params.r);
            Ok((d.j_m, d.gamma_total))
        })
        .collect::<Result<_>>()?;
    let mut bins: BTreeMap<(usize, u64), u64> = BTreeMap::new();
    for d in doms {
        *bins.entry(d).or_default() += 1;
    }
    Ok(bins
        .into_iter()
        .map(|((j_m, gamma_total), count)| HistogramRow {
            j_m,
            gamma_total,
            g_bar: gamma_total as f64 / j_m as f64,
            count,
        })
        .collect())
}
