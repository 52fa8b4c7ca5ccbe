//! Tests of complete spatial randomness against segregation and association
//! based on the domination number.
//!
//! Two statistics are offered. The binomial statistic `B = γ - 2J_m`
//! compares with `Bin(J_m, 1 - p_r)`; the normal statistic
//! `S = (Ḡ - μ) / sqrt(p_r(1-p_r)/J_m)` compares with `N(0, 1)`.
//! Segregation shrinks `γ` (lower tail) and association inflates it (upper
//! tail).
//!
//! Optional corrections: a convex hull correction `C_ch` for target points
//! falling outside the hull of the reference points, and for `S` a
//! small-sample adjustment `(S - a)/b` from fitted coefficient tables. When
//! both are requested the hull correction is applied first.

use serde::{Deserialize, Serialize};

use crate::distribution::{
    binomial_critical, binomial_pvalue, normal_pvalue, normal_quantile, r_caution,
    NullDistribution, QuadratureConfig, Side,
};
use crate::error::{PcdError, Result};
use crate::geometry::{delaunay_triangulate, Point2};
use crate::pcd::{domination_number, DominationResult, Expansion, PcdParams};

/// Triangles with fewer points than this trigger a small-sample warning.
pub const MIN_POINTS_PER_TRIANGLE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    Segregation,
    Association,
}

impl Alternative {
    pub fn side(self) -> Side {
        match self {
            Alternative::Segregation => Side::Lower,
            Alternative::Association => Side::Upper,
        }
    }
}

impl std::str::FromStr for Alternative {
    type Err = PcdError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "segregation" => Ok(Alternative::Segregation),
            "association" => Ok(Alternative::Association),
            _ => Err(PcdError::InvalidParameter(format!("unknown alternative '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Binomial,
    Normal,
}

impl std::str::FromStr for Statistic {
    type Err = PcdError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binomial" => Ok(Statistic::Binomial),
            "normal" => Ok(Statistic::Normal),
            _ => Err(PcdError::InvalidParameter(format!("unknown statistic '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub params: PcdParams,
    pub alpha: f64,
    pub alternative: Alternative,
    pub statistic: Statistic,
    #[serde(default)]
    pub hull_correction: bool,
    #[serde(default)]
    pub small_sample_correction: bool,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(PcdError::InvalidParameter(format!(
                "alpha {} outside (0, 0.5)",
                self.alpha
            )));
        }
        self.params.center_weights()?;
        self.quadrature.validate()?;
        if self.small_sample_correction {
            if self.statistic != Statistic::Normal {
                return Err(PcdError::InvalidParameter(
                    "the small-sample correction applies to the normal statistic only".into(),
                ));
            }
            SmallSampleCoefficients::lookup(self.params.r.value(), 10)?;
        }
        Ok(())
    }
}

/// Expected fraction of uniform points outside the convex hull of `m`
/// uniform reference points, `1.7932/m + 1.2229/√m`.
pub fn expected_pi_out(m: usize) -> f64 {
    let m = m as f64;
    1.7932 / m + 1.2229 / m.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullCorrection {
    pub p_out: f64,
    pub expected_pi_out: f64,
    /// `1 - (p_out - expected_pi_out)`.
    pub c_ch: f64,
}

impl HullCorrection {
    pub fn new(p_out: f64, m: usize) -> Result<Self> {
        if m < 4 {
            return Err(PcdError::InvalidParameter(format!(
                "hull correction needs at least 4 reference points, got {m}"
            )));
        }
        if !(0.0..=1.0).contains(&p_out) {
            return Err(PcdError::InvalidParameter(format!("p_out {p_out} outside [0, 1]")));
        }
        let e = expected_pi_out(m);
        Ok(HullCorrection {
            p_out,
            expected_pi_out: e,
            c_ch: 1.0 - (p_out - e),
        })
    }
}

/// Row of the small-sample table: `a = Σ a_k / x^{e_k}` and
/// `b = 1 + Σ b_k / x^{e_k}` with `x = n/J_m` and exponents `1, 1/2, 1/3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallSampleCoefficients {
    pub r: f64,
    pub m: usize,
    pub a_terms: [f64; 3],
    pub b_terms: [f64; 3],
}

const fn row(r: f64, m: usize, a_terms: [f64; 3], b_terms: [f64; 3]) -> SmallSampleCoefficients {
    SmallSampleCoefficients {
        r,
        m,
        a_terms,
        b_terms,
    }
}

pub const SMALL_SAMPLE_TABLE: [SmallSampleCoefficients; 10] = [
    row(1.5, 10, [-8.80, -30.94, 9.09], [-18.81, 16.26, -4.42]),
    row(1.5, 20, [10.19, -58.15, 20.27], [-11.16, 11.71, -3.24]),
    row(1.5, 30, [18.72, -77.36, 28.46], [-6.85, 7.56, -1.62]),
    row(1.5, 40, [28.11, -99.66, 38.73], [-5.23, 5.81, -0.92]),
    row(1.5, 50, [33.37, -115.58, 46.03], [-3.93, 3.88, 0.03]),
    row(1.35, 10, [-0.13, -34.35, 8.79], [-16.29, 13.43, -3.43]),
    row(1.35, 20, [16.05, -58.95, 18.01], [-10.49, 10.70, -3.04]),
    row(1.35, 30, [24.22, -77.98, 25.78], [-5.59, 5.52, -0.82]),
    row(1.35, 40, [30.66, -95.07, 32.91], [-4.02, 3.57, -0.06]),
    row(1.35, 50, [34.49, -107.87, 38.18], [-3.07, 2.55, 0.42]),
];

impl SmallSampleCoefficients {
    /// Exact-key lookup; the table is not interpolated.
    pub fn lookup(r: f64, m: usize) -> Result<&'static SmallSampleCoefficients> {
        SMALL_SAMPLE_TABLE
            .iter()
            .find(|c| c.r == r && c.m == m)
            .ok_or(PcdError::UnsupportedKey { r, m })
    }

    /// `(a, b)` at `x = n/J_m`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let pows = [x, x.sqrt(), x.cbrt()];
        let a = (0..3).map(|k| self.a_terms[k] / pows[k]).sum();
        let b = 1.0 + (0..3).map(|k| self.b_terms[k] / pows[k]).sum::<f64>();
        (a, b)
    }
}

/// `(s - a)/b` with the coefficients for `(r, m)` at `x = n/J_m`.
pub fn apply_small_sample(s: f64, n: usize, m: usize, j_m: usize, r: f64) -> Result<f64> {
    let c = SmallSampleCoefficients::lookup(r, m)?;
    let (a, b) = c.eval(n as f64 / j_m as f64);
    if !(b > 0.0) {
        return Err(PcdError::NumericalBreakdown(format!(
            "small-sample scale b = {b:.4} is not positive at n/J_m = {:.3}",
            n as f64 / j_m as f64
        )));
    }
    Ok((s - a) / b)
}

/// `γ - 2J_m`, untruncated.
pub fn b_untruncated(dom: &DominationResult) -> i64 {
    dom.gamma_total as i64 - 2 * dom.j_m as i64
}

/// `B = max(γ - 2J_m, 0)`.
pub fn b_statistic(dom: &DominationResult) -> f64 {
    b_untruncated(dom).max(0) as f64
}

/// `S = (Ḡ - μ) / sqrt(σ²/J_m)`.
pub fn s_statistic(dom: &DominationResult, null: &NullDistribution) -> Result<f64> {
    if null.regime != crate::distribution::Regime::Nondegenerate {
        return Err(PcdError::DegenerateRegime(format!("{:?}", null.regime)));
    }
    Ok((dom.g_bar - null.mu) / null.sd_gbar())
}

/// Hull-corrected binomial statistic `(γ - 2J_m)·C_ch`, set to zero unless
/// `γ·C_ch > 2J_m`. With `truncate = false` the lower tail keeps the signed
/// value.
pub fn apply_hull_correction_b(gamma_total: u64, j_m: usize, hull: &HullCorrection, truncate: bool) -> f64 {
    let g = gamma_total as f64;
    let two_j = 2.0 * j_m as f64;
    if g * hull.c_ch > two_j || !truncate {
        (g - two_j) * hull.c_ch
    } else {
        0.0
    }
}

/// `S^ch = S·C_ch`.
pub fn apply_hull_correction_s(s: f64, hull: &HullCorrection) -> f64 {
    s * hull.c_ch
}

/// Sample-size planning: `J* = ⌈(σ z / (Ḡ - μ))²⌉`, the number of
/// triangles beyond which the test rejects when the mean domination number
/// per triangle converges to `g_limit`.
pub fn j_star(null: &NullDistribution, alpha: f64, side: Side, g_limit: f64) -> Result<u64> {
    let z = match side {
        Side::Lower => normal_quantile(alpha),
        Side::Upper => normal_quantile(1.0 - alpha),
        Side::TwoSided => {
            return Err(PcdError::InvalidParameter("J* is one-sided".into()));
        }
    };
    let gap = g_limit - null.mu;
    if gap == 0.0 || gap.signum() != z.signum() {
        return Err(PcdError::InvalidParameter(format!(
            "limit Ḡ = {g_limit} is not in the rejection direction of μ = {}",
            null.mu
        )));
    }
    Ok((null.sigma2.sqrt() * z / gap).powi(2).ceil() as u64)
}

/// Observation counts behind a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n: usize,
    pub m: usize,
    pub j_m: usize,
    pub n_inside: usize,
    pub n_outside: usize,
    pub min_n_j: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: Statistic,
    pub alternative: Alternative,
    pub side: Side,
    pub alpha: f64,
    pub r: Expansion,
    pub center: String,
    /// `γ - 2J_m` (untruncated) for the binomial test, `S` for the normal
    /// test.
    pub statistic_raw: f64,
    /// Truncated `B = max(γ - 2J_m, 0)`, reported with the binomial test.
    pub b_truncated: Option<f64>,
    pub statistic_final: f64,
    pub p_value: f64,
    /// Twice the smaller tail probability, for reference.
    pub p_value_two_sided: f64,
    /// Lower: reject when the statistic is at or below it. Upper: at or
    /// above it. Binomial statistics are rounded to the integer in the
    /// conservative direction (floor below, ceiling above) before comparing.
    pub critical_value: f64,
    pub reject: bool,
    pub null_params: NullDistribution,
    pub hull: Option<HullCorrection>,
    pub corrections_applied: Vec<String>,
    pub warnings: Vec<String>,
    pub counts: Counts,
    pub gamma_total: u64,
    pub g_bar: f64,
}

impl TestResult {
    /// Decision read off the statistic and critical value.
    pub fn reject_by_critical_value(&self) -> bool {
        let s = self.statistic_final;
        match (self.statistic, self.side) {
            (Statistic::Binomial, Side::Lower) => s.floor() <= self.critical_value,
            (Statistic::Binomial, _) => s.ceil() >= self.critical_value,
            (Statistic::Normal, Side::Lower) => s <= self.critical_value,
            (Statistic::Normal, _) => s >= self.critical_value,
        }
    }
}

/// Test from a computed domination number.
pub fn test_from_domination(
    dom: &DominationResult,
    n: usize,
    m: usize,
    cfg: &TestConfig,
) -> Result<TestResult> {
    cfg.validate()?;
    let null = NullDistribution::for_params(&cfg.params, dom.j_m, &cfg.quadrature)?;
    test_with_null(dom, n, m, cfg, &null)
}

/// As [`test_from_domination`] with a precomputed null distribution.
pub fn test_with_null(
    dom: &DominationResult,
    n: usize,
    m: usize,
    cfg: &TestConfig,
    null: &NullDistribution,
) -> Result<TestResult> {
    let null = NullDistribution {
        j_m: dom.j_m,
        ..*null
    };
    let side = cfg.alternative.side();
    let r = cfg.params.r.value();
    let mut warnings = Vec::new();
    let mut corrections = Vec::new();

    if dom.min_n_j() < MIN_POINTS_PER_TRIANGLE {
        warnings.push(format!(
            "some triangle holds only {} target points; the limit law needs many points per \
             triangle (about 100 is a practical guide)",
            dom.min_n_j()
        ));
    }
    if let Some(w) = r_caution(r) {
        warnings.push(w);
    }
    if dom.n_outside > 0 && !cfg.hull_correction {
        warnings.push(format!(
            "{} of {n} target points lie outside the convex hull and are ignored; consider the hull correction",
            dom.n_outside
        ));
    }
    let hull = if cfg.hull_correction {
        let p_out = if n == 0 { 0.0 } else { dom.n_outside as f64 / n as f64 };
        let h = HullCorrection::new(p_out, m)?;
        corrections.push(format!("convex hull (C_ch = {:.6})", h.c_ch));
        Some(h)
    } else {
        None
    };

    let (raw, b_trunc, fin, p_value, p_two, crit) = match cfg.statistic {
        Statistic::Binomial => {
            let j = dom.j_m as u64;
            let q = 1.0 - null.p_r;
            let raw = b_untruncated(dom) as f64;
            let fin = match &hull {
                Some(h) => apply_hull_correction_b(dom.gamma_total, dom.j_m, h, side == Side::Upper),
                None if side == Side::Upper => raw.max(0.0),
                None => raw,
            };
            let (lo, hi) = (fin.floor() as i64, fin.ceil() as i64);
            let p = match side {
                Side::Lower => binomial_pvalue(lo, j, q, Side::Lower),
                _ => binomial_pvalue(hi, j, q, Side::Upper),
            };
            let p2 = (2.0 * binomial_pvalue(lo, j, q, Side::Lower).min(binomial_pvalue(hi, j, q, Side::Upper))).min(1.0);
            let crit = binomial_critical(j, q, cfg.alpha, side)? as f64;
            (raw, Some(b_statistic(dom)), fin, p, p2, crit)
        }
        Statistic::Normal => {
            let raw = s_statistic(dom, &null)?;
            let mut s = raw;
            if let Some(h) = &hull {
                s = apply_hull_correction_s(s, h);
            }
            if cfg.small_sample_correction {
                s = apply_small_sample(s, n, m, dom.j_m, r)?;
                corrections.push(format!("small sample (m = {m}, n/J_m = {:.3})", n as f64 / dom.j_m as f64));
            }
            let crit = match side {
                Side::Lower => normal_quantile(cfg.alpha),
                _ => normal_quantile(1.0 - cfg.alpha),
            };
            (raw, None, s, normal_pvalue(s, side), normal_pvalue(s, Side::TwoSided), crit)
        }
    };

    Ok(TestResult {
        statistic: cfg.statistic,
        alternative: cfg.alternative,
        side,
        alpha: cfg.alpha,
        r: cfg.params.r,
        center: cfg.params.center.label(),
        statistic_raw: raw,
        b_truncated: b_trunc,
        statistic_final: fin,
        p_value,
        p_value_two_sided: p_two,
        critical_value: crit,
        reject: p_value <= cfg.alpha,
        null_params: null,
        hull,
        corrections_applied: corrections,
        warnings,
        counts: Counts {
            n,
            m,
            j_m: dom.j_m,
            n_inside: dom.n_inside,
            n_outside: dom.n_outside,
            min_n_j: dom.min_n_j(),
        },
        gamma_total: dom.gamma_total,
        g_bar: dom.g_bar,
    })
}

/// Full pipeline: triangulate `y`, build the digraphs on `x`, take the
/// domination number and test it.
pub fn run_test(x: &[Point2], y: &[Point2], cfg: &TestConfig) -> Result<TestResult> {
    cfg.validate()?;
    if x.is_empty() {
        return Err(PcdError::InvalidParameter("no target points".into()));
    }
    let tri = delaunay_triangulate(y)?;
    let dom = domination_number(x, &tri, &cfg.params)?;
    let mut res = test_from_domination(&dom, x.len(), y.len(), cfg)?;
    res.warnings.extend(tri.warnings().iter().cloned());
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CenterSpec;
    use crate::pcd::TriangleGamma;

    fn dom(gamma_total: u64, j_m: usize) -> DominationResult {
        DominationResult {
            gamma_total,
            g_bar: gamma_total as f64 / j_m as f64,
            j_m,
            n_inside: 100 * j_m,
            n_outside: 0,
            per_triangle: (0..j_m)
                .map(|tri| TriangleGamma { tri, n_j: 100, gamma: 2 })
                .collect(),
        }
    }

    fn cfg(statistic: Statistic, alternative: Alternative) -> TestConfig {
        TestConfig {
            params: PcdParams::new(1.5, CenterSpec::CenterOfMass).unwrap(),
            alpha: 0.05,
            alternative,
            statistic,
            hull_correction: false,
            small_sample_correction: false,
            quadrature: QuadratureConfig::default(),
        }
    }

    #[test]
    fn b_statistic_arithmetic() {
        assert_eq!(b_statistic(&dom(26, 13)), 0.0);
        assert_eq!(b_statistic(&dom(39, 13)), 13.0);
        assert_eq!(b_statistic(&dom(30, 13)), 4.0);
        assert_eq!(b_statistic(&dom(20, 13)), 0.0);
        assert_eq!(b_untruncated(&dom(20, 13)), -6);
    }

    #[test]
    fn s_statistic_centered() {
        let null = NullDistribution::from_p(1.5, 0.7413, 13);
        let d = DominationResult {
            g_bar: null.mu,
            ..dom(0, 13)
        };
        assert_eq!(s_statistic(&d, &null).unwrap(), 0.0);
    }

    #[test]
    fn hull_correction_arithmetic() {
        assert!((expected_pi_out(10) - 0.566).abs() < 0.001);
        let h = HullCorrection::new(0.80, 10).unwrap();
        assert!((h.c_ch - (1.0 - (0.80 - expected_pi_out(10)))).abs() < 1e-15);
        assert!((h.c_ch - 0.766).abs() < 0.001);
        assert!(HullCorrection::new(0.1, 3).is_err());
        let neutral = HullCorrection::new(expected_pi_out(10), 10).unwrap();
        assert_eq!(neutral.c_ch, 1.0);
        assert_eq!(apply_hull_correction_s(-1.234, &neutral), -1.234);
        assert_eq!(apply_hull_correction_b(30, 13, &neutral, true), 4.0);
        assert_eq!(apply_hull_correction_b(20, 13, &neutral, true), 0.0);
        assert_eq!(apply_hull_correction_b(20, 13, &neutral, false), -6.0);
    }

    #[test]
    fn small_sample_lookup_and_limit() {
        assert!(matches!(
            SmallSampleCoefficients::lookup(1.4, 10),
            Err(PcdError::UnsupportedKey { .. })
        ));
        assert!(SmallSampleCoefficients::lookup(1.35, 15).is_err());
        let c = SmallSampleCoefficients::lookup(1.5, 10).unwrap();
        let x: f64 = 50.0;
        let (a, b) = c.eval(x);
        let a_ref = -8.80 / x - 30.94 / x.sqrt() + 9.09 / x.cbrt();
        let b_ref = 1.0 - 18.81 / x + 16.26 / x.sqrt() - 4.42 / x.cbrt();
        assert!((a - a_ref).abs() < 1e-12 && (b - b_ref).abs() < 1e-12);
        // b collapses for tiny n/J_m
        assert!(matches!(
            apply_small_sample(1.0, 13, 10, 13, 1.5),
            Err(PcdError::NumericalBreakdown(_))
        ));
    }

    #[test]
    fn decisions_are_consistent() {
        for g in 20..=39u64 {
            for stat in [Statistic::Binomial, Statistic::Normal] {
                for alt in [Alternative::Segregation, Alternative::Association] {
                    let res = test_from_domination(&dom(g, 13), 1300, 10, &cfg(stat, alt)).unwrap();
                    assert_eq!(res.reject, res.reject_by_critical_value(), "{g} {stat:?} {alt:?}");
                }
            }
        }
    }

    #[test]
    fn degenerate_regime_rejected() {
        let mut c = cfg(Statistic::Normal, Alternative::Segregation);
        c.params = PcdParams::new(2.0, CenterSpec::CenterOfMass).unwrap();
        assert!(matches!(
            test_from_domination(&dom(13, 13), 100, 10, &c),
            Err(PcdError::DegenerateRegime(_))
        ));
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(Statistic::Binomial, Alternative::Segregation);
        c.small_sample_correction = true;
        assert!(c.validate().is_err());
        c.statistic = Statistic::Normal;
        assert!(c.validate().is_ok());
        c.alpha = 0.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn j_star_limits() {
        let null = NullDistribution::from_p(1.5, 0.7413, 13);
        let js = j_star(&null, 0.05, Side::Lower, 2.0).unwrap();
        let z = normal_quantile(0.05);
        assert_eq!(js, ((null.sigma2.sqrt() * z / (2.0 - null.mu)).powi(2)).ceil() as u64);
        assert!(j_star(&null, 0.05, Side::Upper, 2.0).is_err());
        assert!(j_star(&null, 0.05, Side::Upper, 3.0).is_ok());
    }
}
