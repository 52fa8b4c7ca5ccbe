//! Null distribution of the domination number: the limit regime for a given
//! `(r, M)`, the Bernoulli parameter `p_r`, and binomial and normal tail
//! probabilities.
//!
//! In the nondegenerate regime each nonempty triangle contributes
//! `γ_j = 2 + Bernoulli(1 - p_r)` in the large-sample limit, so
//! `Ḡ = γ / J_m` has mean `μ = 3 - p_r` and variance `p_r (1 - p_r) / J_m`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{PcdError, Result};
use crate::geometry::{tau_barycentric, CenterSpec};
use crate::pcd::{Expansion, PcdParams};
use crate::quadrature::{integrate, Estimate};

/// `p_r` at `r = 3/2` with `M = M_C`; not given by the integral formula.
pub const P_THREE_HALVES: f64 = 0.7413;

const MATCH_TOL: f64 = 1e-12;

/// Limit law of the per-triangle domination number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `γ_j → 2 + Bernoulli(1 - p_r)`.
    Nondegenerate,
    /// `γ_j → 1` almost surely.
    DegenerateOne,
    /// `γ_j → 3` almost surely.
    DegenerateThree,
}

/// Limit regime of `γ` for expansion `r` and center `M`.
///
/// `r > 3/2` always degenerates to 1. For `r < 3/2` the limit is
/// nondegenerate exactly at the vertices `t_i(r)` of `𝒯_r` and 3 elsewhere
/// in `𝒯_r`; at `r = 3/2`, `𝒯_r` shrinks to `M_C`. Centers outside `𝒯_r`
/// have no known limit and give [`PcdError::NotCovered`].
pub fn regime_of(r: Expansion, center: &CenterSpec) -> Result<Regime> {
    let r = match r {
        Expansion::Infinite => {
            if let CenterSpec::TauVertex(_) = center {
                return Err(PcdError::ROutOfRange(f64::INFINITY, "[1, 3/2]"));
            }
            center.resolve(f64::INFINITY)?;
            return Ok(Regime::DegenerateOne);
        }
        Expansion::Finite(r) => r,
    };
    if r < 1.0 {
        return Err(PcdError::ROutOfRange(r, "[1, inf]"));
    }
    if r > 1.5 {
        center.resolve(r)?;
        return Ok(Regime::DegenerateOne);
    }
    if r == 1.0 {
        if let CenterSpec::TauVertex(_) = center {
            return Err(PcdError::RDegenerate);
        }
    }
    let m = center.resolve(r)?;
    if let CenterSpec::TauVertex(_) = center {
        return Ok(Regime::Nondegenerate);
    }
    let tau = tau_barycentric(r)?;
    if tau
        .iter()
        .any(|t| (0..3).all(|i| (t.0[i] - m.0[i]).abs() <= MATCH_TOL))
    {
        return Ok(Regime::Nondegenerate);
    }
    let floor = (r - 1.0) / r;
    if r < 1.5 && m.0.iter().all(|&w| w >= floor - MATCH_TOL) {
        return Ok(Regime::DegenerateThree);
    }
    Err(PcdError::NotCovered {
        r,
        center: center.label(),
    })
}

/// Quadrature settings for `p_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    /// Upper limit of each integration variable, in units of the Gaussian
    /// scale `sqrt(3(r-1)/(4r))`.
    pub truncation: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            truncation: 40.0,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(PcdError::InvalidParameter(format!(
                "rel_tol {} outside (0, 1e-3]",
                self.rel_tol
            )));
        }
        if !(self.truncation > 0.0 && self.truncation.is_finite()) || self.max_subdivisions == 0 {
            return Err(PcdError::InvalidParameter(
                "truncation and max_subdivisions must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `p_r` as the double integral
///
/// `∫∫_{(0,∞)²} 64r²/(9(r-1)²) w₁w₃ exp(-(4r/(3(r-1)))(w₁² + w₃² + 2r(r-1)w₁w₃)) dw₁ dw₃`,
///
/// for any `r > 1`. Each axis is mapped to `(0, 1)` by `w = s·u/(1-u)`.
pub fn p_r_integral(r: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    cfg.validate()?;
    if r == 1.0 {
        return Err(PcdError::RDegenerate);
    }
    if !(r > 1.0 && r.is_finite()) {
        return Err(PcdError::ROutOfRange(r, "(1, inf)"));
    }
    let k = 4.0 * r / (3.0 * (r - 1.0));
    let coef = 64.0 * r * r / (9.0 * (r - 1.0) * (r - 1.0));
    let cross = 2.0 * r * (r - 1.0);
    let s = k.sqrt().recip();
    let u_max = cfg.truncation / (1.0 + cfg.truncation);
    let map = |u: f64| {
        let d = 1.0 - u;
        (s * u / d, s / (d * d))
    };
    let inner_tol = cfg.rel_tol * 0.1;
    let mut inner_err = 0.0f64;
    let mut failure = None;
    let outer = integrate(
        |u1| {
            let (w1, j1) = map(u1);
            let res = integrate(
                |u3| {
                    let (w3, j3) = map(u3);
                    let q = w1 * w1 + w3 * w3 + cross * w1 * w3;
                    w3 * (-k * q).exp() * j3
                },
                0.0,
                u_max,
                inner_tol,
                1e-300,
                cfg.max_subdivisions,
            );
            match res {
                Ok(e) => {
                    inner_err += e.abs_err * coef * w1 * j1;
                    coef * w1 * j1 * e.value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        u_max,
        cfg.rel_tol,
        1e-300,
        cfg.max_subdivisions,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = outer?;
    Ok(Estimate {
        value: outer.value,
        abs_err: outer.abs_err + inner_err.min(outer.value.abs()),
    })
}

/// `p_r` for the nondegenerate regime: the integral for `r ∈ (1, 3/2)` and
/// the stored constant 0.7413 at `r = 3/2`.
pub fn p_r(r: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if r == 1.0 {
        return Err(PcdError::RDegenerate);
    }
    if !(r > 1.0 && r <= 1.5) {
        return Err(PcdError::ROutOfRange(r, "(1, 3/2]"));
    }
    if r == 1.5 {
        return Ok(Estimate {
            value: P_THREE_HALVES,
            abs_err: 5e-5,
        });
    }
    p_r_integral(r, cfg)
}

/// Root of `p_r = target` on `[lo, hi]` by bisection; `p_r` is decreasing.
pub fn p_r_inverse(target: f64, lo: f64, hi: f64, tol: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (
        p_r_integral(lo, cfg)?.value - target,
        p_r_integral(hi, cfg)?.value - target,
    );
    if flo.signum() == fhi.signum() {
        return Err(PcdError::InvalidParameter(format!(
            "p_r - {target} does not change sign on [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if p_r_integral(mid, cfg)?.value > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Tail of a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
    /// Twice the smaller tail; used for reporting only.
    TwoSided,
}

/// Null distribution of `Ḡ` in the nondegenerate regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub r: f64,
    pub p_r: f64,
    pub regime: Regime,
    pub mu: f64,
    pub sigma2: f64,
    pub j_m: usize,
}

impl NullDistribution {
    pub fn from_p(r: f64, p_r: f64, j_m: usize) -> Self {
        NullDistribution {
            r,
            p_r,
            regime: Regime::Nondegenerate,
            mu: 3.0 - p_r,
            sigma2: p_r * (1.0 - p_r),
            j_m,
        }
    }

    /// Null for `params`, or [`PcdError::DegenerateRegime`] when the limit
    /// is a point mass.
    pub fn for_params(params: &PcdParams, j_m: usize, cfg: &QuadratureConfig) -> Result<Self> {
        let regime = regime_of(params.r, &params.center)?;
        if regime != Regime::Nondegenerate {
            return Err(PcdError::DegenerateRegime(format!(
                "r = {}, M = {}: γ per triangle tends to {} almost surely",
                params.r,
                params.center.label(),
                if regime == Regime::DegenerateOne { 1 } else { 3 }
            )));
        }
        let r = params.r.value();
        Ok(Self::from_p(r, p_r(r, cfg)?.value, j_m))
    }

    /// Standard deviation of `Ḡ`.
    pub fn sd_gbar(&self) -> f64 {
        (self.sigma2 / self.j_m as f64).sqrt()
    }
}

/// Usage caution for `r ∈ (1.45, 1.5)`, where the domination number test is
/// not recommended.
pub fn r_caution(r: f64) -> Option<String> {
    (r > 1.45 && r < 1.5).then(|| {
        format!("r = {r} lies in (1.45, 1.50), where the domination number test is not recommended")
    })
}

/// Probability mass `P(X = i)` for `X ~ Bin(n, p)`. Binomial coefficients
/// are built by exact multiplicative recurrence while they fit in an `f64`.
fn pmf(i: u64, n: u64, p: f64) -> f64 {
    let k = i.min(n - i);
    if n <= 1000 {
        let coef = (1..=k).fold(1.0f64, |c, j| c * (n - k + j) as f64 / j as f64);
        coef * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32)
    } else {
        let (x, nf) = (i as f64, n as f64);
        (ln_gamma(nf + 1.0) - ln_gamma(x + 1.0) - ln_gamma(nf - x + 1.0)
            + x * p.ln()
            + (nf - x) * (-p).ln_1p())
        .exp()
    }
}

/// `(P(X ≤ k), P(X > k))` for `X ~ Bin(n, p)`, each tail summed on its own
/// so that small upper tails keep their precision.
fn binomial_tails(k: i64, n: u64, p: f64) -> (f64, f64) {
    if k < 0 {
        return (0.0, 1.0);
    }
    if k as u64 >= n {
        return (1.0, 0.0);
    }
    let k = k as u64;
    let lower: f64 = (0..=k).map(|i| pmf(i, n, p)).sum();
    let upper: f64 = (k + 1..=n).map(|i| pmf(i, n, p)).sum();
    (lower.min(1.0), upper.min(1.0))
}

/// `P(Bin(n, p) ≤ k)`.
pub fn binomial_cdf(k: i64, n: u64, p: f64) -> f64 {
    binomial_tails(k, n, p).0
}

/// `P(Bin(n, p) ≥ k)`.
pub fn binomial_sf(k: i64, n: u64, p: f64) -> f64 {
    binomial_tails(k - 1, n, p).1
}

fn check_binomial(j_m: u64, p: f64, alpha: f64) -> Result<()> {
    if j_m == 0 {
        return Err(PcdError::InvalidParameter("j_m must be at least 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(PcdError::InvalidParameter(format!("success probability {p} outside (0, 1)")));
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(PcdError::InvalidParameter(format!("alpha {alpha} outside (0, 1/2]")));
    }
    Ok(())
}

/// Critical value of `Bin(j_m, p_success)`. Lower side: the largest `b`
/// with `P(X ≤ b) ≤ α` (−1 when none). Upper side: the smallest `b` with
/// `P(X ≥ b) ≤ α` (`j_m + 1` when none).
pub fn binomial_critical(j_m: u64, p_success: f64, alpha: f64, side: Side) -> Result<i64> {
    check_binomial(j_m, p_success, alpha)?;
    match side {
        Side::Lower => Ok((0..=j_m as i64)
            .take_while(|&b| binomial_cdf(b, j_m, p_success) <= alpha)
            .last()
            .unwrap_or(-1)),
        Side::Upper => Ok((0..=j_m as i64)
            .rev()
            .take_while(|&b| binomial_sf(b, j_m, p_success) <= alpha)
            .last()
            .unwrap_or(j_m as i64 + 1)),
        Side::TwoSided => Err(PcdError::InvalidParameter(
            "critical values are one-sided".into(),
        )),
    }
}

/// Exact binomial tail probability of observing `b`.
pub fn binomial_pvalue(b: i64, j_m: u64, p_success: f64, side: Side) -> f64 {
    match side {
        Side::Lower => binomial_cdf(b, j_m, p_success),
        Side::Upper => binomial_sf(b, j_m, p_success),
        Side::TwoSided => (2.0
            * binomial_cdf(b, j_m, p_success).min(binomial_sf(b, j_m, p_success)))
        .min(1.0),
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// Standard normal tail probability of observing `s`.
pub fn normal_pvalue(s: f64, side: Side) -> f64 {
    let n = std_normal();
    match side {
        Side::Lower => n.cdf(s),
        Side::Upper => n.sf(s),
        Side::TwoSided => (2.0 * n.sf(s.abs())).min(1.0),
    }
}

/// `z` with `Φ(z) = q`.
pub fn normal_quantile(q: f64) -> f64 {
    std_normal().inverse_cdf(q)
}
