//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{PcdError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral estimate with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK[..7].iter().enumerate() {
        let s = f(c - h * x) + f(c + h * x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Estimate {
        value: kronrod * h,
        abs_err: ((kronrod - gauss) * h).abs(),
    }
}

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol` (with an
/// absolute floor `abs_tol`), bisecting the worst interval until done.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate> {
    let mut parts = vec![(a, b, gk15(&mut f, a, b))];
    loop {
        let value: f64 = parts.iter().map(|p| p.2.value).sum();
        let err: f64 = parts.iter().map(|p| p.2.abs_err).sum();
        if !value.is_finite() || !err.is_finite() {
            return Err(PcdError::NumericalBreakdown(
                "non-finite integrand value".into(),
            ));
        }
        if err <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Estimate {
                value,
                abs_err: err,
            });
        }
        if parts.len() >= max_subdivisions {
            return Err(PcdError::NonConvergence(format!(
                "quadrature error {err:.3e} after {} subintervals",
                parts.len()
            )));
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.abs_err.total_cmp(&y.1 .2.abs_err))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&mut f, lo, mid)));
        parts.push((mid, hi, gk15(&mut f, mid, hi)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let e = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1e-12, 0.0, 10).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((e.value - exact).abs() < 1e-12);
    }

    #[test]
    fn gaussian_and_singular_endpoint() {
        let e = integrate(|x| (-x * x).exp(), 0.0, 10.0, 1e-10, 0.0, 200).unwrap();
        assert!((e.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
        let s = integrate(|x| x.sqrt().recip(), 0.0, 1.0, 1e-8, 0.0, 500).unwrap();
        assert!((s.value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn reports_nonconvergence() {
        let r = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 0.0, 4);
        assert!(matches!(r, Err(PcdError::NonConvergence(_))));
    }
}
