//! Complex gamma, log-gamma and generalized binomial coefficients.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the number of terms [`binomial_tail_index`] will walk.
pub const TAIL_INDEX_CAP: usize = 1 << 26;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// The order parameter `z` of a complex B-spline or truncated power.
///
/// Spline constructions require `Re(z) > -1`; [`ComplexDegree::new`] enforces
/// it. The fractional-equation context also admits `Re(z) = -1` through
/// [`ComplexDegree::new_closed`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct ComplexDegree(Complex64);

impl ComplexDegree {
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.re > -1.0) || !z.im.is_finite() {
            return Err(Error::DivergentSeries(z.re));
        }
        Ok(Self(z))
    }

    /// Accepts `Re(z) >= -1`.
    pub fn new_closed(z: Complex64) -> Result<Self> {
        if !(z.re >= -1.0) || !z.im.is_finite() {
            return Err(Error::DivergentSeries(z.re));
        }
        Ok(Self(z))
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    pub fn real(re: f64) -> Result<Self> {
        Self::new(Complex64::new(re, 0.0))
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn re(self) -> f64 {
        self.0.re
    }

    #[inline]
    pub fn im(self) -> f64 {
        self.0.im
    }

    /// `Some(n)` when the degree is the non-negative integer `n`.
    pub fn as_nonneg_integer(self) -> Option<usize> {
        nonneg_integer(self.0)
    }
}

impl fmt::Display for ComplexDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.im == 0.0 {
            write!(f, "{}", self.0.re)
        } else {
            write!(f, "{}{:+}i", self.0.re, self.0.im)
        }
    }
}

impl TryFrom<(f64, f64)> for ComplexDegree {
    type Error = Error;

    fn try_from((re, im): (f64, f64)) -> Result<Self> {
        Self::from_parts(re, im)
    }
}

impl From<ComplexDegree> for (f64, f64) {
    fn from(z: ComplexDegree) -> Self {
        (z.0.re, z.0.im)
    }
}

pub(crate) fn nonneg_integer(z: Complex64) -> Option<usize> {
    (z.im == 0.0 && z.re >= 0.0 && z.re.fract() == 0.0 && z.re < 1e15).then(|| z.re as usize)
}

fn pole_index(z: Complex64) -> Option<f64> {
    if z.re > 0.5 {
        return None;
    }
    let k = z.re.round();
    let tol = 1e-14 * (1.0 + k.abs());
    ((z - Complex64::new(k, 0.0)).norm() < tol).then_some(k)
}

fn lanczos_log_gamma(z: Complex64) -> Complex64 {
    let x = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (x + 0.5) * t.ln() - t + series.ln()
}

/// `ln sin(pi z)` on some branch, without overflowing for large `|Im z|`.
fn log_sin_pi(z: Complex64) -> Complex64 {
    let w = z * PI;
    let i = Complex64::i();
    if w.im > 20.0 {
        // sin w = (i/2) e^{-iw} (1 - e^{2iw})
        -i * w + (i * 0.5).ln() + (Complex64::new(1.0, 0.0) - (2.0 * i * w).exp()).ln()
    } else if w.im < -20.0 {
        // sin w = (-i/2) e^{iw} (1 - e^{-2iw})
        i * w + (-i * 0.5).ln() + (Complex64::new(1.0, 0.0) - (-2.0 * i * w).exp()).ln()
    } else {
        w.sin().ln()
    }
}

/// Logarithm of the gamma function.
///
/// The imaginary part is continuous off the negative real axis; only
/// `exp(log_gamma(z)) = Γ(z)` is guaranteed, which is how every caller
/// uses it.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if let Some(k) = pole_index(z) {
        return Err(Error::GammaPole(k));
    }
    if z.re < 0.5 {
        let one = Complex64::new(1.0, 0.0);
        Ok(PI.ln() - log_sin_pi(z) - lanczos_log_gamma(one - z))
    } else {
        Ok(lanczos_log_gamma(z))
    }
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    log_gamma(z).map(Complex64::exp)
}

/// `1/Γ(z)`, which is entire: it returns zero at the poles of Γ.
pub fn rgamma(z: Complex64) -> Complex64 {
    match log_gamma(z) {
        Ok(lg) => (-lg).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

/// Generalized binomial coefficient `Γ(a+1) / (Γ(k+1) Γ(a+1-k))`, computed as
/// the descending product `a (a-1) ... (a-k+1) / k!`.
///
/// Extreme `k` may saturate to a non-finite value instead of failing.
pub fn complex_binomial(a: Complex64, k: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..k {
        acc *= (a - i as f64) / (i as f64 + 1.0);
    }
    acc
}

/// Signed weights `(-1)^k binom(z+1, k)` for `k = 0..count` of the complex
/// backward difference `∇^{z+1}`.
pub fn difference_weights(z: Complex64, count: usize) -> Vec<Complex64> {
    let a = z + 1.0;
    let mut out = Vec::with_capacity(count);
    let mut b = Complex64::new(1.0, 0.0);
    for k in 0..count {
        out.push(b);
        b *= -(a - k as f64) / (k as f64 + 1.0);
    }
    out
}

/// Smallest `K` (from a rigorous bound) with `Σ_{k>K} |binom(z+1, k)| < eps`.
///
/// The bound uses the ratio `|binom(a,k+1)/binom(a,k)| = |a-k|/(k+1)`,
/// which for `k > Re a` is at most `1 - p/(k+1)` with
/// `p = Re a + 1 - (Im a)^2 / (2 (k - Re a))`. That gives
/// `Σ_{j>k} |b_j| <= |b_k| (k+1) / (p-1)` once `p > 1`, i.e. the terms decay
/// like `k^{-(Re z + 2)}`.
pub fn binomial_tail_index(z: ComplexDegree, eps: f64) -> Result<usize> {
    binomial_tail_index_capped(z.value(), eps, TAIL_INDEX_CAP)
}

pub(crate) fn binomial_tail_index_capped(z: Complex64, eps: f64, cap: usize) -> Result<usize> {
    if !(z.re > -1.0) {
        return Err(Error::DivergentSeries(z.re));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("tail tolerance must be positive, got {eps}")));
    }
    if let Some(n) = nonneg_integer(z) {
        return Ok(n + 1);
    }
    let a = z + 1.0;
    let mut b = 1.0_f64;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        if kf > a.re {
            let p = a.re + 1.0 - a.im * a.im / (2.0 * (kf - a.re));
            if p > 1.0 && b * (kf + 1.0) / (p - 1.0) < eps {
                return Ok(k);
            }
        }
        if k >= cap {
            return Err(Error::TailIndexTooLarge { re: z.re, eps, cap });
        }
        b *= (a - kf).norm() / (kf + 1.0);
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_gamma_known_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert_relative_eq!(log_gamma(c(5.0, 0.0)).unwrap().re, 24f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(log_gamma(c(0.5, 0.0)).unwrap().re, 0.572_364_942_924_700_1, max_relative = 1e-13);
        // mpmath.loggamma(1+2j) at 40 digits
        let lg = log_gamma(c(1.0, 2.0)).unwrap();
        assert!((lg - c(-1.876_078_786_430_929_3, 0.129_646_316_309_788_3)).norm() < 1e-13);
    }

    #[test]
    fn poles_are_rejected() {
        assert_eq!(log_gamma(c(0.0, 0.0)), Err(Error::GammaPole(0.0)));
        assert_eq!(log_gamma(c(-3.0, 0.0)), Err(Error::GammaPole(-3.0)));
        assert!(log_gamma(c(-3.0, 1e-6)).is_ok());
        assert_eq!(rgamma(c(-2.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn reflection_identity() {
        for i in 0..40 {
            let z = c(-3.7 + 0.23 * i as f64, -2.0 + 0.1 * i as f64);
            let lhs = gamma(z).unwrap() * gamma(c(1.0, 0.0) - z).unwrap();
            let rhs = PI / (z * PI).sin();
            assert!((lhs - rhs).norm() <= 1e-11 * rhs.norm(), "z = {z}");
        }
    }

    #[test]
    fn large_imaginary_parts_stay_finite() {
        let z = c(-0.3, 150.0);
        let lg = log_gamma(z).unwrap();
        assert!(lg.re.is_finite() && lg.im.is_finite());
        // |Γ(x+iy)| ~ sqrt(2π) |y|^{x-1/2} e^{-π|y|/2}
        let expected = HALF_LN_TWO_PI + (z.re - 0.5) * 150f64.ln() - PI * 75.0;
        assert!((lg.re - expected).abs() < 1e-3);
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(complex_binomial(c(3.0, 0.0), 2), c(3.0, 0.0));
        assert_eq!(complex_binomial(c(0.7, -2.0), 0), c(1.0, 0.0));
        let b = complex_binomial(c(1.5, 0.5), 3);
        assert!((b - c(-0.125, -1.0 / 24.0)).norm() < 1e-15);
        assert_eq!(complex_binomial(c(4.0, 0.0), 5), c(0.0, 0.0));
    }

    #[test]
    fn binomial_matches_gamma_ratio_off_poles() {
        let a = c(2.3, 0.4);
        for k in 0..12 {
            let via_gamma = gamma(a + 1.0).unwrap()
                / (gamma(c(k as f64 + 1.0, 0.0)).unwrap() * gamma(a + 1.0 - k as f64).unwrap());
            let b = complex_binomial(a, k);
            assert!((b - via_gamma).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn pochhammer_recurrence() {
        for &a in &[c(1.5, 0.5), c(-0.4, 2.0), c(7.0, -1.0)] {
            for k in 0..40 {
                let lhs = complex_binomial(a, k + 1);
                let rhs = complex_binomial(a, k) * (a - k as f64) / (k as f64 + 1.0);
                assert!((lhs - rhs).norm() <= 1e-13 * lhs.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn difference_weights_alternate() {
        let w = difference_weights(c(1.0, 0.0), 5);
        assert_eq!(w, vec![c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn tail_index_integer_degree() {
        let z = ComplexDegree::real(3.0).unwrap();
        assert_eq!(binomial_tail_index(z, 1e-3).unwrap(), 4);
        assert_eq!(binomial_tail_index(z, 1e-30).unwrap(), 4);
    }

    fn brute_tail(z: Complex64, k_start: usize) -> f64 {
        // direct summation far past the index plus an integral remainder
        // from the asymptotic |binom(a,k)| ~ k^{-Re a - 1} / |Γ(-a)|
        let a = z + 1.0;
        let end = 20 * (k_start + 50);
        let mut b = 1.0;
        let mut sum = 0.0;
        for k in 0..end {
            if k > k_start {
                sum += b;
            }
            b *= (a - k as f64).norm() / (k as f64 + 1.0);
        }
        sum + b * end as f64 / a.re
    }

    #[test]
    fn tail_index_is_sound() {
        for &(z, eps) in &[(c(0.5, 0.0), 1e-8), (c(0.5, 1.0), 1e-8), (c(-0.5, 0.3), 1e-2)] {
            let k = binomial_tail_index(ComplexDegree::new(z).unwrap(), eps).unwrap();
            let tail = brute_tail(z, k);
            assert!(tail < eps, "z = {z}: tail {tail} at K = {k}");
            // not wildly conservative either
            assert!(brute_tail(z, k / 8) > eps * 1e-3);
        }
    }

    #[test]
    fn divergent_degree_rejected() {
        assert!(matches!(
            binomial_tail_index_capped(c(-1.0, 0.5), 1e-3, 10),
            Err(Error::DivergentSeries(_))
        ));
        assert!(ComplexDegree::from_parts(-1.2, 0.0).is_err());
        assert!(ComplexDegree::new_closed(c(-1.0, 0.0)).is_ok());
    }

    #[test]
    fn tail_index_cap_is_reported() {
        let r = binomial_tail_index_capped(c(-0.9, 0.0), 1e-12, 1000);
        assert!(matches!(r, Err(Error::TailIndexTooLarge { .. })));
    }
}
