//! Truncated complex powers `k_z`, the complex backward difference `∇^{z+1}`
//! and univariate complex B-splines `B_z = ∇^{z+1} k_z`.
//!
//! Fourier convention: `f̂(ω) = ∫ f(x) e^{-iωx} dx`. With it
//! `k̂_z(ω) = (iω)^{-(z+1)}` and `B̂_z(ω) = Ω(ω)^{z+1}` where
//! `Ω(ω) = (1 - e^{-iω}) / (iω)`. All complex powers use the principal branch
//! with the argument taken in `[-π, π)`.
//!
//! Pointwise evaluation of `B_z` is offered only where `B_z` is continuous
//! (`Re z > 0`) and for the indicator `B_0`; for `-1 < Re z <= 0` the
//! function is not locally bounded near the knots and must be sampled through
//! its symbol (see [`crate::spectral`]).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureOptions};
use crate::special_fn::{self, binomial_tail_index, ComplexDegree};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Principal argument in `[-π, π)`.
#[inline]
pub fn principal_arg(w: Complex64) -> f64 {
    let a = w.im.atan2(w.re);
    if a >= PI {
        -PI
    } else {
        a
    }
}

/// `w^p` on the principal branch, `arg w ∈ [-π, π)`.
///
/// `0^p` is `0` for `Re p > 0` and `1` for `p = 0`; other powers of zero are
/// returned as non-finite values.
pub fn principal_pow(w: Complex64, p: Complex64) -> Complex64 {
    if w == ZERO {
        return if p == ZERO {
            ONE
        } else if p.re > 0.0 {
            ZERO
        } else {
            Complex64::new(f64::INFINITY, f64::NAN)
        };
    }
    (p * Complex64::new(w.norm().ln(), principal_arg(w))).exp()
}

/// `sin(x)/x`, accurate near zero.
#[inline]
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `Ω(ω) = (1 - e^{-iω}) / (iω)`, continuously extended by `Ω(0) = 1`.
///
/// Evaluated as `e^{-iω/2} sinc(ω/2)` to avoid cancellation at small `ω`.
/// Frequencies within rounding of `2πℤ∖{0}` return an exact zero.
#[inline]
pub fn omega_factor(omega: f64) -> Complex64 {
    if on_nonzero_lattice(omega) {
        return ZERO;
    }
    Complex64::from_polar(sinc(0.5 * omega), -0.5 * omega)
}

#[inline]
pub(crate) fn on_nonzero_lattice(omega: f64) -> bool {
    let cycles = omega / (2.0 * PI);
    let nearest = cycles.round();
    nearest != 0.0 && (cycles - nearest).abs() <= 4.0 * f64::EPSILON * cycles.abs()
}

/// Whether `B_z` (and `k_z`) can be evaluated pointwise by the finite
/// difference sum.
pub fn pointwise_supported(z: Complex64) -> bool {
    z.re > 0.0 || z == ZERO
}

fn require_pointwise(z: Complex64) -> Result<()> {
    if pointwise_supported(z) {
        Ok(())
    } else {
        Err(Error::PointwiseUnsupported(z))
    }
}

/// `t_+^z = t^{Re z} e^{i Im z ln t}` for `t > 0` and `0` otherwise,
/// optionally divided by `Γ(z+1)` (the kernel `k_z`).
pub fn truncated_power_eval(z: ComplexDegree, t: f64, normalized: bool) -> Complex64 {
    let raw = raw_truncated_power(z.value(), t);
    if normalized {
        raw * special_fn::rgamma(z.value() + 1.0)
    } else {
        raw
    }
}

#[inline]
pub(crate) fn raw_truncated_power(z: Complex64, t: f64) -> Complex64 {
    if t <= 0.0 {
        ZERO
    } else if z == ZERO {
        ONE
    } else {
        (z * t.ln()).exp()
    }
}

/// The normalized truncated power `k_z(t) = t_+^z / Γ(z+1)`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedPower {
    degree: ComplexDegree,
    inv_gamma: Complex64,
}

impl TruncatedPower {
    pub fn new(degree: ComplexDegree) -> Self {
        Self { degree, inv_gamma: special_fn::rgamma(degree.value() + 1.0) }
    }

    pub fn degree(&self) -> ComplexDegree {
        self.degree
    }

    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        raw_truncated_power(self.degree.value(), t) * self.inv_gamma
    }

    /// `k̂_z(ω) = (iω)^{-(z+1)}`; a pole at `ω = 0`.
    pub fn fourier(&self, omega: f64) -> Complex64 {
        principal_pow(Complex64::new(0.0, omega), -(self.degree.value() + 1.0))
    }
}

/// What is known about the function a backward difference acts on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// `f` vanishes on `(-∞, 0]`: the series stops exactly at `k = ⌊t⌋`.
    Causal,
    /// `f` is bounded by one; the series is cut at the binomial tail index
    /// for the given tolerance.
    Bounded { eps: f64 },
}

/// `(∇^{z+1} f)(t) = Σ_k (-1)^k binom(z+1, k) f(t-k)`.
pub fn backward_difference<F>(z: ComplexDegree, f: F, t: f64, support: Support) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let last = match support {
        Support::Causal => {
            if t <= 0.0 {
                return Ok(ZERO);
            }
            t.floor() as usize
        }
        Support::Bounded { eps } => binomial_tail_index(z, eps)?,
    };
    Ok(difference_sum(z.value(), last, |k| f(t - k as f64)))
}

/// `Σ_{k=0}^{last} (-1)^k binom(z+1, k) g(k)` with the weights generated by
/// their two-term recurrence.
#[inline]
pub(crate) fn difference_sum<G: FnMut(usize) -> Complex64>(z: Complex64, last: usize, mut g: G) -> Complex64 {
    let a = z + 1.0;
    let mut w = ONE;
    let mut acc = ZERO;
    for k in 0..=last {
        if w == ZERO {
            break;
        }
        acc += w * g(k);
        w *= -(a - k as f64) / (k as f64 + 1.0);
    }
    acc
}

/// A univariate complex B-spline of degree `z`.
#[derive(Debug, Clone, Copy)]
pub struct ComplexBSpline {
    degree: ComplexDegree,
    truncation_eps: f64,
    kernel: TruncatedPower,
}

impl ComplexBSpline {
    pub const DEFAULT_EPS: f64 = 1e-10;

    pub fn new(degree: ComplexDegree) -> Self {
        Self::with_eps(degree, Self::DEFAULT_EPS)
    }

    pub fn with_eps(degree: ComplexDegree, truncation_eps: f64) -> Self {
        Self { degree, truncation_eps, kernel: TruncatedPower::new(degree) }
    }

    pub fn degree(&self) -> ComplexDegree {
        self.degree
    }

    pub fn truncation_eps(&self) -> f64 {
        self.truncation_eps
    }

    /// `B_z(t) = Σ_{k=0}^{⌊t⌋} (-1)^k binom(z+1, k) k_z(t-k)`.
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        let z = self.degree.value();
        require_pointwise(z)?;
        if t <= 0.0 {
            return Ok(ZERO);
        }
        if z == ZERO {
            return Ok(if t < 1.0 { ONE } else { ZERO });
        }
        Ok(difference_sum(z, t.floor() as usize, |k| self.kernel.eval(t - k as f64)))
    }

    /// Two-term recurrence `B_z(t) = (t/z) B_{z-1}(t) + ((z+1-t)/z) B_{z-1}(t-1)`.
    pub fn recurrence_eval(&self, t: f64) -> Result<Complex64> {
        let z = self.degree.value();
        let lower = z - 1.0;
        require_pointwise(lower)?;
        let prev = ComplexBSpline::new(ComplexDegree::new(lower)?);
        Ok(prev.eval(t)? * t / z + prev.eval(t - 1.0)? * (z + 1.0 - t) / z)
    }

    /// `B̂_z(ω) = Ω(ω)^{z+1}`.
    pub fn fourier(&self, omega: f64) -> Complex64 {
        principal_pow(omega_factor(omega), self.degree.value() + 1.0)
    }

    /// Splits `B̂_z(ω)` into the real-degree spectrum `Ω^{Re z + 1}`, the
    /// modulation `e^{i Im z ln|Ω|}` and the damping `e^{-Im z arg Ω}`.
    pub fn spectrum_factors(&self, omega: f64) -> Result<SpectrumFactors> {
        let w = omega_factor(omega);
        if w.norm() == 0.0 {
            return Err(Error::UndefinedFactorization);
        }
        let z = self.degree.value();
        let arg = principal_arg(w);
        Ok(SpectrumFactors {
            base: principal_pow(w, Complex64::new(z.re + 1.0, 0.0)),
            modulation: Complex64::from_polar(1.0, z.im * w.norm().ln()),
            damping: (-z.im * arg).exp(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumFactors {
    pub base: Complex64,
    pub modulation: Complex64,
    pub damping: f64,
}

impl SpectrumFactors {
    pub fn product(&self) -> Complex64 {
        self.base * self.modulation * self.damping
    }
}

pub fn bspline_eval(z: ComplexDegree, t: f64) -> Result<Complex64> {
    ComplexBSpline::new(z).eval(t)
}

pub fn bspline_recurrence_eval(z: ComplexDegree, t: f64) -> Result<Complex64> {
    ComplexBSpline::new(z).recurrence_eval(t)
}

pub fn bspline_fourier(z: ComplexDegree, omega: f64) -> Complex64 {
    ComplexBSpline::new(z).fourier(omega)
}

pub fn spectrum_factors(z: ComplexDegree, omega: f64) -> Result<SpectrumFactors> {
    ComplexBSpline::new(z).spectrum_factors(omega)
}

/// `∫_a^b f(s) g(t - s) ds` by adaptive quadrature with breakpoints at the
/// integer knots of both factors. Absolute accuracy target `1e-8`.
pub fn convolve_quadrature<F, G>(f: F, g: G, t: f64, support: (f64, f64)) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    let (a, b) = support;
    let mut knots = quadrature::integer_knots(a, b);
    knots.extend(quadrature::integer_knots(t - b, t - a).into_iter().map(|k| t - k));
    let opts = QuadratureOptions { abs_tol: 1e-9, rel_tol: 0.0, max_intervals: 20_000 };
    let q = quadrature::integrate(|s| f(s) * g(t - s), a, b, &knots, opts)?;
    Ok(q.value)
}
