//! Multivariate truncated complex powers `𝒯_𝒛(·|M)` and complex box splines
//! `ℬ_𝒛(·|M)`.
//!
//! For invertible `M` the box spline is evaluated as
//! `ℬ_𝒛(y|M) = Π_j B_{z_j}((M⁻¹y)_j) / |det M|` over the whole positive cone.
//! The complex B-spline factors are not compactly supported, so no
//! indicator of the parallelepiped `M([0,1)^d)` is applied; agreement with
//! samples of the Fourier symbol is what certifies these values.
//!
//! For a non-square `M` the only time-domain route is the recurrence over the
//! last direction, [`boxspline_recurrence_eval`].

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directions::{mat_vec, DirectionSet};
use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureOptions};
use crate::special_fn::ComplexDegree;
use crate::univariate::{self, omega_factor, principal_pow, ComplexBSpline, TruncatedPower};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Hard cap on the number of lattice terms a difference representation may
/// sum.
pub const DIFFERENCE_TERM_CAP: usize = 20_000_000;

/// Degrees `𝒛 = (z_0, ..., z_n)`, aligned with the columns of a direction set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeVector(Vec<ComplexDegree>);

impl DegreeVector {
    pub fn new(entries: Vec<ComplexDegree>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("degree vector must not be empty".into()));
        }
        Ok(Self(entries))
    }

    pub fn from_complex(values: &[Complex64]) -> Result<Self> {
        Self::new(values.iter().map(|&z| ComplexDegree::new(z)).collect::<Result<_>>()?)
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&z| ComplexDegree::real(z)).collect::<Result<_>>()?)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[ComplexDegree] {
        &self.0
    }

    pub fn get(&self, j: usize) -> ComplexDegree {
        self.0[j]
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.0.iter().map(|z| z.value()).collect()
    }

    /// `min_j Re z_j`.
    pub fn min_re(&self) -> f64 {
        self.0.iter().map(|z| z.re()).fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonneg_integer(&self) -> bool {
        self.0.iter().all(|z| z.as_nonneg_integer().is_some())
    }

    /// Entrywise `𝒛 + 𝒛̄ + 1`, the degree of a convolution.
    pub fn convolved(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Self::from_complex(&self.0.iter().zip(&other.0).map(|(a, b)| a.value() + b.value() + 1.0).collect::<Vec<_>>())
    }

    /// `𝒛` with `z_j` replaced by `z_j + delta`.
    pub fn shifted(&self, j: usize, delta: f64) -> Result<Self> {
        let mut v = self.values();
        v[j] += delta;
        Self::from_complex(&v)
    }

    fn without_last(&self) -> Result<Self> {
        Self::new(self.0[..self.0.len() - 1].to_vec())
    }

    fn check_against(&self, m: &DirectionSet) -> Result<()> {
        if self.len() != m.n_plus_1() {
            return Err(Error::DimensionMismatch { expected: m.n_plus_1(), found: self.len() });
        }
        Ok(())
    }
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `k_𝒛(t) = Π_j k_{z_j}(t_j)`; zero as soon as some `t_j <= 0`.
pub fn tensor_kernel_eval(zv: &DegreeVector, t: &[f64]) -> Result<Complex64> {
    check_len(t.len(), zv.len())?;
    let mut acc = ONE;
    for (z, &tj) in zv.entries().iter().zip(t) {
        if tj <= 0.0 {
            return Ok(ZERO);
        }
        acc *= TruncatedPower::new(*z).eval(tj);
    }
    Ok(acc)
}

/// `𝒯̂_𝒛(ω|M) = Π_j (iω·m_j)^{-(z_j+1)}`.
pub fn truncated_power_symbol(zv: &DegreeVector, m: &DirectionSet, omega: &[f64]) -> Result<Complex64> {
    zv.check_against(m)?;
    check_len(omega.len(), m.d())?;
    let mut acc = ONE;
    for (j, z) in zv.entries().iter().enumerate() {
        let s = m.dot(j, omega);
        if s == 0.0 {
            return Err(Error::OrthogonalFrequency(j));
        }
        acc *= principal_pow(Complex64::new(0.0, s), -(z.value() + 1.0));
    }
    Ok(acc)
}

/// `𝒯_𝒛(x|M) = k_𝒛(M⁻¹x) / |det M|` for square invertible `M`.
pub fn truncated_power_eval_invertible(zv: &DegreeVector, m: &DirectionSet, x: &[f64]) -> Result<Complex64> {
    let spline = ComplexBoxSpline::new(zv.clone(), m.clone())?;
    spline.truncated_power_eval(x)
}

/// `ℬ̂_𝒛(ω|M) = Π_j Ω(ω·m_j)^{z_j+1}` with `Ω(0) = 1` and exact zeros on
/// `ω·m_j ∈ 2πℤ∖{0}`.
pub fn boxspline_symbol(zv: &DegreeVector, m: &DirectionSet, omega: &[f64]) -> Result<Complex64> {
    zv.check_against(m)?;
    check_len(omega.len(), m.d())?;
    Ok(symbol_unchecked(zv, m, omega))
}

pub(crate) fn symbol_unchecked(zv: &DegreeVector, m: &DirectionSet, omega: &[f64]) -> Complex64 {
    let mut acc = ONE;
    for (j, z) in zv.entries().iter().enumerate() {
        let s = m.dot(j, omega);
        if s != 0.0 {
            acc *= principal_pow(omega_factor(s), z.value() + 1.0);
        }
    }
    acc
}

/// A complex box spline `ℬ_𝒛(·|M)`.
#[derive(Debug, Clone)]
pub struct ComplexBoxSpline {
    degrees: DegreeVector,
    directions: DirectionSet,
    truncation_eps: f64,
    factors: Vec<ComplexBSpline>,
    // (|det M|, M⁻¹) for square M
    inverse: Option<(f64, Vec<Vec<f64>>)>,
}

impl ComplexBoxSpline {
    pub fn new(degrees: DegreeVector, directions: DirectionSet) -> Result<Self> {
        Self::with_eps(degrees, directions, ComplexBSpline::DEFAULT_EPS)
    }

    pub fn with_eps(degrees: DegreeVector, directions: DirectionSet, truncation_eps: f64) -> Result<Self> {
        degrees.check_against(&directions)?;
        let factors = degrees.entries().iter().map(|&z| ComplexBSpline::with_eps(z, truncation_eps)).collect();
        let inverse = if directions.is_square() {
            let (det, inv) = directions.det_and_inverse()?;
            Some((det.abs(), inv))
        } else {
            None
        };
        Ok(Self { degrees, directions, truncation_eps, factors, inverse })
    }

    pub fn degrees(&self) -> &DegreeVector {
        &self.degrees
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn truncation_eps(&self) -> f64 {
        self.truncation_eps
    }

    pub fn symbol(&self, omega: &[f64]) -> Result<Complex64> {
        check_len(omega.len(), self.directions.d())?;
        Ok(symbol_unchecked(&self.degrees, &self.directions, omega))
    }

    fn inverse(&self) -> Result<&(f64, Vec<Vec<f64>>)> {
        self.inverse
            .as_ref()
            .ok_or(Error::NotSquare { d: self.directions.d(), columns: self.directions.n_plus_1() })
    }

    /// Coordinates `M⁻¹y` and `|det M|`.
    pub fn local_coordinates(&self, y: &[f64]) -> Result<(Vec<f64>, f64)> {
        check_len(y.len(), self.directions.d())?;
        let (det, inv) = self.inverse()?;
        Ok((mat_vec(inv, y), *det))
    }

    pub fn pointwise_supported(&self) -> bool {
        self.degrees.entries().iter().all(|z| univariate::pointwise_supported(z.value()))
    }

    fn require_pointwise(&self) -> Result<()> {
        match self.degrees.entries().iter().find(|z| !univariate::pointwise_supported(z.value())) {
            Some(z) => Err(Error::PointwiseUnsupported(z.value())),
            None => Ok(()),
        }
    }

    /// `𝒯_𝒛(x|M) = k_𝒛(M⁻¹x) / |det M|`.
    pub fn truncated_power_eval(&self, x: &[f64]) -> Result<Complex64> {
        self.directions.require_cone_convention()?;
        let (t, det) = self.local_coordinates(x)?;
        Ok(tensor_kernel_eval(&self.degrees, &t)? / det)
    }

    /// `ℬ_𝒛(y|M) = Π_j B_{z_j}((M⁻¹y)_j) / |det M|` (square `M` only).
    pub fn eval(&self, y: &[f64]) -> Result<Complex64> {
        self.require_pointwise()?;
        let (t, det) = self.local_coordinates(y)?;
        let mut acc = ONE;
        for (b, &tj) in self.factors.iter().zip(&t) {
            if tj <= 0.0 {
                return Ok(ZERO);
            }
            acc *= b.eval(tj)?;
        }
        Ok(acc / det)
    }

    /// Evaluates through whichever time-domain route applies: the closed form
    /// for square `M`, the recurrence over the last direction otherwise.
    pub fn eval_any(&self, y: &[f64], quad_eps: f64) -> Result<Complex64> {
        if self.directions.is_square() {
            self.eval(y)
        } else {
            self.recurrence_eval(y, quad_eps)
        }
    }

    /// `ℬ_𝒛(x|M) = ∫_0^∞ B_{z_n}(u) ℬ_{𝒛∖z_n}(x - u m_n | M∖m_n) du`.
    ///
    /// Square `M` has no spanning `M∖m_n`; it falls back to [`Self::eval`].
    pub fn recurrence_eval(&self, x: &[f64], quad_eps: f64) -> Result<Complex64> {
        check_len(x.len(), self.directions.d())?;
        let n = self.directions.n_plus_1() - 1;
        if self.directions.is_square() {
            return self.eval(x);
        }
        self.require_pointwise()?;
        let inner = ComplexBoxSpline::with_eps(
            self.degrees.without_last()?,
            self.directions.without_last()?,
            self.truncation_eps,
        )?;
        let last = &self.factors[n];
        let m_last = self.directions.column(n).to_vec();

        let mut upper = univariate_reach(last, quad_eps);
        let mut lower = 0.0_f64;
        let mut knots = quadrature::integer_knots(0.0, upper);
        if let Some((_, inv)) = inner.inverse.as_ref() {
            // the inner spline lives on the cone {y : M'⁻¹y > 0}
            let a = mat_vec(inv, x);
            let c = mat_vec(inv, &m_last);
            for (&ai, &ci) in a.iter().zip(&c) {
                if ci > 0.0 {
                    upper = upper.min(ai / ci);
                } else if ci < 0.0 {
                    lower = lower.max(ai / ci);
                } else if ai <= 0.0 {
                    return Ok(ZERO);
                }
            }
            if upper <= lower {
                return Ok(ZERO);
            }
            for (&ai, &ci) in a.iter().zip(&c) {
                if ci != 0.0 {
                    let (lo, hi) = {
                        let p = ai - ci * lower;
                        let q = ai - ci * upper;
                        (p.min(q), p.max(q))
                    };
                    if hi - lo < 1e5 {
                        knots.extend(quadrature::integer_knots(lo, hi).into_iter().map(|k| (ai - k) / ci));
                    }
                }
            }
        }
        let integrand = |u: f64| -> Complex64 {
            let shifted: Vec<f64> = x.iter().zip(&m_last).map(|(xi, mi)| xi - u * mi).collect();
            let outer = last.eval(u).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            if outer == ZERO {
                return ZERO;
            }
            outer * inner.eval_any(&shifted, quad_eps).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        };
        let opts = QuadratureOptions { abs_tol: quad_eps, rel_tol: 0.0, max_intervals: 20_000 };
        Ok(quadrature::integrate(integrand, lower, upper, &knots, opts)?.value)
    }

    /// `Σ_k Π_j (-1)^{k_j} binom(z_j+1, k_j) 𝒯_𝒛(x - Σ_j k_j m_j | M)`.
    ///
    /// For invertible `M` the shifted truncated power vanishes unless
    /// `k_j < (M⁻¹x)_j`, so each axis sum is finite and exact.
    pub fn difference_eval(&self, x: &[f64]) -> Result<Complex64> {
        self.require_pointwise()?;
        self.directions.require_cone_convention()?;
        let (t, _) = self.local_coordinates(x)?;
        if t.iter().any(|&tj| tj <= 0.0) {
            return Ok(ZERO);
        }
        let last: Vec<usize> = t.iter().map(|&tj| tj.floor() as usize).collect();
        let total = last.iter().try_fold(1usize, |acc, &k| acc.checked_mul(k + 1));
        match total {
            Some(n) if n <= DIFFERENCE_TERM_CAP => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "difference representation needs more than {DIFFERENCE_TERM_CAP} terms"
                )))
            }
        }
        let weights: Vec<Vec<Complex64>> = self
            .degrees
            .values()
            .iter()
            .zip(&last)
            .map(|(&z, &k)| crate::special_fn::difference_weights(z, k + 1))
            .collect();
        let d = self.directions.d();
        let mut index = vec![0usize; last.len()];
        let mut acc = ZERO;
        loop {
            let coeff: Complex64 = index.iter().zip(&weights).map(|(&k, w)| w[k]).product();
            if coeff != ZERO {
                let mut shifted = x.to_vec();
                for (j, &k) in index.iter().enumerate() {
                    for i in 0..d {
                        shifted[i] -= k as f64 * self.directions.column(j)[i];
                    }
                }
                acc += coeff * self.truncated_power_eval(&shifted)?;
            }
            // odometer increment
            let mut axis = 0;
            loop {
                if axis == index.len() {
                    return Ok(acc);
                }
                index[axis] += 1;
                if index[axis] <= last[axis] {
                    break;
                }
                index[axis] = 0;
                axis += 1;
            }
        }
    }

    /// `|Σ_{|k|_∞ <= radius} ℬ_𝒛(x - k|M) - 1|`.
    pub fn partition_of_unity_residual(&self, x: &[f64], radius: usize, quad_eps: f64) -> Result<f64> {
        check_len(x.len(), self.directions.d())?;
        self.require_pointwise()?;
        let d = self.directions.d();
        let side = 2 * radius + 1;
        let count = side.checked_pow(d as u32).ok_or_else(|| Error::InvalidArgument("radius too large".into()))?;
        let sum = crate::install(|| {
            (0..count)
                .into_par_iter()
                .map(|flat| {
                    let mut rem = flat;
                    let mut y = x.to_vec();
                    for yi in y.iter_mut() {
                        let k = (rem % side) as f64 - radius as f64;
                        rem /= side;
                        *yi -= k;
                    }
                    self.eval_any(&y, quad_eps)
                })
                .try_reduce(|| ZERO, |a, b| Ok(a + b))
        })?;
        Ok((sum - ONE).norm())
    }

    /// `(lhs, rhs)` of the Fourier form of `D_{m_j} ℬ_𝒛 = ℬ_{𝒛-e_j} - τ_{m_j} ℬ_{𝒛-e_j}`:
    /// `lhs = (iω·m_j) ℬ̂_𝒛(ω)`, `rhs = (1 - e^{-iω·m_j}) ℬ̂_{𝒛-e_j}(ω)`.
    pub fn derivative_symbol_check(&self, j: usize, omega: &[f64]) -> Result<(Complex64, Complex64)> {
        self.derivative_symbol_check_order(j, 1, omega)
    }

    /// Order-`k` version obtained by iterating the first-order identity:
    /// `(iω·m_j)^k ℬ̂_𝒛 = (1 - e^{-iω·m_j})^k ℬ̂_{𝒛-k e_j}`. Requires
    /// `Re z_j > k - 1`.
    pub fn derivative_symbol_check_order(&self, j: usize, k: u32, omega: &[f64]) -> Result<(Complex64, Complex64)> {
        check_len(omega.len(), self.directions.d())?;
        if j >= self.degrees.len() {
            return Err(Error::DimensionMismatch { expected: self.degrees.len(), found: j + 1 });
        }
        let lowered = self.degrees.shifted(j, -(k as f64))?;
        let s = self.directions.dot(j, omega);
        let lhs = Complex64::new(0.0, s).powu(k) * symbol_unchecked(&self.degrees, &self.directions, omega);
        let diff = ONE - Complex64::new(0.0, -s).exp();
        let rhs = diff.powu(k) * symbol_unchecked(&lowered, &self.directions, omega);
        Ok((lhs, rhs))
    }
}

/// A radius beyond which `|B_z|` stays below `eps` (integer degrees: the
/// support end `z+1`).
fn univariate_reach(b: &ComplexBSpline, eps: f64) -> f64 {
    if let Some(n) = b.degree().as_nonneg_integer() {
        return n as f64 + 1.0;
    }
    let mut u = 8.0_f64;
    while u < 65_536.0 {
        let window_max = (0..64)
            .map(|i| b.eval(u * (1.0 + i as f64 / 64.0)).map(|v| v.norm()).unwrap_or(f64::INFINITY))
            .fold(0.0_f64, f64::max);
        // the tail integral is at most about u times the window maximum
        if window_max * u < eps {
            return u;
        }
        u *= 2.0;
    }
    u
}

pub fn boxspline_eval_invertible(zv: &DegreeVector, m: &DirectionSet, y: &[f64]) -> Result<Complex64> {
    ComplexBoxSpline::new(zv.clone(), m.clone())?.eval(y)
}

pub fn boxspline_recurrence_eval(zv: &DegreeVector, m: &DirectionSet, x: &[f64], quad_eps: f64) -> Result<Complex64> {
    ComplexBoxSpline::new(zv.clone(), m.clone())?.recurrence_eval(x, quad_eps)
}

pub fn difference_representation_eval(zv: &DegreeVector, m: &DirectionSet, x: &[f64]) -> Result<Complex64> {
    ComplexBoxSpline::new(zv.clone(), m.clone())?.difference_eval(x)
}

pub fn partition_of_unity_residual(zv: &DegreeVector, m: &DirectionSet, x: &[f64], radius: usize) -> Result<f64> {
    ComplexBoxSpline::new(zv.clone(), m.clone())?.partition_of_unity_residual(x, radius, 1e-10)
}

pub fn derivative_symbol_check(
    zv: &DegreeVector,
    m: &DirectionSet,
    j: usize,
    omega: &[f64],
) -> Result<(Complex64, Complex64)> {
    ComplexBoxSpline::new(zv.clone(), m.clone())?.derivative_symbol_check(j, omega)
}

/// Outcome of the adaptive partition-of-unity study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub radius: usize,
    pub residual: f64,
    /// `(radius, residual)` for every radius tried, in order.
    pub history: Vec<(usize, f64)>,
}

impl PartitionReport {
    /// Whether the residual did not increase over the last `steps` doublings.
    pub fn monotone_tail(&self, steps: usize) -> bool {
        let h = &self.history;
        h.len() > steps && h[h.len() - steps - 1..].windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

pub const PARTITION_RADIUS_CAP: usize = 64;

/// Doubles the radius from 1 until the residual falls below `target`, stops
/// improving by at least 10x per doubling after having done so once, or the
/// radius cap of 64 is reached.
pub fn partition_of_unity_adaptive(spline: &ComplexBoxSpline, x: &[f64], target: f64) -> Result<PartitionReport> {
    let mut history = Vec::new();
    let mut radius = 1;
    loop {
        let r = spline.partition_of_unity_residual(x, radius, 1e-10)?;
        history.push((radius, r));
        let stalled = history.len() >= 3 && {
            let n = history.len();
            let prev = history[n - 2].1;
            r * 10.0 > prev && r < target
        };
        if r < target.min(1e-14) || stalled || radius >= PARTITION_RADIUS_CAP {
            let (radius, residual) = *history.last().expect("non-empty");
            return Ok(PartitionReport { radius, residual, history });
        }
        radius *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn zv(v: &[(f64, f64)]) -> DegreeVector {
        DegreeVector::from_complex(&v.iter().map(|&(a, b)| Complex64::new(a, b)).collect::<Vec<_>>()).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn tensor_kernel_examples() {
        assert_eq!(tensor_kernel_eval(&zv(&[(0.0, 0.0), (0.0, 0.0)]), &[0.5, 0.5]).unwrap(), ONE);
        let v = tensor_kernel_eval(&zv(&[(1.0, 0.0), (1.0, 0.0)]), &[2.0, 3.0]).unwrap();
        assert!(close(v, Complex64::new(6.0, 0.0), 1e-13));
        // 1/(Γ(1.5)Γ(1.5+i)), mpmath
        let v = tensor_kernel_eval(&zv(&[(0.5, 0.0), (0.5, 1.0)]), &[1.0, 1.0]).unwrap();
        assert!(close(v, Complex64::new(1.916_274_122_508_295, -0.293_814_316_419_589_7), 1e-12));
        assert_eq!(tensor_kernel_eval(&zv(&[(0.5, 0.0), (0.5, 1.0)]), &[1.0, -0.1]).unwrap(), ZERO);
        assert!(matches!(tensor_kernel_eval(&zv(&[(0.5, 0.0)]), &[1.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn truncated_power_symbol_examples() {
        let m1 = DirectionSet::identity(1);
        let v = truncated_power_symbol(&zv(&[(0.0, 0.0)]), &m1, &[1.0]).unwrap();
        assert!(close(v, Complex64::new(0.0, -1.0), 1e-15));
        let v = truncated_power_symbol(&zv(&[(0.0, 0.0), (0.0, 0.0)]), &DirectionSet::identity(2), &[1.0, 1.0]).unwrap();
        assert!(close(v, Complex64::new(-1.0, 0.0), 1e-15));
        let m = DirectionSet::diagonal(&[2.0, 3.0]).unwrap();
        let v = truncated_power_symbol(&zv(&[(0.5, 0.0), (0.5, 0.0)]), &m, &[PI, PI]).unwrap();
        let i = Complex64::i();
        let expected = (i * 2.0 * PI).powc(Complex64::new(-1.5, 0.0)) * (i * 3.0 * PI).powc(Complex64::new(-1.5, 0.0));
        assert!(close(v, expected, 1e-14));
        assert_eq!(truncated_power_symbol(&zv(&[(0.5, 0.0), (0.5, 0.0)]), &m, &[0.0, 1.0]), Err(Error::OrthogonalFrequency(0)));
    }

    #[test]
    fn truncated_power_invertible_examples() {
        let v = truncated_power_eval_invertible(&zv(&[(0.0, 0.0), (0.0, 0.0)]), &DirectionSet::identity(2), &[0.5, 0.5]).unwrap();
        assert_eq!(v, ONE);
        let m = DirectionSet::diagonal(&[2.0, 3.0]).unwrap();
        let v = truncated_power_eval_invertible(&zv(&[(1.0, 0.0), (1.0, 0.0)]), &m, &[2.0, 3.0]).unwrap();
        assert!(close(v, Complex64::new(1.0 / 6.0, 0.0), 1e-15));
        let v = truncated_power_eval_invertible(&zv(&[(0.3, 1.0), (1.2, -0.5)]), &m, &[-0.1, 3.0]).unwrap();
        assert_eq!(v, ZERO);
        let flipped = DirectionSet::validate(2, vec![vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(
            truncated_power_eval_invertible(&zv(&[(1.0, 0.0), (1.0, 0.0)]), &flipped, &[-1.0, 1.0]),
            Err(Error::SignConvention(0))
        );
        assert!(matches!(
            truncated_power_eval_invertible(&zv(&[(1.0, 0.0); 3]), &DirectionSet::three_direction(), &[1.0, 1.0]),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn symbol_examples() {
        let m = DirectionSet::diagonal(&[2.0, 3.0]).unwrap();
        let z = zv(&[(3.0, 1.0), (2.0, 1.0)]);
        assert_eq!(boxspline_symbol(&z, &m, &[0.0, 0.0]).unwrap(), ONE);
        assert_eq!(boxspline_symbol(&zv(&[(1.5, 0.0), (0.5, 0.0)]), &m, &[PI, 0.0]).unwrap(), ZERO);
        let w = [0.7, -1.9];
        let v = boxspline_symbol(&zv(&[(0.0, 0.0), (0.0, 0.0)]), &DirectionSet::identity(2), &w).unwrap();
        let classical: Complex64 = w
            .iter()
            .map(|&wj| (ONE - Complex64::new(0.0, -wj).exp()) / Complex64::new(0.0, wj))
            .product();
        assert!(close(v, classical, 1e-15));
    }

    #[test]
    fn eval_invertible_examples() {
        let v = boxspline_eval_invertible(&zv(&[(0.0, 0.0), (0.0, 0.0)]), &DirectionSet::identity(2), &[0.5, 0.5]).unwrap();
        assert_eq!(v, ONE);
        let m = DirectionSet::diagonal(&[2.0, 3.0]).unwrap();
        let v = boxspline_eval_invertible(&zv(&[(1.0, 0.0), (1.0, 0.0)]), &m, &[1.0, 3.0]).unwrap();
        assert!(close(v, Complex64::new(0.5 / 6.0, 0.0), 1e-15));
        assert!(matches!(
            boxspline_eval_invertible(&zv(&[(0.0, 1.0), (1.0, 0.0)]), &m, &[1.0, 3.0]),
            Err(Error::PointwiseUnsupported(_))
        ));
    }

    #[test]
    fn recurrence_matches_semigroup_on_repeated_direction() {
        // directions (e1, e2, e1): B_a * B_c = B_{a+c+1} along the first axis
        let m = DirectionSet::validate(2, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let a = Complex64::new(1.5, 0.5);
        let b = Complex64::new(2.0, -1.0);
        let c = Complex64::new(1.0, 0.3);
        let z = DegreeVector::from_complex(&[a, b, c]).unwrap();
        let merged = DegreeVector::from_complex(&[a + c + 1.0, b]).unwrap();
        for x in [[1.3, 2.2], [3.1, 0.7], [0.4, 1.9]] {
            let rec = boxspline_recurrence_eval(&z, &m, &x, 1e-11).unwrap();
            let direct = boxspline_eval_invertible(&merged, &DirectionSet::identity(2), &x).unwrap();
            assert!(close(rec, direct, 1e-8), "{x:?}: {rec} vs {direct}");
        }
        let z2 = zv(&[(0.0, 0.0), (0.0, 0.0)]);
        let direct = boxspline_eval_invertible(&z2, &DirectionSet::identity(2), &[0.3, 0.6]).unwrap();
        let rec = boxspline_recurrence_eval(&z2, &DirectionSet::identity(2), &[0.3, 0.6], 1e-12).unwrap();
        assert_eq!(direct, rec);
    }

    #[test]
    fn recurrence_three_direction_courant_element() {
        // zv = (0,0,0) on the three-direction mesh is the piecewise linear
        // hat with peak 1 at (1,1) and support the hexagon.
        let z = zv(&[(0.0, 0.0); 3]);
        let m = DirectionSet::three_direction();
        let v = boxspline_recurrence_eval(&z, &m, &[1.0, 1.0], 1e-12).unwrap();
        assert!(close(v, ONE, 1e-9));
        let v = boxspline_recurrence_eval(&z, &m, &[0.5, 0.5], 1e-12).unwrap();
        assert!(close(v, Complex64::new(0.5, 0.0), 1e-9));
        let v = boxspline_recurrence_eval(&z, &m, &[1.5, 1.0], 1e-12).unwrap();
        assert!(close(v, Complex64::new(0.5, 0.0), 1e-9));
        assert_eq!(boxspline_recurrence_eval(&z, &m, &[-0.5, 1.0], 1e-12).unwrap(), ZERO);
    }

    #[test]
    fn difference_representation_matches_closed_form() {
        let m = DirectionSet::diagonal(&[2.0, 3.0]).unwrap();
        for z in [zv(&[(1.0, 0.0), (2.0, 0.0)]), zv(&[(0.5, 0.5), (1.5, -0.3)]), zv(&[(3.0, 1.0), (2.0, 1.0)])] {
            for x in [[0.7, 1.1], [3.3, 4.9], [5.5, 0.4]] {
                let a = difference_representation_eval(&z, &m, &x).unwrap();
                let b = boxspline_eval_invertible(&z, &m, &x).unwrap();
                assert!(close(a, b, 1e-9), "{z:?} at {x:?}: {a} vs {b}");
            }
            assert_eq!(difference_representation_eval(&z, &m, &[-1.0, 2.0]).unwrap(), ZERO);
        }
    }

    #[test]
    fn partition_of_unity_integer_cases() {
        let m = DirectionSet::identity(2);
        let r = partition_of_unity_residual(&zv(&[(0.0, 0.0), (0.0, 0.0)]), &m, &[0.3, 0.8], 2).unwrap();
        assert!(r < 1e-15);
        let r = partition_of_unity_residual(&zv(&[(1.0, 0.0), (1.0, 0.0)]), &m, &[0.3, 0.8], 4).unwrap();
        assert!(r < 1e-10);
    }

    #[test]
    fn derivative_symbol_examples() {
        let z = zv(&[(1.0, 0.0), (1.0, 0.0)]);
        let m = DirectionSet::identity(2);
        let (lhs, rhs) = derivative_symbol_check(&z, &m, 0, &[1.0, 1.0]).unwrap();
        assert!(close(lhs, rhs, 1e-14));
        let (lhs, rhs) = derivative_symbol_check(&z, &m, 1, &[0.0, 0.0]).unwrap();
        assert_eq!((lhs, rhs), (ZERO, ZERO));
        let spline = ComplexBoxSpline::new(zv(&[(2.5, 0.3), (1.2, -0.7)]), m).unwrap();
        let (lhs, rhs) = spline.derivative_symbol_check_order(0, 2, &[0.9, -2.3]).unwrap();
        assert!(close(lhs, rhs, 1e-12 * (1.0 + lhs.norm())));
    }
}
