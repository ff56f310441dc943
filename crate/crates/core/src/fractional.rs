//! Fractional integrals and derivatives as Fourier multipliers on
//! frequency-windowed fields, and the spline equation
//! `Π_j (iω·m_j)^{z_j+1} ℬ̂_𝒛(ω) = Π_j (1 - e^{-iω·m_j})^{z_j+1}`.
//!
//! Convention: `𝒟^{±𝒛}` multiplies by `Π_j (iω_j)^{±z_j}` (principal
//! branch). In the time domain `𝒟^{-z}φ = φ ∗ k_{z-1}` with the causal
//! kernel `k_{z-1}(t) = t_+^{z-1}/Γ(z)`, i.e.
//! `(𝒟^{-z}φ)(x) = ∫_0^∞ t^{z-1}/Γ(z) φ(x-t) dt`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::multivariate::{symbol_unchecked, DegreeVector};
use crate::quadrature::{self, QuadratureOptions};
use crate::refinement::sample_frequencies;
use crate::spectral::{DomainTag, SampledField};
use crate::special_fn::{binomial_tail_index_capped, rgamma, TAIL_INDEX_CAP};
use crate::univariate::principal_pow;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest spectral energy fraction tolerated inside the window's zero region.
pub const WINDOW_LEAK_TOLERANCE: f64 = 1e-12;

/// Per-axis raised-cosine high-pass: zero for `|ω_j| < inner_radius`, one
/// beyond `inner_radius + taper`, for every axis `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LizorkinWindow {
    pub inner_radius: f64,
    pub taper: f64,
}

impl LizorkinWindow {
    pub fn new(inner_radius: f64, taper: f64) -> Result<Self> {
        if !(inner_radius > 0.0 && taper >= 0.0 && inner_radius.is_finite() && taper.is_finite()) {
            return Err(Error::InvalidArgument("window needs inner_radius > 0 and taper >= 0".into()));
        }
        Ok(Self { inner_radius, taper })
    }

    fn axis_weight(&self, w: f64) -> f64 {
        let r = w.abs();
        if r < self.inner_radius {
            0.0
        } else if r >= self.inner_radius + self.taper {
            1.0
        } else {
            0.5 * (1.0 - (std::f64::consts::PI * (r - self.inner_radius) / self.taper).cos())
        }
    }

    pub fn weight(&self, omega: &[f64]) -> f64 {
        omega.iter().map(|&w| self.axis_weight(w)).product()
    }

    /// Whether `ω` lies in the zero region (some `|ω_j| < inner_radius`).
    pub fn inside(&self, omega: &[f64]) -> bool {
        omega.iter().any(|w| w.abs() < self.inner_radius)
    }

    /// Multiplies a frequency field by the window.
    pub fn apply(&self, field: &SampledField) -> Result<SampledField> {
        require_frequency(field)?;
        let values = (0..field.len()).map(|i| field.values[i] * self.weight(&field.coordinates(i))).collect();
        SampledField::new(DomainTag::Frequency, field.origin.clone(), field.spacing.clone(), field.extents.clone(), values)
    }

    /// Energy inside the zero region relative to the total.
    pub fn leak_fraction(&self, field: &SampledField) -> f64 {
        let mut inside = 0.0;
        let mut total = 0.0;
        for (i, v) in field.values.iter().enumerate() {
            let e = v.norm_sqr();
            total += e;
            if self.inside(&field.coordinates(i)) {
                inside += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            inside / total
        }
    }
}

fn require_frequency(field: &SampledField) -> Result<()> {
    if field.domain_tag != DomainTag::Frequency {
        return Err(Error::InvalidArgument("expected a frequency-domain field".into()));
    }
    Ok(())
}

/// `𝒛` with `m_j = ⌈Re z_j + 1⌉` and `ν_j = m_j - z_j`, so that
/// `𝒟^𝒛 = D^m 𝒟^{-ν}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalOrder {
    zv: DegreeVector,
    m: Vec<u32>,
    nu: Vec<Complex64>,
}

impl FractionalOrder {
    pub fn new(zv: DegreeVector) -> Self {
        let m: Vec<u32> = zv.entries().iter().map(|z| (z.re() + 1.0).ceil() as u32).collect();
        let nu = zv.values().iter().zip(&m).map(|(z, &mj)| mj as f64 - z).collect();
        Self { zv, m, nu }
    }

    pub fn degrees(&self) -> &DegreeVector {
        &self.zv
    }

    pub fn integer_orders(&self) -> &[u32] {
        &self.m
    }

    pub fn nu(&self) -> &[Complex64] {
        &self.nu
    }

    /// `Π_j (iω_j)^{sign·z_j}`.
    pub fn multiplier(&self, sign: Sign, omega: &[f64]) -> Complex64 {
        let s = sign.factor();
        self.zv
            .values()
            .iter()
            .zip(omega)
            .map(|(&z, &w)| principal_pow(Complex64::new(0.0, w), z * s))
            .product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Applies `𝒟^{±𝒛}` to a windowed spectrum. Bins in the window's zero
/// region are set to exactly zero in the output.
pub fn apply_fractional(order: &FractionalOrder, sign: Sign, window: &LizorkinWindow, field: &SampledField) -> Result<SampledField> {
    require_frequency(field)?;
    if field.d() != order.zv.len() {
        return Err(Error::DimensionMismatch { expected: order.zv.len(), found: field.d() });
    }
    let leak = window.leak_fraction(field);
    if leak > WINDOW_LEAK_TOLERANCE {
        return Err(Error::WindowViolation { fraction: leak });
    }
    let values = crate::install(|| {
        (0..field.len())
            .into_par_iter()
            .map(|i| {
                let w = field.coordinates(i);
                if window.inside(&w) {
                    ZERO
                } else {
                    field.values[i] * order.multiplier(sign, &w)
                }
            })
            .collect()
    });
    SampledField::new(DomainTag::Frequency, field.origin.clone(), field.spacing.clone(), field.extents.clone(), values)
}

/// `(𝒟^{-z}φ)(x) = ∫_0^reach t^{z-1}/Γ(z) φ(x-t) dt` for `Re z > 0`, with
/// `t = u^{1/Re z}` removing the endpoint singularity.
pub fn fractional_integral_quadrature<F>(z: Complex64, phi: F, x: f64, reach: f64, abs_tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if z.re <= 0.0 {
        return Err(Error::InvalidArgument(format!("fractional integral needs Re z > 0, got {z}")));
    }
    let p = 1.0 / z.re;
    let scale = rgamma(z);
    let integrand = |u: f64| {
        if u <= 0.0 {
            return ZERO;
        }
        let t = u.powf(p);
        // t^{z-1} dt = p u^{pz - 1} du, and Re(pz - 1) = 0
        let jac = Complex64::new(0.0, p * z.im * u.ln()).exp() * p;
        jac * phi(x - t)
    };
    let opts = QuadratureOptions { abs_tol, rel_tol: 0.0, max_intervals: 20_000 };
    Ok(quadrature::integrate(integrand, 0.0, reach.powf(z.re), &[], opts)?.value * scale)
}

/// Per-axis truncation `K_j = binomial_tail_index(z_j, eps)`.
pub fn delta_train_truncation(zv: &DegreeVector, eps: f64) -> Result<Vec<usize>> {
    zv.values().iter().map(|&z| binomial_tail_index_capped(z, eps, TAIL_INDEX_CAP)).collect()
}

/// Truncation giving relative accuracy `tol` for the delta-train symbol at
/// frequencies whose phases `ω·m_j` stay at least `margin` from `2πℤ`.
///
/// There `|(1 - e^{-iω·m_j})^{z_j+1}| >= (2 sin(margin/2))^{Re z_j+1} e^{-π|Im z_j|/2}`,
/// so axis `j` is truncated at `tol/(n+1)` times that bound.
pub fn delta_train_truncation_relative(zv: &DegreeVector, tol: f64, margin: f64) -> Result<Vec<usize>> {
    if !(tol > 0.0 && margin > 0.0 && margin <= std::f64::consts::PI) {
        return Err(Error::InvalidArgument("need tol > 0 and margin in (0, π]".into()));
    }
    let floor = 2.0 * (margin / 2.0).sin();
    let share = tol / zv.len() as f64;
    zv.values()
        .iter()
        .map(|&z| {
            let bound = floor.powf(z.re + 1.0) * (-std::f64::consts::FRAC_PI_2 * z.im.abs()).exp();
            binomial_tail_index_capped(z, share * bound, TAIL_INDEX_CAP)
        })
        .collect()
}

/// Up to `count` frequencies from [`sample_frequencies`] in `[-π, π]^d`
/// whose phases `ω·m_j` all keep a distance of at least `margin` from `2πℤ`.
pub fn spline_equation_samples(m: &DirectionSet, count: usize, margin: f64) -> Vec<Vec<f64>> {
    let tau = 2.0 * std::f64::consts::PI;
    let mut s = sample_frequencies(m, 8 * count, std::f64::consts::PI, 0.0);
    s.retain(|w| {
        (0..m.n_plus_1()).all(|j| {
            let p = m.dot(j, w);
            (p - tau * (p / tau).round()).abs() >= margin
        })
    });
    s.truncate(count);
    s
}

/// `Π_j Σ_{k=0}^{K_j} (-1)^k binom(z_j+1, k) e^{-ik(ω·m_j)}`, the symbol of
/// `Π_j ∇_{m_j}^{z_j+1} δ`.
pub fn delta_train_symbol(zv: &DegreeVector, m: &DirectionSet, omega: &[f64], k: &[usize]) -> Result<Complex64> {
    if zv.len() != m.n_plus_1() || k.len() != zv.len() {
        return Err(Error::DimensionMismatch { expected: m.n_plus_1(), found: zv.len().min(k.len()) });
    }
    if omega.len() != m.d() {
        return Err(Error::DimensionMismatch { expected: m.d(), found: omega.len() });
    }
    Ok(zv
        .values()
        .iter()
        .enumerate()
        .map(|(j, &z)| difference_train(z + 1.0, m.dot(j, omega), k[j]))
        .product())
}

fn difference_train(a: Complex64, s: f64, last: usize) -> Complex64 {
    let step = Complex64::from_polar(1.0, -s);
    let mut phase = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(1.0, 0.0);
    let mut acc = ZERO;
    for k in 0..=last {
        acc += b * phase;
        b *= -(a - k as f64) / (k as f64 + 1.0);
        if b == ZERO {
            break;
        }
        phase *= step;
        if k % 64 == 63 {
            // renormalize to stop modulus drift
            phase = Complex64::from_polar(1.0, -s * (k + 1) as f64);
        }
    }
    acc
}

/// `max_ω |Π_j (iω·m_j)^{z_j+1} ℬ̂_𝒛(ω) - Δ(ω)| / (|Δ(ω)| + ε_mach)`, with
/// `Δ` the truncated delta-train symbol.
pub fn verify_spline_equation(zv: &DegreeVector, m: &DirectionSet, omega_samples: &[Vec<f64>], k: &[usize]) -> Result<f64> {
    let residuals: Vec<f64> = crate::install(|| {
        omega_samples
            .par_iter()
            .map(|w| {
                let rhs = delta_train_symbol(zv, m, w, k)?;
                if w.len() != m.d() {
                    return Err(Error::DimensionMismatch { expected: m.d(), found: w.len() });
                }
                let mut lhs = symbol_unchecked(zv, m, w);
                for (j, z) in zv.values().iter().enumerate() {
                    let s = m.dot(j, w);
                    if s == 0.0 {
                        return Err(Error::OrthogonalFrequency(j));
                    }
                    lhs *= principal_pow(Complex64::new(0.0, s), z + 1.0);
                }
                Ok((lhs - rhs).norm() / (rhs.norm() + f64::EPSILON))
            })
            .collect::<Result<_>>()
    })?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{inverse_transform, symbol_field, FrequencyGrid};
    use std::f64::consts::PI;

    fn zv(v: &[(f64, f64)]) -> DegreeVector {
        DegreeVector::from_complex(&v.iter().map(|&(a, b)| Complex64::new(a, b)).collect::<Vec<_>>()).unwrap()
    }

    const OMEGA0: f64 = 8.0;

    fn gabor_spectrum(w: &[f64]) -> Complex64 {
        Complex64::new(w.iter().map(|x| (-(x - OMEGA0).powi(2) / 2.0).exp()).product(), 0.0)
    }

    fn gabor(x: f64) -> Complex64 {
        Complex64::from_polar((-x * x / 2.0).exp() / (2.0 * PI).sqrt(), OMEGA0 * x)
    }

    fn windowed_gabor(d: usize) -> (LizorkinWindow, SampledField) {
        let window = LizorkinWindow::new(0.5, 0.5).unwrap();
        let grid = FrequencyGrid::uniform(d, 32.0, if d == 1 { 1024 } else { 128 }).unwrap();
        let field = window.apply(&symbol_field(gabor_spectrum, &grid, ZERO)).unwrap();
        (window, field)
    }

    #[test]
    fn window_shape() {
        let w = LizorkinWindow::new(1.0, 2.0).unwrap();
        assert_eq!(w.weight(&[0.5]), 0.0);
        assert!((w.weight(&[2.0]) - 0.5).abs() < 1e-15);
        assert_eq!(w.weight(&[-3.5, 4.0]), 1.0);
        assert_eq!(w.weight(&[3.5, 0.9]), 0.0);
        assert!(LizorkinWindow::new(0.0, 1.0).is_err());
    }

    #[test]
    fn order_split() {
        let o = FractionalOrder::new(zv(&[(0.5, 1.0), (2.0, 0.0)]));
        assert_eq!(o.integer_orders(), &[2, 3]);
        assert_eq!(o.nu()[0], Complex64::new(1.5, -1.0));
        assert_eq!(o.nu()[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn zero_order_is_identity_and_output_stays_windowed() {
        let (window, field) = windowed_gabor(2);
        let id = apply_fractional(&FractionalOrder::new(zv(&[(0.0, 0.0), (0.0, 0.0)])), Sign::Plus, &window, &field).unwrap();
        assert_eq!(id, field);
        let out = apply_fractional(&FractionalOrder::new(zv(&[(0.7, 0.4), (1.3, -0.2)])), Sign::Minus, &window, &field).unwrap();
        for i in 0..out.len() {
            if window.inside(&out.coordinates(i)) {
                assert_eq!(out.values[i], ZERO);
            }
        }
    }

    #[test]
    fn unwindowed_field_is_rejected() {
        let grid = FrequencyGrid::uniform(1, 32.0, 256).unwrap();
        let field = symbol_field(|w| Complex64::new((-w[0] * w[0]).exp(), 0.0), &grid, Complex64::new(1.0, 0.0));
        let window = LizorkinWindow::new(0.5, 0.5).unwrap();
        let r = apply_fractional(&FractionalOrder::new(zv(&[(0.5, 0.0)])), Sign::Minus, &window, &field);
        assert!(matches!(r, Err(Error::WindowViolation { .. })));
    }

    #[test]
    fn inverse_and_semigroup_on_gabor_fields() {
        let (window, field) = windowed_gabor(2);
        let z = zv(&[(0.6, 0.8), (1.4, -0.5)]);
        let zbar = zv(&[(0.6, -0.8), (1.4, 0.5)]);
        let sum = zv(&[(1.2, 0.0), (2.8, 0.0)]);
        let order = FractionalOrder::new(z.clone());
        let there = apply_fractional(&order, Sign::Minus, &window, &field).unwrap();
        let back = apply_fractional(&order, Sign::Plus, &window, &there).unwrap();
        let t0 = inverse_transform(&field, &[-8.0, -8.0]).unwrap();
        let t1 = inverse_transform(&back, &[-8.0, -8.0]).unwrap();
        assert!(t0.max_abs_diff(&t1).unwrap() < 1e-9);

        let a = apply_fractional(&FractionalOrder::new(zbar), Sign::Plus, &window, &field).unwrap();
        let ab = apply_fractional(&order, Sign::Plus, &window, &a).unwrap();
        let direct = apply_fractional(&FractionalOrder::new(sum), Sign::Plus, &window, &field).unwrap();
        let lhs = inverse_transform(&ab, &[-8.0, -8.0]).unwrap();
        let rhs = inverse_transform(&direct, &[-8.0, -8.0]).unwrap();
        let peak = rhs.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-9 * peak.max(1.0));
    }

    #[test]
    fn multiplier_matches_causal_kernel_quadrature() {
        let (window, field) = windowed_gabor(1);
        let time = inverse_transform(&field, &[-16.0]).unwrap();
        // the window removes a negligible part of the atom
        for i in (0..time.len()).step_by(37) {
            assert!((time.values[i] - gabor(time.coordinates(i)[0])).norm() < 1e-12);
        }
        for z in [Complex64::new(0.5, 0.0), Complex64::new(0.3, 0.7), Complex64::new(0.8, -0.4)] {
            let order = FractionalOrder::new(DegreeVector::from_complex(&[z]).unwrap());
            let out = inverse_transform(&apply_fractional(&order, Sign::Minus, &window, &field).unwrap(), &[-16.0]).unwrap();
            for i in (300..700).step_by(50) {
                let x = out.coordinates(i)[0];
                let q = fractional_integral_quadrature(z, gabor, x, x + 16.0, 1e-11).unwrap();
                assert!((out.values[i] - q).norm() < 1e-5, "z={z} x={x}: {} vs {q}", out.values[i]);
            }
        }
    }

    #[test]
    fn riemann_liouville_equals_caputo_on_gabor() {
        // D(𝒟^{-ν}φ) by finite differences against 𝒟^{-ν}(φ') by quadrature
        let nu = Complex64::new(0.4, 0.3);
        let dphi = |x: f64| gabor(x) * Complex64::new(-x, OMEGA0);
        let h = 2.5e-3;
        for x in [-1.0, -0.3, 0.2, 0.9] {
            let g = |y: f64| fractional_integral_quadrature(nu, gabor, y, y + 16.0, 1e-13).unwrap();
            let fd = (g(x - 2.0 * h) - g(x + 2.0 * h) + (g(x + h) - g(x - h)) * 8.0) / (12.0 * h);
            let caputo = fractional_integral_quadrature(nu, dphi, x, x + 16.0, 1e-12).unwrap();
            assert!((fd - caputo).norm() < 1e-6, "x={x}: {fd} vs {caputo}");
        }
    }

    #[test]
    fn delta_train_examples() {
        let m1 = DirectionSet::identity(1);
        let w = 0.9;
        let v = delta_train_symbol(&zv(&[(0.0, 0.0)]), &m1, &[w], &[1]).unwrap();
        assert!((v - (1.0 - Complex64::from_polar(1.0, -w))).norm() < 1e-15);
        let z = zv(&[(1.0, 0.0), (1.0, 0.0)]);
        let w = [0.7, -1.3];
        let v = delta_train_symbol(&z, &DirectionSet::identity(2), &w, &[2, 2]).unwrap();
        let expected = (1.0 - Complex64::from_polar(1.0, -w[0])).powu(2) * (1.0 - Complex64::from_polar(1.0, -w[1])).powu(2);
        assert!((v - expected).norm() < 1e-14);
        // partial sums settle once K passes the tail index
        let z = zv(&[(2.0, 1.0)]);
        let k = delta_train_truncation(&z, 1e-11).unwrap();
        let a = delta_train_symbol(&z, &m1, &[1.1], &k).unwrap();
        let b = delta_train_symbol(&z, &m1, &[1.1], &[2 * k[0]]).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn spline_equation_examples() {
        let samples: Vec<Vec<f64>> = (1..40).map(|i| vec![-3.0 + 0.153 * i as f64]).filter(|w| w[0].abs() > 0.1).collect();
        let r = verify_spline_equation(&zv(&[(0.0, 0.0)]), &DirectionSet::identity(1), &samples, &[1]).unwrap();
        assert!(r < 1e-14, "{r}");

        let m = DirectionSet::diagonal(&[2.0, 3.0]).unwrap();
        let samples2: Vec<Vec<f64>> = samples.iter().zip(samples.iter().rev()).map(|(a, b)| vec![a[0], b[0]]).collect();
        let z = zv(&[(0.5, 1.0), (0.5, 0.0)]);
        let k = delta_train_truncation(&z, 1e-8).unwrap();
        let r = verify_spline_equation(&z, &m, &samples2, &k).unwrap();
        assert!(r < 1e-6, "{r}");
        assert_eq!(
            verify_spline_equation(&z, &m, &[vec![0.0, 1.0]], &k),
            Err(Error::OrthogonalFrequency(0))
        );
    }
}
