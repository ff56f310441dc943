//! Two-scale relation `ℬ_𝒛(x/2|M) = Σ_k h_𝒛(k) ℬ_𝒛(x - k|M)`: mask
//! coefficients, mask symbol and a frequency-domain check of
//! `2^d ℬ̂(2ω) = Ĥ(ω) ℬ̂(ω)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::multivariate::{symbol_unchecked, DegreeVector};
use crate::special_fn::{binomial_tail_index_capped, TAIL_INDEX_CAP};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest `t`-lattice a mask computation will enumerate.
pub const MASK_POINT_CAP: usize = 50_000_000;

/// Sparse mask `k ↦ h_𝒛(k)` on `ℤ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskCoefficients {
    entries: BTreeMap<Vec<i64>, Complex64>,
    eps: f64,
    degree: DegreeVector,
    directions: DirectionSet,
    normalization: Complex64,
    closed_form_normalization: Complex64,
}

/// One exported mask entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskEntry {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

fn integer_columns(m: &DirectionSet) -> Result<Vec<Vec<i64>>> {
    if !m.integer_columns() {
        return Err(Error::NonIntegerColumns);
    }
    Ok(m.columns().iter().map(|c| c.iter().map(|&x| x as i64).collect()).collect())
}

/// Computes the mask with per-factor tails truncated at `eps/(n+1)`.
///
/// Buckets `Σ_{Σ t_j m_j = k} Π_j binom(z_j+1, t_j)` are accumulated
/// unnormalized; the smallest buckets are dropped up to a total of
/// `eps·Σ|h|` and the rest scaled so that `Σ_k h(k) = 2^d`. For the untruncated series this scale equals
/// `2^{d - Σ_j (z_j+1)}`, which is kept as
/// [`MaskCoefficients::closed_form_normalization`] for comparison.
pub fn compute_mask(zv: &DegreeVector, m: &DirectionSet, eps: f64) -> Result<MaskCoefficients> {
    if zv.len() != m.n_plus_1() {
        return Err(Error::DimensionMismatch { expected: m.n_plus_1(), found: zv.len() });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("mask eps must lie in (0, 1), got {eps}")));
    }
    let cols = integer_columns(m)?;
    let per_factor = eps / zv.len() as f64;
    let lengths: Vec<usize> = zv
        .values()
        .iter()
        .map(|&z| Ok(binomial_tail_index_capped(z, per_factor, TAIL_INDEX_CAP)? + 1))
        .collect::<Result<_>>()?;
    let points = lengths.iter().map(|&n| n as f64).product::<f64>();
    if points > MASK_POINT_CAP as f64 {
        return Err(Error::MaskTooLarge { points, cap: MASK_POINT_CAP });
    }
    let weights: Vec<Vec<Complex64>> =
        zv.values().iter().zip(&lengths).map(|(&z, &n)| binomial_row(z + 1.0, n)).collect();

    let d = m.d();
    let raw = accumulate(&weights, &cols);
    let kept = prune_l1(raw, eps);
    let total: Complex64 = kept.iter().map(|(_, v)| v).sum();
    if total.norm() == 0.0 {
        return Err(Error::InvalidArgument("mask coefficients sum to zero".into()));
    }
    let normalization = 2f64.powi(d as i32) / total;
    let exponent: Complex64 = zv.values().iter().map(|z| z + 1.0).sum();
    let closed_form_normalization = Complex64::new(2.0, 0.0).powc(Complex64::new(d as f64, 0.0) - exponent);
    let entries = kept.into_iter().map(|(k, v)| (k, v * normalization)).collect();
    Ok(MaskCoefficients {
        entries,
        eps,
        degree: zv.clone(),
        directions: m.clone(),
        normalization,
        closed_form_normalization,
    })
}

/// `binom(a, t)` for `t < count`, by the ratio `(a - t)/(t + 1)`.
fn binomial_row(a: Complex64, count: usize) -> Vec<Complex64> {
    let mut row = Vec::with_capacity(count);
    let mut b = Complex64::new(1.0, 0.0);
    for t in 0..count {
        row.push(b);
        b *= (a - t as f64) / (t as f64 + 1.0);
    }
    row
}

/// Sparse convolution of the per-direction rows placed along `m_j`, with
/// keys encoded linearly over the bounding box of `Σ_j t_j m_j`.
fn accumulate(weights: &[Vec<Complex64>], cols: &[Vec<i64>]) -> Vec<(Vec<i64>, Complex64)> {
    let d = cols[0].len();
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    for (w, c) in weights.iter().zip(cols) {
        let reach = w.len() as i64 - 1;
        for i in 0..d {
            lo[i] += (c[i] * reach).min(0);
            hi[i] += (c[i] * reach).max(0);
        }
    }
    let mut radix = vec![1i64; d];
    for i in (0..d.saturating_sub(1)).rev() {
        radix[i] = radix[i + 1] * (hi[i + 1] - lo[i + 1] + 1);
    }
    let origin: i64 = (0..d).map(|i| -lo[i] * radix[i]).sum();
    let mut cur: Vec<(i64, Complex64)> = vec![(origin, Complex64::new(1.0, 0.0))];
    for (w, c) in weights.iter().zip(cols) {
        let step: i64 = (0..d).map(|i| c[i] * radix[i]).sum();
        let mut next: Vec<(i64, Complex64)> = Vec::with_capacity(cur.len() * w.len());
        for &(key, v) in &cur {
            next.extend(w.iter().enumerate().map(|(t, &wt)| (key + t as i64 * step, v * wt)));
        }
        crate::install(|| next.par_sort_unstable_by_key(|e| e.0));
        let mut merged: Vec<(i64, Complex64)> = Vec::with_capacity(next.len());
        for (key, v) in next {
            match merged.last_mut() {
                Some(last) if last.0 == key => last.1 += v,
                _ => merged.push((key, v)),
            }
        }
        cur = merged;
    }
    cur.into_iter()
        .map(|(mut code, v)| {
            let mut k = vec![0i64; d];
            for i in 0..d {
                k[i] = code.div_euclid(radix[i]) + lo[i];
                code = code.rem_euclid(radix[i]);
            }
            (k, v)
        })
        .collect()
}

/// Drops the smallest entries while their total modulus stays within
/// `eps·Σ|h|`.
fn prune_l1(mut entries: Vec<(Vec<i64>, Complex64)>, eps: f64) -> Vec<(Vec<i64>, Complex64)> {
    let total: f64 = entries.iter().map(|(_, v)| v.norm()).sum();
    crate::install(|| entries.par_sort_unstable_by(|a, b| a.1.norm().total_cmp(&b.1.norm())));
    let budget = eps * total;
    let mut dropped = 0.0;
    let mut cut = 0;
    for (_, v) in &entries {
        if dropped + v.norm() > budget {
            break;
        }
        dropped += v.norm();
        cut += 1;
    }
    entries.split_off(cut)
}

impl MaskCoefficients {
    /// Rebuilds a mask from exported entries (normalization is taken as given).
    pub fn from_entries(entries: &[MaskEntry], zv: DegreeVector, m: DirectionSet, eps: f64) -> Result<Self> {
        if zv.len() != m.n_plus_1() {
            return Err(Error::DimensionMismatch { expected: m.n_plus_1(), found: zv.len() });
        }
        integer_columns(&m)?;
        let mut map = BTreeMap::new();
        for e in entries {
            if e.k.len() != m.d() {
                return Err(Error::DimensionMismatch { expected: m.d(), found: e.k.len() });
            }
            *map.entry(e.k.clone()).or_insert(ZERO) += Complex64::new(e.re, e.im);
        }
        let exponent: Complex64 = zv.values().iter().map(|z| z + 1.0).sum();
        let closed_form_normalization = Complex64::new(2.0, 0.0).powc(Complex64::new(m.d() as f64, 0.0) - exponent);
        Ok(Self {
            entries: map,
            eps,
            degree: zv,
            directions: m,
            normalization: Complex64::new(f64::NAN, f64::NAN),
            closed_form_normalization,
        })
    }

    pub fn entries(&self) -> &BTreeMap<Vec<i64>, Complex64> {
        &self.entries
    }

    pub fn get(&self, k: &[i64]) -> Complex64 {
        self.entries.get(k).copied().unwrap_or(ZERO)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn degree(&self) -> &DegreeVector {
        &self.degree
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    /// Scale applied to the raw buckets (NaN for masks read back from JSON).
    pub fn normalization(&self) -> Complex64 {
        self.normalization
    }

    /// `2^{d - Σ_j (z_j+1)} = (1/2)^{Σ z_j + n + 1 - d}`.
    pub fn closed_form_normalization(&self) -> Complex64 {
        self.closed_form_normalization
    }

    /// `Σ_k h(k)`.
    pub fn dc_sum(&self) -> Complex64 {
        self.entries.values().sum()
    }

    /// Entries sorted lexicographically by `k`.
    pub fn to_entries(&self) -> Vec<MaskEntry> {
        self.entries.iter().map(|(k, v)| MaskEntry { k: k.clone(), re: v.re, im: v.im }).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_entries()).expect("mask entries serialize")
    }
}

/// `Ĥ(ω) = Σ_k h(k) e^{-ik·ω}`.
pub fn mask_symbol(mask: &MaskCoefficients, omega: &[f64]) -> Complex64 {
    mask.entries
        .iter()
        .map(|(k, v)| {
            let phase: f64 = k.iter().zip(omega).map(|(&ki, &wi)| ki as f64 * wi).sum();
            v * Complex64::from_polar(1.0, -phase)
        })
        .sum()
}

/// Whether `ω` keeps `margin` away from the zeros of `ℬ̂(ω)` and `ℬ̂(2ω)`,
/// i.e. `ω·m_j ∉ πℤ∖{0}` up to `margin`.
pub fn avoids_zero_sets(m: &DirectionSet, omega: &[f64], margin: f64) -> bool {
    (0..m.n_plus_1()).all(|j| {
        let s = m.dot(j, omega);
        let r = s / std::f64::consts::PI;
        r.abs() < 0.5 || (r - r.round()).abs() * std::f64::consts::PI > margin
    })
}

/// Deterministic frequency samples: Halton points in `[-radius, radius]^d`
/// kept only if they pass [`avoids_zero_sets`] with `margin`.
pub fn sample_frequencies(m: &DirectionSet, count: usize, radius: f64, margin: f64) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let d = m.d().min(PRIMES.len());
    let mut out = Vec::with_capacity(count);
    let mut index = 1u64;
    while out.len() < count && index < 1_000_000 {
        let w: Vec<f64> = PRIMES[..d].iter().map(|&p| radius * (2.0 * radical_inverse(index, p) - 1.0)).collect();
        if avoids_zero_sets(m, &w, margin) {
            out.push(w);
        }
        index += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Per-sample outcome of [`verify_two_scale`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoScaleReport {
    pub max_residual: f64,
    pub worst_omega: Vec<f64>,
    pub dc_sum: Complex64,
    pub normalization: Complex64,
    pub closed_form_normalization: Complex64,
}

/// `max_ω |2^d ℬ̂(2ω) - Ĥ(ω)ℬ̂(ω)| / (|2^d ℬ̂(2ω)| + ε_mach)`.
pub fn verify_two_scale(mask: &MaskCoefficients, omega_samples: &[Vec<f64>]) -> Result<TwoScaleReport> {
    let m = &mask.directions;
    let zv = &mask.degree;
    let d = m.d();
    let scale = 2f64.powi(d as i32);
    let mut max_residual = 0.0_f64;
    let mut worst_omega = Vec::new();
    for w in omega_samples {
        if w.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: w.len() });
        }
        let doubled: Vec<f64> = w.iter().map(|x| 2.0 * x).collect();
        let lhs = scale * symbol_unchecked(zv, m, &doubled);
        let rhs = mask_symbol(mask, w) * symbol_unchecked(zv, m, w);
        let r = (lhs - rhs).norm() / (lhs.norm() + f64::EPSILON);
        if r > max_residual || worst_omega.is_empty() {
            max_residual = max_residual.max(r);
            worst_omega = w.clone();
        }
    }
    Ok(TwoScaleReport {
        max_residual,
        worst_omega,
        dc_sum: mask.dc_sum(),
        normalization: mask.normalization,
        closed_form_normalization: mask.closed_form_normalization,
    })
}
