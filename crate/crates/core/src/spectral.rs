//! Grid sampling of symbol-defined distributions by inverse FFT, and decay /
//! smoothness analysis of box-spline symbols.
//!
//! Index/frequency mapping: a frequency grid with `N` bins and spacing `Δω`
//! stores, at natural index `k ∈ [0, N)`, the frequency `ω_k = (k - ⌊N/2⌋)Δω`.
//! The dual time grid has spacing `h = 2π/(NΔω)` and nodes
//! `x_n = origin + n·h`; samples are
//! `f(x_n) = (2π)^{-d} Σ_k F(ω_k) e^{iω_k·x_n} Δω^d`, i.e. an unnormalized
//! inverse DFT of `F(ω_k)e^{iω_k·origin}` scaled by `Π 1/(N_j h_j)`.

use std::io::{self, BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::multivariate::{symbol_unchecked, DegreeVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default neglected-tail energy budget, relative to the total.
pub const DEFAULT_TAIL_BUDGET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Time,
    Frequency,
}

/// Values on a regular grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub domain_tag: DomainTag,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub extents: Vec<usize>,
    pub values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    domain_tag: DomainTag,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    extents: Vec<usize>,
}

impl SampledField {
    pub fn new(
        domain_tag: DomainTag,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        extents: Vec<usize>,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        let d = extents.len();
        if d == 0 || origin.len() != d || spacing.len() != d {
            return Err(Error::InvalidArgument("origin, spacing and extents must share a nonzero length".into()));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) || origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidArgument("spacing must be positive and finite".into()));
        }
        if extents.contains(&0) {
            return Err(Error::InvalidArgument("extents must be positive".into()));
        }
        let count: usize = extents.iter().product();
        if values.len() != count {
            return Err(Error::DimensionMismatch { expected: count, found: values.len() });
        }
        Ok(Self { domain_tag, origin, spacing, extents, values })
    }

    pub fn d(&self) -> usize {
        self.extents.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multi-index of a flat position.
    pub fn index_of(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d()];
        for a in (0..self.d()).rev() {
            idx[a] = flat % self.extents[a];
            flat /= self.extents[a];
        }
        idx
    }

    pub fn flat_of(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.extents).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Grid coordinates of a flat position.
    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        self.index_of(flat).iter().enumerate().map(|(a, &i)| self.origin[a] + i as f64 * self.spacing[a]).collect()
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.values[self.flat_of(idx)]
    }

    /// `Σ |v|² Π spacing`.
    pub fn l2_norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spacing.iter().product::<f64>()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.extents != other.extents {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// JSON header line followed by little-endian `(re, im)` f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header = FieldHeader {
            domain_tag: self.domain_tag,
            origin: self.origin.clone(),
            spacing: self.spacing.clone(),
            extents: self.extents.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_binary<R: BufRead>(mut r: R) -> Result<Self> {
        let bad = |e: String| Error::InvalidArgument(format!("malformed field file: {e}"));
        let mut line = String::new();
        r.read_line(&mut line).map_err(|e| bad(e.to_string()))?;
        let header: FieldHeader = serde_json::from_str(line.trim_end()).map_err(|e| bad(e.to_string()))?;
        let count = header.extents.iter().try_fold(1usize, |a, &n| a.checked_mul(n)).ok_or_else(|| bad("extents overflow".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| bad(e.to_string()))?;
        if bytes.len() != 16 * count {
            return Err(bad(format!("expected {} payload bytes, found {}", 16 * count, bytes.len())));
        }
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        Self::new(header.domain_tag, header.origin, header.spacing, header.extents, values)
    }

    /// CSV with a versioned header: `i0,..,i{d-1},re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# cxbox-field v1 domain={}", match self.domain_tag {
            DomainTag::Time => "time",
            DomainTag::Frequency => "frequency",
        })?;
        let cols: Vec<String> = (0..self.d()).map(|a| format!("i{a}")).collect();
        writeln!(w, "{},re,im", cols.join(","))?;
        for (flat, v) in self.values.iter().enumerate() {
            for i in self.index_of(flat) {
                write!(w, "{i},")?;
            }
            writeln!(w, "{},{}", v.re, v.im)?;
        }
        w.flush()
    }
}

/// Symmetric frequency box `[-Ω_j, Ω_j)` sampled with `bins_j` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub omega_max: Vec<f64>,
    pub bins: Vec<usize>,
}

impl FrequencyGrid {
    pub fn new(omega_max: Vec<f64>, bins: Vec<usize>) -> Result<Self> {
        if omega_max.is_empty() || omega_max.len() != bins.len() {
            return Err(Error::InvalidArgument("omega_max and bins must share a nonzero length".into()));
        }
        if omega_max.iter().any(|&w| !(w > 0.0 && w.is_finite())) || bins.iter().any(|&n| n < 2) {
            return Err(Error::InvalidArgument("omega_max must be positive and bins >= 2".into()));
        }
        Ok(Self { omega_max, bins })
    }

    pub fn uniform(d: usize, omega_max: f64, bins: usize) -> Result<Self> {
        Self::new(vec![omega_max; d], vec![bins; d])
    }

    pub fn d(&self) -> usize {
        self.bins.len()
    }

    /// `Δω_j = 2Ω_j / N_j`.
    pub fn frequency_spacing(&self) -> Vec<f64> {
        self.omega_max.iter().zip(&self.bins).map(|(&w, &n)| 2.0 * w / n as f64).collect()
    }

    /// Dual time spacing `h_j = π / Ω_j`.
    pub fn time_spacing(&self) -> Vec<f64> {
        self.omega_max.iter().map(|&w| std::f64::consts::PI / w).collect()
    }

    fn origin(&self) -> Vec<f64> {
        self.frequency_spacing().iter().zip(&self.bins).map(|(&dw, &n)| -((n / 2) as f64) * dw).collect()
    }
}

/// Evaluates `symbol` on the grid in natural order; the bin at `ω = 0`
/// receives `dc_value`.
pub fn symbol_field<F>(symbol: F, grid: &FrequencyGrid, dc_value: Complex64) -> SampledField
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let origin = grid.origin();
    let spacing = grid.frequency_spacing();
    let count: usize = grid.bins.iter().product();
    let shape = SampledField {
        domain_tag: DomainTag::Frequency,
        origin,
        spacing,
        extents: grid.bins.clone(),
        values: Vec::new(),
    };
    let dc_flat = shape.flat_of(&grid.bins.iter().map(|&n| n / 2).collect::<Vec<_>>());
    let values = crate::install(|| {
        (0..count)
            .into_par_iter()
            .map(|flat| if flat == dc_flat { dc_value } else { symbol(&shape.coordinates(flat)) })
            .collect()
    });
    SampledField { values, ..shape }
}

fn transform_axes(extents: &[usize], values: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total = values.len();
    for (a, &n) in extents.iter().enumerate() {
        let fft: Arc<dyn Fft<f64>> = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
        let stride: usize = extents[a + 1..].iter().product();
        let starts: Vec<usize> = (0..total).filter(|s| (s / stride) % n == 0).collect();
        let lines: Vec<Vec<Complex64>> = crate::install(|| {
            starts
                .par_iter()
                .map(|&s| {
                    let mut line: Vec<Complex64> = (0..n).map(|i| values[s + i * stride]).collect();
                    fft.process(&mut line);
                    line
                })
                .collect()
        });
        for (&s, line) in starts.iter().zip(lines) {
            for (i, v) in line.into_iter().enumerate() {
                values[s + i * stride] = v;
            }
        }
    }
}

/// Inverse transform of a natural-order frequency field onto the time grid
/// starting at `time_origin`.
pub fn inverse_transform(field: &SampledField, time_origin: &[f64]) -> Result<SampledField> {
    if field.domain_tag != DomainTag::Frequency {
        return Err(Error::InvalidArgument("inverse transform expects a frequency field".into()));
    }
    let d = field.d();
    if time_origin.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: time_origin.len() });
    }
    check_natural_origin(field)?;
    let mut buf = vec![ZERO; field.len()];
    for (flat, v) in field.values.iter().enumerate() {
        let idx = field.index_of(flat);
        let mut phase = 0.0;
        let mut bin = 0usize;
        for a in 0..d {
            let n = field.extents[a];
            let signed = idx[a] as i64 - (n / 2) as i64;
            phase += signed as f64 * field.spacing[a] * time_origin[a];
            bin = bin * n + signed.rem_euclid(n as i64) as usize;
        }
        buf[bin] = v * Complex64::from_polar(1.0, phase);
    }
    transform_axes(&field.extents, &mut buf, true);
    let spacing: Vec<f64> =
        field.spacing.iter().zip(&field.extents).map(|(&dw, &n)| 2.0 * std::f64::consts::PI / (n as f64 * dw)).collect();
    let scale: f64 = spacing.iter().zip(&field.extents).map(|(&h, &n)| 1.0 / (n as f64 * h)).product();
    buf.iter_mut().for_each(|v| *v *= scale);
    SampledField::new(DomainTag::Time, time_origin.to_vec(), spacing, field.extents.clone(), buf)
}

/// Riemann-sum forward transform of a time field onto the natural-order
/// frequency grid `Δω_j = 2π/(N_j h_j)`.
pub fn forward_transform(field: &SampledField) -> Result<SampledField> {
    if field.domain_tag != DomainTag::Time {
        return Err(Error::InvalidArgument("forward transform expects a time field".into()));
    }
    let d = field.d();
    let mut buf = field.values.clone();
    transform_axes(&field.extents, &mut buf, false);
    let dw: Vec<f64> =
        field.spacing.iter().zip(&field.extents).map(|(&h, &n)| 2.0 * std::f64::consts::PI / (n as f64 * h)).collect();
    let cell: f64 = field.spacing.iter().product();
    let origin: Vec<f64> = dw.iter().zip(&field.extents).map(|(&w, &n)| -((n / 2) as f64) * w).collect();
    let mut out = SampledField::new(DomainTag::Frequency, origin, dw, field.extents.clone(), vec![ZERO; field.len()])?;
    for flat in 0..out.len() {
        let idx = out.index_of(flat);
        let mut phase = 0.0;
        let mut bin = 0usize;
        for a in 0..d {
            let n = field.extents[a];
            let signed = idx[a] as i64 - (n / 2) as i64;
            phase -= signed as f64 * out.spacing[a] * field.origin[a];
            bin = bin * n + signed.rem_euclid(n as i64) as usize;
        }
        out.values[flat] = buf[bin] * Complex64::from_polar(cell, phase);
    }
    Ok(out)
}

fn check_natural_origin(field: &SampledField) -> Result<()> {
    for a in 0..field.d() {
        let expected = -((field.extents[a] / 2) as f64) * field.spacing[a];
        if (field.origin[a] - expected).abs() > 1e-9 * field.spacing[a] * field.extents[a] as f64 {
            return Err(Error::InvalidArgument("frequency field is not centred on ω = 0".into()));
        }
    }
    Ok(())
}

/// Options for [`sample_from_symbol`].
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingOptions {
    /// Time-grid origin; defaults to the zero vector.
    pub origin: Option<Vec<f64>>,
    /// Allowed neglected-tail energy relative to the energy on the grid.
    pub tail_budget: f64,
    /// Decay exponent `α` of the symbol, `|F| ~ |ω|^{-(α+1)}`; when absent
    /// the tail ratio is measured from the two outermost shells.
    pub decay_alpha: Option<f64>,
    /// Folds the spectral copies `F(ω + 2Ω·q)`, `|q|_∞ <= alias_copies`,
    /// into each bin, so the samples are exact up to time-domain aliasing
    /// and the copies beyond `alias_copies`.
    pub alias_copies: usize,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self { origin: None, tail_budget: DEFAULT_TAIL_BUDGET, decay_alpha: None, alias_copies: 0 }
    }
}

/// Estimated energy beyond the grid, relative to the energy on it.
///
/// Shells are `2^{-s-1} < max_j |ω_j|/Ω_j <= 2^{-s}`; the tail is the outer
/// shell times `r/(1-r)` with `r = 2^{-(2α+1)}`, the per-doubling energy
/// ratio of a separable symbol decaying like `|ω|^{-(α+1)}` along the axes.
pub fn tail_energy_fraction(field: &SampledField, decay_alpha: Option<f64>) -> Result<f64> {
    tail_energy_beyond(field, decay_alpha, 1.0)
}

/// Tail energy beyond `reach·Ω`, extrapolated from the grid's outer shells
/// with the same per-doubling ratio.
fn tail_energy_beyond(field: &SampledField, decay_alpha: Option<f64>, reach: f64) -> Result<f64> {
    check_natural_origin(field)?;
    let omega_max: Vec<f64> = field.spacing.iter().zip(&field.extents).map(|(&dw, &n)| dw * (n / 2) as f64).collect();
    let mut outer = 0.0;
    let mut next = 0.0;
    let mut total = 0.0;
    for (flat, v) in field.values.iter().enumerate() {
        let e = v.norm_sqr();
        total += e;
        let rho = field.coordinates(flat).iter().zip(&omega_max).map(|(w, m)| (w / m).abs()).fold(0.0, f64::max);
        if rho > 0.5 {
            outer += e;
        } else if rho > 0.25 {
            next += e;
        }
    }
    if total == 0.0 {
        return Ok(0.0);
    }
    let ratio = match decay_alpha {
        Some(alpha) if alpha <= -0.5 => return Ok(f64::INFINITY),
        Some(alpha) => 2f64.powf(-(2.0 * alpha + 1.0)),
        None if next > 0.0 => outer / next,
        None => return Ok(if outer > 0.0 { f64::INFINITY } else { 0.0 }),
    };
    if ratio >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(outer * ratio / (1.0 - ratio) / total * reach.powf(ratio.log2()))
}

/// Samples the inverse Fourier transform of `symbol` on the time grid dual to
/// `grid`.
pub fn sample_from_symbol<F>(symbol: F, grid: &FrequencyGrid, dc_value: Complex64, opts: &SamplingOptions) -> Result<SampledField>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let spectrum = symbol_field(&symbol, grid, dc_value);
    if spectrum.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidArgument("symbol is not finite on the grid".into()));
    }
    let tail = tail_energy_beyond(&spectrum, opts.decay_alpha, (2 * opts.alias_copies + 1) as f64)?;
    if tail > opts.tail_budget {
        return Err(Error::TailBudgetExceeded { estimate: tail, budget: opts.tail_budget });
    }
    let origin = opts.origin.clone().unwrap_or_else(|| vec![0.0; grid.d()]);
    if opts.alias_copies == 0 {
        return inverse_transform(&spectrum, &origin);
    }
    let folded = fold_copies(&symbol, &spectrum, grid, &origin, opts.alias_copies);
    inverse_transform(&folded, &origin)
}

/// `Σ_q F(ω + 2Ω·q) e^{i2(Ω·q)·origin}` over `|q|_∞ <= copies`; the `q = 0`
/// term is the stored bin value.
fn fold_copies<F>(symbol: &F, spectrum: &SampledField, grid: &FrequencyGrid, origin: &[f64], copies: usize) -> SampledField
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let d = grid.d();
    let side = 2 * copies + 1;
    let shifts: Vec<Vec<f64>> = (0..side.pow(d as u32))
        .filter_map(|mut flat| {
            let q: Vec<i64> = (0..d)
                .map(|_| {
                    let v = (flat % side) as i64 - copies as i64;
                    flat /= side;
                    v
                })
                .collect();
            (q.iter().any(|&v| v != 0)).then(|| q.iter().zip(&grid.omega_max).map(|(&v, &w)| 2.0 * w * v as f64).collect())
        })
        .collect();
    let values = crate::install(|| {
        (0..spectrum.len())
            .into_par_iter()
            .map(|flat| {
                let w = spectrum.coordinates(flat);
                let mut acc = spectrum.values[flat];
                for shift in &shifts {
                    let shifted: Vec<f64> = w.iter().zip(shift).map(|(a, b)| a + b).collect();
                    let phase: f64 = shift.iter().zip(origin).map(|(s, o)| s * o).sum();
                    acc += symbol(&shifted) * Complex64::from_polar(1.0, phase);
                }
                acc
            })
            .collect()
    });
    SampledField { values, ..spectrum.clone() }
}

/// Samples `ℬ_𝒛(·|M)` from its symbol (DC value 1, decay exponent
/// `min_j Re z_j`).
/// `decay_alpha` in `opts` is filled in when absent.
pub fn sample_box_spline(zv: &DegreeVector, m: &DirectionSet, grid: &FrequencyGrid, opts: &SamplingOptions) -> Result<SampledField> {
    if zv.len() != m.n_plus_1() {
        return Err(Error::DimensionMismatch { expected: m.n_plus_1(), found: zv.len() });
    }
    if grid.d() != m.d() {
        return Err(Error::DimensionMismatch { expected: m.d(), found: grid.d() });
    }
    let opts = SamplingOptions { decay_alpha: opts.decay_alpha.or(Some(zv.min_re())), ..opts.clone() };
    sample_from_symbol(|w| symbol_unchecked(zv, m, w), grid, Complex64::new(1.0, 0.0), &opts)
}

/// Smallest `Ω_max = π·2^k` whose `bins`-point grid meets the tail budget.
pub fn plan_omega_max(zv: &DegreeVector, m: &DirectionSet, bins: usize, tail_budget: f64) -> Result<f64> {
    let alpha = zv.min_re();
    if alpha <= -0.5 {
        return Err(Error::TailBudgetExceeded { estimate: f64::INFINITY, budget: tail_budget });
    }
    let mut omega = std::f64::consts::PI;
    let mut last = f64::INFINITY;
    for _ in 0..24 {
        let grid = FrequencyGrid::uniform(m.d(), omega, bins)?;
        let field = symbol_field(|w| symbol_unchecked(zv, m, w), &grid, Complex64::new(1.0, 0.0));
        last = tail_energy_fraction(&field, Some(alpha))?;
        if last <= tail_budget {
            return Ok(omega);
        }
        omega *= 2.0;
    }
    Err(Error::TailBudgetExceeded { estimate: last, budget: tail_budget })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayFit {
    pub direction: Vec<f64>,
    pub slope: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub alpha_est: f64,
    pub alpha_theory: f64,
    pub rays: Vec<RayFit>,
}

fn require_diagonal(m: &DirectionSet) -> Result<()> {
    if m.is_diagonal() {
        Ok(())
    } else {
        Err(Error::NonDiagonal)
    }
}

/// Fits `log max_{shell} |ℬ̂(s·u)|` against `log s` over dyadic shells in
/// `omega_range`, for the `d` coordinate rays plus `ray_count` generic rays.
/// The slowest-decaying ray sets `alpha_est = -slope - 1`.
pub fn estimate_decay(zv: &DegreeVector, m: &DirectionSet, ray_count: usize, omega_range: (f64, f64)) -> Result<DecayReport> {
    require_diagonal(m)?;
    if zv.len() != m.n_plus_1() {
        return Err(Error::DimensionMismatch { expected: m.n_plus_1(), found: zv.len() });
    }
    let (lo, hi) = omega_range;
    if !(lo > 0.0 && hi >= 2.0 * lo) {
        return Err(Error::InvalidArgument("omega_range must satisfy 0 < lo and hi >= 2 lo".into()));
    }
    let d = m.d();
    let mut directions: Vec<Vec<f64>> = (0..d).map(|a| (0..d).map(|b| if a == b { 1.0 } else { 0.0 }).collect()).collect();
    for r in 0..ray_count {
        // golden-ratio angles keep generic rays off rational directions
        let mut u: Vec<f64> = (0..d).map(|a| ((r * d + a + 1) as f64 * 0.618_033_988_749_895).fract() + 0.1).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        directions.push(u);
    }
    let scale = m.columns().iter().flat_map(|c| c.iter()).fold(0.0_f64, |a, &b| a.max(b.abs()));
    let rays: Vec<RayFit> = crate::install(|| {
        directions
            .into_par_iter()
            .map(|u| {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                let mut s0 = lo;
                while s0 * 2.0 <= hi * (1.0 + 1e-12) {
                    let width = s0;
                    // resolve the fastest oscillation (period 2π/scale) with ~40 samples
                    let samples = ((width * scale * 40.0 / (2.0 * std::f64::consts::PI)) as usize).max(2000);
                    let peak = (0..=samples)
                        .map(|i| {
                            let s = s0 + width * i as f64 / samples as f64;
                            let w: Vec<f64> = u.iter().map(|x| x * s).collect();
                            symbol_unchecked(zv, m, &w).norm()
                        })
                        .fold(0.0, f64::max);
                    xs.push(s0.ln());
                    ys.push(peak.ln());
                    s0 *= 2.0;
                }
                let (slope, residual) = least_squares(&xs, &ys);
                RayFit { direction: u, slope, residual }
            })
            .collect()
    });
    let slowest = rays.iter().map(|r| r.slope).fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayReport { alpha_est: -slowest - 1.0, alpha_theory: zv.min_re(), rays })
}

/// Slope and RMS residual of the least-squares line through `(xs, ys)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Smoothness {
    /// Supremum of the Sobolev orders `k` with `ℬ ∈ W^{k,2}`.
    pub sobolev_sup: f64,
    /// `(l, γ)` with `ℬ ∈ C^{l,γ}`, when `sobolev_sup >= d/2`.
    pub holder: Option<(i64, f64)>,
}

/// `sobolev_sup = α + 1/2` with `α = min_j Re z_j`; Hölder pair from
/// `k = sobolev_sup`: `l = ⌊k - d/2⌋`, `γ = k - d/2 - l`.
pub fn smoothness_exponents(zv: &DegreeVector, m: &DirectionSet) -> Result<Smoothness> {
    require_diagonal(m)?;
    if zv.len() != m.n_plus_1() {
        return Err(Error::DimensionMismatch { expected: m.n_plus_1(), found: zv.len() });
    }
    let k = zv.min_re() + 0.5;
    let excess = k - m.d() as f64 / 2.0;
    let holder = (excess >= 0.0).then(|| {
        let l = excess.floor();
        (l as i64, excess - l)
    });
    Ok(Smoothness { sobolev_sup: k, holder })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multivariate::boxspline_eval_invertible;
    use crate::univariate::bspline_fourier;
    use crate::special_fn::ComplexDegree;

    fn zv(v: &[(f64, f64)]) -> DegreeVector {
        DegreeVector::from_complex(&v.iter().map(|&(a, b)| Complex64::new(a, b)).collect::<Vec<_>>()).unwrap()
    }

    fn b_symbol(z: f64) -> impl Fn(&[f64]) -> Complex64 + Sync {
        let z = ComplexDegree::real(z).unwrap();
        move |w: &[f64]| bspline_fourier(z, w[0])
    }

    #[test]
    fn indicator_from_symbol() {
        let grid = FrequencyGrid::uniform(1, std::f64::consts::PI * 4096.0, 1 << 16).unwrap();
        let opts = SamplingOptions { origin: Some(vec![-4.0]), tail_budget: 1e-4, decay_alpha: Some(0.0), ..Default::default() };
        let f = sample_from_symbol(b_symbol(0.0), &grid, Complex64::new(1.0, 0.0), &opts).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..f.len() {
            let x = f.coordinates(i)[0];
            if x.abs().min((x - 1.0).abs()) >= 0.05 {
                let exact = if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 };
                worst = worst.max((f.values[i] - exact).norm());
            }
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn indicator_fails_default_budget() {
        let grid = FrequencyGrid::uniform(1, 64.0, 1024).unwrap();
        let opts = SamplingOptions { decay_alpha: Some(0.0), ..Default::default() };
        let r = sample_from_symbol(b_symbol(0.0), &grid, Complex64::new(1.0, 0.0), &opts);
        assert!(matches!(r, Err(Error::TailBudgetExceeded { .. })));
        let opts = SamplingOptions { decay_alpha: Some(-0.5), tail_budget: 1.0, ..Default::default() };
        let r = sample_from_symbol(b_symbol(0.0), &grid, Complex64::new(1.0, 0.0), &opts);
        assert!(matches!(r, Err(Error::TailBudgetExceeded { .. })));
    }

    #[test]
    fn hat_from_symbol() {
        // truncation error at the kinks is about 2/(πΩ)
        let grid = FrequencyGrid::uniform(1, std::f64::consts::PI * (1 << 19) as f64, 1 << 22).unwrap();
        let opts = SamplingOptions { origin: Some(vec![-3.0]), ..Default::default() };
        let f = sample_from_symbol(b_symbol(1.0), &grid, Complex64::new(1.0, 0.0), &opts).unwrap();
        let worst = (0..f.len())
            .map(|i| {
                let x = f.coordinates(i)[0];
                let exact = if (0.0..2.0).contains(&x) { 1.0 - (x - 1.0).abs() } else { 0.0 };
                (f.values[i] - exact).norm()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn box_spline_field_matches_time_domain() {
        let z = zv(&[(3.0, 1.0), (2.0, 1.0)]);
        let m = DirectionSet::diagonal(&[2.0, 3.0]).unwrap();
        let grid = FrequencyGrid::new(vec![8.0 * std::f64::consts::PI; 2], vec![256, 256]).unwrap();
        let opts = SamplingOptions { origin: Some(vec![-2.0, -2.0]), ..Default::default() };
        let f = sample_box_spline(&z, &m, &grid, &opts).unwrap();
        let mut worst: f64 = 0.0;
        for i in (0..f.len()).step_by(97) {
            let y = f.coordinates(i);
            let exact = boxspline_eval_invertible(&z, &m, &y).unwrap();
            worst = worst.max((f.values[i] - exact).norm());
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn parseval_and_round_trip() {
        let z = zv(&[(1.5, 0.5), (2.0, -0.5)]);
        let m = DirectionSet::identity(2);
        let grid = FrequencyGrid::uniform(2, 4.0 * std::f64::consts::PI, 64).unwrap();
        let spectrum = symbol_field(|w| symbol_unchecked(&z, &m, w), &grid, Complex64::new(1.0, 0.0));
        let time = inverse_transform(&spectrum, &[-1.0, -2.0]).unwrap();
        let lhs = time.l2_norm_squared();
        let rhs = spectrum.l2_norm_squared() / (2.0 * std::f64::consts::PI).powi(2);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        let back = forward_transform(&time).unwrap();
        assert!(back.max_abs_diff(&spectrum).unwrap() < 1e-12);
        assert!(back.origin.iter().zip(&spectrum.origin).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn binary_and_csv_io() {
        let f = SampledField::new(
            DomainTag::Time,
            vec![0.5, -1.0],
            vec![0.25, 0.1],
            vec![2, 3],
            (0..6).map(|i| Complex64::new(i as f64 / 3.0, -(i as f64))).collect(),
        )
        .unwrap();
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        let header_end = buf.iter().position(|&b| b == b'\n').unwrap();
        assert_eq!(buf.len() - header_end - 1, 6 * 16);
        assert_eq!(SampledField::read_binary(&buf[..]).unwrap(), f);
        let mut csv = Vec::new();
        f.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# cxbox-field v1 domain=time");
        assert_eq!(lines[1], "i0,i1,re,im");
        assert_eq!(lines[3], "0,1,0.3333333333333333,-1");
        assert_eq!(lines.len(), 8);
    }

    #[test]
    fn decay_examples() {
        let cases = [
            (zv(&[(0.0, 0.0), (0.0, 0.0)]), DirectionSet::identity(2), 0.0),
            (zv(&[(1.0, 0.0), (3.0, 0.0)]), DirectionSet::identity(2), 1.0),
            (zv(&[(0.5, 1.0), (2.0, 0.0)]), DirectionSet::diagonal(&[2.0, 3.0]).unwrap(), 0.5),
        ];
        for (z, m, alpha) in cases {
            let r = estimate_decay(&z, &m, 2, (1e2, 1e4)).unwrap();
            assert_eq!(r.alpha_theory, alpha);
            assert!((r.alpha_est - alpha).abs() < 0.15, "{z:?}: {}", r.alpha_est);
        }
        let shear = DirectionSet::validate(2, vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(estimate_decay(&zv(&[(1.0, 0.0); 2]), &shear, 2, (1e2, 1e4)), Err(Error::NonDiagonal));
    }

    #[test]
    fn smoothness_examples() {
        let i2 = DirectionSet::identity(2);
        let s = smoothness_exponents(&zv(&[(1.0, 0.0), (1.0, 0.0)]), &i2).unwrap();
        assert_eq!(s, Smoothness { sobolev_sup: 1.5, holder: Some((0, 0.5)) });
        let s = smoothness_exponents(&zv(&[(0.0, 0.0), (0.0, 0.0)]), &i2).unwrap();
        assert_eq!(s, Smoothness { sobolev_sup: 0.5, holder: None });
        let s = smoothness_exponents(&zv(&[(3.0, 1.0), (2.0, 1.0)]), &i2).unwrap();
        assert_eq!(s.sobolev_sup, 2.5);
    }

    #[test]
    fn planner_meets_budget() {
        let z = zv(&[(2.0, 0.5), (1.5, 0.0)]);
        let m = DirectionSet::identity(2);
        let w = plan_omega_max(&z, &m, 64, 1e-6).unwrap();
        let grid = FrequencyGrid::uniform(2, w, 64).unwrap();
        let field = symbol_field(|x| symbol_unchecked(&z, &m, x), &grid, Complex64::new(1.0, 0.0));
        assert!(tail_energy_fraction(&field, Some(1.5)).unwrap() <= 1e-6);
        assert!(plan_omega_max(&zv(&[(-0.6, 0.0), (1.0, 0.0)]), &m, 64, 1e-6).is_err());
    }
}
