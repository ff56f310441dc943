//! Adaptive Gauss–Kronrod (10/21 point) quadrature for complex-valued
//! integrands on finite intervals, with user-supplied interior breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_74,
    0.973_906_528_517_171_720_08,
    0.930_157_491_355_708_226,
    0.865_063_366_688_984_510_73,
    0.780_817_726_586_416_897_06,
    0.679_409_568_299_024_406_23,
    0.562_757_134_668_604_683_34,
    0.433_395_394_129_247_190_8,
    0.294_392_862_701_460_198_13,
    0.148_874_338_981_631_210_88,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278,
    0.032_558_162_307_964_727_479,
    0.054_755_896_574_351_996_031,
    0.075_039_674_810_919_952_767,
    0.093_125_454_583_697_605_535,
    0.109_387_158_802_297_641_9,
    0.123_491_976_262_065_851_08,
    0.134_709_217_311_473_325_93,
    0.142_775_938_577_060_080_8,
    0.147_739_104_901_338_491_37,
    0.149_445_554_002_916_905_66,
];
// Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_594,
    0.149_451_349_150_580_593_15,
    0.219_086_362_515_982_044,
    0.269_266_719_309_996_355_09,
    0.295_524_224_714_752_870_17,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 4000 }
    }
}

impl QuadratureOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self { abs_tol, rel_tol: 0.0, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for i in 0..10 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).norm();
    if !error.is_finite() || !value.re.is_finite() || !value.im.is_finite() {
        error = f64::INFINITY;
    }
    Segment { a, b, value, error: error.max(50.0 * f64::EPSILON * value.norm()) }
}

/// Integrates `f` over `[a, b]`, starting from the partition induced by the
/// interior `breakpoints` (points outside `(a, b)` are ignored).
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], opts: QuadratureOptions) -> Result<Quadrature>
where
    F: Fn(f64) -> Complex64,
{
    if a == b {
        return Ok(Quadrature { value: Complex64::new(0.0, 0.0), error_estimate: 0.0, intervals: 0 });
    }
    if b < a {
        let q = integrate(f, b, a, breakpoints, opts)?;
        return Ok(Quadrature { value: -q.value, ..q });
    }
    let mut knots: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > a && p < b).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut edges = Vec::with_capacity(knots.len() + 2);
    edges.push(a);
    edges.extend(knots);
    edges.push(b);

    let mut heap: BinaryHeap<Segment> = edges.windows(2).map(|w| kronrod21(&f, w[0], w[1])).collect();
    loop {
        let total: Complex64 = heap.iter().map(|s| s.value).sum();
        let err: f64 = heap.iter().map(|s| s.error).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= tol {
            return Ok(Quadrature { value: total, error_estimate: err, intervals: heap.len() });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureNonconvergence { estimate: err, tolerance: tol });
        }
        let worst = heap.pop().expect("non-empty partition");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split in floating point
            return Err(Error::QuadratureNonconvergence { estimate: err, tolerance: tol });
        }
        heap.push(kronrod21(&f, worst.a, mid));
        heap.push(kronrod21(&f, mid, worst.b));
    }
}

/// Integer points in `[a, b]`; the usual breakpoints for integrands built
/// from truncated powers.
pub fn integer_knots(a: f64, b: f64) -> Vec<f64> {
    if !(a.is_finite() && b.is_finite()) || b - a > 1e6 {
        return Vec::new();
    }
    let start = a.ceil() as i64;
    let end = b.floor() as i64;
    (start..=end).map(|k| k as f64).collect()
}
