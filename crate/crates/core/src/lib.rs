//! Complex-degree B-splines and box splines.
//!
//! The crate evaluates truncated complex powers, univariate complex
//! B-splines and multivariate complex box splines in the time and frequency
//! domains, computes two-scale refinement masks, and applies fractional
//! integral/derivative multipliers on frequency-windowed grid functions.
//!
//! Fourier convention throughout: `f̂(ω) = ∫ f(x) e^{-iω·x} dx`, with the
//! inverse carrying the `(2π)^{-d}` factor.

pub mod directions;
pub mod error;
pub mod fractional;
pub mod multivariate;
pub mod quadrature;
pub mod refinement;
pub mod special_fn;
pub mod spectral;
pub mod univariate;

pub use error::{Error, Result};
pub use num_complex::Complex64;

use std::sync::OnceLock;

/// Environment variable bounding the worker threads used for parallel sums.
pub const THREADS_ENV: &str = "CXBOX_THREADS";

fn pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok()?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
    })
    .as_ref()
}

/// Runs `op` on the pool sized by `CXBOX_THREADS`, or on rayon's global pool
/// when the variable is unset or invalid.
pub(crate) fn install<R: Send>(op: impl FnOnce() -> R + Send) -> R {
    match pool() {
        Some(p) => p.install(op),
        None => op(),
    }
}
