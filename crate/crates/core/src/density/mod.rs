//! Empirical prime density π(n)/n and the two smooth models it is compared
//! with: 1/ln n and Li(n)/n.

mod li;
mod window;

use serde::Serialize;

pub use li::li;
pub use window::{default_window_width, interval_density, window_density, WindowDensity};

use crate::error::{Error, Result};
use crate::prime_count::{PrimeCounter, PrimePi};
use crate::scalar::Real;

/// Cumulative density at one scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensitySample<T> {
    pub n: u64,
    pub pi: u64,
    pub density: T,
    pub inv_density: T,
    pub log_n: T,
}

impl<T: Real> DensitySample<T> {
    pub fn from_count(count: PrimePi) -> Result<Self> {
        let PrimePi { n, count: pi } = count;
        if n < 2 || pi == 0 || pi > n {
            return Err(Error::Domain(format!("no density for π({n}) = {pi}")));
        }
        let (nf, pf) = (T::from_count(n), T::from_count(pi));
        Ok(Self {
            n,
            pi,
            density: pf / nf,
            inv_density: nf / pf,
            log_n: nf.ln(),
        })
    }
}

/// Empirical density against the 1/ln n and Li(n)/n models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelComparison<T> {
    pub sample: DensitySample<T>,
    pub inv_log: T,
    pub li_over_n: T,
    pub rel_err_invlog: T,
    pub rel_err_li: T,
}

impl<T: Real> ModelComparison<T> {
    pub fn from_sample(sample: DensitySample<T>) -> Result<Self> {
        if sample.n < 3 {
            return Err(Error::Domain(format!(
                "model comparison needs n >= 3, got {}",
                sample.n
            )));
        }
        let inv_log = sample.log_n.recip();
        let li_over_n = li(T::from_count(sample.n))? / T::from_count(sample.n);
        let rel = |model: T| (model - sample.density).abs() / sample.density;
        Ok(Self {
            sample,
            inv_log,
            li_over_n,
            rel_err_invlog: rel(inv_log),
            rel_err_li: rel(li_over_n),
        })
    }
}

pub fn density_at_with<T: Real>(counter: &PrimeCounter, n: u64) -> Result<DensitySample<T>> {
    if n < 2 {
        return Err(Error::Domain(format!("density needs n >= 2, got {n}")));
    }
    DensitySample::from_count(counter.pi(n)?)
}

/// Exact π(n) with the derived density ratios.
pub fn density_at<T: Real>(n: u64) -> Result<DensitySample<T>> {
    density_at_with(&PrimeCounter::default(), n)
}

pub fn compare_models_with<T: Real>(counter: &PrimeCounter, n: u64) -> Result<ModelComparison<T>> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "model comparison needs n >= 3, got {n}"
        )));
    }
    ModelComparison::from_sample(density_at_with(counter, n)?)
}

pub fn compare_models<T: Real>(n: u64) -> Result<ModelComparison<T>> {
    compare_models_with(&PrimeCounter::default(), n)
}
