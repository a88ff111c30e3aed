//! Reciprocal-prime sums Σ_{p<Λ} 1/p, the normalised statistic
//! F̄(Λ) = Σ/log log Λ and the residual Σ − log log Λ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prime_count::DEFAULT_SIEVE_LIMIT;
use crate::scalar::{NeumaierSum, Real};
use crate::sieve::{self, SieveSegment};

/// Smallest cutoff with log log Λ > 0.
pub const MIN_LAMBDA: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MertensSample<T> {
    pub lambda: u64,
    pub sum: T,
    pub loglog: T,
    pub fbar: T,
    pub residual: T,
}

impl<T: Real> MertensSample<T> {
    pub fn from_sum(lambda: u64, sum: T) -> Self {
        let loglog = T::from_count(lambda).ln().ln();
        Self {
            lambda,
            sum,
            loglog,
            fbar: sum / loglog,
            residual: sum - loglog,
        }
    }
}

fn check_lambda(lambda: u64, limit: u64) -> Result<()> {
    if lambda < MIN_LAMBDA {
        return Err(Error::Domain(format!(
            "cutoff {lambda} is below the minimum {MIN_LAMBDA}"
        )));
    }
    if lambda > limit {
        return Err(Error::LimitExceeded {
            what: "prime enumeration",
            n: lambda,
            limit,
        });
    }
    Ok(())
}

fn segment_sum<T: Real>(segment: &SieveSegment, below: u64) -> NeumaierSum<T> {
    segment
        .primes()
        .take_while(|&p| p < below)
        .map(|p| T::from_count(p).recip())
        .sum()
}

/// Σ 1/p over primes p < Λ with an explicit enumeration cap.
pub fn reciprocal_prime_sum_with_limit<T: Real>(lambda: u64, limit: u64) -> Result<T> {
    check_lambda(lambda, limit)?;
    let parts = sieve::par_map_segments(0, lambda - 1, |s| segment_sum::<T>(s, lambda))?;
    let total = parts.iter().fold(NeumaierSum::new(), |mut acc, part| {
        acc.merge(part);
        acc
    });
    Ok(total.value())
}

/// Σ 1/p over primes p < Λ (strict), compensated.
pub fn reciprocal_prime_sum<T: Real>(lambda: u64) -> Result<T> {
    reciprocal_prime_sum_with_limit(lambda, DEFAULT_SIEVE_LIMIT)
}

pub fn fbar_with_limit<T: Real>(lambda: u64, limit: u64) -> Result<MertensSample<T>> {
    let sum = reciprocal_prime_sum_with_limit(lambda, limit)?;
    Ok(MertensSample::from_sum(lambda, sum))
}

/// The full sample at one cutoff.
pub fn fbar<T: Real>(lambda: u64) -> Result<MertensSample<T>> {
    fbar_with_limit(lambda, DEFAULT_SIEVE_LIMIT)
}

/// Samples at every grid point from a single enumeration pass.
///
/// Each work unit reports its own partial sum plus partial sums cut at the
/// grid points it contains; prefix merging in window order then yields every
/// sample.
pub fn mertens_residual_curve_with_limit<T: Real>(
    grid: &[u64],
    limit: u64,
) -> Result<Vec<MertensSample<T>>> {
    if let Some(index) = grid.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotonicGrid { index: index + 1 });
    }
    let Some(&top) = grid.last() else {
        return Ok(Vec::new());
    };
    check_lambda(grid[0], limit)?;
    check_lambda(top, limit)?;

    let units = sieve::par_map_segments(0, top - 1, |s| {
        let cuts: Vec<NeumaierSum<T>> = grid
            .iter()
            .copied()
            .filter(|&g| s.lo() < g && g - 1 <= s.hi())
            .map(|g| segment_sum::<T>(s, g))
            .collect();
        (segment_sum::<T>(s, u64::MAX), cuts)
    })?;

    let mut samples = Vec::with_capacity(grid.len());
    let mut prefix = NeumaierSum::<T>::new();
    let mut points = grid.iter().copied();
    for (whole, cuts) in units {
        for cut in cuts {
            let lambda = points.next().expect("one cut per grid point");
            let mut at = prefix;
            at.merge(&cut);
            samples.push(MertensSample::from_sum(lambda, at.value()));
        }
        prefix.merge(&whole);
    }
    debug_assert_eq!(samples.len(), grid.len());
    Ok(samples)
}

pub fn mertens_residual_curve<T: Real>(grid: &[u64]) -> Result<Vec<MertensSample<T>>> {
    mertens_residual_curve_with_limit(grid, DEFAULT_SIEVE_LIMIT)
}
