//! Exact π(n) by two independent routes: a parallel segmented sieve count
//! and the sublinear Lucy–Hedgehog recurrence over the values ⌊n/k⌋.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sieve::{self, isqrt};

pub const DEFAULT_SIEVE_LIMIT: u64 = 2_000_000_000;
pub const DEFAULT_FAST_LIMIT: u64 = 100_000_000_000;

/// A scale together with its prime count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrimePi {
    pub n: u64,
    pub count: u64,
}

/// Counting caps for both algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeCounter {
    pub sieve_limit: u64,
    pub fast_limit: u64,
}

impl Default for PrimeCounter {
    fn default() -> Self {
        Self {
            sieve_limit: DEFAULT_SIEVE_LIMIT,
            fast_limit: DEFAULT_FAST_LIMIT,
        }
    }
}

impl PrimeCounter {
    pub fn new(sieve_limit: u64, fast_limit: u64) -> Self {
        Self {
            sieve_limit,
            fast_limit,
        }
    }

    pub fn pi_sieve(&self, n: u64) -> Result<PrimePi> {
        if n > self.sieve_limit {
            return Err(Error::LimitExceeded {
                what: "sieve count",
                n,
                limit: self.sieve_limit,
            });
        }
        let counts = sieve::par_map_segments(0, n, |s| s.count())?;
        Ok(PrimePi {
            n,
            count: counts.iter().sum(),
        })
    }

    pub fn pi_fast(&self, n: u64) -> Result<PrimePi> {
        if n > self.fast_limit {
            return Err(Error::LimitExceeded {
                what: "fast count",
                n,
                limit: self.fast_limit,
            });
        }
        Ok(PrimePi {
            n,
            count: lucy_hedgehog(n),
        })
    }

    /// π(n) by whichever algorithm admits `n`, preferring the sublinear one.
    pub fn pi(&self, n: u64) -> Result<PrimePi> {
        if n <= self.fast_limit {
            self.pi_fast(n)
        } else if n <= self.sieve_limit {
            self.pi_sieve(n)
        } else {
            Err(Error::LimitExceeded {
                what: "prime count",
                n,
                limit: self.fast_limit.max(self.sieve_limit),
            })
        }
    }

    /// π at every point of an ascending grid from one sieve pass.
    pub fn pi_sieve_many(&self, grid: &[u64]) -> Result<Vec<PrimePi>> {
        if let Some(index) = grid.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NonMonotonicGrid { index: index + 1 });
        }
        let Some(&top) = grid.last() else {
            return Ok(Vec::new());
        };
        if top > self.sieve_limit {
            return Err(Error::LimitExceeded {
                what: "sieve count",
                n: top,
                limit: self.sieve_limit,
            });
        }
        let units = sieve::par_map_segments(0, top, |s| {
            let inside: Vec<u64> = grid
                .iter()
                .copied()
                .filter(|&g| s.lo() <= g && g <= s.hi())
                .map(|g| s.primes().take_while(|&p| p <= g).count() as u64)
                .collect();
            (s.lo(), s.hi(), s.count(), inside)
        })?;
        let mut out = Vec::with_capacity(grid.len());
        let mut before = 0u64;
        let mut points = grid.iter().copied();
        for (lo, hi, count, inside) in units {
            for partial in inside {
                let n = points.next().expect("grid point per partial count");
                debug_assert!(lo <= n && n <= hi);
                out.push(PrimePi {
                    n,
                    count: before + partial,
                });
            }
            before += count;
        }
        Ok(out)
    }
}

/// Exact π(n) by segmented sieve, default cap 2·10^9.
pub fn pi_sieve(n: u64) -> Result<PrimePi> {
    PrimeCounter::default().pi_sieve(n)
}

/// Exact π(n) in O(n^{3/4}) time, default cap 10^11.
pub fn pi_fast(n: u64) -> Result<PrimePi> {
    PrimeCounter::default().pi_fast(n)
}

/// Lucy–Hedgehog prime counting.
///
/// `small[v]` and `large[i]` hold S(v) and S(n/i), the count of integers in
/// `2..=v` that survive sieving by the primes processed so far. After every
/// prime up to √n is processed, S(n) = π(n).
fn lucy_hedgehog(n: u64) -> u64 {
    if n < 2 {
        return 0;
    }
    let r = isqrt(n);
    let ru = r as usize;
    let mut small: Vec<u64> = (0..=r).map(|v| v.saturating_sub(1)).collect();
    let mut large: Vec<u64> = (0..=r)
        .map(|i| n.checked_div(i).map_or(0, |q| q - 1))
        .collect();
    for p in 2..=r {
        let pu = p as usize;
        if small[pu] == small[pu - 1] {
            continue;
        }
        let below = small[pu - 1];
        let square = p * p;
        let large_end = (n / square).min(r) as usize;
        for i in 1..=large_end {
            let d = i as u64 * p;
            let s_np = if d <= r {
                large[d as usize]
            } else {
                small[(n / d) as usize]
            };
            large[i] -= s_np - below;
        }
        if square <= r {
            for v in (square as usize..=ru).rev() {
                small[v] -= small[v / pu] - below;
            }
        }
    }
    large[1]
}
