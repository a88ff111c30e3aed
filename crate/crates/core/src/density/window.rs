use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sieve;

/// Prime count over an inclusive interval, normalised by its length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowDensity<T> {
    pub lo: u64,
    pub hi: u64,
    pub count: u64,
    pub length: u64,
    pub density: T,
}

impl<T: Real> WindowDensity<T> {
    fn new(lo: u64, hi: u64, count: u64) -> Self {
        let length = hi - lo + 1;
        Self {
            lo,
            hi,
            count,
            length,
            density: T::from_count(count) / T::from_count(length),
        }
    }

    /// Length-weighted union with the window immediately to the right.
    pub fn combine(&self, right: &Self) -> Result<Self> {
        if self.hi.checked_add(1) != Some(right.lo) {
            return Err(Error::Domain(format!(
                "windows [{}, {}] and [{}, {}] are not adjacent",
                self.lo, self.hi, right.lo, right.hi
            )));
        }
        Ok(Self::new(self.lo, right.hi, self.count + right.count))
    }
}

/// Prime density of `[lo, hi]`.
pub fn interval_density<T: Real>(lo: u64, hi: u64) -> Result<WindowDensity<T>> {
    let counts = sieve::par_map_segments(lo, hi, |s| s.count())?;
    Ok(WindowDensity::new(lo, hi, counts.iter().sum()))
}

/// Local prime density in `[center − width/2, center + width/2]`.
pub fn window_density<T: Real>(center: u64, width: u64) -> Result<WindowDensity<T>> {
    let half = width / 2;
    if half < 1 || center <= half {
        return Err(Error::InvalidWindow { center, width });
    }
    let hi = center
        .checked_add(half)
        .ok_or(Error::InvalidWindow { center, width })?;
    interval_density(center - half, hi)
}

/// Window width used when none is given: max(10⁴, ⌊√n⌋).
pub fn default_window_width(n: u64) -> u64 {
    sieve::isqrt(n).max(10_000)
}
