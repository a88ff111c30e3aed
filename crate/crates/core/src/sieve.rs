//! Segmented sieve of Eratosthenes over 64-bit windows.
//!
//! Only odd numbers are stored; 2 is handled as a special case. Base primes
//! up to `2^25` are computed once per process and shared read-only between
//! threads. Windows whose square root lies beyond that are sieved with base
//! primes streamed from the same machinery.

use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest value accepted anywhere in the sieve (2^63 − 1).
pub const MAX_VALUE: u64 = i64::MAX as u64;

/// Default maximum span `hi − lo` of a single [`SieveSegment`].
pub const DEFAULT_SEGMENT_CAP: u64 = 1 << 26;

/// Numbers covered by one parallel work unit (2^19 odd bits, 64 KiB).
pub const WORK_SPAN: u64 = 1 << 20;

const CACHED_BASE_LIMIT: u64 = 1 << 25;

/// Primality flags for the inclusive window `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveSegment {
    lo: u64,
    hi: u64,
    /// First odd number `>= lo`; bit `j` of `odd_bits` is `first_odd + 2j`.
    first_odd: u64,
    odd_count: u64,
    odd_bits: Vec<u64>,
}

impl SieveSegment {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    /// Number of integers in the window.
    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn contains_two(&self) -> bool {
        self.lo <= 2 && 2 <= self.hi
    }

    /// Flag of `lo + i`.
    pub fn get(&self, i: u64) -> bool {
        assert!(
            i < self.len(),
            "index {i} outside segment of length {}",
            self.len()
        );
        self.flag_of(self.lo + i)
    }

    /// Primality of `n`, which must lie inside the window.
    pub fn flag_of(&self, n: u64) -> bool {
        assert!(
            self.lo <= n && n <= self.hi,
            "{n} outside [{}, {}]",
            self.lo,
            self.hi
        );
        if n == 2 {
            return true;
        }
        if n.is_multiple_of(2) {
            return false;
        }
        let j = (n - self.first_odd) / 2;
        self.odd_bits[(j / 64) as usize] >> (j % 64) & 1 == 1
    }

    /// Flags in window order, one per integer.
    pub fn flags(&self) -> impl Iterator<Item = bool> + '_ {
        (self.lo..=self.hi).map(move |n| self.flag_of(n))
    }

    /// Number of primes in the window.
    pub fn count(&self) -> u64 {
        let odd: u64 = self
            .odd_bits
            .iter()
            .map(|w| u64::from(w.count_ones()))
            .sum();
        odd + u64::from(self.contains_two())
    }

    /// Primes in the window, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = self.contains_two().then_some(2);
        let first_odd = self.first_odd;
        let odds = self
            .odd_bits
            .iter()
            .enumerate()
            .flat_map(move |(w, &word)| {
                BitIter(word).map(move |b| first_odd + 2 * (64 * w as u64 + u64::from(b)))
            });
        two.into_iter().chain(odds)
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// Sieve engine with a configurable segment cap.
#[derive(Clone, Copy, Debug)]
pub struct Sieve {
    segment_cap: u64,
}

impl Default for Sieve {
    fn default() -> Self {
        Self {
            segment_cap: DEFAULT_SEGMENT_CAP,
        }
    }
}

impl Sieve {
    pub fn with_segment_cap(segment_cap: u64) -> Self {
        Self { segment_cap }
    }

    pub fn segment_cap(&self) -> u64 {
        self.segment_cap
    }

    pub fn range(&self, lo: u64, hi: u64) -> Result<SieveSegment> {
        if hi > MAX_VALUE {
            return Err(Error::Overflow {
                value: hi,
                max: MAX_VALUE,
            });
        }
        if lo > hi {
            return Err(Error::InvertedRange { lo, hi });
        }
        if hi - lo > self.segment_cap {
            return Err(Error::RangeTooLarge {
                lo,
                hi,
                len: hi - lo + 1,
                cap: self.segment_cap,
            });
        }
        Ok(sieve_window(lo, hi))
    }
}

/// Sieves `[lo, hi]` with the default segment cap.
pub fn sieve_range(lo: u64, hi: u64) -> Result<SieveSegment> {
    Sieve::default().range(lo, hi)
}

/// Deterministic primality test, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    // The first twelve primes are a complete witness set below 3.3e24.
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Integer square root, exact for all `u64`.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

struct BaseCache {
    limit: u64,
    primes: Arc<Vec<u32>>,
}

static BASE: RwLock<Option<BaseCache>> = RwLock::new(None);

/// Odd primes `<= limit` (`limit <= 2^25`), shared across calls.
fn cached_odd_primes(limit: u64) -> Arc<Vec<u32>> {
    debug_assert!(limit <= CACHED_BASE_LIMIT);
    if let Some(cache) = BASE.read().expect("base prime cache poisoned").as_ref() {
        if cache.limit >= limit {
            return Arc::clone(&cache.primes);
        }
    }
    let mut guard = BASE.write().expect("base prime cache poisoned");
    if let Some(cache) = guard.as_ref() {
        if cache.limit >= limit {
            return Arc::clone(&cache.primes);
        }
    }
    // grow geometrically so repeated requests do not re-sieve
    let old = guard.as_ref().map_or(0, |c| c.limit);
    let new_limit = limit
        .max(old.saturating_mul(4))
        .clamp(1 << 16, CACHED_BASE_LIMIT);
    let primes = Arc::new(simple_odd_primes(new_limit));
    *guard = Some(BaseCache {
        limit: new_limit,
        primes: Arc::clone(&primes),
    });
    primes
}

/// Plain odd-only sieve of Eratosthenes for `3..=limit`.
fn simple_odd_primes(limit: u64) -> Vec<u32> {
    if limit < 3 {
        return Vec::new();
    }
    let n_odds = ((limit - 1) / 2) as usize; // 3, 5, ..., covers odd <= limit
    let mut composite = vec![false; n_odds + 1];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j <= n_odds {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    (1..=n_odds)
        .filter(|&j| !composite[j])
        .map(|j| (2 * j + 1) as u32)
        .collect()
}

fn sieve_window(lo: u64, hi: u64) -> SieveSegment {
    let first_odd = lo | 1;
    let odd_count = if first_odd > hi {
        0
    } else {
        (hi - first_odd) / 2 + 1
    };
    let n_words = odd_count.div_ceil(64) as usize;
    let mut bits = vec![u64::MAX; n_words];
    if odd_count % 64 != 0 {
        bits[n_words - 1] = (1u64 << (odd_count % 64)) - 1;
    }
    if first_odd == 1 && odd_count > 0 {
        bits[0] &= !1;
    }
    if odd_count > 0 {
        let root = isqrt(hi);
        let cached = cached_odd_primes(root.min(CACHED_BASE_LIMIT));
        for &p in cached.iter().take_while(|&&p| u64::from(p) <= root) {
            clear_multiples(&mut bits, first_odd, odd_count, u64::from(p));
        }
        if root > CACHED_BASE_LIMIT {
            let mut next = CACHED_BASE_LIMIT + 1;
            while next <= root {
                let end = root.min(next + WORK_SPAN - 1);
                let base = sieve_window(next, end);
                for p in base.primes() {
                    clear_multiples(&mut bits, first_odd, odd_count, p);
                }
                next = end + 1;
            }
        }
    }
    SieveSegment {
        lo,
        hi,
        first_odd,
        odd_count,
        odd_bits: bits,
    }
}

#[inline]
fn clear_multiples(bits: &mut [u64], first_odd: u64, odd_count: u64, p: u64) {
    let square = p * p;
    let mut m = if square >= first_odd {
        square
    } else {
        match first_odd % p {
            0 => first_odd,
            r => first_odd + (p - r),
        }
    };
    if m % 2 == 0 {
        m += p;
    }
    if m < first_odd {
        return;
    }
    let mut j = (m - first_odd) / 2;
    while j < odd_count {
        bits[(j / 64) as usize] &= !(1u64 << (j % 64));
        j += p;
    }
}

fn work_units(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut units = Vec::new();
    let mut a = lo;
    loop {
        let b = hi.min(a.saturating_add(WORK_SPAN - 1));
        units.push((a, b));
        if b == hi {
            break;
        }
        a = b + 1;
    }
    units
}

/// Sieves `[lo, hi]` in parallel work units and maps each one with `f`.
///
/// Results come back in window order, so any reduction the caller performs
/// over them is deterministic regardless of thread scheduling.
pub fn par_map_segments<R, F>(lo: u64, hi: u64, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&SieveSegment) -> R + Sync,
{
    if hi > MAX_VALUE {
        return Err(Error::Overflow {
            value: hi,
            max: MAX_VALUE,
        });
    }
    if lo > hi {
        return Err(Error::InvertedRange { lo, hi });
    }
    Ok(work_units(lo, hi)
        .into_par_iter()
        .map(|(a, b)| f(&sieve_window(a, b)))
        .collect())
}

/// Streaming iterator over the primes of an inclusive range.
#[derive(Debug)]
pub struct Primes {
    next_lo: u64,
    hi: u64,
    done: bool,
    buffer: std::vec::IntoIter<u64>,
}

impl Iterator for Primes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if let Some(p) = self.buffer.next() {
                return Some(p);
            }
            if self.done {
                return None;
            }
            let b = self.hi.min(self.next_lo.saturating_add(WORK_SPAN - 1));
            let segment = sieve_window(self.next_lo, b);
            self.buffer = segment.primes().collect::<Vec<_>>().into_iter();
            if b == self.hi {
                self.done = true;
            } else {
                self.next_lo = b + 1;
            }
        }
    }
}

/// Primes in `[lo, hi]`, generated one work unit at a time.
pub fn primes_in(lo: u64, hi: u64) -> Result<Primes> {
    if hi > MAX_VALUE {
        return Err(Error::Overflow {
            value: hi,
            max: MAX_VALUE,
        });
    }
    Ok(Primes {
        next_lo: lo,
        hi,
        done: lo > hi,
        buffer: Vec::new().into_iter(),
    })
}

/// All primes `p <= n` in increasing order, streamed.
pub fn primes_up_to(n: u64) -> Primes {
    primes_in(0, n.min(MAX_VALUE)).expect("clamped to the supported range")
}
