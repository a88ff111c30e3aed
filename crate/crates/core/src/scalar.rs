//! Scalar abstraction shared by every real-valued computation in the crate.
//!
//! Integer work (sieving, counting) is done in `u64`; everything measured or
//! modelled on top of those counts is generic over [`Real`], so the same code
//! runs in `f32` for quick sweeps and `f64` for the reported tables.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar usable by the density, Mertens and flow code.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking only if the target type cannot
    /// represent finite `f64` values at all.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal is representable")
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("u64 is representable as a float")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Kahan–Babuška–Neumaier compensated accumulator.
///
/// The running compensation is kept separately and only folded in by
/// [`NeumaierSum::value`], so long sums of positive terms of decreasing size
/// (reciprocal primes) lose no more than a couple of ulps overall.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NeumaierSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> NeumaierSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    pub fn value(&self) -> T {
        self.sum + self.compensation
    }

    pub fn push(&mut self, x: T) {
        let (s, c) = two_sum(self.sum, x);
        self.sum = s;
        self.compensation = self.compensation + c;
    }

    /// Merges another accumulator, carrying both of its components.
    pub fn merge(&mut self, other: &Self) {
        self.push(other.sum);
        self.push(other.compensation);
    }
}

impl<T: Real> AddAssign<T> for NeumaierSum<T> {
    fn add_assign(&mut self, rhs: T) {
        self.push(rhs);
    }
}

impl<T: Real> Add for NeumaierSum<T> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self.merge(&rhs);
        self
    }
}

impl<T: Real> Sum<T> for NeumaierSum<T> {
    fn sum<I: Iterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        iter.for_each(|x| acc.push(x));
        acc
    }
}

/// Error-free transform of `a + b` into a rounded sum and its exact error,
/// ordered by magnitude.
#[inline]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let err = if a.abs() >= b.abs() {
        (a - s) + b
    } else {
        (b - s) + a
    };
    (s, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let mut acc = NeumaierSum::<f64>::new();
        acc += 1.0;
        acc += 1e100;
        acc += 1.0;
        acc += -1e100;
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn harmonic_sum_matches_reverse_order() {
        // summing smallest-first is the accurate reference for positive terms
        let n = 1_000_000u64;
        let forward: NeumaierSum<f64> = (1..=n).map(|k| 1.0 / k as f64).sum();
        let mut reverse = 0.0f64;
        for k in (1..=n).rev() {
            reverse += 1.0 / k as f64;
        }
        assert!((forward.value() - reverse).abs() < 1e-13);
    }

    #[test]
    fn merge_is_exact_for_split_sums() {
        let terms: Vec<f64> = (1..5000).map(|k| 1.0 / (k as f64).sqrt()).collect();
        let whole: NeumaierSum<f64> = terms.iter().copied().sum();
        let (a, b) = terms.split_at(1234);
        let left: NeumaierSum<f64> = a.iter().copied().sum();
        let right: NeumaierSum<f64> = b.iter().copied().sum();
        assert!(((left + right).value() - whole.value()).abs() <= 1e-13);
    }

    #[test]
    fn works_in_single_precision() {
        let acc: NeumaierSum<f32> = std::iter::repeat_n(0.1f32, 10_000).sum();
        assert!((acc.value() - 1000.0).abs() < 1e-3);
    }
}
