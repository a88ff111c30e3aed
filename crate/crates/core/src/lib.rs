//! Prime-density laboratory.
//!
//! Exact prime counts and reciprocal-prime sums at desk scale, the
//! logarithmic-integral and 1/ln n density models, and the one-dimensional
//! flow d(t, d₀) = d₀/(1 + t·d₀) in t = ln N that carries a measured density
//! from one scale to another.
//!
//! Integer work is done in `u64`. Real-valued code is generic over
//! [`scalar::Real`]; the aliases below fix it to `f64`, which is what the
//! command-line tool reports.

pub mod checks;
pub mod density;
pub mod error;
pub mod mertens;
pub mod prime_count;
pub mod report;
pub mod rgflow;
pub mod scalar;
pub mod sieve;

pub use error::{Error, Result};
pub use prime_count::{pi_fast, pi_sieve, PrimeCounter, PrimePi};
pub use scalar::{NeumaierSum, Real};
pub use sieve::{is_prime, primes_up_to, sieve_range, SieveSegment};

/// Scalar used by the reporting pipelines.
pub type Scalar = f64;

pub type DensitySample = density::DensitySample<Scalar>;
pub type ModelComparison = density::ModelComparison<Scalar>;
pub type WindowDensity = density::WindowDensity<Scalar>;
pub type MertensSample = mertens::MertensSample<Scalar>;
pub type FlowState = rgflow::FlowState<Scalar>;
pub type QuadraticVectorField = rgflow::QuadraticVectorField<Scalar>;
pub type ScaleCheckRecord = rgflow::ScaleCheckRecord<Scalar>;
pub type Prediction = rgflow::Prediction<Scalar>;

/// Single-precision variants for quick sweeps.
pub type DensitySample32 = density::DensitySample<f32>;
pub type MertensSample32 = mertens::MertensSample<f32>;
pub type FlowState32 = rgflow::FlowState<f32>;
