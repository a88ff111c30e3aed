//! One-dimensional renormalisation flow of the prime density.
//!
//! The flow is generated by the quadratic field V(d) = c·d² with c = −1,
//! in the logarithmic scale variable t = ln N. It is realised three ways
//! that are checked against each other: the closed form d₀/(1 + t·d₀), the
//! partial sums of the exponentiated generator (a geometric series), and
//! fixed-step RK4 integration of d′ = V(d).

use serde::Serialize;

use crate::density::{self, DensitySample};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Denominators below this make [`predict_density`] flag its result.
pub const NEAR_POLE_THRESHOLD: f64 = 1e-6;

/// A point (t, d) on a flow line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowState<T> {
    pub t: T,
    pub d: T,
}

/// V(d) = c·d².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadraticVectorField<T> {
    pub c: T,
}

impl<T: Real> Default for QuadraticVectorField<T> {
    fn default() -> Self {
        Self::prime_density()
    }
}

impl<T: Real> QuadraticVectorField<T> {
    pub fn new(c: T) -> Self {
        Self { c }
    }

    /// The field with c = −1 that reproduces the single-logarithm decrease.
    pub fn prime_density() -> Self {
        Self { c: -T::one() }
    }

    pub fn evaluate(&self, d: T) -> T {
        self.c * d * d
    }

    /// Flow time at which the solution through `d0` diverges, if any.
    pub fn pole(&self, d0: T) -> Option<T> {
        let cd = self.c * d0;
        (cd != T::zero()).then(|| cd.recip())
    }

    /// Exact flow d₀ / (1 − c·t·d₀).
    pub fn flow(&self, t: T, d0: T) -> Result<T> {
        check_positive(d0)?;
        let denominator = T::one() - self.c * t * d0;
        if denominator <= T::zero() {
            let t_star = self.pole(d0).and_then(|p| p.to_f64()).unwrap_or(f64::NAN);
            return Err(Error::Singularity { t_star });
        }
        Ok(d0 / denominator)
    }

    /// Moves a state forward by `dt` along this field.
    pub fn advance(&self, state: FlowState<T>, dt: T) -> Result<FlowState<T>> {
        Ok(FlowState {
            t: state.t + dt,
            d: self.flow(dt, state.d)?,
        })
    }
}

fn check_positive<T: Real>(d0: T) -> Result<()> {
    if d0 > T::zero() && d0.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "initial density must be positive, got {d0}"
        )))
    }
}

/// d(t, d₀) = d₀ / (1 + t·d₀), defined while 1 + t·d₀ > 0.
pub fn flow_closed_form<T: Real>(t: T, d0: T) -> Result<T> {
    QuadraticVectorField::prime_density().flow(t, d0)
}

/// Partial sum Σ_{k=0}^{order} d₀(−t·d₀)^k of the exponentiated generator.
pub fn flow_series<T: Real>(t: T, d0: T, order: usize) -> Result<T> {
    check_positive(d0)?;
    let x = -t * d0;
    if x.is_nan() || x.abs() >= T::one() {
        return Err(Error::OutsideRadius {
            ratio: x.abs().to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut acc = T::one();
    for _ in 0..order {
        acc = T::one() + x * acc;
    }
    Ok(d0 * acc)
}

/// Step count used when none is given: max(1000, ⌈1000·|t|⌉).
pub fn default_steps<T: Real>(t: T) -> usize {
    let scaled = (t.abs() * T::lit(1000.0))
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX);
    scaled.max(1000)
}

/// Classic fixed-step RK4 integration of d′ = V(d) from 0 to `t`.
pub fn flow_numeric<T: Real>(
    t: T,
    d0: T,
    field: QuadraticVectorField<T>,
    steps: usize,
) -> Result<T> {
    check_positive(d0)?;
    if steps == 0 {
        return Err(Error::ZeroSteps);
    }
    if let Some(t_star) = field.pole(d0) {
        let same_side = t_star.signum() == t.signum() && t != T::zero();
        if same_side && t_star.abs() <= t.abs() {
            return Err(Error::BlowUp {
                t_star: t_star.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let h = t / T::from_usize(steps).expect("step count fits the scalar");
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let mut d = d0;
    for _ in 0..steps {
        let k1 = field.evaluate(d);
        let k2 = field.evaluate(d + half * h * k1);
        let k3 = field.evaluate(d + half * h * k2);
        let k4 = field.evaluate(d + h * k3);
        d = d + h * sixth * (k1 + T::lit(2.0) * (k2 + k3) + k4);
        if !d.is_finite() || d <= T::zero() {
            return Err(Error::BlowUp {
                t_star: field.pole(d0).and_then(|p| p.to_f64()).unwrap_or(f64::NAN),
            });
        }
    }
    Ok(d)
}

/// |d(s+t, x) − d(t, d(s, x))| for the closed-form flow.
pub fn group_law_residual<T: Real>(s: T, t: T, x: T) -> Result<T> {
    let direct = flow_closed_form(s + t, x)?;
    let composed = flow_closed_form(t, flow_closed_form(s, x)?)?;
    Ok((direct - composed).abs())
}

/// Inverse-density difference between two scales against ln(N₁/N₂).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleCheckRecord<T> {
    pub n1: u64,
    pub n2: u64,
    pub lhs: T,
    pub rhs: T,
    pub abs_err: T,
    pub rel_err: T,
}

pub fn scale_relation_check<T: Real>(
    s1: &DensitySample<T>,
    s2: &DensitySample<T>,
) -> Result<ScaleCheckRecord<T>> {
    if s1.n == s2.n {
        return Err(Error::EqualScale { n: s1.n });
    }
    let lhs = s1.inv_density - s2.inv_density;
    let rhs = log_ratio::<T>(s1.n, s2.n);
    let abs_err = (lhs - rhs).abs();
    Ok(ScaleCheckRecord {
        n1: s1.n,
        n2: s2.n,
        lhs,
        rhs,
        abs_err,
        rel_err: abs_err / rhs.abs(),
    })
}

/// ln(a/b), antisymmetric bit for bit under swapping the arguments.
fn log_ratio<T: Real>(a: u64, b: u64) -> T {
    let (a, b) = (T::from_count(a), T::from_count(b));
    if a >= b {
        (a / b).ln()
    } else {
        -(b / a).ln()
    }
}

/// A scale with a known inverse density, the starting point of an
/// extrapolation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Anchor<T> {
    pub n: u64,
    pub inv_density: T,
}

impl<T: Real> From<&DensitySample<T>> for Anchor<T> {
    fn from(sample: &DensitySample<T>) -> Self {
        Self {
            n: sample.n,
            inv_density: sample.inv_density,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction<T> {
    pub n: u64,
    pub density: T,
    pub denominator: T,
    /// Set when the denominator is below [`NEAR_POLE_THRESHOLD`] or the
    /// predicted density exceeds 1.
    pub near_pole: bool,
}

impl<T: Real> Prediction<T> {
    pub fn as_anchor(&self) -> Anchor<T> {
        Anchor {
            n: self.n,
            inv_density: self.denominator,
        }
    }
}

/// Flows a measured inverse density from `anchor.n` to `n_target`:
/// 1 / (anchor.inv_density + ln(n_target / anchor.n)).
pub fn predict_from<T: Real>(n_target: u64, anchor: Anchor<T>) -> Result<Prediction<T>> {
    if n_target < 2 {
        return Err(Error::Domain(format!(
            "target scale must be >= 2, got {n_target}"
        )));
    }
    let denominator = anchor.inv_density + log_ratio::<T>(n_target, anchor.n);
    if denominator <= T::zero() {
        return Err(Error::Pole {
            denominator: denominator.to_f64().unwrap_or(f64::NAN),
        });
    }
    let density = denominator.recip();
    Ok(Prediction {
        n: n_target,
        density,
        denominator,
        near_pole: denominator < T::lit(NEAR_POLE_THRESHOLD) || density > T::one(),
    })
}

pub fn predict_density<T: Real>(n_target: u64, anchor: &DensitySample<T>) -> Result<Prediction<T>> {
    predict_from(n_target, Anchor::from(anchor))
}

/// What a window counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Population {
    Naturals,
    Primes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub center: u64,
    pub width: u64,
}

impl Window {
    pub fn new(center: u64, width: u64) -> Self {
        Self { center, width }
    }

    fn bounds(&self) -> Result<(u64, u64)> {
        let half = self.width / 2;
        if half < 1 || self.center <= half {
            return Err(Error::InvalidWindow {
                center: self.center,
                width: self.width,
            });
        }
        let hi = self.center.checked_add(half).ok_or(Error::InvalidWindow {
            center: self.center,
            width: self.width,
        })?;
        Ok((self.center - half, hi))
    }

    fn density<T: Real>(&self, population: Population) -> Result<T> {
        let (lo, hi) = self.bounds()?;
        match population {
            Population::Naturals => {
                let length = T::from_count(hi - lo + 1);
                let members = T::from_count((lo..=hi).count() as u64);
                Ok(members / length)
            }
            Population::Primes => Ok(density::interval_density::<T>(lo, hi)?.density),
        }
    }
}

/// |density(a) − density(b)| for two windows of the same population.
///
/// Zero for the naturals at any pair of scales; positive for the primes,
/// whose density drifts under rescaling.
pub fn scale_invariance_check<T: Real>(a: Window, b: Window, population: Population) -> Result<T> {
    Ok((a.density::<T>(population)? - b.density::<T>(population)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_examples() {
        for d0 in [1e-3, 0.1, 0.5, 1.0, 7.0] {
            assert_eq!(flow_closed_form(0.0, d0).unwrap(), d0);
        }
        assert_eq!(flow_closed_form(1.0, 1.0).unwrap(), 0.5);
        let t = (1e6f64).ln();
        let d = flow_closed_form(t, 1.0).unwrap();
        assert!((d - 1.0 / (1.0 + t)).abs() < 1e-16);
        assert!((d - 0.067_497).abs() < 1e-6);
    }

    #[test]
    fn closed_form_rejects_pole_and_bad_density() {
        assert_eq!(
            flow_closed_form(-2.0, 0.5),
            Err(Error::Singularity { t_star: -2.0 })
        );
        assert!(flow_closed_form(-3.0, 0.5).is_err());
        assert!(flow_closed_form(-1.999, 0.5).is_ok());
        assert!(matches!(flow_closed_form(1.0, 0.0), Err(Error::Domain(_))));
        assert!(flow_closed_form(1.0, -0.1).is_err());
    }

    #[test]
    fn series_examples() {
        assert_eq!(flow_series(0.7, 0.3, 0).unwrap(), 0.3);
        assert_eq!(flow_series(0.5, 1.0, 3).unwrap(), 0.625);
        let tail_bound = 0.5f64.powi(41) / 0.5;
        let v = flow_series(0.5f64, 1.0, 40).unwrap();
        assert!((v - 2.0 / 3.0).abs() <= tail_bound);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            flow_series(2.0, 0.5, 10),
            Err(Error::OutsideRadius { .. })
        ));
        assert!(flow_series(-1.0, 1.0, 10).is_err());
    }

    #[test]
    fn numeric_examples() {
        let field = QuadraticVectorField::<f64>::prime_density();
        assert_eq!(flow_numeric(0.0, 0.42, field, 1000).unwrap(), 0.42);
        assert!((flow_numeric(1.0, 1.0, field, 1000).unwrap() - 0.5).abs() <= 1e-10);
        assert!((flow_numeric(5.0, 0.2, field, 5000).unwrap() - 0.1).abs() <= 1e-10);
        assert_eq!(flow_numeric(1.0, 1.0, field, 0), Err(Error::ZeroSteps));
        assert_eq!(default_steps(0.3), 1000);
        assert_eq!(default_steps(-12.5), 12_500);
    }

    #[test]
    fn numeric_detects_pole_before_integrating() {
        let field = QuadraticVectorField::<f64>::prime_density();
        assert!(matches!(
            flow_numeric(-2.0, 0.5, field, 1000),
            Err(Error::BlowUp { .. })
        ));
        assert!(matches!(
            flow_numeric(-5.0, 0.5, field, 1000),
            Err(Error::BlowUp { .. })
        ));
        // a positive coefficient puts the pole at positive t
        let growing = QuadraticVectorField::<f64>::new(1.0);
        assert!(flow_numeric(3.0, 0.5, growing, 1000).is_err());
        assert!(flow_numeric(1.0, 0.5, growing, 1000).is_ok());
    }

    #[test]
    fn rk4_error_is_fourth_order() {
        let field = QuadraticVectorField::<f64>::prime_density();
        let exact = flow_closed_form(3.0, 0.9).unwrap();
        let coarse = (flow_numeric(3.0, 0.9, field, 20).unwrap() - exact).abs();
        let fine = (flow_numeric(3.0, 0.9, field, 40).unwrap() - exact).abs();
        let ratio = coarse / fine;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn group_law_examples() {
        assert!(group_law_residual(0.0f64, 0.8, 0.6).unwrap() < 1e-16);
        assert_eq!(group_law_residual(1.0f64, 1.0, 1.0).unwrap(), 0.0);
        assert!(group_law_residual(0.3f64, -0.1, 0.7).unwrap() <= 1e-12);
        assert!(group_law_residual(-3.0f64, 1.0, 0.5).is_err());
    }

    #[test]
    fn coefficient_sets_the_scale_relation_slope() {
        // 1/d(t₁) − 1/d(t₂) = −c·(t₁ − t₂): only c = −1 gives ln(N₁/N₂)
        let (t1, t2) = ((1e8f64).ln(), (1e6f64).ln());
        for c in [-1.0, -1.2, -0.8] {
            let field = QuadraticVectorField::new(c);
            let lhs = 1.0 / field.flow(t1, 0.5).unwrap() - 1.0 / field.flow(t2, 0.5).unwrap();
            assert!((lhs + c * (t1 - t2)).abs() < 1e-12);
            let matches_log = (lhs - (t1 - t2)).abs() < 1e-9;
            assert_eq!(matches_log, c == -1.0);
        }
    }

    fn sample(n: u64, pi: u64) -> DensitySample<f64> {
        DensitySample::from_count(crate::prime_count::PrimePi { n, count: pi }).unwrap()
    }

    #[test]
    fn scale_check_examples() {
        let a = sample(1_000_000, 78498);
        assert_eq!(
            scale_relation_check(&a, &a.clone()),
            Err(Error::EqualScale { n: 1_000_000 })
        );
        let b = sample(100_000_000, 5_761_455);
        let r = scale_relation_check(&b, &a).unwrap();
        assert!((r.rhs - 4.60517).abs() < 1e-5);
        assert!((r.lhs - 4.617).abs() < 1e-3);
        assert!((r.rel_err - 0.002_688).abs() < 1e-5, "{}", r.rel_err);

        // at 10¹⁰/10⁸ the relative error is 0.002951, slightly larger
        let c = sample(10_000_000_000, 455_052_511);
        let r2 = scale_relation_check(&c, &b).unwrap();
        assert!((r2.rel_err - 0.002_951).abs() < 1e-5, "{}", r2.rel_err);
    }

    #[test]
    fn prediction_examples() {
        let anchor = sample(1_000_000, 78498);
        let same = predict_density(1_000_000, &anchor).unwrap();
        assert!((same.density - anchor.density).abs() <= 1e-16);
        assert!(!same.near_pole);

        let p = predict_density(100_000_000, &anchor).unwrap();
        assert!((p.density - 1.0 / (12.7392 + 4.60517)).abs() < 1e-6);
        assert!((p.density - 0.057_655_67).abs() < 1e-8);
        assert!(!p.near_pole);

        let low = predict_density(3, &anchor).unwrap();
        assert!(
            (low.denominator - 0.0223).abs() < 1e-3,
            "{}",
            low.denominator
        );
        assert!(low.near_pole);

        assert!(matches!(
            predict_density(2, &anchor),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn near_pole_threshold_flags() {
        let anchor = Anchor {
            n: 1000,
            inv_density: 1e-7 + (1000f64).ln() - (999f64).ln(),
        };
        let p = predict_from(999, anchor).unwrap();
        assert!(p.denominator < NEAR_POLE_THRESHOLD && p.near_pole);
    }

    #[test]
    fn invariance_naturals_versus_primes() {
        let a = Window::new(10_000, 10_000);
        let b = Window::new(1_000_000, 10_000);
        assert_eq!(
            scale_invariance_check::<f64>(a, b, Population::Naturals).unwrap(),
            0.0
        );
        assert_eq!(
            scale_invariance_check::<f64>(a, a, Population::Naturals).unwrap(),
            0.0
        );
        assert_eq!(
            scale_invariance_check::<f64>(b, b, Population::Primes).unwrap(),
            0.0
        );
        let drift = scale_invariance_check::<f64>(a, b, Population::Primes).unwrap();
        let model = 1.0 / (1e4f64).ln() - 1.0 / (1e6f64).ln();
        assert!(drift > 0.0);
        assert!((drift - model).abs() / model < 0.3, "{drift} vs {model}");
        assert!(scale_invariance_check::<f64>(Window::new(1, 4), b, Population::Naturals).is_err());
    }

    proptest! {
        #[test]
        fn group_law_holds(x in 0.01f64..1.0, s in -0.9f64..10.0, t in -0.9f64..10.0) {
            // physical states only: every intermediate density stays in (0, 1]
            let ok = |tt: f64| 1.0 + tt * x >= x;
            prop_assume!(ok(s) && ok(s + t));
            let mid = flow_closed_form(s, x).unwrap();
            prop_assume!(1.0 + t * mid >= mid);
            prop_assert!(group_law_residual(s, t, x).unwrap() <= 1e-12);
        }

        #[test]
        fn decreasing_in_t(d0 in 1e-3f64..10.0, t1 in 0.0f64..50.0, gap in 1e-6f64..50.0) {
            let t2 = t1 + gap;
            prop_assert!(flow_closed_form(t2, d0).unwrap() < flow_closed_form(t1, d0).unwrap());
        }

        #[test]
        fn pole_is_exactly_where_the_denominator_vanishes(d0 in 1e-3f64..10.0, t in -1e4f64..1e4) {
            let fails = 1.0 + t * d0 <= 0.0;
            prop_assert_eq!(flow_closed_form(t, d0).is_err(), fails);
            if fails {
                let numeric = flow_numeric(t, d0, QuadraticVectorField::<f64>::prime_density(), 10);
                prop_assert!(
                    matches!(numeric, Err(Error::BlowUp { .. })),
                    "numeric should report blow-up"
                );
            }
        }

        #[test]
        fn scale_relation_is_antisymmetric(
            n1 in 10u64..1_000_000_000, n2 in 10u64..1_000_000_000,
            p1 in 1u64..1000, p2 in 1u64..1000,
        ) {
            prop_assume!(n1 != n2);
            let a = sample(n1, p1.min(n1));
            let b = sample(n2, p2.min(n2));
            let ab = scale_relation_check(&a, &b).unwrap();
            let ba = scale_relation_check(&b, &a).unwrap();
            prop_assert_eq!(ab.lhs, -ba.lhs);
            prop_assert_eq!(ab.rhs, -ba.rhs);
        }

        #[test]
        fn prediction_is_transitive(
            inv in 2.0f64..30.0, a in 100u64..1_000_000,
            b in 100u64..1_000_000_000, c in 100u64..1_000_000_000_000,
        ) {
            let anchor = Anchor { n: a, inv_density: inv };
            let direct = predict_from(c, anchor);
            let via = predict_from(b, anchor).and_then(|p| predict_from(c, p.as_anchor()));
            if let (Ok(direct), Ok(via)) = (direct, via) {
                prop_assert!((direct.density - via.density).abs() <= 1e-12);
            }
        }
    }
}
