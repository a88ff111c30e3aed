use crate::error::{Error, Result};
use crate::scalar::Real;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// li(2), the offset between the full and offset logarithmic integrals.
const LI_2: f64 = 1.045_163_780_117_493;

/// Offset logarithmic integral Li(x) = ∫₂ˣ dt / ln t.
///
/// Evaluated with Ramanujan's series for li(x), whose terms carry a factor
/// 2^{-n} on top of the exponential series and so converge quickly without
/// the cancellation of the plain Σ lnⁿx/(n·n!) form.
pub fn li<T: Real>(x: T) -> Result<T> {
    let two = T::lit(2.0);
    if x.is_nan() || x < two {
        return Err(Error::Domain(format!("Li(x) needs x >= 2, got {x}")));
    }
    if x == two {
        return Ok(T::zero());
    }
    if x.is_infinite() {
        return Ok(x);
    }
    Ok(li_full(x) - T::lit(LI_2))
}

fn li_full<T: Real>(x: T) -> T {
    let log_x = x.ln();
    let eps = T::epsilon();
    let mut series = T::zero();
    let mut factor = T::one(); // ln^n x / (n! 2^{n-1}) at n = 0 is rescaled below
    let mut odd_reciprocals = T::zero();
    let mut n = 1u32;
    loop {
        let nf = T::from_u32(n).expect("small integer");
        factor = if n == 1 {
            log_x
        } else {
            factor * log_x / (T::lit(2.0) * nf)
        };
        if n % 2 == 1 {
            odd_reciprocals = odd_reciprocals + T::one() / T::from_u32(n).expect("small integer");
        }
        let term = factor * odd_reciprocals;
        series = if n % 2 == 1 {
            series + term
        } else {
            series - term
        };
        if nf > log_x && term.abs() <= eps * series.abs() {
            break;
        }
        n += 1;
        if n > 10_000 {
            break;
        }
    }
    T::lit(EULER_GAMMA) + log_x.ln() + x.sqrt() * series
}
