//! Seeded randomized batches over the flow identities. The report runs
//! these as internal verification; identical seeds give identical batches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::rgflow::{self, Anchor, QuadraticVectorField};

pub const DEFAULT_SEED: u64 = 1;

/// Draws (t, d₀) with d₀ ∈ [0.01, 1] and t·d₀ uniform in [−0.9, 0.9].
pub fn flow_points(seed: u64, count: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d0 = rng.gen_range(0.01..=1.0);
            let x = rng.gen_range(-0.9..=0.9);
            (x / d0, d0)
        })
        .collect()
}

/// Draws (s, t, x) whose intermediate states all stay physical: every
/// density along d(s, x) and d(s+t, x) lies in (0, 1].
pub fn group_law_triples(seed: u64, count: usize) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: f64 = rng.gen_range(0.01..=1.0);
        let s: f64 = rng.gen_range(-0.9..=20.0);
        let t: f64 = rng.gen_range(-0.9..=20.0);
        let physical = |tt: f64| 1.0 + tt * x >= x;
        if physical(s) && physical(s + t) {
            out.push((s, t, x));
        }
    }
    out
}

/// Smallest series order whose geometric tail d₀·|x|^{k+1}/(1−|x|) is
/// below `tol`.
pub fn series_order_for(t: f64, d0: f64, tol: f64) -> usize {
    let x = (t * d0).abs();
    if x == 0.0 {
        return 0;
    }
    let mut k = 0usize;
    while d0 * x.powi(k as i32 + 1) / (1.0 - x) > tol {
        k += 1;
    }
    k
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FlowAgreement {
    pub samples: usize,
    pub max_closed_vs_series: f64,
    pub max_closed_vs_numeric: f64,
    pub max_series_vs_numeric: f64,
}

impl FlowAgreement {
    pub fn worst(&self) -> f64 {
        self.max_closed_vs_series
            .max(self.max_closed_vs_numeric)
            .max(self.max_series_vs_numeric)
    }
}

/// Compares the three flow realisations on seeded points. `order = None`
/// picks, per point, the series order whose tail is below 10⁻¹³.
pub fn flow_agreement(seed: u64, count: usize, order: Option<usize>) -> Result<FlowAgreement> {
    let field = QuadraticVectorField::<f64>::prime_density();
    let mut summary = FlowAgreement {
        samples: count,
        ..Default::default()
    };
    for (t, d0) in flow_points(seed, count) {
        let closed = rgflow::flow_closed_form(t, d0)?;
        let k = order.unwrap_or_else(|| series_order_for(t, d0, 1e-13));
        let series = rgflow::flow_series(t, d0, k)?;
        let numeric = rgflow::flow_numeric(t, d0, field, rgflow::default_steps(t))?;
        summary.max_closed_vs_series = summary.max_closed_vs_series.max((closed - series).abs());
        summary.max_closed_vs_numeric = summary.max_closed_vs_numeric.max((closed - numeric).abs());
        summary.max_series_vs_numeric = summary.max_series_vs_numeric.max((series - numeric).abs());
    }
    Ok(summary)
}

/// Largest group-law residual over seeded physical triples.
pub fn group_law_max(seed: u64, count: usize) -> Result<f64> {
    group_law_triples(seed, count)
        .into_iter()
        .try_fold(0.0f64, |worst, (s, t, x)| {
            Ok(worst.max(rgflow::group_law_residual(s, t, x)?))
        })
}

/// Largest |A→C − (A→B→C)| over seeded anchors and targets.
pub fn transitivity_max(seed: u64, count: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let a = 10f64.powf(rng.gen_range(2.0..7.0)).round() as u64;
        let b = 10f64.powf(rng.gen_range(2.0..10.0)).round() as u64;
        let c = 10f64.powf(rng.gen_range(2.0..12.0)).round() as u64;
        // inverse densities in the range real prime data produces
        let anchor = Anchor {
            n: a,
            inv_density: (a as f64).ln() - 1.0 + rng.gen_range(-0.2..0.2),
        };
        let direct = rgflow::predict_from(c, anchor)?;
        let via = rgflow::predict_from(c, rgflow::predict_from(b, anchor)?.as_anchor())?;
        worst = worst.max((direct.density - via.density).abs());
    }
    Ok(worst)
}
