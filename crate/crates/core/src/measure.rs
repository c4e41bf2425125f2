//! The measure `μ_l`: Lebesgue measure on the base times independent fair colors.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{euclid, Color, LabeledPoint};
use crate::complex::ComplexDescription;
use crate::metric::distance_value;
use crate::rng::{stream, Rng};
use crate::Error;

const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

pub fn random_color(rng: &mut Rng) -> Color {
    if rng.gen::<bool>() {
        Color::Red
    } else {
        Color::Green
    }
}

/// Point of level `l` with base uniform in the box `[lo, hi]` and fair colors.
pub fn sample_in_box(cx: &ComplexDescription, l: u32, lo: &[f64; 3], hi: &[f64; 3], rng: &mut Rng) -> LabeledPoint {
    let base = [0, 1, 2].map(|a| lo[a] + (hi[a] - lo[a]) * rng.gen::<f64>());
    let word = cx.resolve_word_with(&base, l, |_| random_color(rng));
    LabeledPoint::new(base, word)
}

/// Draw from `μ_l`.
pub fn sample_point(cx: &ComplexDescription, l: u32, rng: &mut Rng) -> LabeledPoint {
    sample_in_box(cx, l, &[0.0; 3], &[1.0; 3], rng)
}

/// Bounding box of the Euclidean ball clipped to the unit cube, and its volume.
pub fn ball_box(c: &[f64; 3], r: f64) -> ([f64; 3], [f64; 3], f64) {
    let lo = c.map(|v| (v - r).max(0.0));
    let hi = c.map(|v| (v + r).min(1.0));
    let vol = (0..3).map(|a| hi[a] - lo[a]).product();
    (lo, hi, vol)
}

/// Hit counts of the balls `B(center, radii[i])` over `samples` draws from the
/// box of the largest radius. Radii must be non-increasing.
pub fn nested_ball_counts(
    cx: &ComplexDescription,
    center: &LabeledPoint,
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> (Vec<usize>, f64) {
    let (lo, hi, vol) = ball_box(&center.base, radii[0]);
    let l = center.level();
    let chunks = samples.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let mut hits = vec![0usize; radii.len()];
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let q = sample_in_box(cx, l, &lo, &hi, &mut rng);
                // the chain distance dominates the base distance
                if euclid(&q.base, &center.base) > radii[0] {
                    continue;
                }
                let d = distance_value(cx, center, &q);
                for (h, &r) in hits.iter_mut().zip(radii) {
                    if d <= r {
                        *h += 1;
                    }
                }
            }
            hits
        })
        .reduce(
            || vec![0; radii.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    (counts, vol)
}

fn estimate(count: usize, samples: usize, vol: f64, seed: u64) -> MeasureEstimate {
    let p = count as f64 / samples as f64;
    MeasureEstimate { value: vol * p, stderr: vol * (p * (1.0 - p) / samples as f64).sqrt(), samples, seed }
}

/// Monte Carlo estimate of `μ_l(B(center, r))`.
///
/// Draws are restricted to the bounding box of the Euclidean ball, which
/// contains the metric ball, and rescaled by its volume.
pub fn ball_measure(cx: &ComplexDescription, center: &LabeledPoint, r: f64, samples: usize, seed: u64) -> Result<MeasureEstimate, Error> {
    if samples == 0 {
        return Err(Error::InvalidParameter("ball_measure needs at least one sample".into()));
    }
    if r.is_nan() || r < 0.0 {
        return Err(Error::InvalidParameter(format!("radius must be non-negative, got {r}")));
    }
    if r == 0.0 {
        return Ok(MeasureEstimate { value: 0.0, stderr: 0.0, samples, seed });
    }
    let (counts, vol) = nested_ball_counts(cx, center, &[r], samples, seed);
    Ok(estimate(counts[0], samples, vol, seed))
}

/// Estimates for `B(center, r)` and `B(center, r/2)` from one common sample.
pub fn ball_measure_pair(
    cx: &ComplexDescription,
    center: &LabeledPoint,
    r: f64,
    samples: usize,
    seed: u64,
) -> (MeasureEstimate, MeasureEstimate) {
    let (counts, vol) = nested_ball_counts(cx, center, &[r, r / 2.0], samples, seed);
    (estimate(counts[0], samples, vol, seed), estimate(counts[1], samples, vol, seed))
}
