//! Horizontal gradients: central differences along the sheet of a point.

use diamond_core::color::LabeledPoint;
use diamond_core::complex::ComplexDescription;
use diamond_core::metric::first_conflict;
use serde::{Deserialize, Serialize};

use crate::functions::LipschitzFunction;

/// Halvings allowed before giving up on keeping the stencil on one sheet.
const MAX_SHRINK: u32 = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizontalGradient {
    /// `grad[c][axis]`.
    pub grad: Vec<[f64; 3]>,
    pub step: f64,
    /// The requested step had to shrink to keep the stencil on the sheet.
    pub shrunk: bool,
}

/// Stencil point `p + t e_axis` on the sheet of `p`: colors are copied where
/// the shifted point shares a K region with `p`, green elsewhere.
fn shifted(cx: &ComplexDescription, p: &LabeledPoint, axis: usize, t: f64) -> Option<LabeledPoint> {
    let mut b = p.base;
    b[axis] += t;
    if !(0.0..=1.0).contains(&b[axis]) {
        return None;
    }
    let q = LabeledPoint::new(b, cx.lift_like(&b, p));
    // the word pattern must not change, or the stencil crosses a K boundary
    (q.word.same_pattern(&p.word) && first_conflict(cx, p, &q).is_none()).then_some(q)
}

/// Central-difference gradient of `f` at `p` with the largest step `<= step`
/// (halving) whose stencil stays on the sheet and inside the cube. Near the
/// cube boundary a one-sided difference is used.
pub fn horizontal_gradient(cx: &ComplexDescription, f: &LipschitzFunction, p: &LabeledPoint, step: f64) -> HorizontalGradient {
    let fp = f.eval(cx, p);
    let m = fp.len();
    let mut grad = vec![[0.0; 3]; m];
    let mut used = step;
    let mut shrunk = false;
    for axis in 0..3 {
        let mut t = step;
        let mut done = false;
        for _ in 0..MAX_SHRINK {
            match (shifted(cx, p, axis, t), shifted(cx, p, axis, -t)) {
                (Some(a), Some(b)) => {
                    let (fa, fb) = (f.eval(cx, &a), f.eval(cx, &b));
                    for c in 0..m {
                        grad[c][axis] = (fa[c] - fb[c]) / (2.0 * t);
                    }
                    done = true;
                }
                (Some(a), None) if p.base[axis] - t < 0.0 => {
                    let fa = f.eval(cx, &a);
                    for c in 0..m {
                        grad[c][axis] = (fa[c] - fp[c]) / t;
                    }
                    done = true;
                }
                (None, Some(b)) if p.base[axis] + t > 1.0 => {
                    let fb = f.eval(cx, &b);
                    for c in 0..m {
                        grad[c][axis] = (fp[c] - fb[c]) / t;
                    }
                    done = true;
                }
                _ => {}
            }
            if done {
                break;
            }
            t /= 2.0;
            shrunk = true;
        }
        used = used.min(t);
    }
    HorizontalGradient { grad, step: used, shrunk }
}
