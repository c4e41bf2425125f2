//! Exact grid location of coordinates.
//!
//! Every grid in the construction has an odd denominator, so the only binary
//! fractions lying on grid planes are 0 and 1. Decoding an `f64` as
//! `mantissa * 2^-shift` lets us compute `floor(x * k)` and detect exact plane
//! hits without rounding.

use serde::{Deserialize, Serialize};

/// Points whose coordinates can be located exactly on a grid of `k` cells per unit.
pub trait ExactCoords {
    /// `(floor(x_axis * k), x_axis * k is an integer)`.
    fn floor_scaled(&self, axis: usize, k: u128) -> (u128, bool);
    fn to_f64(&self) -> [f64; 3];
}

/// Exact `floor(x * k)` for `x` in `[0, 1]`.
pub fn floor_scaled_f64(x: f64, k: u128) -> (u128, bool) {
    debug_assert!((0.0..=1.0).contains(&x), "coordinate {x} outside [0,1]");
    if x <= 0.0 {
        return (0, true);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, shift) = if exp == 0 {
        (frac as u128, 1074i64)
    } else {
        ((frac | (1u64 << 52)) as u128, 1075 - exp)
    };
    if shift <= 0 {
        // only x = 1 style values reach here; x <= 1 keeps this tiny
        let v = mant << (-shift) as u32;
        return (v * k, true);
    }
    if shift >= 128 {
        return (0, false);
    }
    let prod = mant * k;
    let q = prod >> shift as u32;
    let exact = prod & ((1u128 << shift as u32) - 1) == 0;
    (q, exact)
}

impl ExactCoords for [f64; 3] {
    fn floor_scaled(&self, axis: usize, k: u128) -> (u128, bool) {
        floor_scaled_f64(self[axis], k)
    }
    fn to_f64(&self) -> [f64; 3] {
        *self
    }
}

/// Point with rational coordinates `idx / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub idx: [u128; 3],
    pub den: u128,
}

impl LatticePoint {
    pub fn new(idx: [u128; 3], den: u128) -> Self {
        LatticePoint { idx, den }
    }
}

impl ExactCoords for LatticePoint {
    fn floor_scaled(&self, axis: usize, k: u128) -> (u128, bool) {
        let p = self.idx[axis] * k;
        (p / self.den, p % self.den == 0)
    }
    fn to_f64(&self) -> [f64; 3] {
        let d = self.den as f64;
        [self.idx[0] as f64 / d, self.idx[1] as f64 / d, self.idx[2] as f64 / d]
    }
}
