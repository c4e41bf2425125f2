//! Lipschitz test functions on the complex.

use diamond_core::color::{euclid, Color, LabeledPoint};
use diamond_core::complex::ComplexDescription;
use diamond_core::measure::sample_point;
use diamond_core::metric::distance_value;
use diamond_core::rng::{derive, stream};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::HarmonicError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionKind {
    /// The base coordinate `x^axis`.
    Coordinate { axis: usize },
    /// `a · x + b` on the base.
    Affine { a: [f64; 3], b: f64 },
    /// Chain distance to a labeled point.
    DistanceToPoint { point: LabeledPoint },
    /// Euclidean distance of the base to the gates of stages up to `stage`
    /// (within the block of `stage`).
    DistanceToGateSet { stage: u32 },
    /// `min_i (v_i + L d(p, a_i))` over random anchors, one per component.
    MacShane { anchors: usize, lipschitz: f64, seed: u64 },
    /// MacShane extension of tabulated values.
    UserTable { points: Vec<LabeledPoint>, values: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzFunctionSpec {
    pub kind: FunctionKind,
    /// Target dimension; values above 1 mean truncated l².
    pub dim: usize,
}

impl LipschitzFunctionSpec {
    pub fn scalar(kind: FunctionKind) -> Self {
        LipschitzFunctionSpec { kind, dim: 1 }
    }

    pub fn label(&self) -> String {
        let base = match &self.kind {
            FunctionKind::Coordinate { axis } => format!("coordinate-{axis}"),
            FunctionKind::Affine { .. } => "affine".into(),
            FunctionKind::DistanceToPoint { .. } => "distance-to-point".into(),
            FunctionKind::DistanceToGateSet { stage } => format!("distance-to-gates-{stage}"),
            FunctionKind::MacShane { seed, .. } => format!("macshane-{seed}"),
            FunctionKind::UserTable { .. } => "user-table".into(),
        };
        if self.dim > 1 {
            format!("{base}-l2x{}", self.dim)
        } else {
            base
        }
    }

    /// Bind the description to a complex; MacShane anchors are drawn at the complex level.
    pub fn instantiate(&self, cx: &ComplexDescription) -> Result<LipschitzFunction, HarmonicError> {
        if self.dim == 0 {
            return Err(HarmonicError::Invalid("target dimension must be at least 1".into()));
        }
        let level = cx.level;
        let mut table = Vec::new();
        // components beyond the first are scaled by 2^-c so their norms stay summable
        let comp_scale: f64 = (0..self.dim).map(|c| 4f64.powi(-(c as i32))).sum::<f64>().sqrt();
        let lip = match &self.kind {
            FunctionKind::Coordinate { axis } if *axis < 3 => comp_scale,
            FunctionKind::Coordinate { axis } => return Err(HarmonicError::Invalid(format!("axis {axis} out of range"))),
            FunctionKind::Affine { a, .. } => euclid(a, &[0.0; 3]) * comp_scale,
            FunctionKind::DistanceToPoint { point } => {
                if point.level() != level {
                    return Err(HarmonicError::Invalid(format!("point level {} differs from complex level {level}", point.level())));
                }
                comp_scale
            }
            FunctionKind::DistanceToGateSet { stage } => {
                if *stage == 0 || *stage > level {
                    return Err(HarmonicError::Invalid(format!("gate stage {stage} outside 1..={level}")));
                }
                comp_scale
            }
            FunctionKind::MacShane { anchors, lipschitz, seed } => {
                if *anchors == 0 || !(*lipschitz > 0.0) {
                    return Err(HarmonicError::Invalid("MacShane needs anchors and a positive constant".into()));
                }
                for c in 0..self.dim {
                    let mut rng = stream(derive(*seed, c as u64), 0);
                    let pts: Vec<(LabeledPoint, f64)> = (0..*anchors)
                        .map(|_| {
                            let p = sample_point(cx, level, &mut rng);
                            let v = lipschitz * rng.gen::<f64>();
                            (p, v)
                        })
                        .collect();
                    table.push(pts);
                }
                lipschitz * (self.dim as f64).sqrt()
            }
            FunctionKind::UserTable { points, values } => {
                if points.is_empty() || points.len() != values.len() || values.iter().any(|v| v.len() != self.dim) {
                    return Err(HarmonicError::Invalid("user table needs one value vector of the target dimension per point".into()));
                }
                let mut l: f64 = 0.0;
                for i in 0..points.len() {
                    for k in i + 1..points.len() {
                        let d = distance_value(cx, &points[i], &points[k]);
                        let dv = values[i].iter().zip(&values[k]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                        if d > 0.0 {
                            l = l.max(dv / d);
                        }
                    }
                }
                for c in 0..self.dim {
                    table.push(points.iter().cloned().zip(values.iter().map(|v| v[c])).collect());
                }
                // each component is extended with the full constant
                l * (self.dim as f64).sqrt()
            }
        };
        let ext = match &self.kind {
            FunctionKind::UserTable { .. } => lip / (self.dim as f64).sqrt(),
            FunctionKind::MacShane { lipschitz, .. } => *lipschitz,
            _ => 0.0,
        };
        Ok(LipschitzFunction { spec: self.clone(), level, lip, table, ext })
    }
}

#[derive(Clone, Debug)]
pub struct LipschitzFunction {
    pub spec: LipschitzFunctionSpec,
    pub level: u32,
    /// Upper bound for the Lipschitz constant of the full vector.
    pub lip: f64,
    table: Vec<Vec<(LabeledPoint, f64)>>,
    ext: f64,
}

/// Lift a point to level `l`, coloring new stages green.
pub fn lift_to(cx: &ComplexDescription, p: &LabeledPoint, l: u32) -> LabeledPoint {
    if p.level() >= l {
        return p.project(l);
    }
    let k = p.level();
    let word = cx.resolve_word_with(&p.base, l, |j| if j <= k { p.word.at(j).unwrap_or(Color::Green) } else { Color::Green });
    let mut w = word;
    for j in 1..=k {
        w.set(j, p.word.at(j));
    }
    LabeledPoint::new(p.base, w)
}

fn box_distance(x: &[f64; 3], lo: &[f64; 3], hi: &[f64; 3]) -> f64 {
    (0..3).map(|a| (lo[a] - x[a]).max(0.0).max(x[a] - hi[a])).map(|d| d * d).sum::<f64>().sqrt()
}

/// Euclidean distance from `x` to the gates of stages `start..=stage`, where
/// `start` opens the block of `stage`. Only the own and neighbouring cells
/// can hold the nearest gate: the own cell's gate is closer than one side.
pub fn gate_set_distance(cx: &ComplexDescription, x: &[f64; 3], stage: u32) -> f64 {
    let mut start = stage;
    while start > 1 && !cx.schedule.stage(start).block_start {
        start -= 1;
    }
    let mut best = f64::INFINITY;
    for j in start..=stage {
        let den = cx.schedule.side_den(j - 1);
        let own = cx.cell_index(x, j - 1);
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let c = [own[0] as i64 + dx, own[1] as i64 + dy, own[2] as i64 + dz];
                    if c.iter().any(|&v| v < 0 || v >= den as i64) {
                        continue;
                    }
                    if let Some(rec) = cx.record_for_cell(j, c.map(|v| v as u128)) {
                        let (lo, hi) = rec.gate_bounds();
                        best = best.min(box_distance(x, &lo, &hi));
                    }
                }
            }
        }
        if best == 0.0 {
            break;
        }
    }
    best
}

impl LipschitzFunction {
    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// Values at `p`; points below the function's level are lifted with green colors.
    pub fn eval(&self, cx: &ComplexDescription, p: &LabeledPoint) -> Vec<f64> {
        let base_value = |q: &LabeledPoint| -> f64 {
            match &self.spec.kind {
                FunctionKind::Coordinate { axis } => q.base[*axis],
                FunctionKind::Affine { a, b } => a[0] * q.base[0] + a[1] * q.base[1] + a[2] * q.base[2] + b,
                FunctionKind::DistanceToPoint { point } => distance_value(cx, &lift_to(cx, q, self.level), point),
                FunctionKind::DistanceToGateSet { stage } => gate_set_distance(cx, &q.base, *stage),
                _ => unreachable!(),
            }
        };
        match &self.spec.kind {
            FunctionKind::MacShane { .. } | FunctionKind::UserTable { .. } => {
                let q = lift_to(cx, p, self.level);
                self.table
                    .iter()
                    .map(|anchors| {
                        anchors
                            .iter()
                            .map(|(a, v)| v + self.ext * distance_value(cx, &q, a))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .collect()
            }
            _ => {
                let v = base_value(p);
                (0..self.dim()).map(|c| v * 0.5f64.powi(c as i32)).collect()
            }
        }
    }

    pub fn eval1(&self, cx: &ComplexDescription, p: &LabeledPoint) -> f64 {
        self.eval(cx, p)[0]
    }

    /// Largest observed `|f(p) - f(q)| / d(p, q)` over seeded random pairs;
    /// never exceeds [`LipschitzFunction::lip`] for a correct bound.
    pub fn sampled_lipschitz(&self, cx: &ComplexDescription, pairs: usize, seed: u64) -> f64 {
        let mut rng = stream(seed, 0x11b);
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let p = sample_point(cx, self.level, &mut rng);
            let q = sample_point(cx, self.level, &mut rng);
            let d = distance_value(cx, &p, &q);
            if d > 0.0 {
                let fp = self.eval(cx, &p);
                let fq = self.eval(cx, &q);
                let dv = fp.iter().zip(&fq).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                worst = worst.max(dv / d);
            }
        }
        worst
    }
}
