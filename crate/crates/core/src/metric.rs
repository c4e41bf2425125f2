//! Chain metric on `X_l`.
//!
//! Two points whose words never disagree inside a common K region lie on a
//! common chromatic sheet, and sheets are isometric to the Euclidean cube.
//! Otherwise only the outermost disagreement matters: a chain must change
//! that color either by touching `∂K` or by using the record's jump pair, and
//! both options are computed in closed form. Crossing `∂K` re-synchronizes
//! every deeper disagreement; on the jump route deeper disagreements at the
//! K center are resolved recursively.

use petgraph::algo::astar;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use crate::color::{euclid, Color, ColorWord, LabeledPoint};
use crate::complex::{ComplexDescription, DoublingRecord};
use crate::exact::floor_scaled_f64;
use crate::schedule::{LevelSchedule, Rational};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HopKind {
    Start,
    Sheet,
    Jump,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub point: LabeledPoint,
    /// How the chain arrived at `point`.
    pub hop: HopKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub lower: f64,
    pub upper: f64,
    pub witness: Vec<ChainStep>,
    pub certified: bool,
}

impl DistanceResult {
    /// Sum of hop costs along the witness chain.
    pub fn witness_cost(&self, cx: &ComplexDescription) -> f64 {
        let mut total = 0.0;
        for w in self.witness.windows(2) {
            total += match w[1].hop {
                HopKind::Jump => jump_record(cx, &w[0].point, &w[1].point).map_or(f64::NAN, |r| r.jump_cost_f64()),
                _ => euclid(&w[0].point.base, &w[1].point.base),
            };
        }
        total
    }
}

/// Record linking two jump endpoints: equal bases at its center, words differing exactly at its stage.
pub fn jump_record(cx: &ComplexDescription, a: &LabeledPoint, b: &LabeledPoint) -> Option<DoublingRecord> {
    if a.base != b.base || a.level() != b.level() {
        return None;
    }
    let diff: Vec<u32> = (1..=a.level()).filter(|&j| a.word.at(j) != b.word.at(j)).collect();
    let &[j] = diff.as_slice() else { return None };
    if a.word.at(j).is_none() || b.word.at(j).is_none() {
        return None;
    }
    let rec = cx.record_containing(j, &a.base)?;
    (rec.center_f64() == a.base).then_some(rec)
}

fn cell_at(x: &[f64; 3], den: u128) -> [u128; 3] {
    [0, 1, 2].map(|a| floor_scaled_f64(x[a], den).0.min(den - 1))
}

/// Outermost stage at which `p` and `q` sit in the same K region with different colors.
pub fn first_conflict(cx: &ComplexDescription, p: &LabeledPoint, q: &LabeledPoint) -> Option<u32> {
    for j in 1..=p.level().min(q.level()) {
        if let (Some(a), Some(b)) = (p.word.at(j), q.word.at(j)) {
            if a != b {
                let den = cx.schedule.side_den(j - 1);
                if cell_at(&p.base, den) == cell_at(&q.base, den) {
                    return Some(j);
                }
            }
        }
    }
    None
}

fn others(a: usize) -> (usize, usize) {
    match a {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Shortest `x -> z -> y` with `z` on one face of the box; `x`, `y` inside the box.
fn face_min(x: &[f64; 3], y: &[f64; 3], axis: usize, plane: f64, lo: &[f64; 3], hi: &[f64; 3]) -> (f64, [f64; 3]) {
    let rx = (x[axis] - plane).abs();
    let ry = (y[axis] - plane).abs();
    let (b, e) = others(axis);
    let t = if rx + ry > 0.0 { rx / (rx + ry) } else { 0.5 };
    let zb = x[b] + t * (y[b] - x[b]);
    let ze = x[e] + t * (y[e] - x[e]);
    if (lo[b]..=hi[b]).contains(&zb) && (lo[e]..=hi[e]).contains(&ze) {
        let mut z = [0.0; 3];
        z[axis] = plane;
        z[b] = zb;
        z[e] = ze;
        let v = ((rx + ry).powi(2) + (y[b] - x[b]).powi(2) + (y[e] - x[e]).powi(2)).sqrt();
        return (v, z);
    }
    // the convex objective has its planar minimum off the face, so the face minimum is on an edge
    let mut best = (f64::INFINITY, [0.0; 3]);
    for (fixed, free) in [(b, e), (e, b)] {
        for w in [lo[fixed], hi[fixed]] {
            let a2 = rx * rx + (x[fixed] - w).powi(2);
            let b2 = ry * ry + (y[fixed] - w).powi(2);
            let (ra, rb) = (a2.sqrt(), b2.sqrt());
            let t = if ra + rb > 0.0 { x[free] + (y[free] - x[free]) * ra / (ra + rb) } else { x[free] };
            let t = t.clamp(lo[free], hi[free]);
            let v = (a2 + (t - x[free]).powi(2)).sqrt() + (b2 + (t - y[free]).powi(2)).sqrt();
            if v < best.0 {
                let mut z = [0.0; 3];
                z[axis] = plane;
                z[fixed] = w;
                z[free] = t;
                best = (v, z);
            }
        }
    }
    best
}

/// Per-face minimizers of `|x - z| + |z - y|` over `z` on the box boundary.
pub fn face_minimizers(x: &[f64; 3], y: &[f64; 3], lo: &[f64; 3], hi: &[f64; 3]) -> Vec<(f64, [f64; 3])> {
    let mut out = Vec::with_capacity(6);
    for axis in 0..3 {
        for plane in [lo[axis], hi[axis]] {
            out.push(face_min(x, y, axis, plane, lo, hi));
        }
    }
    out
}

/// Cheapest route from `x` to `y` through the box boundary, with its touching point.
pub fn boundary_route(x: &[f64; 3], y: &[f64; 3], lo: &[f64; 3], hi: &[f64; 3]) -> (f64, [f64; 3]) {
    face_minimizers(x, y, lo, hi)
        .into_iter()
        .fold((f64::INFINITY, [0.0; 3]), |acc, c| if c.0 < acc.0 { c } else { acc })
}

/// Distance value only; same number as [`distance`] without building the witness.
pub fn distance_value(cx: &ComplexDescription, p: &LabeledPoint, q: &LabeledPoint) -> f64 {
    let Some(j) = first_conflict(cx, p, q) else {
        return euclid(&p.base, &q.base);
    };
    let rec = cx.record_containing(j, &p.base).expect("conflict stage must have a record");
    let (lo, hi) = rec.k_bounds();
    let mut best = boundary_route(&p.base, &q.base, &lo, &hi).0;
    for (cp, cq) in jump_variants(cx, &rec, p, q) {
        let v = distance_value(cx, p, &cp) + rec.jump_cost_f64() + distance_value(cx, &cq, q);
        best = best.min(v);
    }
    best
}

/// Jump endpoint pairs worth trying for a conflict at `rec`.
///
/// The center of K can carry colors at deeper stages (its gate is doubled again
/// at the next block start). Where exactly one of `p`, `q` shares such a record
/// the endpoints copy its color; where both do with different colors both
/// choices are returned.
pub fn jump_variants(cx: &ComplexDescription, rec: &DoublingRecord, p: &LabeledPoint, q: &LabeledPoint) -> Vec<(LabeledPoint, LabeledPoint)> {
    let j = rec.stage;
    let l = p.level();
    let c = rec.center_lattice();
    let flags = cx.classify(&c, l);
    let mut words = vec![ColorWord::wildcard(l as usize)];
    for i in 1..=l {
        let f = flags[i as usize - 1];
        if !f.colored() {
            continue;
        }
        let choices: Vec<Color> = if i < j {
            vec![p.word.at(i).or(q.word.at(i)).unwrap_or(Color::Green)]
        } else if i == j {
            vec![Color::Green]
        } else {
            let den = cx.schedule.side_den(i - 1);
            let cc = cx.cell_index(&c, i - 1);
            let shares = |x: &LabeledPoint| x.word.at(i).filter(|_| cell_at(&x.base, den) == cc);
            match (shares(p), shares(q)) {
                (Some(a), Some(b)) if a != b => vec![a, b],
                (Some(a), _) | (None, Some(a)) => vec![a],
                (None, None) => vec![Color::Green],
            }
        };
        words = words
            .into_iter()
            .flat_map(|w| {
                choices.iter().map(move |&col| {
                    let mut w = w.clone();
                    w.set(i, Some(col));
                    w
                })
            })
            .collect();
    }
    let base = rec.center_f64();
    words
        .into_iter()
        .map(|w| {
            let mut a = w.clone();
            a.set(j, p.word.at(j));
            let mut b = w;
            b.set(j, q.word.at(j));
            (LabeledPoint::new(base, a), LabeledPoint::new(base, b))
        })
        .collect()
}

/// Distance between two points that disagree in color inside `rec`'s K region,
/// ignoring colors of deeper stages.
pub fn conflict_distance(rec: &DoublingRecord, x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let (lo, hi) = rec.k_bounds();
    let c = rec.center_f64();
    let via_jump = euclid(x, &c) + rec.jump_cost_f64() + euclid(&c, y);
    boundary_route(x, y, &lo, &hi).0.min(via_jump)
}

fn boundary_waypoint(p: &LabeledPoint, j: u32, z: [f64; 3]) -> LabeledPoint {
    let mut w = p.word.clone();
    for i in j..=p.level() {
        w.set(i, None);
    }
    LabeledPoint::new(z, w)
}

/// Chain distance between two labeled points of the same level.
///
/// At the outermost conflict the waypoint graph holds `p`, `q`, the best
/// touching point on each face of the K region and the jump endpoint pairs of
/// the record. Legs between waypoints are costed recursively; they only see
/// deeper conflicts. Every waypoint is exact, so `lower == upper` and the
/// result is certified; `delta` only needs to be a valid relative tolerance.
pub fn distance(cx: &ComplexDescription, p: &LabeledPoint, q: &LabeledPoint, delta: f64) -> Result<DistanceResult, Error> {
    if p.level() != q.level() {
        return Err(Error::LevelMismatch(p.level(), q.level()));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("relative tolerance must lie in [0,1), got {delta}")));
    }
    let (cost, tail) = chain(cx, p, q)?;
    let mut witness = vec![ChainStep { point: p.clone(), hop: HopKind::Start }];
    witness.extend(tail);
    Ok(DistanceResult { lower: cost, upper: cost, witness, certified: true })
}

/// Optimal chain from `p` to `q`, listed without its starting point.
fn chain(cx: &ComplexDescription, p: &LabeledPoint, q: &LabeledPoint) -> Result<(f64, Vec<ChainStep>), Error> {
    let Some(j) = first_conflict(cx, p, q) else {
        let tail = if p == q { vec![] } else { vec![ChainStep { point: q.clone(), hop: HopKind::Sheet }] };
        return Ok((euclid(&p.base, &q.base), tail));
    };
    let rec = cx
        .record_containing(j, &p.base)
        .ok_or_else(|| Error::Registry(format!("no stage-{j} record under a colored point")))?;
    let (lo, hi) = rec.k_bounds();
    let mut nodes: Vec<LabeledPoint> = vec![p.clone(), q.clone()];
    for (_, z) in face_minimizers(&p.base, &q.base, &lo, &hi) {
        nodes.push(boundary_waypoint(p, j, z));
    }
    let first_jump = nodes.len();
    for (a, b) in jump_variants(cx, &rec, p, q) {
        nodes.push(a);
        nodes.push(b);
    }
    let mut g: UnGraph<usize, (f64, HopKind)> = UnGraph::new_undirected();
    let ids: Vec<NodeIndex> = (0..nodes.len()).map(|i| g.add_node(i)).collect();
    let leg = |a: usize, b: usize| distance_value(cx, &nodes[a], &nodes[b]);
    for k in 2..first_jump {
        g.add_edge(ids[0], ids[k], (leg(0, k), HopKind::Sheet));
        g.add_edge(ids[k], ids[1], (leg(k, 1), HopKind::Sheet));
    }
    for k in (first_jump..nodes.len()).step_by(2) {
        g.add_edge(ids[0], ids[k], (leg(0, k), HopKind::Sheet));
        g.add_edge(ids[k], ids[k + 1], (rec.jump_cost_f64(), HopKind::Jump));
        g.add_edge(ids[k + 1], ids[1], (leg(k + 1, 1), HopKind::Sheet));
    }
    let (cost, path) = astar(&g, ids[0], |n| n == ids[1], |e| e.weight().0, |_| 0.0)
        .ok_or_else(|| Error::Registry("waypoint graph disconnected".into()))?;
    let mut tail = Vec::new();
    for w in path.windows(2) {
        let e = g.find_edge(w[0], w[1]).expect("path edge");
        let (a, b) = (&nodes[g[w[0]]], &nodes[g[w[1]]]);
        if g[e].1 == HopKind::Jump {
            tail.push(ChainStep { point: b.clone(), hop: HopKind::Jump });
        } else {
            tail.extend(chain(cx, a, b)?.1);
        }
    }
    Ok((cost, tail))
}

/// `lg(r)`: the integer with `slen(X_{lg(r)+1}) <= r < slen(X_{lg(r)})`.
pub fn discrete_log(r: f64, schedule: &LevelSchedule) -> Result<u32, Error> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("scale must lie in (0,1), got {r}")));
    }
    for j in 0..schedule.levels() {
        // slen(X_{j+1}) <= r  iff  r * den >= 1
        if floor_scaled_f64(r, schedule.side_den(j + 1)).0 >= 1 {
            return Ok(j);
        }
    }
    Err(Error::BelowResolution(r))
}

/// Exact-rational version of [`discrete_log`].
pub fn discrete_log_exact(r: Rational, schedule: &LevelSchedule) -> Result<u32, Error> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    if !(r > zero && r < one) {
        return Err(Error::InvalidParameter(format!("scale must lie in (0,1), got {r}")));
    }
    for j in 0..schedule.levels() {
        if schedule.side(j + 1) <= r {
            return Ok(j);
        }
    }
    Err(Error::BelowResolution(*r.numer() as f64 / *r.denom() as f64))
}
