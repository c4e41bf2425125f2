//! Fundamental configurations and good horizontal paths with jumps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::color::{euclid, Color, ColorWord, LabeledPoint};
use crate::complex::{ComplexDescription, DoublingRecord};
use crate::metric::{boundary_route, distance_value, first_conflict, jump_record, jump_variants, ChainStep, HopKind};
use crate::Error;

/// Upper end of the admissible resolution range.
pub const ADMISSIBLE_EPS_MAX: f64 = 1.0 / 400.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalConfiguration {
    pub center: LabeledPoint,
    pub r: f64,
    pub eps: f64,
    pub level: u32,
    /// `lg(ε² r)`, capped at the level.
    pub j0: u32,
    /// Grid coordinates per axis after clipping to `[0, 1]`.
    pub axis_values: [Vec<f64>; 3],
    /// Color choices at stages `1..=j0` of the sheets meeting the ball.
    pub sheets: Vec<Vec<Color>>,
    pub points: Vec<LabeledPoint>,
    /// `ε` lies in the admissible range `(0, 1/400)`.
    pub in_admissible_range: bool,
}

impl FundamentalConfiguration {
    pub fn grid_size(&self) -> usize {
        self.axis_values.iter().map(Vec::len).product()
    }

    /// `#grid × #sheets`, counting a base point once per sheet.
    pub fn formal_cardinality(&self) -> usize {
        self.grid_size() * self.sheets.len()
    }

    /// The configuration point over `base` on `sheet`.
    pub fn lift(&self, cx: &ComplexDescription, base: [f64; 3], sheet: &[Color]) -> LabeledPoint {
        let word = cx.resolve_word_with(&base, self.level, |j| {
            if j <= self.j0 {
                sheet[j as usize - 1]
            } else {
                Color::Green
            }
        });
        LabeledPoint::new(base, word)
    }

    /// Distance from `q` to the nearest configuration point, searching the
    /// grid nodes adjacent to `q` on every sheet.
    pub fn nearest_distance(&self, cx: &ComplexDescription, q: &LabeledPoint) -> f64 {
        let near: Vec<Vec<f64>> = (0..3)
            .map(|a| {
                let v = &self.axis_values[a];
                let i = v.partition_point(|&x| x < q.base[a]);
                v[i.saturating_sub(2)..(i + 2).min(v.len())].to_vec()
            })
            .collect();
        let mut best = f64::INFINITY;
        for &x in &near[0] {
            for &y in &near[1] {
                for &z in &near[2] {
                    for s in &self.sheets {
                        best = best.min(distance_value(cx, &self.lift(cx, [x, y, z], s), q));
                    }
                }
            }
        }
        best
    }
}

/// Smallest distance from `p` to any point carrying the colors of `sheet` at stages `1..=j0`.
fn sheet_gap(cx: &ComplexDescription, p: &LabeledPoint, sheet: &[Color]) -> f64 {
    let Some(j) = (1..=sheet.len() as u32).find(|&j| p.word.at(j).is_some_and(|c| c != sheet[j as usize - 1])) else {
        return 0.0;
    };
    let rec = cx.record_containing(j, &p.base).expect("colored stage has a record");
    let (lo, hi) = rec.k_bounds();
    let x = p.base;
    let to_boundary = (0..3).map(|a| (x[a] - lo[a]).min(hi[a] - x[a])).fold(f64::INFINITY, f64::min);
    to_boundary.min(euclid(&x, &rec.center_f64()) + rec.jump_cost_f64())
}

/// Build the fundamental `(ε, r)`-configuration at `p`.
pub fn build_configuration(cx: &ComplexDescription, p: &LabeledPoint, r: f64, eps: f64) -> Result<FundamentalConfiguration, Error> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("resolution must lie in (0,1), got {eps}")));
    }
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::InvalidParameter(format!("scale must lie in (0,1/2), got {r}")));
    }
    let l = p.level();
    let step = eps * eps * r;
    let j0 = match crate::metric::discrete_log(step, &cx.schedule) {
        Ok(j) => j.min(l),
        Err(Error::BelowResolution(_)) => l,
        Err(e) => return Err(e),
    };
    let count = (1.0 / (eps * eps)).ceil() as usize;
    let axis_values = [0, 1, 2].map(|a| {
        let mut v: Vec<f64> = (1..=count)
            .flat_map(|k| [p.base[a] - k as f64 * step, p.base[a] + k as f64 * step])
            .map(|x| x.clamp(0.0, 1.0))
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    });
    let mut sheets = Vec::new();
    for bits in 0u64..(1 << j0) {
        let s: Vec<Color> = (0..j0).map(|i| if (bits >> i) & 1 == 1 { Color::Red } else { Color::Green }).collect();
        if sheet_gap(cx, p, &s) <= r {
            sheets.push(s);
        }
    }
    let mut cfg = FundamentalConfiguration {
        center: p.clone(),
        r,
        eps,
        level: l,
        j0,
        axis_values,
        sheets,
        points: Vec::new(),
        in_admissible_range: eps < ADMISSIBLE_EPS_MAX,
    };
    let mut uniq: BTreeMap<([u64; 3], ColorWord), LabeledPoint> = BTreeMap::new();
    for &x in &cfg.axis_values[0] {
        for &y in &cfg.axis_values[1] {
            for &z in &cfg.axis_values[2] {
                for s in &cfg.sheets {
                    let q = cfg.lift(cx, [x, y, z], s);
                    uniq.entry((q.base.map(f64::to_bits), q.word.clone())).or_insert(q);
                }
            }
        }
    }
    cfg.points = uniq.into_values().collect();
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizontalSegment {
    pub start: LabeledPoint,
    pub end: LabeledPoint,
    pub axis: usize,
    pub length: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HorizontalPath {
    pub segments: Vec<HorizontalSegment>,
}

impl HorizontalPath {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpHop {
    pub from: LabeledPoint,
    pub to: LabeledPoint,
    pub record: DoublingRecord,
    pub cost: f64,
}

/// Alternating horizontal paths and jumps: `pieces.len() == jumps.len() + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpPath {
    pub start: LabeledPoint,
    pub end: LabeledPoint,
    pub pieces: Vec<HorizontalPath>,
    pub jumps: Vec<JumpHop>,
}

impl JumpPath {
    pub fn length(&self) -> f64 {
        self.pieces.iter().map(HorizontalPath::length).sum::<f64>() + self.jumps.iter().map(|j| j.cost).sum::<f64>()
    }

    pub fn segments(&self) -> impl Iterator<Item = &HorizontalSegment> {
        self.pieces.iter().flat_map(|p| p.segments.iter())
    }

    pub fn segment_count(&self) -> usize {
        self.pieces.iter().map(|p| p.segments.len()).sum()
    }

    pub fn is_horizontal(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Points visited in order, tagged with the hop that reached them.
    pub fn polyline(&self) -> Vec<ChainStep> {
        let mut out = vec![ChainStep { point: self.start.clone(), hop: HopKind::Start }];
        for (i, piece) in self.pieces.iter().enumerate() {
            for s in &piece.segments {
                out.push(ChainStep { point: s.end.clone(), hop: HopKind::Sheet });
            }
            if let Some(j) = self.jumps.get(i) {
                out.push(ChainStep { point: j.to.clone(), hop: HopKind::Jump });
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.polyline()).expect("polyline serializes")
    }

    /// Image under the projection to level `l`; jumps of deeper stages become
    /// trivial and are dropped.
    pub fn project(&self, l: u32) -> JumpPath {
        let proj_seg = |s: &HorizontalSegment| HorizontalSegment {
            start: s.start.project(l),
            end: s.end.project(l),
            axis: s.axis,
            length: s.length,
        };
        let mut pieces = vec![HorizontalPath::default()];
        let mut jumps = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            pieces.last_mut().unwrap().segments.extend(piece.segments.iter().map(proj_seg));
            if let Some(j) = self.jumps.get(i) {
                if j.record.stage <= l {
                    jumps.push(JumpHop { from: j.from.project(l), to: j.to.project(l), record: j.record.clone(), cost: j.cost });
                    pieces.push(HorizontalPath::default());
                }
            }
        }
        JumpPath { start: self.start.project(l), end: self.end.project(l), pieces, jumps }
    }
}

/// Word for a path vertex: copy the color of `a` (then `b`) where it shares
/// the K region, green elsewhere.
fn vertex_word(cx: &ComplexDescription, v: &[f64; 3], a: &LabeledPoint, b: &LabeledPoint) -> ColorWord {
    let l = a.level();
    let flags = cx.classify(v, l);
    let mut w = ColorWord::wildcard(l as usize);
    for j in 1..=l {
        if !flags[j as usize - 1].colored() {
            continue;
        }
        let vc = cx.cell_index(v, j - 1);
        let pick = [a, b]
            .into_iter()
            .find_map(|x| x.word.at(j).filter(|_| cx.cell_index(&x.base, j - 1) == vc))
            .unwrap_or(Color::Green);
        w.set(j, Some(pick));
    }
    w
}

/// Axis-parallel path `a -> b`, moving along x, then y, then z, skipping
/// zero-length moves.
fn axis_path(cx: &ComplexDescription, a: &LabeledPoint, b: &LabeledPoint) -> HorizontalPath {
    let mut segs = Vec::new();
    let mut cur = a.clone();
    for axis in 0..3 {
        if cur.base[axis] == b.base[axis] {
            continue;
        }
        let mut nb = cur.base;
        nb[axis] = b.base[axis];
        let next = if nb == b.base {
            b.clone()
        } else {
            LabeledPoint::new(nb, vertex_word(cx, &nb, a, b))
        };
        segs.push(HorizontalSegment { length: (nb[axis] - cur.base[axis]).abs(), start: cur, end: next.clone(), axis });
        cur = next;
    }
    if segs.is_empty() && a != b {
        // same base, different but compatible words: a degenerate move
        segs.push(HorizontalSegment { start: a.clone(), end: b.clone(), axis: 0, length: 0.0 });
    }
    HorizontalPath { segments: segs }
}

fn boundary_point(p: &LabeledPoint, j: u32, z: [f64; 3]) -> LabeledPoint {
    let mut w = p.word.clone();
    for i in j..=p.level() {
        w.set(i, None);
    }
    LabeledPoint::new(z, w)
}

/// Horizontal path between two points, crossing K boundaries where their
/// colors disagree.
fn horizontal_leg(cx: &ComplexDescription, a: &LabeledPoint, b: &LabeledPoint, depth: u32) -> Result<HorizontalPath, Error> {
    let Some(j) = first_conflict(cx, a, b) else {
        return Ok(axis_path(cx, a, b));
    };
    if depth > a.level() {
        return Err(Error::Registry("horizontal leg recursion did not terminate".into()));
    }
    let rec = cx.record_containing(j, &a.base).ok_or_else(|| Error::Registry("conflict without record".into()))?;
    let (lo, hi) = rec.k_bounds();
    let (_, z) = boundary_route(&a.base, &b.base, &lo, &hi);
    let zp = boundary_point(a, j, z);
    let mut first = horizontal_leg(cx, a, &zp, depth + 1)?;
    let second = horizontal_leg(cx, &zp, b, depth + 1)?;
    first.segments.extend(second.segments);
    Ok(first)
}

/// A good path from `p` to `q`: a lifted base path when they share a sheet,
/// a route through the K boundary when it costs at most 8 times the
/// distance, and a route through the jump pair otherwise.
pub fn good_path(cx: &ComplexDescription, p: &LabeledPoint, q: &LabeledPoint) -> Result<JumpPath, Error> {
    if p.level() != q.level() {
        return Err(Error::LevelMismatch(p.level(), q.level()));
    }
    let Some(j) = first_conflict(cx, p, q) else {
        return Ok(JumpPath { start: p.clone(), end: q.clone(), pieces: vec![axis_path(cx, p, q)], jumps: vec![] });
    };
    let rec = cx.record_containing(j, &p.base).ok_or_else(|| Error::Registry("conflict without record".into()))?;
    let d = distance_value(cx, p, q);
    let (lo, hi) = rec.k_bounds();
    let (via_boundary, z) = boundary_route(&p.base, &q.base, &lo, &hi);
    if via_boundary <= 8.0 * d {
        let zp = boundary_point(p, j, z);
        let mut path = axis_path(cx, p, &zp);
        path.segments.extend(axis_path(cx, &zp, q).segments);
        return Ok(JumpPath { start: p.clone(), end: q.clone(), pieces: vec![path], jumps: vec![] });
    }
    let (cp, cq) = jump_variants(cx, &rec, p, q)
        .into_iter()
        .min_by(|a, b| {
            let ca = distance_value(cx, p, &a.0) + distance_value(cx, &a.1, q);
            let cb = distance_value(cx, p, &b.0) + distance_value(cx, &b.1, q);
            ca.total_cmp(&cb)
        })
        .ok_or_else(|| Error::Registry("record without jump pair".into()))?;
    let minus = horizontal_leg(cx, p, &cp, 0)?;
    let plus = horizontal_leg(cx, &cq, q, 0)?;
    let hop = JumpHop { cost: rec.jump_cost_f64(), from: cp, to: cq, record: rec };
    Ok(JumpPath { start: p.clone(), end: q.clone(), pieces: vec![minus, plus], jumps: vec![hop] })
}

/// Structural audit of a path against the good-path conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathAudit {
    pub endpoints_ok: bool,
    pub chained: bool,
    pub axis_parallel: bool,
    pub segments_on_sheets: bool,
    pub jumps_valid: bool,
    pub jump_count: usize,
    pub segment_count: usize,
    pub short_segments: usize,
    pub length: f64,
    pub distance: f64,
    /// `length / distance` (1 for coincident endpoints).
    pub stretch: f64,
}

impl PathAudit {
    /// All structural conditions, with the stretch compared against `c`.
    pub fn good(&self, c: f64) -> bool {
        self.endpoints_ok
            && self.chained
            && self.axis_parallel
            && self.segments_on_sheets
            && self.jumps_valid
            && self.jump_count <= 1
            && self.segment_count <= 15
            && self.short_segments <= 10
            && self.stretch <= c
            && self.length >= self.distance - 1e-12
    }
}

pub fn audit_path(cx: &ComplexDescription, path: &JumpPath, p: &LabeledPoint, q: &LabeledPoint, eps: f64, r: f64) -> PathAudit {
    let short = eps.powi(3) * r / 400.0;
    let mut pts: Vec<(&LabeledPoint, &LabeledPoint, bool)> = Vec::new();
    for (i, piece) in path.pieces.iter().enumerate() {
        for s in &piece.segments {
            pts.push((&s.start, &s.end, false));
        }
        if let Some(j) = path.jumps.get(i) {
            pts.push((&j.from, &j.to, true));
        }
    }
    let mut chained = true;
    let mut cur = &path.start;
    for (a, b, _) in &pts {
        chained &= *a == cur;
        cur = b;
    }
    chained &= cur == &path.end;
    let axis_parallel = path.segments().all(|s| {
        let moved: Vec<usize> = (0..3).filter(|&a| s.start.base[a] != s.end.base[a]).collect();
        moved.is_empty() || (moved == vec![s.axis] && (s.length - (s.end.base[s.axis] - s.start.base[s.axis]).abs()).abs() <= 1e-15)
    });
    let segments_on_sheets = path.segments().all(|s| first_conflict(cx, &s.start, &s.end).is_none());
    let jumps_valid = path.jumps.iter().all(|j| {
        jump_record(cx, &j.from, &j.to).is_some_and(|r| r == j.record) && j.cost == j.record.jump_cost_f64()
    });
    let distance = distance_value(cx, p, q);
    let length = path.length();
    PathAudit {
        endpoints_ok: &path.start == p && &path.end == q,
        chained,
        axis_parallel,
        segments_on_sheets,
        jumps_valid,
        jump_count: path.jumps.len(),
        segment_count: path.segment_count(),
        short_segments: path.segments().filter(|s| s.length < short).count(),
        length,
        distance,
        stretch: if distance > 0.0 { length / distance } else if length == 0.0 { 1.0 } else { f64::INFINITY },
    }
}

/// Whether every base coordinate of `p` sits on the configuration grid.
pub fn on_grid(cfg: &FundamentalConfiguration, p: &LabeledPoint) -> bool {
    (0..3).all(|a| cfg.axis_values[a].binary_search_by(|v| v.total_cmp(&p.base[a])).is_ok())
}
