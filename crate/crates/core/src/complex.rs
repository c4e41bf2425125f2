//! The complex `X_l` as an implicit registry of doubled cubes.
//!
//! Cells of `X_{j-1}` are indexed by integer triples at resolution
//! `1/slen(X_{j-1})`. Whether a cell is doubled at stage `j` depends only on
//! its ancestry: the first stage of a block doubles every cell, later stages
//! double every cell that is not inside a gate created earlier in the block.

use serde::{Deserialize, Serialize};

use crate::color::{Color, ColorWord, LabeledPoint};
use crate::exact::{ExactCoords, LatticePoint};
use crate::schedule::{LevelSchedule, Rational};
use crate::Error;

/// Largest number of cells an enumeration may visit.
pub const DEFAULT_CELL_CAP: u128 = 20_000_000;

/// Per-stage facts about a point or a cell interior.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageFlags {
    /// The stage-`(j-1)` cell holding the point is doubled at stage `j`.
    pub doubled: bool,
    /// The point lies in a gate of `X_j`.
    pub in_gate: bool,
    /// The point is strictly inside the middle-third cube of its stage-`(j-1)` cell.
    pub inside_k: bool,
}

impl StageFlags {
    /// The point carries a color at this stage.
    pub fn colored(&self) -> bool {
        self.doubled && self.inside_k
    }
}

/// Tracks gate membership stage by stage.
#[derive(Clone, Copy, Debug, Default)]
pub struct GateTracker {
    in_gate: bool,
}

impl GateTracker {
    /// Advance one stage. `central` says the point sits in the central stage-`j`
    /// subcell of its stage-`(j-1)` cell. Returns `(doubled, in_gate)`.
    pub fn step(&mut self, block_start: bool, central: bool) -> (bool, bool) {
        let doubled = block_start || !self.in_gate;
        self.in_gate = (doubled && central) || (!block_start && self.in_gate);
        (doubled, self.in_gate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingRecord {
    pub stage: u32,
    pub block: u32,
    pub n: u64,
    pub subdivision: u64,
    /// Index of the base cube at resolution `1/slen(X_{stage-1})`.
    pub cell: [u128; 3],
    pub cell_den: u128,
    pub base_origin: [Rational; 3],
    pub base_side: Rational,
    pub k_origin: [Rational; 3],
    pub k_side: Rational,
    pub gate_origin: [Rational; 3],
    pub gate_side: Rational,
    pub center: [Rational; 3],
    pub jump_cost: Rational,
}

fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl DoublingRecord {
    fn new(schedule: &LevelSchedule, j: u32, cell: [u128; 3]) -> Self {
        let e = schedule.stage(j);
        let den = schedule.side_den(j - 1);
        let m = e.subdivision as u128;
        let d = den as i128;
        let base_side = Rational::new(1, d);
        let base_origin = cell.map(|a| Rational::new(a as i128, d));
        let k_side = Rational::new(1, 3 * d);
        let k_origin = cell.map(|a| Rational::new(3 * a as i128 + 1, 3 * d));
        let gden = (den * m) as i128;
        let gate_side = Rational::new(1, gden);
        let gate_origin = cell.map(|a| Rational::new((a * m + (m - 1) / 2) as i128, gden));
        let center = cell.map(|a| Rational::new(2 * a as i128 + 1, 2 * d));
        DoublingRecord {
            stage: j,
            block: e.block,
            n: e.n,
            subdivision: e.subdivision,
            cell,
            cell_den: den,
            base_origin,
            base_side,
            k_origin,
            k_side,
            gate_origin,
            gate_side,
            center,
            jump_cost: schedule.jump_cost(j),
        }
    }

    pub fn base_side_f64(&self) -> f64 {
        to_f64(&self.base_side)
    }

    pub fn jump_cost_f64(&self) -> f64 {
        to_f64(&self.jump_cost)
    }

    pub fn center_f64(&self) -> [f64; 3] {
        self.center.each_ref().map(to_f64)
    }

    pub fn center_lattice(&self) -> LatticePoint {
        LatticePoint::new(self.cell.map(|a| 2 * a + 1), 2 * self.cell_den)
    }

    /// Corners `(lo, hi)` of the middle-third cube K.
    pub fn k_bounds(&self) -> ([f64; 3], [f64; 3]) {
        let lo = self.k_origin.each_ref().map(to_f64);
        let s = to_f64(&self.k_side);
        (lo, lo.map(|v| v + s))
    }

    /// Corners `(lo, hi)` of the gate cell.
    pub fn gate_bounds(&self) -> ([f64; 3], [f64; 3]) {
        let lo = self.gate_origin.each_ref().map(to_f64);
        let s = to_f64(&self.gate_side);
        (lo, lo.map(|v| v + s))
    }

    pub fn base_bounds(&self) -> ([f64; 3], [f64; 3]) {
        let lo = self.base_origin.each_ref().map(to_f64);
        let s = to_f64(&self.base_side);
        (lo, lo.map(|v| v + s))
    }

    /// Euclidean diameter of the base cube.
    pub fn diameter(&self) -> f64 {
        3f64.sqrt() * self.base_side_f64()
    }
}

/// A cell of `X_d` together with the flags of its interior at stages `1..=d`.
#[derive(Clone, Debug)]
pub struct CellInfo {
    pub depth: u32,
    pub cell: [u128; 3],
    pub flags: Vec<StageFlags>,
}

impl CellInfo {
    /// Number of stages at which the cell interior carries a color.
    pub fn colored_stages(&self) -> Vec<u32> {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, f)| f.colored())
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexDescription {
    pub schedule: LevelSchedule,
    pub level: u32,
    /// Number of doubled base cubes at each stage `1..=level`.
    pub record_counts: Vec<u128>,
    /// Number of gate cells of `X_j` (by base cube) for `j = 1..=level`.
    pub gate_counts: Vec<u128>,
}

pub fn build_complex(schedule: &LevelSchedule, l: u32) -> Result<ComplexDescription, Error> {
    if l > schedule.levels() {
        return Err(Error::InvalidParameter(format!(
            "level {l} exceeds schedule depth {}",
            schedule.levels()
        )));
    }
    let mut record_counts = Vec::with_capacity(l as usize);
    let mut gate_counts = Vec::with_capacity(l as usize);
    let mut cells: u128 = 1;
    let mut gates: u128 = 0;
    for j in 1..=l {
        let e = schedule.stage(j);
        let doubled = if e.block_start { cells } else { cells - gates };
        let m3 = (e.subdivision as u128).pow(3);
        gates = doubled + if e.block_start { 0 } else { gates * m3 };
        cells *= m3;
        record_counts.push(doubled);
        gate_counts.push(gates);
    }
    Ok(ComplexDescription { schedule: schedule.clone(), level: l, record_counts, gate_counts })
}

impl ComplexDescription {
    pub fn side(&self, j: u32) -> f64 {
        self.schedule.side_f64(j)
    }

    /// Stage-by-stage flags of a point for stages `1..=upto`.
    pub fn classify<P: ExactCoords>(&self, p: &P, upto: u32) -> Vec<StageFlags> {
        let mut out = Vec::with_capacity(upto as usize);
        let mut tracker = GateTracker::default();
        for j in 1..=upto {
            let e = self.schedule.stage(j);
            let prev = self.schedule.side_den(j - 1);
            let m = e.subdivision as u128;
            let mut inside_k = true;
            let mut central = true;
            for axis in 0..3 {
                let (t, ex) = p.floor_scaled(axis, 3 * prev);
                inside_k &= t % 3 == 1 && !ex;
                let (d, exd) = p.floor_scaled(axis, prev * m);
                central &= d % m == (m - 1) / 2 && !exd;
            }
            let (doubled, in_gate) = tracker.step(e.block_start, central);
            out.push(StageFlags { doubled, in_gate, inside_k });
        }
        out
    }

    /// Index of the cell of `X_j` whose closure holds `p` (lower cell on ties).
    pub fn cell_index<P: ExactCoords>(&self, p: &P, j: u32) -> [u128; 3] {
        let den = self.schedule.side_den(j);
        [0, 1, 2].map(|a| p.floor_scaled(a, den).0.min(den - 1))
    }

    /// Word of a point at level `l`, choosing colors with `choice(stage)`.
    pub fn resolve_word_with<P: ExactCoords>(&self, p: &P, l: u32, mut choice: impl FnMut(u32) -> Color) -> ColorWord {
        let flags = self.classify(p, l);
        ColorWord(
            flags
                .iter()
                .enumerate()
                .map(|(i, f)| f.colored().then(|| choice(i as u32 + 1)))
                .collect(),
        )
    }

    /// Labeled point with every non-wildcard stage set to `color`.
    pub fn resolve_word(&self, base: [f64; 3], l: u32, color: Color) -> LabeledPoint {
        LabeledPoint::new(base, self.resolve_word_with(&base, l, |_| color))
    }

    /// Wildcard pattern of the word agrees with a fresh membership test.
    pub fn is_canonical(&self, p: &LabeledPoint) -> bool {
        if p.level() > self.level || p.base.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return false;
        }
        let flags = self.classify(&p.base, p.level());
        flags.iter().zip(&p.word.0).all(|(f, c)| f.colored() == c.is_some())
    }

    /// Record whose base cube is the stage-`(j-1)` cell `cell`, if that cell is doubled.
    pub fn record_for_cell(&self, j: u32, cell: [u128; 3]) -> Option<DoublingRecord> {
        let den = self.schedule.side_den(j - 1);
        let center = LatticePoint::new(cell.map(|a| 2 * a + 1), 2 * den);
        let flags = self.classify(&center, j);
        flags[j as usize - 1].doubled.then(|| DoublingRecord::new(&self.schedule, j, cell))
    }

    /// Record of stage `j` whose open K region holds `p`.
    pub fn record_containing<P: ExactCoords>(&self, j: u32, p: &P) -> Option<DoublingRecord> {
        let flags = self.classify(p, j);
        if !flags[j as usize - 1].colored() {
            return None;
        }
        Some(DoublingRecord::new(&self.schedule, j, self.cell_index(p, j - 1)))
    }

    /// Visit every cell of `X_depth` in lexicographic order of its index path.
    pub fn for_each_cell(&self, depth: u32, cap: u128, mut f: impl FnMut(&CellInfo)) -> Result<(), Error> {
        let total = self.schedule.side_den(depth).pow(3);
        if total > cap {
            return Err(Error::Budget(format!("{total} cells at depth {depth} exceed cap {cap}")));
        }
        let mut info = CellInfo { depth: 0, cell: [0; 3], flags: Vec::new() };
        self.visit(&mut info, depth, GateTracker::default(), &mut f);
        Ok(())
    }

    fn visit(&self, info: &mut CellInfo, depth: u32, tracker: GateTracker, f: &mut impl FnMut(&CellInfo)) {
        if info.depth == depth {
            f(info);
            return;
        }
        let j = info.depth + 1;
        let e = self.schedule.stage(j);
        let m = e.subdivision as u128;
        let third = m / 3;
        let parent = info.cell;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let digits = [a, b, c];
                    let inside_k = digits.iter().all(|&d| d / third == 1);
                    let central = digits.iter().all(|&d| d == (m - 1) / 2);
                    let mut t = tracker;
                    let (doubled, in_gate) = t.step(e.block_start, central);
                    info.cell = [0, 1, 2].map(|i| parent[i] * m + digits[i]);
                    info.depth = j;
                    info.flags.push(StageFlags { doubled, in_gate, inside_k });
                    self.visit(info, depth, t, f);
                    info.flags.pop();
                    info.depth = j - 1;
                }
            }
        }
        info.cell = parent;
    }

    /// All records of stage `j` (one per base cube, copies not expanded).
    pub fn records_at_stage(&self, j: u32, cap: u128) -> Result<Vec<(DoublingRecord, CellInfo)>, Error> {
        let mut out = Vec::new();
        self.for_each_cell(j - 1, cap, |ci| {
            let in_gate = ci.flags.last().is_some_and(|f| f.in_gate);
            let doubled = self.schedule.stage(j).block_start || !in_gate;
            if doubled {
                out.push((DoublingRecord::new(&self.schedule, j, ci.cell), ci.clone()));
            }
        })?;
        Ok(out)
    }

    pub fn record_count(&self, j: u32) -> u128 {
        self.record_counts[j as usize - 1]
    }

    /// Word of the exactly located point `p`, copying colors from `template`
    /// wherever both sit in the same K region and defaulting to green elsewhere.
    pub fn lift_like<P: ExactCoords>(&self, p: &P, template: &LabeledPoint) -> ColorWord {
        let l = template.level();
        let fp = self.classify(p, l);
        let mut word = ColorWord::wildcard(l as usize);
        for j in 1..=l {
            if !fp[j as usize - 1].colored() {
                continue;
            }
            let same = template.word.at(j).is_some()
                && self.cell_index(p, j - 1) == self.cell_index(&template.base, j - 1);
            word.set(j, Some(if same { template.word.at(j).unwrap() } else { Color::Green }));
        }
        word
    }

    /// The two jump endpoints of `rec`, matching `template` away from the record's stage.
    pub fn jump_endpoints(&self, rec: &DoublingRecord, template: &LabeledPoint) -> (LabeledPoint, LabeledPoint) {
        let c = rec.center_lattice();
        let mut w = self.lift_like(&c, template);
        w.set(rec.stage, Some(Color::Green));
        let green = LabeledPoint::new(rec.center_f64(), w.clone());
        w.set(rec.stage, Some(Color::Red));
        (green, LabeledPoint::new(rec.center_f64(), w))
    }
}
