//! Independent reference implementations used only by tests.
#![allow(dead_code)]

use diamond_core::color::{euclid, ColorWord, LabeledPoint};
use diamond_core::{LevelSchedule, Rational};
use num_traits::{One, Zero};

/// Axis-aligned cube with rational corner.
#[derive(Clone, Debug)]
pub struct BoxR {
    pub origin: [Rational; 3],
    pub side: Rational,
}

impl BoxR {
    pub fn contains_box(&self, o: &BoxR) -> bool {
        (0..3).all(|a| o.origin[a] >= self.origin[a] && o.origin[a] + o.side <= self.origin[a] + self.side)
    }
    pub fn strictly_contains(&self, p: &[Rational; 3]) -> bool {
        (0..3).all(|a| p[a] > self.origin[a] && p[a] < self.origin[a] + self.side)
    }
    pub fn middle_third(&self) -> BoxR {
        let t = self.side / Rational::from_integer(3);
        BoxR { origin: self.origin.map(|v| v + t), side: t }
    }
    pub fn subdivide(&self, m: u64) -> Vec<BoxR> {
        let s = self.side / Rational::from_integer(m as i128);
        let mut out = Vec::new();
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let d = [a, b, c];
                    out.push(BoxR {
                        origin: [0, 1, 2].map(|i| self.origin[i] + s * Rational::from_integer(d[i] as i128)),
                        side: s,
                    });
                }
            }
        }
        out
    }
    pub fn central_sub(&self, m: u64) -> BoxR {
        let s = self.side / Rational::from_integer(m as i128);
        let k = Rational::from_integer(((m - 1) / 2) as i128);
        BoxR { origin: self.origin.map(|v| v + s * k), side: s }
    }
}

/// Explicit registry: for each stage, the list of doubled base cubes, built by
/// literally tracking gate boxes.
pub struct ExplicitRegistry {
    pub records: Vec<Vec<BoxR>>,
    pub gates: Vec<Vec<BoxR>>,
}

pub fn explicit_registry(s: &LevelSchedule, l: u32) -> ExplicitRegistry {
    let unit = BoxR { origin: [Rational::zero(); 3], side: Rational::one() };
    let mut cells = vec![unit];
    let mut gates: Vec<BoxR> = Vec::new();
    let mut records = Vec::new();
    let mut gate_hist = Vec::new();
    for j in 1..=l {
        let e = s.stage(j);
        if e.block_start {
            gates.clear();
        }
        let rec: Vec<BoxR> = cells.iter().filter(|c| !gates.iter().any(|g| g.contains_box(c))).cloned().collect();
        for r in &rec {
            gates.push(r.central_sub(e.subdivision));
        }
        records.push(rec);
        gate_hist.push(gates.clone());
        cells = cells.iter().flat_map(|c| c.subdivide(e.subdivision)).collect();
    }
    ExplicitRegistry { records, gates: gate_hist }
}

impl ExplicitRegistry {
    pub fn colored(&self, p: &[Rational; 3]) -> Vec<bool> {
        self.records.iter().map(|rs| rs.iter().any(|r| r.middle_third().strictly_contains(p))).collect()
    }

    pub fn record_with_k(&self, j: u32, p: &[f64; 3]) -> Option<&BoxR> {
        self.records[j as usize - 1].iter().find(|r| {
            let k = r.middle_third();
            (0..3).all(|a| {
                let lo = to_f(&k.origin[a]);
                p[a] > lo && p[a] < lo + to_f(&k.side)
            })
        })
    }
}

pub fn to_f(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Per-stage identity of the explicit record whose open K holds the point.
pub fn record_keys(reg: &ExplicitRegistry, p: &LabeledPoint) -> Vec<Option<usize>> {
    (1..=p.level())
        .map(|j| {
            reg.records[j as usize - 1].iter().position(|r| {
                let k = r.middle_third();
                (0..3).all(|a| {
                    let lo = to_f(&k.origin[a]);
                    p.base[a] > lo && p.base[a] < lo + to_f(&k.side)
                })
            })
        })
        .collect()
}

/// Whether two labeled points lie on a common chromatic sheet.
pub fn compatible_keys(p: &LabeledPoint, kp: &[Option<usize>], q: &LabeledPoint, kq: &[Option<usize>]) -> bool {
    (0..kp.len()).all(|i| {
        let j = i as u32 + 1;
        match (p.word.at(j), q.word.at(j)) {
            (Some(a), Some(b)) if a != b => kp[i].is_none() || kp[i] != kq[i],
            _ => true,
        }
    })
}

pub fn compatible(reg: &ExplicitRegistry, p: &LabeledPoint, q: &LabeledPoint) -> bool {
    compatible_keys(p, &record_keys(reg, p), q, &record_keys(reg, q))
}

/// Points on the boundary of a cube at spacing `h`, all faces.
pub fn boundary_mesh(lo: [f64; 3], side: f64, per_edge: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    let h = side / per_edge as f64;
    for axis in 0..3 {
        let (b, e) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for plane in [lo[axis], lo[axis] + side] {
            for i in 0..=per_edge {
                for k in 0..=per_edge {
                    let mut z = [0.0; 3];
                    z[axis] = plane;
                    z[b] = lo[b] + h * i as f64;
                    z[e] = lo[e] + h * k as f64;
                    out.push(z);
                }
            }
        }
    }
    out
}

/// Shortest chain over an explicit node set: consecutive nodes must share a
/// sheet (cost = Euclidean) or form a jump pair (cost given).
pub fn brute_chain(
    reg: &ExplicitRegistry,
    nodes: &[LabeledPoint],
    jumps: &[(usize, usize, f64)],
    from: usize,
    to: usize,
) -> f64 {
    let n = nodes.len();
    let keys: Vec<_> = nodes.iter().map(|p| record_keys(reg, p)).collect();
    let mut jump_adj = vec![Vec::new(); n];
    for &(a, b, c) in jumps {
        jump_adj[a].push((b, c));
        jump_adj[b].push((a, c));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[from] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        for i in 0..n {
            if !done[i] && (u == usize::MAX || dist[i] < dist[u]) {
                u = i;
            }
        }
        if u == usize::MAX || dist[u].is_infinite() {
            break;
        }
        done[u] = true;
        for v in 0..n {
            if !done[v] && compatible_keys(&nodes[u], &keys[u], &nodes[v], &keys[v]) {
                let w = euclid(&nodes[u].base, &nodes[v].base);
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                }
            }
        }
        for &(v, c) in &jump_adj[u] {
            if dist[u] + c < dist[v] {
                dist[v] = dist[u] + c;
            }
        }
    }
    dist[to]
}

pub fn word(s: &str) -> ColorWord {
    s.parse().unwrap()
}
