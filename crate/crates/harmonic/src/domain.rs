//! Voxel domains with copies, and scalar or vector fields on their nodes.
//!
//! A domain is a box of `n³` voxels of side `h`. Each voxel slot holds zero,
//! one or two copies, each with a measure weight. Nodes are keyed by grid
//! position and copy: a corner of a copied voxel belongs to that copy unless
//! some uncopied voxel touches it, in which case it is shared. This glues the
//! two copies of a doubled region along its boundary.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::solver::{solve_components, Network, SolveStats};
use crate::HarmonicError;

/// Copy tag of the shared (undoubled) part.
pub const SHARED: u8 = 0;
pub const GREEN: u8 = 1;
pub const RED: u8 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DomainShape {
    Cube,
    /// Cube with the voxel box `[lo, hi)` removed.
    Annulus { lo: [u32; 3], hi: [u32; 3] },
    /// Cube whose voxel box `[lo, hi)` is present in a green and a red copy.
    Doubled { lo: [u32; 3], hi: [u32; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainDescriptor {
    pub shape: DomainShape,
    pub origin: [f64; 3],
    pub side: f64,
    /// Voxels per axis.
    pub n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeKey {
    pub at: [u32; 3],
    pub copy: u8,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Voxel {
    pub at: [u32; 3],
    pub copy: u8,
    pub weight: f64,
    /// Corner `bx + 2 by + 4 bz`.
    pub corners: [u32; 8],
}

#[derive(Clone, Debug)]
pub struct VoxelDomain {
    pub descriptor: DomainDescriptor,
    pub h: f64,
    pub voxels: Vec<Voxel>,
    pub nodes: Vec<NodeKey>,
    index: HashMap<NodeKey, u32>,
}

fn inside(at: [u32; 3], lo: [u32; 3], hi: [u32; 3]) -> bool {
    (0..3).all(|a| at[a] >= lo[a] && at[a] < hi[a])
}

impl VoxelDomain {
    pub fn new(descriptor: DomainDescriptor) -> Self {
        let n = descriptor.n;
        let layout = |v: [u32; 3]| -> Vec<(u8, f64)> {
            match &descriptor.shape {
                DomainShape::Cube => vec![(SHARED, 1.0)],
                DomainShape::Annulus { lo, hi } if inside(v, *lo, *hi) => vec![],
                DomainShape::Annulus { .. } => vec![(SHARED, 1.0)],
                DomainShape::Doubled { lo, hi } if inside(v, *lo, *hi) => vec![(GREEN, 0.5), (RED, 0.5)],
                DomainShape::Doubled { .. } => vec![(SHARED, 1.0)],
            }
        };
        let has_shared = |x: [u32; 3]| {
            (0..8u32).any(|b| {
                let mut v = [0u32; 3];
                for a in 0..3 {
                    let d = (b >> a) & 1;
                    if x[a] < d || x[a] - d >= n {
                        return false;
                    }
                    v[a] = x[a] - d;
                }
                layout(v).iter().any(|&(c, _)| c == SHARED)
            })
        };
        let mut index = HashMap::new();
        let mut nodes = Vec::new();
        let mut voxels = Vec::new();
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let at = [x, y, z];
                    for (copy, weight) in layout(at) {
                        let mut corners = [0u32; 8];
                        for (b, c) in corners.iter_mut().enumerate() {
                            let p = [x + (b as u32 & 1), y + ((b as u32 >> 1) & 1), z + ((b as u32 >> 2) & 1)];
                            let key = NodeKey { at: p, copy: if copy == SHARED || has_shared(p) { SHARED } else { copy } };
                            *c = *index.entry(key).or_insert_with(|| {
                                nodes.push(key);
                                (nodes.len() - 1) as u32
                            });
                        }
                        voxels.push(Voxel { at, copy, weight, corners });
                    }
                }
            }
        }
        let h = descriptor.side / n as f64;
        VoxelDomain { descriptor, h, voxels, nodes, index }
    }

    pub fn cube(origin: [f64; 3], side: f64, n: u32) -> Self {
        Self::new(DomainDescriptor { shape: DomainShape::Cube, origin, side, n })
    }

    pub fn node(&self, key: NodeKey) -> Option<u32> {
        self.index.get(&key).copied()
    }

    /// Base position of a node, computed as `origin + side * i / n`.
    pub fn position(&self, node: u32) -> [f64; 3] {
        let d = &self.descriptor;
        let at = self.nodes[node as usize].at;
        [0, 1, 2].map(|a| d.origin[a] + d.side * at[a] as f64 / d.n as f64)
    }

    /// Measure of the domain: `Σ weight h³`.
    pub fn volume(&self) -> f64 {
        self.voxels.iter().map(|v| v.weight).sum::<f64>() * self.h.powi(3)
    }

    /// Nodes on the outer surface of the box.
    pub fn on_outer_boundary(&self, node: u32) -> bool {
        let at = self.nodes[node as usize].at;
        at.iter().any(|&x| x == 0 || x == self.descriptor.n)
    }

    /// Nodes on the surface of the closed node box `[lo, hi]`.
    pub fn on_box_surface(&self, node: u32, lo: [u32; 3], hi: [u32; 3]) -> bool {
        let at = self.nodes[node as usize].at;
        (0..3).all(|a| at[a] >= lo[a] && at[a] <= hi[a]) && (0..3).any(|a| at[a] == lo[a] || at[a] == hi[a])
    }

    /// Edge network of the voxel energy `Σ_v w_v (h/4) Σ_{edges of v} Δu²`.
    pub fn network(&self) -> Network {
        let scale = self.h / 4.0;
        let mut edges: Vec<(u32, u32, f64)> = Vec::with_capacity(self.voxels.len() * 12);
        for v in &self.voxels {
            for b in 0..8usize {
                for a in 0..3 {
                    if b & (1 << a) == 0 {
                        let (p, q) = (v.corners[b], v.corners[b | (1 << a)]);
                        edges.push((p.min(q), p.max(q), v.weight * scale));
                    }
                }
            }
        }
        edges.par_sort_unstable_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(edges.len() / 3);
        for e in edges {
            match merged.last_mut() {
                Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 += e.2,
                _ => merged.push(e),
            }
        }
        Network { nodes: self.nodes.len(), edges: merged }
    }
}

/// Node values of `components` scalar fields on a domain.
#[derive(Clone, Debug)]
pub struct GridField {
    pub domain: Arc<VoxelDomain>,
    pub fixed: Vec<bool>,
    /// `values[c][node]`.
    pub values: Vec<Vec<f64>>,
    pub stats: Option<SolveStats>,
}

impl GridField {
    pub fn components(&self) -> usize {
        self.values.len()
    }

    /// Field given at every node by `f`.
    pub fn from_fn(domain: Arc<VoxelDomain>, m: usize, f: impl Fn(u32) -> Vec<f64> + Sync) -> Self {
        let per_node: Vec<Vec<f64>> = (0..domain.nodes.len() as u32).into_par_iter().map(&f).collect();
        let values = (0..m).map(|c| per_node.iter().map(|v| v[c]).collect()).collect();
        let fixed = vec![true; domain.nodes.len()];
        GridField { domain, fixed, values, stats: None }
    }

    /// Copy values onto another domain with the same grid, matching nodes by
    /// position and copy and falling back to the shared node.
    pub fn pull_back(&self, target: Arc<VoxelDomain>) -> GridField {
        let src = &self.domain;
        let values = self
            .values
            .iter()
            .map(|vals| {
                target
                    .nodes
                    .iter()
                    .map(|k| {
                        let i = src.node(*k).or_else(|| src.node(NodeKey { at: k.at, copy: SHARED })).expect("grids must match");
                        vals[i as usize]
                    })
                    .collect()
            })
            .collect();
        let fixed = vec![false; target.nodes.len()];
        GridField { domain: target, fixed, values, stats: self.stats }
    }

    /// Largest value norm over all nodes and over fixed nodes.
    pub fn max_norms(&self) -> (f64, f64) {
        let norm = |i: usize| self.values.iter().map(|v| v[i] * v[i]).sum::<f64>().sqrt();
        let mut all: f64 = 0.0;
        let mut bnd: f64 = 0.0;
        for i in 0..self.domain.nodes.len() {
            let v = norm(i);
            all = all.max(v);
            if self.fixed[i] {
                bnd = bnd.max(v);
            }
        }
        (all, bnd)
    }
}

/// Harmonic extension of the values `boundary(node)` prescribed where `fixed`
/// holds; vector data is solved componentwise.
pub fn solve_dirichlet(
    domain: Arc<VoxelDomain>,
    fixed: Vec<bool>,
    m: usize,
    boundary: impl Fn(u32) -> Vec<f64> + Sync,
    tol: f64,
    max_iter: usize,
) -> Result<GridField, HarmonicError> {
    let nn = domain.nodes.len();
    let data: Vec<Option<Vec<f64>>> =
        (0..nn as u32).into_par_iter().map(|i| fixed[i as usize].then(|| boundary(i))).collect();
    let mut values = vec![vec![0.0; nn]; m];
    for (i, d) in data.iter().enumerate() {
        if let Some(d) = d {
            if d.len() != m {
                return Err(HarmonicError::Dimension { expected: m, got: d.len() });
            }
            for c in 0..m {
                values[c][i] = d[c];
            }
        }
    }
    let net = domain.network();
    let (values, stats) = solve_components(&net, &fixed, &values, tol, max_iter)?;
    Ok(GridField { domain, fixed, values, stats: Some(stats) })
}

fn voxel_gradients(field: &GridField, c: usize, v: &Voxel) -> [f64; 3] {
    let u = |b: usize| field.values[c][v.corners[b] as usize];
    let h = field.domain.h;
    let mut g = [0.0; 3];
    for (a, ga) in g.iter_mut().enumerate() {
        let mut s = 0.0;
        for b in 0..8usize {
            if b & (1 << a) == 0 {
                s += u(b | (1 << a)) - u(b);
            }
        }
        *ga = s / (4.0 * h);
    }
    g
}

/// `∫ ∇a · ∇b dμ` with gradients taken at voxel midpoints.
pub fn energy_inner(a: &GridField, b: &GridField) -> f64 {
    assert!(Arc::ptr_eq(&a.domain, &b.domain) || a.domain.nodes.len() == b.domain.nodes.len());
    let vol = a.domain.h.powi(3);
    let parts: Vec<f64> = a
        .domain
        .voxels
        .par_chunks(crate::solver::SUM_CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .map(|v| {
                    let mut s = 0.0;
                    for c in 0..a.components() {
                        let ga = voxel_gradients(a, c, v);
                        let gb = voxel_gradients(b, c, v);
                        s += ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2];
                    }
                    s * v.weight * vol
                })
                .sum::<f64>()
        })
        .collect();
    parts.iter().sum()
}

/// Dirichlet energy `∫ |∇u|² dμ` (vector fields sum the components).
pub fn dirichlet_energy(field: &GridField) -> f64 {
    energy_inner(field, field)
}

/// Pointwise difference `a - b` on a common domain.
pub fn difference(a: &GridField, b: &GridField) -> GridField {
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect();
    GridField { domain: a.domain.clone(), fixed: a.fixed.clone(), values, stats: None }
}
