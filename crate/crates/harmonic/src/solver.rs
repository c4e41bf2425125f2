//! Weighted graph Laplacians and a Jacobi-preconditioned conjugate gradient.
//!
//! Every discretization in this crate reduces to a resistor network: nodes
//! carry values, edges carry conductances, and the discrete energy is
//! `Σ c_e (u_a - u_b)²`. On a uniform voxel grid with unit weights the
//! operator is the 7-point Laplacian scaled by `h`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::HarmonicError;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 20_000;

#[derive(Clone, Debug, Default)]
pub struct Network {
    pub nodes: usize,
    pub edges: Vec<(u32, u32, f64)>,
}

impl Network {
    pub fn new(nodes: usize) -> Self {
        Network { nodes, edges: Vec::new() }
    }

    pub fn add_node(&mut self) -> u32 {
        self.nodes += 1;
        (self.nodes - 1) as u32
    }

    pub fn connect(&mut self, a: u32, b: u32, c: f64) {
        if a != b && c > 0.0 {
            self.edges.push((a, b, c));
        }
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        self.edges.iter().map(|&(a, b, c)| c * (u[a as usize] - u[b as usize]).powi(2)).sum()
    }

    /// `Σ c_e (u_a - u_b)(v_a - v_b)`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b, c)| c * (u[a as usize] - u[b as usize]) * (v[a as usize] - v[b as usize]))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub unknowns: usize,
    pub iterations: usize,
    /// Largest `|(A u - b)_i| / A_ii`, i.e. the deviation from the weighted
    /// neighbour mean.
    pub residual: f64,
}

struct Csr {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl Csr {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().with_min_len(4096).for_each(|(i, yi)| {
            let mut s = self.diag[i] * x[i];
            for k in self.offsets[i]..self.offsets[i + 1] {
                s -= self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = s;
        });
    }
}

/// Fixed chunks keep the summation order independent of the thread count.
pub(crate) const SUM_CHUNK: usize = 4096;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let parts: Vec<f64> = a.par_chunks(SUM_CHUNK).zip(b.par_chunks(SUM_CHUNK)).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>()).collect();
    parts.iter().sum()
}

/// Solve the Dirichlet problem on `net` for several right-hand sides at once.
///
/// `fixed[i]` marks Dirichlet nodes; `values[c][i]` gives their value for
/// component `c` (entries at free nodes are ignored). Returns the full node
/// values per component.
pub fn solve_components(
    net: &Network,
    fixed: &[bool],
    values: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<Vec<f64>>, SolveStats), HarmonicError> {
    assert_eq!(fixed.len(), net.nodes);
    let mut slot = vec![u32::MAX; net.nodes];
    let mut free = Vec::new();
    for i in 0..net.nodes {
        if !fixed[i] {
            slot[i] = free.len() as u32;
            free.push(i);
        }
    }
    let nf = free.len();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nf];
    let mut diag = vec![0.0; nf];
    // boundary couplings: (free slot, fixed node, conductance)
    let mut bnd: Vec<(u32, u32, f64)> = Vec::new();
    for &(a, b, c) in &net.edges {
        let (sa, sb) = (slot[a as usize], slot[b as usize]);
        match (sa != u32::MAX, sb != u32::MAX) {
            (true, true) => {
                rows[sa as usize].push((sb, c));
                rows[sb as usize].push((sa, c));
                diag[sa as usize] += c;
                diag[sb as usize] += c;
            }
            (true, false) => {
                diag[sa as usize] += c;
                bnd.push((sa, b, c));
            }
            (false, true) => {
                diag[sb as usize] += c;
                bnd.push((sb, a, c));
            }
            (false, false) => {}
        }
    }
    if let Some(i) = diag.iter().position(|&d| d <= 0.0) {
        return Err(HarmonicError::Singular(format!("free node {} has no conductance", free[i])));
    }
    let mut offsets = Vec::with_capacity(nf + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for r in rows {
        for (c, v) in r {
            cols.push(c);
            vals.push(v);
        }
        offsets.push(cols.len());
    }
    let a = Csr { offsets, cols, vals, diag };

    let mut out = Vec::with_capacity(values.len());
    let mut stats = SolveStats { unknowns: nf, iterations: 0, residual: 0.0 };
    for vals in values {
        let mut b = vec![0.0; nf];
        for &(s, node, c) in &bnd {
            b[s as usize] += c * vals[node as usize];
        }
        let scale = (0..net.nodes).filter(|&i| fixed[i]).map(|i| vals[i].abs()).fold(1.0f64, f64::max);
        let (x, it, res) = pcg(&a, &b, tol * scale, max_iter);
        if res > tol * scale {
            return Err(HarmonicError::NoConvergence { iterations: it, residual: res });
        }
        stats.iterations = stats.iterations.max(it);
        stats.residual = stats.residual.max(res / scale);
        let mut u = vals.clone();
        for (k, &i) in free.iter().enumerate() {
            u[i] = x[k];
        }
        out.push(u);
    }
    Ok((out, stats))
}

fn scaled_residual(a: &Csr, r: &[f64]) -> f64 {
    r.iter().zip(&a.diag).map(|(ri, d)| (ri / d).abs()).fold(0.0, f64::max)
}

fn pcg(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, usize, f64) {
    let n = b.len();
    let mut x = vec![0.0; n];
    if n == 0 {
        return (x, 0, 0.0);
    }
    let mut r = b.to_vec();
    let mut res = scaled_residual(a, &r);
    if res <= tol {
        return (x, 0, res);
    }
    let mut z: Vec<f64> = r.iter().zip(&a.diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return (x, it, res);
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        res = scaled_residual(a, &r);
        if res <= tol {
            // recompute the true residual to guard against drift
            let mut ax = vec![0.0; n];
            a.apply(&x, &mut ax);
            let true_r: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
            res = scaled_residual(a, &true_r);
            if res <= tol {
                return (x, it, res);
            }
            r = true_r;
        }
        z.par_iter_mut().zip(r.par_iter().zip(&a.diag)).for_each(|(zi, (ri, d))| *zi = ri / d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    (x, max_iter, res)
}
