//! Field dumps: a flat little-endian binary body plus a JSON sidecar.
//!
//! Binary layout: magic `DHF1`, `u32` header length, JSON header bytes
//! (descriptor, spacing, components, node count), then for every component
//! the node values as `f64` in node order. Node order is lexicographic in
//! `(z, y, x)` of the first voxel touching the node, and is listed in the
//! sidecar.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::domain::{DomainDescriptor, GridField, NodeKey};

const MAGIC: &[u8; 4] = b"DHF1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub descriptor: DomainDescriptor,
    pub h: f64,
    pub components: usize,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub header: FieldHeader,
    pub node_keys: Vec<NodeKey>,
    pub fixed: Vec<bool>,
}

pub fn header(field: &GridField) -> FieldHeader {
    FieldHeader {
        descriptor: field.domain.descriptor.clone(),
        h: field.domain.h,
        components: field.components(),
        nodes: field.domain.nodes.len(),
    }
}

pub fn write_field<W: Write>(field: &GridField, mut w: W) -> io::Result<()> {
    let head = serde_json::to_vec(&header(field)).map_err(io::Error::other)?;
    w.write_all(MAGIC)?;
    w.write_all(&(head.len() as u32).to_le_bytes())?;
    w.write_all(&head)?;
    for comp in &field.values {
        for v in comp {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn sidecar(field: &GridField) -> FieldSidecar {
    FieldSidecar { header: header(field), node_keys: field.domain.nodes.clone(), fixed: field.fixed.clone() }
}

/// Header and `values[c][node]` of a dump.
pub fn read_field<R: Read>(mut r: R) -> io::Result<(FieldHeader, Vec<Vec<f64>>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "not a field dump"));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut head = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut head)?;
    let header: FieldHeader = serde_json::from_slice(&head).map_err(io::Error::other)?;
    let mut values = Vec::with_capacity(header.components);
    let mut buf = [0u8; 8];
    for _ in 0..header.components {
        let mut comp = Vec::with_capacity(header.nodes);
        for _ in 0..header.nodes {
            r.read_exact(&mut buf)?;
            comp.push(f64::from_le_bytes(buf));
        }
        values.push(comp);
    }
    Ok((header, values))
}

/// Energy ledgers as CSV, one row per ledger.
pub fn write_ledgers_csv<W: Write>(ledgers: &[crate::approx::EnergyLedger], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for l in ledgers {
        wr.serialize(LedgerRow::from(l))?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LedgerRow {
    stage: u32,
    cell: String,
    prefix: String,
    per_cell: u32,
    energy_g_prev: f64,
    energy_h: f64,
    energy_g: f64,
    orthogonality_h: f64,
    orthogonality_prev: f64,
    identity_gap: f64,
    glip: f64,
    measure: f64,
}

impl From<&crate::approx::EnergyLedger> for LedgerRow {
    fn from(l: &crate::approx::EnergyLedger) -> Self {
        LedgerRow {
            stage: l.stage,
            cell: format!("{}:{}:{}", l.cell[0], l.cell[1], l.cell[2]),
            prefix: l.prefix.clone(),
            per_cell: l.per_cell,
            energy_g_prev: l.energy_g_prev,
            energy_h: l.energy_h,
            energy_g: l.energy_g,
            orthogonality_h: l.orthogonality_h,
            orthogonality_prev: l.orthogonality_prev,
            identity_gap: l.identity_gap,
            glip: l.glip,
            measure: l.measure,
        }
    }
}
