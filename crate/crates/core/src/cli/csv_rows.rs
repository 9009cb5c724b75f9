//! Record types of the CSV files written by the CLI. Each reads back with
//! [`read_rows`].

use crate::analytic::{to_f64, DesignPoint};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub rank: usize,
    pub x_c: u64,
    pub y_c: u64,
    pub x_p: u64,
    pub y_p: u64,
    pub x_t: u64,
    pub y_t: u64,
    pub x_b: u64,
    pub y_b: u64,
    pub port_width_bits: u32,
    pub compute_units: u64,
    pub pes: u64,
    pub min_blocks: u64,
    pub blocks_used: u64,
    pub x_tot: u64,
    pub y_tot: u64,
    pub io_volume: Option<u128>,
    pub computational_intensity: f64,
    pub arithmetic_intensity: f64,
    pub peak_ops_per_cycle: u64,
    pub drain_efficiency: f64,
}

impl DesignRow {
    pub fn new(rank: usize, d: &DesignPoint) -> Self {
        let c = d.config;
        Self {
            rank,
            x_c: c.x_c,
            y_c: c.y_c,
            x_p: c.x_p,
            y_p: c.y_p,
            x_t: c.x_t,
            y_t: c.y_t,
            x_b: c.x_b,
            y_b: c.y_b,
            port_width_bits: d.geometry.port_width_bits,
            compute_units: d.compute_units,
            pes: d.pe_count,
            min_blocks: d.min_blocks,
            blocks_used: d.blocks_used,
            x_tot: d.x_tot,
            y_tot: d.y_tot,
            io_volume: d.io_volume,
            computational_intensity: to_f64(d.computational_intensity),
            arithmetic_intensity: to_f64(d.arithmetic_intensity),
            peak_ops_per_cycle: d.peak_ops_per_cycle,
            drain_efficiency: to_f64(d.drain_efficiency),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryRow {
    pub memory_tile_elems: u64,
    #[serde(rename = "N_b_used")]
    pub n_b_used: u64,
    pub utilization_fraction: f64,
    pub arithmetic_intensity: f64,
    pub bandwidth_bytes_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub m: u64,
    pub n: u64,
    pub k: u64,
    pub compute_cycles: u64,
    pub drain_cycles: u64,
    pub efficiency: f64,
    /// `k / (k + N_p)`, or the cycle ratio for configurations off the chain.
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub seq: u64,
    pub operand: String,
    pub tile_i: u64,
    pub tile_j: u64,
    pub k: Option<u64>,
    pub offset: u64,
}

pub fn write_rows<R: Serialize>(path: &Path, rows: &[R]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: DeserializeOwned>(path: &Path) -> csv::Result<Vec<R>> {
    csv::Reader::from_path(path)?.deserialize().collect()
}
