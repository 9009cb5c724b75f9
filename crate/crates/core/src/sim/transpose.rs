//! Burst statistics for reading a row-major `A` in the column order the
//! outer-product schedule consumes it.
//!
//! Without a transpose stage every element of a column segment is its own
//! read. With it, `A` is read as row vectors of `vector_width` elements whose
//! lanes are pushed into `vector_width` FIFOs; popping each FIFO in turn
//! yields whole column segments.

use crate::analytic::ProblemSize;
use crate::error::{Error, Result};
use crate::hardware::TileConfig;
use std::collections::{BTreeMap, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransposeStats {
    /// Run length -> number of reads, reading columns directly.
    pub without_module: BTreeMap<u64, u64>,
    /// Run length -> number of reads, through the transpose FIFOs.
    pub with_module: BTreeMap<u64, u64>,
    pub fifo_count: u64,
    pub fifo_depth: u64,
    /// Every vector read through the module is `vector_width` long.
    pub full_vectors: bool,
    /// The FIFOs delivered elements in exact column-segment order.
    pub order_preserved: bool,
}

impl TransposeStats {
    pub fn reads_without(&self) -> u64 {
        self.without_module.values().sum()
    }

    pub fn reads_with(&self) -> u64 {
        self.with_module.values().sum()
    }

    pub fn min_run_with(&self) -> u64 {
        self.with_module.keys().next().copied().unwrap_or(0)
    }
}

/// Analyses one pass over `A` (`m x k`, row-major) in memory-tile row blocks
/// of `x_tot` rows. `fifo_depth` defaults to the column height `x_tot`.
pub fn transpose_access_analysis(
    p: &ProblemSize,
    cfg: &TileConfig,
    vector_width: u64,
    fifo_depth: Option<u64>,
) -> Result<TransposeStats> {
    if vector_width == 0 {
        return Err(Error::InvalidConfig("vector width must be >= 1".into()));
    }
    let x_tot = cfg.x_tot();
    if x_tot > p.m {
        return Err(Error::TileExceedsMatrix { axis: "m", extent: p.m, tile: x_tot });
    }
    let depth = fifo_depth.unwrap_or(x_tot);
    if depth < x_tot {
        return Err(Error::QueueTooShallow { depth, height: x_tot });
    }

    let mut without = BTreeMap::new();
    let mut with = BTreeMap::new();
    let mut full_vectors = true;
    let mut order_preserved = true;
    let mut fifos: Vec<VecDeque<(u64, u64)>> = vec![VecDeque::new(); vector_width as usize];

    for i0 in (0..p.m).step_by(x_tot as usize) {
        let rows = x_tot.min(p.m - i0);
        // Column-wise reads: stride k, so each element is its own burst
        // unless A has a single column.
        if p.k == 1 {
            *without.entry(rows).or_insert(0) += 1;
        } else {
            *without.entry(1).or_insert(0) += rows * p.k;
        }

        for k0 in (0..p.k).step_by(vector_width as usize) {
            let lanes = vector_width.min(p.k - k0);
            full_vectors &= lanes == vector_width;
            for i in i0..i0 + rows {
                *with.entry(lanes).or_insert(0) += 1;
                for lane in 0..lanes {
                    let fifo = &mut fifos[lane as usize];
                    if fifo.len() as u64 >= depth {
                        return Err(Error::QueueTooShallow { depth, height: rows });
                    }
                    fifo.push_back((i, k0 + lane));
                }
            }
            // Pop in transposed order: one full column segment per FIFO.
            for lane in 0..lanes {
                for expect_row in i0..i0 + rows {
                    let got = fifos[lane as usize].pop_front();
                    order_preserved &= got == Some((expect_row, k0 + lane));
                }
            }
        }
    }

    Ok(TransposeStats {
        without_module: without,
        with_module: with,
        fifo_count: vector_width,
        fifo_depth: depth,
        full_vectors,
        order_preserved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows_cfg(x_tot: u64) -> TileConfig {
        TileConfig::chain(1, x_tot, 1, x_tot, 1, 1).unwrap()
    }

    #[test]
    fn full_row_vectors() {
        let s = transpose_access_analysis(&ProblemSize::cube(4).unwrap(), &rows_cfg(4), 4, None).unwrap();
        assert_eq!(s.without_module, BTreeMap::from([(1, 16)]));
        assert_eq!(s.with_module, BTreeMap::from([(4, 4)]));
        assert!(s.full_vectors && s.order_preserved);
    }

    #[test]
    fn unit_width_is_identical() {
        let s = transpose_access_analysis(&ProblemSize::new(6, 3, 5).unwrap(), &rows_cfg(3), 1, None).unwrap();
        assert_eq!(s.without_module, s.with_module);
    }

    #[test]
    fn sixty_four_square() {
        let s = transpose_access_analysis(&ProblemSize::new(64, 1, 64).unwrap(), &rows_cfg(16), 8, None).unwrap();
        assert_eq!(s.with_module, BTreeMap::from([(8, 512)]));
        assert_eq!(s.reads_without(), 4096);
        assert!(s.min_run_with() >= 8);
        assert!(s.order_preserved);
    }

    #[test]
    fn shallow_fifo_rejected() {
        let err = transpose_access_analysis(&ProblemSize::cube(8).unwrap(), &rows_cfg(8), 4, Some(4)).unwrap_err();
        assert_eq!(err, Error::QueueTooShallow { depth: 4, height: 8 });
    }

    #[test]
    fn ragged_last_vector_flagged() {
        let s = transpose_access_analysis(&ProblemSize::new(4, 1, 6).unwrap(), &rows_cfg(4), 4, None).unwrap();
        assert!(!s.full_vectors);
        assert_eq!(s.with_module, BTreeMap::from([(2, 4), (4, 4)]));
    }
}
