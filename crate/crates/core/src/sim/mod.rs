//! Functional execution of the tiled schedule.
//!
//! Cycle accounting is transaction-level: one compute tile per cycle, and the
//! output tile drained at `y_c` elements per cycle after each memory tile.
//! Off-chip traffic is counted per element: a column segment of `A` and a row
//! segment of `B` for every `k` step of every memory tile, and one store per
//! element of `C`.

mod chain;
mod matrix;
pub mod matrix_file;
mod transpose;

pub use chain::simulate_pe_chain;
pub use matrix::MatrixBuffer;
pub use transpose::{transpose_access_analysis, TransposeStats};

use crate::analytic::{efficiency_from_cycles, ProblemSize};
use crate::error::{Error, Result};
use crate::hardware::TileConfig;
use crate::scalar::Element;
use crate::Exact;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Zero-pad matrices up to tile multiples instead of rejecting them.
    pub padding: bool,
    /// Record one [`Access`] per transferred element.
    pub log_accesses: bool,
    /// Latency of one accumulation; drives `pipeline_safe`.
    pub accumulation_latency: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { padding: false, log_accesses: false, accumulation_latency: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operand {
    A,
    B,
    C,
}

/// One element transferred between off-chip memory and the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Access {
    pub operand: Operand,
    /// Memory-tile row and column index.
    pub tile: (u64, u64),
    /// `k` step for loads; `None` for stores.
    pub k: Option<u64>,
    /// Offset within the segment (`A`, `B`) or row-major within the tile (`C`).
    pub offset: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IoTrace {
    pub loads_a: u64,
    pub loads_b: u64,
    pub stores_c: u64,
    /// Transfers of zero padding, reported as overhead.
    pub padded_loads_a: u64,
    pub padded_loads_b: u64,
    pub padded_stores_c: u64,
    pub log: Option<Vec<Access>>,
    /// Histogram of contiguous run lengths of `A` reads (length -> count).
    pub burst_runs: BTreeMap<u64, u64>,
}

impl IoTrace {
    fn new(log: bool) -> Self {
        Self { log: log.then(Vec::new), ..Self::default() }
    }

    pub fn total(&self) -> u128 {
        u128::from(self.loads_a) + u128::from(self.loads_b) + u128::from(self.stores_c)
    }

    pub fn padding_overhead(&self) -> u128 {
        u128::from(self.padded_loads_a) + u128::from(self.padded_loads_b) + u128::from(self.padded_stores_c)
    }

    /// Transfers including padding, which is what the ceiling form of the
    /// analytic volume counts for loads.
    pub fn total_loads_with_padding(&self) -> u128 {
        u128::from(self.loads_a + self.padded_loads_a + self.loads_b + self.padded_loads_b)
    }

    /// Counters only, for comparing traces whose logs may be ordered
    /// differently.
    pub fn counts(&self) -> [u64; 6] {
        [self.loads_a, self.loads_b, self.stores_c, self.padded_loads_a, self.padded_loads_b, self.padded_stores_c]
    }

    pub fn sorted_log(&self) -> Option<Vec<Access>> {
        self.log.as_ref().map(|l| {
            let mut l = l.clone();
            l.sort_unstable();
            l
        })
    }

    fn record(&mut self, access: Access) {
        if let Some(log) = self.log.as_mut() {
            log.push(access);
        }
    }

    /// Loads one `A` column segment: `real` in-bounds rows of column `kk`.
    fn load_a(&mut self, tile: (u64, u64), kk: u64, real: u64, width: u64, k: u64) {
        self.loads_a += real;
        self.padded_loads_a += width - real;
        if real > 0 {
            // Row-major A: a column segment is contiguous only when k == 1.
            if k == 1 {
                *self.burst_runs.entry(real).or_default() += 1;
            } else {
                *self.burst_runs.entry(1).or_default() += real;
            }
        }
        if self.log.is_some() {
            for offset in 0..real {
                self.record(Access { operand: Operand::A, tile, k: Some(kk), offset });
            }
        }
    }

    fn load_b(&mut self, tile: (u64, u64), kk: u64, real: u64, width: u64) {
        self.loads_b += real;
        self.padded_loads_b += width - real;
        if self.log.is_some() {
            for offset in 0..real {
                self.record(Access { operand: Operand::B, tile, k: Some(kk), offset });
            }
        }
    }

    fn store_c(&mut self, tile: (u64, u64), offset: u64, real: bool) {
        if real {
            self.stores_c += 1;
            self.record(Access { operand: Operand::C, tile, k: None, offset });
        } else {
            self.padded_stores_c += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult<T> {
    pub c: MatrixBuffer<T>,
    pub io: IoTrace,
    pub compute_cycles: u64,
    pub drain_cycles: u64,
    /// Smallest observed distance, in cycles, between two accumulations into
    /// the same element; `None` when `k == 1`.
    pub min_accumulation_gap: Option<u64>,
    pub pipeline_safe: bool,
    pub config: TileConfig,
    pub problem: ProblemSize,
}

impl<T> SimResult<T> {
    pub fn efficiency(&self) -> Exact {
        efficiency_from_cycles(self.compute_cycles, self.drain_cycles)
    }
}

/// Naive `C = A * B` in `i, j, k` order; the comparison oracle.
pub fn reference_mmm<T: Element>(a: &MatrixBuffer<T>, b: &MatrixBuffer<T>) -> Result<MatrixBuffer<T>> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{} but B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (m, n, k) = (a.rows(), b.cols(), a.cols());
    Ok(MatrixBuffer::from_fn(m, n, |i, j| {
        let mut acc = T::zero();
        for kk in 0..k {
            acc = T::mul_add(acc, a.get(i, kk), b.get(kk, j));
        }
        acc
    }))
}

/// Shared argument checks: operand shapes, tile fit and divisibility.
pub(crate) fn check_inputs<T: Element>(
    p: &ProblemSize,
    cfg: &TileConfig,
    a: &MatrixBuffer<T>,
    b: &MatrixBuffer<T>,
    padding: bool,
) -> Result<()> {
    cfg.validate()?;
    if (a.rows(), a.cols()) != (p.m, p.k) {
        return Err(Error::DimensionMismatch(format!("A is {}x{}, expected {}x{}", a.rows(), a.cols(), p.m, p.k)));
    }
    if (b.rows(), b.cols()) != (p.k, p.n) {
        return Err(Error::DimensionMismatch(format!("B is {}x{}, expected {}x{}", b.rows(), b.cols(), p.k, p.n)));
    }
    check_tiling(p, cfg, padding)
}

pub(crate) fn check_tiling(p: &ProblemSize, cfg: &TileConfig, padding: bool) -> Result<()> {
    let (x, y) = (cfg.x_tot(), cfg.y_tot());
    if x > p.m {
        return Err(Error::TileExceedsMatrix { axis: "m", extent: p.m, tile: x });
    }
    if y > p.n {
        return Err(Error::TileExceedsMatrix { axis: "n", extent: p.n, tile: y });
    }
    if !padding {
        if !p.m.is_multiple_of(x) {
            return Err(Error::NonDivisible { axis: "m", extent: p.m, tile: x });
        }
        if !p.n.is_multiple_of(y) {
            return Err(Error::NonDivisible { axis: "n", extent: p.n, tile: y });
        }
    }
    Ok(())
}

/// Loads the `A` column segment for rows `i0..i0+width` at column `kk`,
/// zero-filling rows past the matrix.
pub(crate) fn load_a_segment<T: Element>(
    a: &MatrixBuffer<T>,
    io: &mut IoTrace,
    tile: (u64, u64),
    i0: u64,
    width: u64,
    kk: u64,
) -> Vec<T> {
    let real = width.min(a.rows() - i0);
    io.load_a(tile, kk, real, width, a.cols());
    (0..width).map(|r| if r < real { a.get(i0 + r, kk) } else { T::zero() }).collect()
}

pub(crate) fn load_b_segment<T: Element>(
    b: &MatrixBuffer<T>,
    io: &mut IoTrace,
    tile: (u64, u64),
    j0: u64,
    width: u64,
    kk: u64,
) -> Vec<T> {
    let real = width.min(b.cols() - j0);
    io.load_b(tile, kk, real, width);
    (0..width).map(|c| if c < real { b.get(kk, j0 + c) } else { T::zero() }).collect()
}

/// Executes the eleven-loop tiled nest: memory tiles over `i` and `j`, the
/// full `k` dimension, then block tiles, compute tiles, and the parallel PE
/// and compute-unit loops as one cycle.
pub fn simulate_schedule<T: Element>(
    p: &ProblemSize,
    cfg: &TileConfig,
    a: &MatrixBuffer<T>,
    b: &MatrixBuffer<T>,
    opts: &SimOptions,
) -> Result<SimResult<T>> {
    check_inputs(p, cfg, a, b, opts.padding)?;
    let (x_tot, y_tot) = (cfg.x_tot(), cfg.y_tot());
    let (xs, ys) = (x_tot as usize, y_tot as usize);
    let mut c = MatrixBuffer::zeros(p.m, p.n);
    let mut io = IoTrace::new(opts.log_accesses);
    let mut cycle = 0u64;
    let mut drain_cycles = 0u64;
    let mut min_gap: Option<u64> = None;

    let pe_row = cfg.x_c;
    let pe_col = cfg.y_c;
    let tile_rows = cfg.x_p * cfg.x_c;
    let tile_cols = cfg.y_p * cfg.y_c;
    let block_rows = cfg.x_t * tile_rows;
    let block_cols = cfg.y_t * tile_cols;

    let mut tile = vec![T::zero(); xs * ys];
    let mut last_visit = vec![u64::MAX; xs * ys];

    for (ti, i0) in (0..p.m).step_by(xs).enumerate() {
        for (tj, j0) in (0..p.n).step_by(ys).enumerate() {
            let tile_id = (ti as u64, tj as u64);
            tile.fill(T::zero());
            last_visit.fill(u64::MAX);
            for kk in 0..p.k {
                let a_seg = load_a_segment(a, &mut io, tile_id, i0, x_tot, kk);
                let b_seg = load_b_segment(b, &mut io, tile_id, j0, y_tot, kk);
                for ib in 0..cfg.x_b {
                    for jb in 0..cfg.y_b {
                        for it in 0..cfg.x_t {
                            for jt in 0..cfg.y_t {
                                for ip in 0..cfg.x_p {
                                    for jp in 0..cfg.y_p {
                                        for ic in 0..cfg.x_c {
                                            for jc in 0..cfg.y_c {
                                                let li = ib * block_rows + it * tile_rows + ip * pe_row + ic;
                                                let lj = jb * block_cols + jt * tile_cols + jp * pe_col + jc;
                                                let slot = li as usize * ys + lj as usize;
                                                tile[slot] =
                                                    T::mul_add(tile[slot], a_seg[li as usize], b_seg[lj as usize]);
                                                let prev = last_visit[slot];
                                                if prev != u64::MAX {
                                                    let gap = cycle - prev;
                                                    min_gap = Some(min_gap.map_or(gap, |g| g.min(gap)));
                                                }
                                                last_visit[slot] = cycle;
                                            }
                                        }
                                    }
                                }
                                cycle += 1;
                            }
                        }
                    }
                }
            }
            // Sequential drain of the finished tile.
            for li in 0..x_tot {
                for lj in 0..y_tot {
                    let (i, j) = (i0 + li, j0 + lj);
                    let real = i < p.m && j < p.n;
                    if real {
                        c.set(i, j, tile[li as usize * ys + lj as usize]);
                    }
                    io.store_c(tile_id, li * y_tot + lj, real);
                }
            }
            drain_cycles += x_tot * y_tot / cfg.y_c;
        }
    }

    Ok(SimResult {
        c,
        io,
        compute_cycles: cycle,
        drain_cycles,
        min_accumulation_gap: min_gap,
        pipeline_safe: min_gap.is_none_or(|g| g >= opts.accumulation_latency),
        config: *cfg,
        problem: *p,
    })
}

/// Transfer and cycle counters of the schedule without moving data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleCounts {
    pub loads_a: u64,
    pub loads_b: u64,
    pub stores_c: u64,
    pub padded_loads_a: u64,
    pub padded_loads_b: u64,
    pub padded_stores_c: u64,
    pub compute_cycles: u64,
    pub drain_cycles: u64,
}

impl ScheduleCounts {
    pub fn total(&self) -> u128 {
        u128::from(self.loads_a) + u128::from(self.loads_b) + u128::from(self.stores_c)
    }

    pub fn efficiency(&self) -> Exact {
        efficiency_from_cycles(self.compute_cycles, self.drain_cycles)
    }
}

/// Walks the memory tiles of the schedule, accumulating the same counters
/// [`simulate_schedule`] reports, in time linear in the number of tiles.
pub fn count_schedule(p: &ProblemSize, cfg: &TileConfig, padding: bool) -> Result<ScheduleCounts> {
    cfg.validate()?;
    check_tiling(p, cfg, padding)?;
    let (x_tot, y_tot) = (cfg.x_tot(), cfg.y_tot());
    let mut counts = ScheduleCounts {
        loads_a: 0,
        loads_b: 0,
        stores_c: 0,
        padded_loads_a: 0,
        padded_loads_b: 0,
        padded_stores_c: 0,
        compute_cycles: 0,
        drain_cycles: 0,
    };
    for i0 in (0..p.m).step_by(x_tot as usize) {
        let rows = x_tot.min(p.m - i0);
        for j0 in (0..p.n).step_by(y_tot as usize) {
            let cols = y_tot.min(p.n - j0);
            counts.loads_a += p.k * rows;
            counts.padded_loads_a += p.k * (x_tot - rows);
            counts.loads_b += p.k * cols;
            counts.padded_loads_b += p.k * (y_tot - cols);
            counts.stores_c += rows * cols;
            counts.padded_stores_c += x_tot * y_tot - rows * cols;
            counts.compute_cycles += p.k * cfg.memory_positions();
            counts.drain_cycles += x_tot * y_tot / cfg.y_c;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::io_volume;

    fn cfg(s: &str) -> TileConfig {
        s.parse().unwrap()
    }

    #[test]
    fn reference_examples() {
        let a = MatrixBuffer::new(1, 1, vec![2u32]).unwrap();
        let b = MatrixBuffer::new(1, 1, vec![3u32]).unwrap();
        assert_eq!(reference_mmm(&a, &b).unwrap().data(), &[6]);

        let a = MatrixBuffer::<u32>::random(8, 8, 7);
        let id = MatrixBuffer::from_fn(8, 8, |i, j| u32::from(i == j));
        assert_eq!(reference_mmm(&a, &id).unwrap(), a);

        let bad = MatrixBuffer::<u32>::zeros(3, 8);
        assert!(matches!(reference_mmm(&a, &bad), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn four_cubed_counts() {
        let p = ProblemSize::cube(4).unwrap();
        let cfg = cfg("1,1,2,1,1,2,1,1");
        let a = MatrixBuffer::<u32>::random(4, 4, 1);
        let b = MatrixBuffer::<u32>::random(4, 4, 2);
        let r = simulate_schedule(&p, &cfg, &a, &b, &SimOptions::default()).unwrap();
        assert_eq!((r.io.loads_a, r.io.loads_b, r.io.stores_c), (32, 32, 16));
        assert_eq!(r.io.total(), 80);
        assert_eq!(r.io.total(), io_volume(&p, 2, 2).unwrap());
        assert_eq!(r.c, reference_mmm(&a, &b).unwrap());
    }

    #[test]
    fn unit_trace() {
        let p = ProblemSize::cube(1).unwrap();
        let a = MatrixBuffer::new(1, 1, vec![5u8]).unwrap();
        let b = MatrixBuffer::new(1, 1, vec![7u8]).unwrap();
        let opts = SimOptions { log_accesses: true, ..SimOptions::default() };
        let r = simulate_schedule(&p, &TileConfig::unit(), &a, &b, &opts).unwrap();
        let log = r.io.log.unwrap();
        assert_eq!(log.len(), 3);
        assert_eq!(log.iter().map(|x| x.operand).collect::<Vec<_>>(), [Operand::A, Operand::B, Operand::C]);
        assert_eq!(r.c.data(), &[35]);
        assert_eq!(r.min_accumulation_gap, None);
    }

    #[test]
    fn sixty_four_cubed_u16() {
        let p = ProblemSize::cube(64).unwrap();
        let cfg = cfg("1,4,4,1,4,4,1,1");
        assert_eq!((cfg.x_tot(), cfg.y_tot()), (16, 16));
        let a = MatrixBuffer::<u16>::random(64, 64, 11);
        let b = MatrixBuffer::<u16>::random(64, 64, 12);
        let r = simulate_schedule(&p, &cfg, &a, &b, &SimOptions::default()).unwrap();
        assert_eq!(r.c, reference_mmm(&a, &b).unwrap());
        assert_eq!(r.io.total(), 36864);
    }

    #[test]
    fn integers_wrap() {
        let a = MatrixBuffer::new(1, 2, vec![200u8, 100]).unwrap();
        let b = MatrixBuffer::new(2, 1, vec![2u8, 3]).unwrap();
        let p = ProblemSize::new(1, 1, 2).unwrap();
        let r = simulate_schedule(&p, &TileConfig::unit(), &a, &b, &SimOptions::default()).unwrap();
        assert_eq!(r.c.data(), &[((200u32 * 2 + 100 * 3) % 256) as u8]);
    }

    #[test]
    fn log_length_matches_counts() {
        let p = ProblemSize::new(8, 6, 3).unwrap();
        let cfg = cfg("2,1,2,3,1,2,1,1");
        let a = MatrixBuffer::<u32>::random(8, 3, 3);
        let b = MatrixBuffer::<u32>::random(3, 6, 4);
        let opts = SimOptions { log_accesses: true, ..SimOptions::default() };
        let r = simulate_schedule(&p, &cfg, &a, &b, &opts).unwrap();
        let log = r.io.log.as_ref().unwrap();
        let count = |op| log.iter().filter(|x| x.operand == op).count() as u64;
        assert_eq!(count(Operand::A), r.io.loads_a);
        assert_eq!(count(Operand::B), r.io.loads_b);
        assert_eq!(count(Operand::C), r.io.stores_c);
    }

    #[test]
    fn rejects_bad_tilings() {
        let p = ProblemSize::cube(6).unwrap();
        let a = MatrixBuffer::<u32>::zeros(6, 6);
        let opts = SimOptions::default();
        assert!(matches!(
            simulate_schedule(&p, &cfg("1,1,4,1,1,4,1,1"), &a, &a, &opts),
            Err(Error::NonDivisible { .. })
        ));
        assert!(matches!(
            simulate_schedule(&p, &cfg("1,1,8,1,1,1,1,1"), &a, &a, &opts),
            Err(Error::TileExceedsMatrix { .. })
        ));
        let wrong = MatrixBuffer::<u32>::zeros(5, 6);
        assert!(matches!(
            simulate_schedule(&p, &TileConfig::unit(), &wrong, &a, &opts),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn padding_counts_overhead_separately() {
        let p = ProblemSize::new(5, 7, 3).unwrap();
        let cfg = cfg("1,1,2,1,1,3,1,1");
        let a = MatrixBuffer::<u32>::random(5, 3, 5);
        let b = MatrixBuffer::<u32>::random(3, 7, 6);
        let opts = SimOptions { padding: true, ..SimOptions::default() };
        let r = simulate_schedule(&p, &cfg, &a, &b, &opts).unwrap();
        assert_eq!(r.c, reference_mmm(&a, &b).unwrap());
        assert_eq!(r.io.stores_c, 35);
        // Real loads: every A element once per tile column, every B element once per tile row.
        assert_eq!(r.io.loads_a, 5 * 3 * 3);
        assert_eq!(r.io.loads_b, 7 * 3 * 3);
        let q = io_volume(&p, 2, 3).unwrap();
        assert_eq!(r.io.total_loads_with_padding() + u128::from(r.io.stores_c), q);
        assert!(r.io.padding_overhead() > 0);
    }

    #[test]
    fn collision_gap_equals_memory_positions() {
        let p = ProblemSize::new(8, 8, 4).unwrap();
        let cfg = cfg("1,2,2,1,2,2,2,1");
        let a = MatrixBuffer::<u32>::random(8, 4, 9);
        let b = MatrixBuffer::<u32>::random(4, 8, 10);
        let r =
            simulate_schedule(&p, &cfg, &a, &b, &SimOptions { accumulation_latency: 9, ..Default::default() }).unwrap();
        assert_eq!(r.min_accumulation_gap, Some(crate::analytic::collision_distance(&cfg)));
        assert!(!r.pipeline_safe);
    }

    #[test]
    fn counting_walk_matches_simulation() {
        let p = ProblemSize::new(9, 10, 3).unwrap();
        let cfg = cfg("1,2,2,1,2,1,1,2");
        let a = MatrixBuffer::<u32>::random(9, 3, 1);
        let b = MatrixBuffer::<u32>::random(3, 10, 2);
        let r = simulate_schedule(&p, &cfg, &a, &b, &SimOptions { padding: true, ..Default::default() }).unwrap();
        let c = count_schedule(&p, &cfg, true).unwrap();
        assert_eq!(
            [c.loads_a, c.loads_b, c.stores_c, c.padded_loads_a, c.padded_loads_b, c.padded_stores_c],
            r.io.counts()
        );
        assert_eq!((c.compute_cycles, c.drain_cycles), (r.compute_cycles, r.drain_cycles));
    }
}
