//! The 1D PE chain: `N_p` PEs in sequence, each keeping a double-buffered
//! value of `A`, with `B` streamed from a buffer ahead of the first PE and
//! the finished output tile drained backwards through the chain head.

use super::{check_inputs, load_a_segment, load_b_segment, IoTrace, MatrixBuffer, SimOptions, SimResult};
use crate::analytic::ProblemSize;
use crate::error::{Error, Result};
use crate::hardware::TileConfig;
use crate::scalar::Element;

struct Pe<T> {
    /// Operand used by the current outer-product row.
    a_front: T,
    /// Operand being shifted in for the next row.
    a_back: T,
    /// This PE's share of the output tile: `x_t*x_b` rows by `y_tot` columns.
    c: Vec<T>,
}

/// A run of `y_t` consecutive cycles that share one `A` value per PE.
#[derive(Clone, Copy)]
struct RowGroup {
    kk: u64,
    ib: u64,
    jb: u64,
    it: u64,
}

pub fn simulate_pe_chain<T: Element>(
    p: &ProblemSize,
    cfg: &TileConfig,
    a: &MatrixBuffer<T>,
    b: &MatrixBuffer<T>,
    opts: &SimOptions,
) -> Result<SimResult<T>> {
    if !cfg.is_chain() {
        return Err(Error::NotChainLayout { x_c: cfg.x_c, y_p: cfg.y_p });
    }
    check_inputs(p, cfg, a, b, opts.padding)?;
    let n_p = cfg.x_p;
    if cfg.block_positions() < n_p {
        return Err(Error::ChainDepth { positions: cfg.block_positions(), pes: n_p });
    }

    let (x_tot, y_tot) = (cfg.x_tot(), cfg.y_tot());
    let ys = y_tot as usize;
    let rows_per_pe = cfg.x_t * cfg.x_b;
    let block_cols = cfg.y_t * cfg.y_c;
    // Local row slot of a PE for (ib, it), and the tile row it maps to.
    let slot = |ib: u64, it: u64| ib * cfg.x_t + it;
    let tile_row = |ib: u64, it: u64, pe: u64| ib * cfg.x_t * n_p + it * n_p + pe;

    let mut pes: Vec<Pe<T>> = (0..n_p)
        .map(|_| Pe { a_front: T::zero(), a_back: T::zero(), c: vec![T::zero(); (rows_per_pe * y_tot) as usize] })
        .collect();
    let mut c = MatrixBuffer::zeros(p.m, p.n);
    let mut io = IoTrace::new(opts.log_accesses);
    let mut cycle = 0u64;
    let mut drain_cycles = 0u64;
    let mut min_gap: Option<u64> = None;
    let mut last_visit = vec![u64::MAX; (x_tot * y_tot) as usize];

    let mut groups = Vec::with_capacity((p.k * cfg.x_b * cfg.y_b * cfg.x_t) as usize);
    for kk in 0..p.k {
        for ib in 0..cfg.x_b {
            for jb in 0..cfg.y_b {
                for it in 0..cfg.x_t {
                    groups.push(RowGroup { kk, ib, jb, it });
                }
            }
        }
    }

    for (ti, i0) in (0..p.m).step_by(x_tot as usize).enumerate() {
        for (tj, j0) in (0..p.n).step_by(ys).enumerate() {
            let tile_id = (ti as u64, tj as u64);
            for pe in &mut pes {
                pe.c.fill(T::zero());
            }
            last_visit.fill(u64::MAX);
            // The Read A / Transpose stream and the Feed B buffer each hold
            // the segment of one k step.
            let mut a_seg: Option<(u64, Vec<T>)> = None;
            let mut b_seg: Option<(u64, Vec<T>)> = None;

            let mut fill = |g: RowGroup, pes: &mut [Pe<T>], io: &mut IoTrace| {
                if a_seg.as_ref().is_none_or(|(k, _)| *k != g.kk) {
                    a_seg = Some((g.kk, load_a_segment(a, io, tile_id, i0, x_tot, g.kk)));
                }
                let seg = &a_seg.as_ref().expect("loaded").1;
                // Values for the far end enter first and shift one PE per cycle.
                for target in (0..n_p).rev() {
                    for q in (1..n_p as usize).rev() {
                        pes[q].a_back = pes[q - 1].a_back;
                    }
                    pes[0].a_back = seg[tile_row(g.ib, g.it, target) as usize];
                }
            };

            // Startup: the first row's operands arrive before compute begins.
            fill(groups[0], &mut pes, &mut io);
            for (gi, &g) in groups.iter().enumerate() {
                for pe in &mut pes {
                    std::mem::swap(&mut pe.a_front, &mut pe.a_back);
                }
                // The next row's operands propagate while this row computes.
                if let Some(&next) = groups.get(gi + 1) {
                    fill(next, &mut pes, &mut io);
                }
                if b_seg.as_ref().is_none_or(|(k, _)| *k != g.kk) {
                    b_seg = Some((g.kk, load_b_segment(b, &mut io, tile_id, j0, y_tot, g.kk)));
                }
                let bs = &b_seg.as_ref().expect("loaded").1;
                let row = slot(g.ib, g.it);
                for jt in 0..cfg.y_t {
                    let col0 = g.jb * block_cols + jt * cfg.y_c;
                    for (q, pe) in pes.iter_mut().enumerate() {
                        let li = tile_row(g.ib, g.it, q as u64);
                        for jc in 0..cfg.y_c {
                            let lj = col0 + jc;
                            let local = (row * y_tot + lj) as usize;
                            pe.c[local] = T::mul_add(pe.c[local], pe.a_front, bs[lj as usize]);
                            let visit = (li * y_tot + lj) as usize;
                            if last_visit[visit] != u64::MAX {
                                let gap = cycle - last_visit[visit];
                                min_gap = Some(min_gap.map_or(gap, |m| m.min(gap)));
                            }
                            last_visit[visit] = cycle;
                        }
                    }
                    cycle += 1;
                }
            }

            // Drain: each PE's rows pass back through its predecessors to the
            // head, y_c elements per cycle.
            for (q, pe) in pes.iter().enumerate() {
                for ib in 0..cfg.x_b {
                    for it in 0..cfg.x_t {
                        let li = tile_row(ib, it, q as u64);
                        let row = slot(ib, it);
                        for group in 0..y_tot / cfg.y_c {
                            for jc in 0..cfg.y_c {
                                let lj = group * cfg.y_c + jc;
                                let (i, j) = (i0 + li, j0 + lj);
                                let real = i < p.m && j < p.n;
                                if real {
                                    c.set(i, j, pe.c[(row * y_tot + lj) as usize]);
                                }
                                io.store_c(tile_id, li * y_tot + lj, real);
                            }
                            drain_cycles += 1;
                        }
                    }
                }
            }
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::drain_efficiency;
    use crate::sim::{reference_mmm, simulate_schedule};
    use crate::Exact;

    #[test]
    fn matches_schedule_on_small_chain() {
        let p = ProblemSize::cube(8).unwrap();
        let cfg = TileConfig::chain(2, 4, 2, 4, 1, 1).unwrap();
        assert_eq!((cfg.x_tot(), cfg.y_tot()), (8, 8));
        let a = MatrixBuffer::<u32>::random(8, 8, 21);
        let b = MatrixBuffer::<u32>::random(8, 8, 22);
        let opts = SimOptions { log_accesses: true, ..Default::default() };
        let chain = simulate_pe_chain(&p, &cfg, &a, &b, &opts).unwrap();
        let sched = simulate_schedule(&p, &cfg, &a, &b, &opts).unwrap();
        assert_eq!(chain.c, sched.c);
        assert_eq!(chain.c, reference_mmm(&a, &b).unwrap());
        assert_eq!(chain.io.counts(), sched.io.counts());
        assert_eq!(chain.io.sorted_log(), sched.io.sorted_log());
        assert_eq!(chain.io.burst_runs, sched.io.burst_runs);
        assert_eq!((chain.compute_cycles, chain.drain_cycles), (sched.compute_cycles, sched.drain_cycles));
    }

    #[test]
    fn single_pe_degenerates_to_schedule() {
        let p = ProblemSize::new(4, 6, 5).unwrap();
        let cfg = TileConfig::chain(3, 1, 2, 1, 2, 2).unwrap();
        let a = MatrixBuffer::<f64>::random(4, 5, 1);
        let b = MatrixBuffer::<f64>::random(5, 6, 2);
        let opts = SimOptions::default();
        let chain = simulate_pe_chain(&p, &cfg, &a, &b, &opts).unwrap();
        let sched = simulate_schedule(&p, &cfg, &a, &b, &opts).unwrap();
        assert_eq!(chain.c, sched.c);
        assert_eq!(chain.io, sched.io);
    }

    #[test]
    fn drain_accounting() {
        let p = ProblemSize::cube(16).unwrap();
        let cfg = TileConfig::chain(2, 4, 4, 8, 1, 1).unwrap();
        assert_eq!(cfg.compute_units(), 8);
        let a = MatrixBuffer::<u16>::random(16, 16, 3);
        let b = MatrixBuffer::<u16>::random(16, 16, 4);
        let r = simulate_pe_chain(&p, &cfg, &a, &b, &SimOptions::default()).unwrap();
        assert_eq!(r.compute_cycles, 512);
        assert_eq!(r.drain_cycles, 128);
        assert_eq!(r.efficiency(), Exact::new(4, 5));
        assert_eq!(r.efficiency(), drain_efficiency(&p, &cfg));
    }

    #[test]
    fn shallow_chain_rejected() {
        let p = ProblemSize::cube(8).unwrap();
        let cfg = TileConfig::chain(1, 8, 1, 4, 1, 1).unwrap();
        let a = MatrixBuffer::<u32>::zeros(8, 8);
        assert_eq!(
            simulate_pe_chain(&p, &cfg, &a, &a, &SimOptions::default()).unwrap_err(),
            Error::ChainDepth { positions: 4, pes: 8 }
        );
    }

    #[test]
    fn grid_config_rejected() {
        let p = ProblemSize::cube(4).unwrap();
        let cfg = TileConfig::new(2, 1, 1, 1, 1, 1, 1, 1).unwrap();
        let a = MatrixBuffer::<u32>::zeros(4, 4);
        assert!(matches!(
            simulate_pe_chain(&p, &cfg, &a, &a, &SimOptions::default()),
            Err(Error::NotChainLayout { .. })
        ));
    }

    #[test]
    fn padded_chain_matches_reference() {
        let p = ProblemSize::new(7, 9, 4).unwrap();
        let cfg = TileConfig::chain(2, 2, 2, 1, 1, 2).unwrap();
        let a = MatrixBuffer::<u8>::random(7, 4, 5);
        let b = MatrixBuffer::<u8>::random(4, 9, 6);
        let opts = SimOptions { padding: true, ..Default::default() };
        let chain = simulate_pe_chain(&p, &cfg, &a, &b, &opts).unwrap();
        let sched = simulate_schedule(&p, &cfg, &a, &b, &opts).unwrap();
        assert_eq!(chain.c, reference_mmm(&a, &b).unwrap());
        assert_eq!(chain.io, sched.io);
    }
}
