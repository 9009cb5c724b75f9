//! Design-space exploration over tile configurations.
//!
//! [`select_parameters`] is the greedy three-step procedure: fix the PE
//! granularity from the bus width, maximize parallelism under the resource
//! budget, then grow the memory tile over the usable memory blocks as squarely
//! as the hierarchy allows. [`sweep`] enumerates everything within bounds and
//! ranks it with the same key, so the two can be cross-checked.

use crate::analytic::{computational_intensity, DesignPoint, ProblemSize};
use crate::error::{Error, Result};
use crate::hardware::{
    candidate_geometries, min_memory_blocks_with, BlockGeometry, DataTypeSpec, HardwareSpec, Layout, TileConfig,
};
use crate::Exact;
use rayon::prelude::*;
use std::cmp::{Ordering, Reverse};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchBounds {
    pub max_x_c: u64,
    pub max_y_c: u64,
    pub max_x_p: u64,
    pub max_y_p: u64,
    pub max_x_t: u64,
    pub max_y_t: u64,
    pub max_x_b: u64,
    pub max_y_b: u64,
    pub layout: Layout,
    /// Assumed clock; used for reporting only, never searched.
    pub frequency_hz: f64,
    pub fixed_y_c: Option<u64>,
    pub fixed_pes: Option<u64>,
}

impl SearchBounds {
    pub fn unbounded(layout: Layout, frequency_hz: f64) -> Self {
        Self {
            max_x_c: u64::MAX,
            max_y_c: u64::MAX,
            max_x_p: u64::MAX,
            max_y_p: u64::MAX,
            max_x_t: u64::MAX,
            max_y_t: u64::MAX,
            max_x_b: u64::MAX,
            max_y_b: u64::MAX,
            layout,
            frequency_hz,
            fixed_y_c: None,
            fixed_pes: None,
        }
    }

    pub fn with_all_max(mut self, max: u64) -> Self {
        self.max_x_c = max;
        self.max_y_c = max;
        self.max_x_p = max;
        self.max_y_p = max;
        self.max_x_t = max;
        self.max_y_t = max;
        self.max_x_b = max;
        self.max_y_b = max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let maxima = [
            self.max_x_c,
            self.max_y_c,
            self.max_x_p,
            self.max_y_p,
            self.max_x_t,
            self.max_y_t,
            self.max_x_b,
            self.max_y_b,
        ];
        if maxima.contains(&0) {
            return Err(Error::InvalidConfig("search bounds must be >= 1".into()));
        }
        if self.fixed_y_c == Some(0) || self.fixed_pes == Some(0) {
            return Err(Error::InvalidConfig("fixed extents must be >= 1".into()));
        }
        Ok(())
    }

    fn x_c_max(&self) -> u64 {
        match self.layout {
            Layout::Chain1D => 1,
            Layout::Grid2D => self.max_x_c,
        }
    }

    fn y_p_max(&self) -> u64 {
        match self.layout {
            Layout::Chain1D => 1,
            Layout::Grid2D => self.max_y_p,
        }
    }
}

/// Lightweight ranking record; full [`DesignPoint`]s are built only for
/// candidates that survive ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Candidate {
    peak_ops: u64,
    intensity: Exact,
    blocks_used: u64,
    imbalance: u64,
    port_width_bits: u32,
    config: TileConfig,
}

impl Candidate {
    fn new(cfg: TileConfig, geom: BlockGeometry, min_blocks: u64) -> Self {
        let (x, y) = (cfg.x_tot(), cfg.y_tot());
        Self {
            peak_ops: 2 * cfg.compute_units(),
            intensity: computational_intensity(x, y),
            blocks_used: min_blocks * cfg.x_b * cfg.y_b,
            imbalance: x.abs_diff(y),
            port_width_bits: geom.port_width_bits,
            config: cfg,
        }
    }

    fn key(&self) -> impl Ord + '_ {
        (
            Reverse(self.peak_ops),
            Reverse(self.intensity),
            Reverse(self.blocks_used),
            self.imbalance,
            Reverse(self.config.units_per_pe()),
            self.port_width_bits,
            self.config.extents(),
        )
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total ranking order: peak ops/cycle descending, computational intensity
/// descending, memory blocks used descending, `|y_tot - x_tot|` ascending,
/// units per PE descending (fewer PEs drain faster), then the smallest port
/// width and lexicographically smallest extents.
pub fn rank_order(a: &DesignPoint, b: &DesignPoint) -> Ordering {
    let ca = Candidate::new(a.config, a.geometry, a.min_blocks);
    let cb = Candidate::new(b.config, b.geometry, b.min_blocks);
    ca.cmp(&cb)
}

/// Designs ordered best first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankedDesigns {
    pub designs: Vec<DesignPoint>,
}

impl RankedDesigns {
    pub fn len(&self) -> usize {
        self.designs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.designs.is_empty()
    }

    pub fn best(&self) -> Option<&DesignPoint> {
        self.designs.first()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DesignPoint> {
        self.designs.iter()
    }
}

/// A compute configuration (`x_c, y_c, x_p, y_p`) with its port geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ComputeShape {
    x_c: u64,
    y_c: u64,
    x_p: u64,
    y_p: u64,
    geometry: BlockGeometry,
    min_blocks: u64,
    block_tiles: u64,
}

impl ComputeShape {
    fn config(&self, x_t: u64, y_t: u64, x_b: u64, y_b: u64) -> TileConfig {
        TileConfig { x_c: self.x_c, y_c: self.y_c, x_p: self.x_p, y_p: self.y_p, x_t, y_t, x_b, y_b }
    }

    fn pes(&self) -> u64 {
        self.x_p * self.y_p
    }
}

/// Largest PE count the resource budget admits for PEs of `units` compute
/// units, with the kind that binds.
fn max_pes_by_resources(hw: &HardwareSpec, dt: &DataTypeSpec, units: u64) -> (u64, Option<String>) {
    let mut best = (u64::MAX, None);
    for (kind, max) in hw.resources_max.iter() {
        let per_pe =
            dt.overhead_per_pe.get(kind).unwrap_or(0) + dt.cost_per_compute_unit.get(kind).unwrap_or(0) * units;
        if per_pe > 0 && max / per_pe < best.0 {
            best = (max / per_pe, Some(kind.to_string()));
        }
    }
    best
}

fn bus_limit(hw: &HardwareSpec, dt: &DataTypeSpec) -> u64 {
    hw.max_bus_width_bits / u64::from(dt.width_bits)
}

fn ensure_inputs(hw: &HardwareSpec, dt: &DataTypeSpec, bounds: &SearchBounds) -> Result<Vec<BlockGeometry>> {
    hw.validate()?;
    dt.validate_against(hw)?;
    bounds.validate()?;
    let geometries = candidate_geometries(hw, dt);
    if geometries.is_empty() {
        return Err(Error::UnsupportedType { width_bits: dt.width_bits, widest_port_bits: hw.widest_port_bits() });
    }
    Ok(geometries)
}

/// All compute shapes within bounds that satisfy resources, buses and memory
/// blocks, one per port geometry.
fn compute_shapes(
    hw: &HardwareSpec,
    dt: &DataTypeSpec,
    p: &ProblemSize,
    bounds: &SearchBounds,
    geometries: &[BlockGeometry],
) -> Vec<ComputeShape> {
    let bus = bus_limit(hw, dt);
    let mut shapes = Vec::new();
    let y_c_range: Vec<u64> = match bounds.fixed_y_c {
        Some(y) => vec![y],
        None => (1..=bus.min(bounds.max_y_c).min(p.n)).collect(),
    };
    for x_c in 1..=bus.min(bounds.x_c_max()).min(p.m) {
        for &y_c in &y_c_range {
            if y_c > bus || y_c > p.n {
                continue;
            }
            let (pe_cap, _) = max_pes_by_resources(hw, dt, x_c * y_c);
            for x_p in 1..=bounds.max_x_p.min(pe_cap).min(p.m / x_c) {
                for y_p in 1..=bounds.y_p_max().min(pe_cap / x_p).min(p.n / y_c) {
                    if bounds.fixed_pes.is_some_and(|n| n != x_p * y_p) {
                        continue;
                    }
                    for &geom in geometries {
                        let probe = TileConfig { x_c, y_c, x_p, y_p, x_t: 1, y_t: 1, x_b: 1, y_b: 1 };
                        let min_blocks = min_memory_blocks_with(&probe, dt.width_bits, geom.port_width_bits);
                        if min_blocks <= hw.memory_blocks_max {
                            shapes.push(ComputeShape {
                                x_c,
                                y_c,
                                x_p,
                                y_p,
                                geometry: geom,
                                min_blocks,
                                block_tiles: hw.memory_blocks_max / min_blocks,
                            });
                        }
                    }
                }
            }
        }
    }
    shapes
}

/// Every memory-tile split for one compute shape that satisfies the capacity,
/// problem-size, chain-depth and accumulation constraints.
fn memory_tiles(
    shape: &ComputeShape,
    dt: &DataTypeSpec,
    p: &ProblemSize,
    bounds: &SearchBounds,
    mut visit: impl FnMut(TileConfig),
) {
    let s_b = shape.geometry.words_per_block;
    let row_steps = p.m / (shape.x_c * shape.x_p);
    let col_steps = p.n / (shape.y_c * shape.y_p);
    for x_b in 1..=bounds.max_x_b.min(shape.block_tiles).min(row_steps) {
        for y_b in 1..=bounds.max_y_b.min(shape.block_tiles / x_b).min(col_steps) {
            for x_t in 1..=bounds.max_x_t.min(s_b).min(row_steps / x_b) {
                for y_t in 1..=bounds.max_y_t.min(s_b / x_t).min(col_steps / y_b) {
                    let cfg = shape.config(x_t, y_t, x_b, y_b);
                    if bounds.layout == Layout::Chain1D && cfg.block_positions() < shape.pes() {
                        continue;
                    }
                    if cfg.memory_positions() < dt.accumulation_latency_cycles {
                        continue;
                    }
                    visit(cfg);
                }
            }
        }
    }
}

fn build_design(
    cand: &Candidate,
    hw: &HardwareSpec,
    dt: &DataTypeSpec,
    p: &ProblemSize,
    layout: Layout,
) -> Result<DesignPoint> {
    let geom = candidate_geometries(hw, dt)
        .into_iter()
        .find(|g| g.port_width_bits == cand.port_width_bits)
        .expect("candidate geometry comes from the same spec");
    let design = DesignPoint::evaluate_at(&cand.config, hw, dt, p, layout, geom)?;
    if !design.is_feasible() {
        let failed: Vec<String> = design.feasibility.failures().map(ToString::to_string).collect();
        return Err(Error::Infeasible(format!(
            "enumerated {} failed re-validation: {}",
            cand.config,
            failed.join("; ")
        )));
    }
    Ok(design)
}

/// Exhaustive enumeration of every feasible configuration within `bounds`,
/// fully ranked. An empty space yields an empty list.
pub fn sweep(hw: &HardwareSpec, dt: &DataTypeSpec, p: &ProblemSize, bounds: &SearchBounds) -> Result<RankedDesigns> {
    sweep_top(hw, dt, p, bounds, usize::MAX)
}

/// Like [`sweep`], keeping only the `limit` best designs.
pub fn sweep_top(
    hw: &HardwareSpec,
    dt: &DataTypeSpec,
    p: &ProblemSize,
    bounds: &SearchBounds,
    limit: usize,
) -> Result<RankedDesigns> {
    let geometries = ensure_inputs(hw, dt, bounds)?;
    let shapes = compute_shapes(hw, dt, p, bounds, &geometries);
    let mut ranked: Vec<Candidate> = shapes
        .par_iter()
        .map(|shape| {
            let mut local = Vec::new();
            memory_tiles(shape, dt, p, bounds, |cfg| local.push(Candidate::new(cfg, shape.geometry, shape.min_blocks)));
            if local.len() > limit {
                local.select_nth_unstable(limit);
                local.truncate(limit);
            }
            local
        })
        .flatten()
        .collect();
    ranked.sort_unstable();
    ranked.truncate(limit);
    let designs = ranked.par_iter().map(|c| build_design(c, hw, dt, p, bounds.layout)).collect::<Result<Vec<_>>>()?;
    Ok(RankedDesigns { designs })
}

/// Outcome of the greedy procedure with a line per decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub design: DesignPoint,
    pub explanation: Vec<String>,
}

/// Greedy parameter selection:
///
/// 1. `x_c = 1`; `y_c` capped by the bus width `y_c * w_c <= w_p,max`.
/// 2. `N_c = N_p * y_c` maximized under the resource budget and the memory
///    blocks, preferring the widest PE on ties.
/// 3. The memory tile maximized over the usable blocks, as square as the
///    compute-tile granularity permits.
///
/// If no memory tile fits for the most parallel compute shape (e.g. a small
/// problem), the next most parallel shape is tried.
pub fn select_parameters(
    hw: &HardwareSpec,
    dt: &DataTypeSpec,
    p: &ProblemSize,
    bounds: &SearchBounds,
) -> Result<Selection> {
    let geometries = ensure_inputs(hw, dt, bounds)?;
    let mut explanation = Vec::new();

    let bus = bus_limit(hw, dt);
    let y_c_max = match bounds.fixed_y_c {
        Some(y) if y > bus => {
            return Err(Error::Infeasible(format!(
                "bus width constraint y_c*w_c <= w_p,max: fixed y_c={y} needs {} bits, limit {}",
                y * u64::from(dt.width_bits),
                hw.max_bus_width_bits
            )))
        }
        Some(y) => y,
        None => bus.min(bounds.max_y_c).min(p.n),
    };
    if y_c_max == 0 {
        return Err(Error::Infeasible(format!(
            "bus width constraint y_c*w_c <= w_p,max: w_c={} exceeds w_p,max={}",
            dt.width_bits, hw.max_bus_width_bits
        )));
    }
    let y_c_binding = if bounds.fixed_y_c.is_some() {
        "fixed by bounds"
    } else if y_c_max == bus {
        "bus width y_c*w_c <= w_p,max binds"
    } else if y_c_max == p.n {
        "matrix width n binds"
    } else {
        "search bound binds"
    };
    explanation.push(format!(
        "step 1: x_c = 1, y_c <= {y_c_max} ({y_c_binding}; w_c={} bits, w_p,max={} bits)",
        dt.width_bits, hw.max_bus_width_bits
    ));

    // Step 2: every (y_c, N_p) pair, most parallel first.
    let mut shapes: Vec<(u64, u64, u64, String)> = Vec::new();
    let y_cs: Vec<u64> = match bounds.fixed_y_c {
        Some(y) => vec![y],
        None => (1..=y_c_max).collect(),
    };
    for y_c in y_cs {
        let (by_resources, kind) = max_pes_by_resources(hw, dt, y_c);
        let by_blocks = geometries
            .iter()
            .map(|g| {
                let probe = TileConfig { y_c, ..TileConfig::unit() };
                hw.memory_blocks_max / min_memory_blocks_with(&probe, dt.width_bits, g.port_width_bits)
            })
            .max()
            .unwrap_or(0);
        let by_rows = p.m;
        let limits = [
            (by_resources, format!("resource {}", kind.unwrap_or_default())),
            (by_blocks, "memory blocks N_b,min <= N_b,max".to_string()),
            (by_rows, "matrix height m".to_string()),
            (bounds.max_x_p.saturating_mul(bounds.y_p_max()), "search bound".to_string()),
        ];
        let (pes, binding) = limits.iter().min_by_key(|(v, _)| *v).cloned().expect("non-empty");
        let pes = match bounds.fixed_pes {
            Some(n) if n <= pes => n,
            Some(_) => continue,
            None => pes,
        };
        for n_p in (1..=pes).rev() {
            let why = if n_p == pes { binding.clone() } else { format!("reduced from {pes}") };
            shapes.push((y_c * n_p, y_c, n_p, why));
            if bounds.fixed_pes.is_some() {
                break;
            }
        }
    }
    shapes.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
    if shapes.is_empty() {
        return Err(Error::Infeasible(
            "no PE configuration satisfies the resource budget (N_p*(r_p + r_c*y_c) <= r_max)".into(),
        ));
    }

    let mut first_failure = None;
    for (n_c, y_c, n_p, why) in shapes {
        let (x_p, y_p) = match bounds.layout {
            Layout::Chain1D => (n_p, 1),
            Layout::Grid2D => match grid_factorization(n_p, bounds, p, y_c) {
                Some(f) => f,
                None => continue,
            },
        };
        if x_p > bounds.max_x_p || x_p > p.m {
            continue;
        }
        match best_memory_tile(hw, dt, p, bounds, &geometries, y_c, x_p, y_p) {
            Some((cand, shape)) => {
                explanation.push(format!("step 2: N_c = N_p*y_c = {n_p}*{y_c} = {n_c} (x_p={x_p}, y_p={y_p}; {why})"));
                let design = build_design(&cand, hw, dt, p, bounds.layout)?;
                explanation.push(format!(
                    "step 3: w_b={} bits, s_b={}, N_b,min={}, N_b={} ({:.1}% of {} blocks); memory tile {}x{} with x_t={} y_t={} x_b={} y_b={}",
                    shape.geometry.port_width_bits,
                    shape.geometry.words_per_block,
                    shape.min_blocks,
                    shape.min_blocks * shape.block_tiles,
                    100.0 * (shape.min_blocks * shape.block_tiles) as f64 / hw.memory_blocks_max as f64,
                    hw.memory_blocks_max,
                    design.x_tot,
                    design.y_tot,
                    design.config.x_t,
                    design.config.y_t,
                    design.config.x_b,
                    design.config.y_b,
                ));
                return Ok(Selection { design, explanation });
            }
            None => {
                first_failure.get_or_insert_with(|| {
                    format!("no memory tile fits for N_c={n_c} (y_c={y_c}, x_p={x_p}, y_p={y_p}) within bounds and problem {p}")
                });
            }
        }
    }
    Err(Error::Infeasible(first_failure.unwrap_or_else(|| "no feasible configuration within bounds".into())))
}

fn grid_factorization(n_p: u64, bounds: &SearchBounds, p: &ProblemSize, y_c: u64) -> Option<(u64, u64)> {
    (1..=n_p)
        .filter(|x| n_p.is_multiple_of(*x))
        .map(|x| (x, n_p / x))
        .filter(|&(x, y)| x <= bounds.max_x_p && y <= bounds.max_y_p && x <= p.m && y * y_c <= p.n)
        .min_by_key(|&(x, y)| (x.abs_diff(y * y_c), x))
}

#[allow(clippy::too_many_arguments)]
fn best_memory_tile(
    hw: &HardwareSpec,
    dt: &DataTypeSpec,
    p: &ProblemSize,
    bounds: &SearchBounds,
    geometries: &[BlockGeometry],
    y_c: u64,
    x_p: u64,
    y_p: u64,
) -> Option<(Candidate, ComputeShape)> {
    let mut best: Option<(Candidate, ComputeShape)> = None;
    for &geom in geometries {
        let probe = TileConfig { y_c, x_p, y_p, ..TileConfig::unit() };
        let min_blocks = min_memory_blocks_with(&probe, dt.width_bits, geom.port_width_bits);
        if min_blocks > hw.memory_blocks_max {
            continue;
        }
        let shape = ComputeShape {
            x_c: 1,
            y_c,
            x_p,
            y_p,
            geometry: geom,
            min_blocks,
            block_tiles: hw.memory_blocks_max / min_blocks,
        };
        let s_b = geom.words_per_block;
        let row_steps = p.m / x_p;
        let col_steps = p.n / (y_c * y_p);
        // Intensity, chain depth and collision distance all grow with y_t,
        // so only the largest y_t for each (x_b, y_b, x_t) can win.
        for x_b in 1..=bounds.max_x_b.min(shape.block_tiles).min(row_steps) {
            for y_b in 1..=bounds.max_y_b.min(shape.block_tiles / x_b).min(col_steps) {
                for x_t in 1..=bounds.max_x_t.min(s_b).min(row_steps / x_b) {
                    let y_t = bounds.max_y_t.min(s_b / x_t).min(col_steps / y_b);
                    if y_t == 0 {
                        continue;
                    }
                    let cfg = shape.config(x_t, y_t, x_b, y_b);
                    if bounds.layout == Layout::Chain1D && cfg.block_positions() < shape.pes() {
                        continue;
                    }
                    if cfg.memory_positions() < dt.accumulation_latency_cycles {
                        continue;
                    }
                    let cand = Candidate::new(cfg, geom, min_blocks);
                    if best.as_ref().is_none_or(|(b, _)| cand < *b) {
                        best = Some((cand, shape));
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardware::{ArithmeticKind, ResourceVector};

    fn toy() -> (HardwareSpec, DataTypeSpec) {
        let hw = HardwareSpec {
            name: "toy".into(),
            resources_max: ResourceVector::new([("DSP", 4)]).unwrap(),
            memory_blocks_max: 4,
            block_capacity_bits: 36864,
            supported_port_widths_bits: vec![36],
            max_bus_width_bits: 64,
            target_frequency_hz: 100e6,
        };
        let dt = DataTypeSpec {
            name: "fp32".into(),
            width_bits: 32,
            cost_per_compute_unit: ResourceVector::new([("DSP", 1)]).unwrap(),
            overhead_per_pe: ResourceVector::new([("DSP", 0)]).unwrap(),
            accumulation_latency_cycles: 1,
            arithmetic_kind: ArithmeticKind::Float,
        };
        (hw, dt)
    }

    #[test]
    fn toy_greedy_pick() {
        let (hw, dt) = toy();
        let p = ProblemSize::cube(256).unwrap();
        let sel = select_parameters(&hw, &dt, &p, &SearchBounds::unbounded(Layout::Chain1D, 100e6)).unwrap();
        let d = &sel.design;
        assert_eq!((d.config.x_c, d.config.y_c, d.config.x_p, d.config.y_p), (1, 2, 2, 1));
        assert_eq!(d.min_blocks, 4);
        assert_eq!(d.usable_blocks, Some(4));
        assert_eq!(d.capacity_words, Some(4096));
        assert!(u128::from(d.x_tot) * u128::from(d.y_tot) <= 4096);
        assert_eq!((d.x_tot, d.y_tot), (64, 64));
        assert_eq!(sel.explanation.len(), 3);
    }

    #[test]
    fn toy_greedy_matches_sweep_top() {
        let (hw, dt) = toy();
        let p = ProblemSize::cube(64).unwrap();
        let bounds = SearchBounds::unbounded(Layout::Chain1D, 100e6);
        let greedy = select_parameters(&hw, &dt, &p, &bounds).unwrap().design;
        let ranked = sweep(&hw, &dt, &p, &bounds).unwrap();
        assert_eq!(ranked.best().unwrap().config, greedy.config);
    }

    #[test]
    fn single_candidate_space() {
        let (hw, dt) = toy();
        let p = ProblemSize::cube(8).unwrap();
        let bounds = SearchBounds::unbounded(Layout::Chain1D, 100e6).with_all_max(1);
        let ranked = sweep(&hw, &dt, &p, &bounds).unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked.best().unwrap().config, TileConfig::unit());
    }

    #[test]
    fn empty_space_is_not_an_error() {
        let (hw, mut dt) = toy();
        dt.overhead_per_pe = ResourceVector::new([("DSP", 10)]).unwrap();
        let p = ProblemSize::cube(8).unwrap();
        let ranked = sweep(&hw, &dt, &p, &SearchBounds::unbounded(Layout::Chain1D, 1e8).with_all_max(4)).unwrap();
        assert!(ranked.is_empty());
        assert!(matches!(
            select_parameters(&hw, &dt, &p, &SearchBounds::unbounded(Layout::Chain1D, 1e8)),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn impossible_bus_is_explained() {
        let (mut hw, dt) = toy();
        hw.max_bus_width_bits = 16;
        let err =
            select_parameters(&hw, &dt, &ProblemSize::cube(8).unwrap(), &SearchBounds::unbounded(Layout::Chain1D, 1e8))
                .unwrap_err();
        assert!(err.to_string().contains("bus width constraint y_c*w_c <= w_p,max"), "{err}");
    }

    #[test]
    fn degenerate_single_unit_design() {
        let (hw, dt) = toy();
        let p = ProblemSize::cube(128).unwrap();
        let mut bounds = SearchBounds::unbounded(Layout::Chain1D, 1e8);
        bounds.fixed_y_c = Some(1);
        bounds.fixed_pes = Some(1);
        let d = select_parameters(&hw, &dt, &p, &bounds).unwrap().design;
        assert_eq!(d.compute_units, 1);
        let s = d.capacity_words.unwrap();
        assert_eq!((d.x_tot, d.y_tot), crate::analytic::optimal_square_tile(s));
        assert_eq!(d.io_volume, Some(crate::analytic::io_volume(&p, d.x_tot, d.y_tot).unwrap()));
    }

    #[test]
    fn two_dimensional_grid_selection() {
        let (mut hw, dt) = toy();
        hw.resources_max = ResourceVector::new([("DSP", 16)]).unwrap();
        hw.memory_blocks_max = 64;
        let p = ProblemSize::cube(512).unwrap();
        let d = select_parameters(&hw, &dt, &p, &SearchBounds::unbounded(Layout::Grid2D, 1e8)).unwrap().design;
        assert_eq!(d.compute_units, 16);
        assert!(d.config.y_p > 1, "{}", d.config);
        assert!(d.is_feasible());
    }
}
