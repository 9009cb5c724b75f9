//! Closed-form performance and I/O models.
//!
//! Intensities, volumes and efficiencies are exact rationals; they are only
//! rounded for display.

use crate::error::{Error, Result};
use crate::hardware::{
    block_words, check_resource_feasibility_at, min_memory_blocks_with, BlockGeometry, Constraint, ConstraintCheck,
    DataTypeSpec, FeasibilityReport, HardwareSpec, Layout, TileConfig,
};
use crate::scalar::Real;
use crate::Exact;
use num_integer::Roots;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemSize {
    pub m: u64,
    pub n: u64,
    pub k: u64,
}

impl ProblemSize {
    pub fn new(m: u64, n: u64, k: u64) -> Result<Self> {
        if m == 0 || n == 0 || k == 0 {
            return Err(Error::InvalidConfig(format!("matrix extents must be >= 1 (got {m},{n},{k})")));
        }
        Ok(Self { m, n, k })
    }

    pub fn cube(size: u64) -> Result<Self> {
        Self::new(size, size, size)
    }

    /// Multiply-add count `F = m*n*k`.
    pub fn multiply_adds(&self) -> u128 {
        u128::from(self.m) * u128::from(self.n) * u128::from(self.k)
    }
}

impl fmt::Display for ProblemSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.n, self.k)
    }
}

impl std::str::FromStr for ProblemSize {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<u64> = s
            .split([',', 'x'])
            .map(|p| p.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidConfig(format!("problem `{s}`: {e}")))?;
        match parts[..] {
            [size] => Self::cube(size),
            [m, n, k] => Self::new(m, n, k),
            _ => Err(Error::InvalidConfig(format!("problem `{s}` must be `m,n,k` or a single size"))),
        }
    }
}

/// `T = m*n*k / (f * N_c)` in seconds.
pub fn execution_time<F: Real>(p: &ProblemSize, compute_units: u64, frequency_hz: F) -> F {
    let work = F::from_u128(p.multiply_adds()).expect("representable work");
    let units = F::from_u64(compute_units).expect("representable unit count");
    work / (frequency_hz * units)
}

pub fn tile_extents(cfg: &TileConfig) -> (u64, u64) {
    (cfg.x_tot(), cfg.y_tot())
}

/// Multiply-adds per element loaded: `x*y / (x + y)`.
pub fn computational_intensity(x_tot: u64, y_tot: u64) -> Exact {
    let (x, y) = (u128::from(x_tot), u128::from(y_tot));
    Exact::new(x * y, x + y)
}

/// Operations (multiply and add counted separately) per byte moved:
/// `2 * CI / (w_c / 8)`.
pub fn arithmetic_intensity(x_tot: u64, y_tot: u64, width_bits: u32) -> Exact {
    computational_intensity(x_tot, y_tot) * Exact::new(16, u128::from(width_bits))
}

/// Memory tiles covering the output, counting partial edge tiles.
pub fn memory_tile_count(p: &ProblemSize, x_tot: u64, y_tot: u64) -> u128 {
    u128::from(p.m.div_ceil(x_tot)) * u128::from(p.n.div_ceil(y_tot))
}

/// Off-chip element transfers `Q = m*n + tiles * k * (x_tot + y_tot)`.
///
/// When `x_tot | m` and `y_tot | n` this is exactly
/// `m*n*(1 + k*(1/x_tot + 1/y_tot))`; otherwise edge tiles are charged at
/// full width, matching a zero-padded execution.
pub fn io_volume(p: &ProblemSize, x_tot: u64, y_tot: u64) -> Result<u128> {
    check_tile_fits(p, x_tot, y_tot)?;
    let mn = u128::from(p.m) * u128::from(p.n);
    Ok(mn + memory_tile_count(p, x_tot, y_tot) * u128::from(p.k) * u128::from(x_tot + y_tot))
}

/// The unrounded volume `m*n*(1 + k*(1/x_tot + 1/y_tot))`, used for average
/// bandwidth figures where tiles need not divide the matrix.
pub fn io_volume_model(p: &ProblemSize, x_tot: u64, y_tot: u64) -> Exact {
    let mn = Exact::from_integer(u128::from(p.m) * u128::from(p.n));
    let k = Exact::from_integer(u128::from(p.k));
    mn * (Exact::from_integer(1) + k * (Exact::new(1, u128::from(x_tot)) + Exact::new(1, u128::from(y_tot))))
}

fn check_tile_fits(p: &ProblemSize, x_tot: u64, y_tot: u64) -> Result<()> {
    if x_tot == 0 || y_tot == 0 {
        return Err(Error::InvalidConfig("tile extents must be >= 1".into()));
    }
    if x_tot > p.m {
        return Err(Error::TileExceedsMatrix { axis: "m", extent: p.m, tile: x_tot });
    }
    if y_tot > p.n {
        return Err(Error::TileExceedsMatrix { axis: "n", extent: p.n, tile: y_tot });
    }
    Ok(())
}

/// Unconstrained I/O-optimal memory tile for `S` words: a `floor(sqrt S)` square.
pub fn optimal_square_tile(capacity_words: u64) -> (u64, u64) {
    let side = capacity_words.sqrt().max(1);
    (side, side)
}

/// Fraction of cycles spent computing when each memory tile is drained
/// sequentially: `(mnk/N_c) / (mnk/N_c + mn/y_c) = k*y_c / (k*y_c + N_c)`.
/// For the 1D chain this is `k / (k + N_p)`.
pub fn drain_efficiency(p: &ProblemSize, cfg: &TileConfig) -> Exact {
    let ky = u128::from(p.k) * u128::from(cfg.y_c);
    Exact::new(ky, ky + u128::from(cfg.compute_units()))
}

/// Efficiency measured from cycle counters.
pub fn efficiency_from_cycles(compute_cycles: u64, drain_cycles: u64) -> Exact {
    Exact::new(u128::from(compute_cycles), u128::from(compute_cycles) + u128::from(drain_cycles))
}

/// Cycles between successive accumulations into the same element of `C`:
/// one visit per compute-tile position of the memory tile.
pub fn collision_distance(cfg: &TileConfig) -> u64 {
    cfg.x_t * cfg.x_b * cfg.y_t * cfg.y_b
}

pub fn pipeline_safe(cfg: &TileConfig, accumulation_latency_cycles: u64) -> bool {
    collision_distance(cfg) >= accumulation_latency_cycles
}

/// Average bandwidth in bytes per second for `volume` elements over `seconds`.
pub fn average_bandwidth<F: Real>(volume_elements: F, width_bits: u32, seconds: F) -> F {
    let bytes = F::from_u32(width_bits).expect("width") / F::from_u32(8).expect("8");
    volume_elements * bytes / seconds
}

/// Bandwidth needed to sustain `ops_per_second` (multiply and add counted
/// separately) on problem `p`, using the unrounded volume model.
pub fn bandwidth_at_throughput(p: &ProblemSize, x_tot: u64, y_tot: u64, width_bits: u32, ops_per_second: f64) -> f64 {
    let q = io_volume_model(p, x_tot, y_tot).to_f64().expect("finite volume");
    let seconds = 2.0 * p.multiply_adds() as f64 / ops_per_second;
    average_bandwidth(q, width_bits, seconds)
}

/// Asymptotic (large-`k`) bandwidth at full throughput: `f * N_c / CI` elements
/// per second.
pub fn streaming_bandwidth(x_tot: u64, y_tot: u64, width_bits: u32, frequency_hz: f64, compute_units: u64) -> f64 {
    let ci = computational_intensity(x_tot, y_tot).to_f64().expect("finite");
    frequency_hz * compute_units as f64 / ci * f64::from(width_bits) / 8.0
}

/// A tile configuration with every derived metric.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub config: TileConfig,
    pub layout: Layout,
    pub problem: ProblemSize,
    pub width_bits: u32,
    pub compute_units: u64,
    pub pe_count: u64,
    pub geometry: BlockGeometry,
    /// `N_b,min`.
    pub min_blocks: u64,
    /// `N_b`, absent when `N_b,min > N_b,max`.
    pub usable_blocks: Option<u64>,
    /// Blocks the memory tile occupies: `N_b,min * x_b * y_b`.
    pub blocks_used: u64,
    /// `S = N_b * s_b`.
    pub capacity_words: Option<u64>,
    /// Output elements the usable blocks can hold as coalesced PE words:
    /// `N_c * s_b * floor(N_b,max / N_b,min)`.
    pub tile_capacity: Option<u64>,
    pub x_tot: u64,
    pub y_tot: u64,
    pub io_volume: Option<u128>,
    pub computational_intensity: Exact,
    pub arithmetic_intensity: Exact,
    pub peak_ops_per_cycle: u64,
    pub drain_efficiency: Exact,
    pub collision_distance: u64,
    pub feasibility: FeasibilityReport,
}

impl DesignPoint {
    /// Evaluates `cfg` at the narrowest port width holding one element.
    pub fn evaluate(
        cfg: &TileConfig,
        hw: &HardwareSpec,
        dt: &DataTypeSpec,
        problem: &ProblemSize,
        layout: Layout,
    ) -> Result<Self> {
        Self::evaluate_at(cfg, hw, dt, problem, layout, block_words(hw, dt)?)
    }

    pub fn evaluate_at(
        cfg: &TileConfig,
        hw: &HardwareSpec,
        dt: &DataTypeSpec,
        problem: &ProblemSize,
        layout: Layout,
        geometry: BlockGeometry,
    ) -> Result<Self> {
        cfg.validate()?;
        if layout == Layout::Chain1D && !cfg.is_chain() {
            return Err(Error::NotChainLayout { x_c: cfg.x_c, y_p: cfg.y_p });
        }
        let mut feasibility = check_resource_feasibility_at(cfg, hw, dt, layout, geometry)?;

        let min_blocks = min_memory_blocks_with(cfg, dt.width_bits, geometry.port_width_bits);
        let block_tiles_max = hw.memory_blocks_max / min_blocks;
        let usable_blocks = (block_tiles_max > 0).then(|| block_tiles_max * min_blocks);
        let capacity_words = usable_blocks.map(|nb| nb * geometry.words_per_block);
        let tile_capacity = usable_blocks.map(|_| cfg.compute_units() * geometry.words_per_block * block_tiles_max);
        let (x_tot, y_tot) = tile_extents(cfg);

        feasibility.push(ConstraintCheck::at_most(
            Constraint::BlockTileCapacity,
            cfg.block_positions(),
            geometry.words_per_block,
        ));
        feasibility.push(ConstraintCheck::at_most(Constraint::BlockTileCount, cfg.x_b * cfg.y_b, block_tiles_max));
        feasibility.push(ConstraintCheck::at_most(Constraint::TileFitsRows, x_tot, problem.m));
        feasibility.push(ConstraintCheck::at_most(Constraint::TileFitsCols, y_tot, problem.n));
        let cap = u128::from(tile_capacity.unwrap_or(0));
        feasibility.push(ConstraintCheck::at_most(Constraint::TileWords, u128::from(x_tot) * u128::from(y_tot), cap));
        feasibility.push(ConstraintCheck::at_most(Constraint::TileLoadWords, x_tot + y_tot, cap));
        feasibility.push(ConstraintCheck::at_least(
            Constraint::AccumulationDistance,
            collision_distance(cfg),
            dt.accumulation_latency_cycles,
        ));

        Ok(Self {
            config: *cfg,
            layout,
            problem: *problem,
            width_bits: dt.width_bits,
            compute_units: cfg.compute_units(),
            pe_count: cfg.pe_count(),
            geometry,
            min_blocks,
            usable_blocks,
            blocks_used: min_blocks * cfg.x_b * cfg.y_b,
            capacity_words,
            tile_capacity,
            x_tot,
            y_tot,
            io_volume: io_volume(problem, x_tot, y_tot).ok(),
            computational_intensity: computational_intensity(x_tot, y_tot),
            arithmetic_intensity: arithmetic_intensity(x_tot, y_tot, dt.width_bits),
            peak_ops_per_cycle: 2 * cfg.compute_units(),
            drain_efficiency: drain_efficiency(problem, cfg),
            collision_distance: collision_distance(cfg),
            feasibility,
        })
    }

    pub fn is_feasible(&self) -> bool {
        self.feasibility.all_passed()
    }

    pub fn execution_time(&self, frequency_hz: f64) -> f64 {
        execution_time(&self.problem, self.compute_units, frequency_hz)
    }

    /// Average bandwidth (bytes/s) at peak throughput for frequency `f`.
    pub fn bandwidth_at_frequency(&self, frequency_hz: f64) -> f64 {
        let q = io_volume_model(&self.problem, self.x_tot, self.y_tot).to_f64().unwrap_or(f64::NAN);
        average_bandwidth(q, self.width_bits, self.execution_time(frequency_hz))
    }

    pub fn bandwidth_at_throughput(&self, ops_per_second: f64) -> f64 {
        bandwidth_at_throughput(&self.problem, self.x_tot, self.y_tot, self.width_bits, ops_per_second)
    }

    pub fn memory_utilization(&self, max_blocks: u64) -> f64 {
        self.blocks_used as f64 / max_blocks as f64
    }
}

pub fn to_f64(value: Exact) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn execution_time_examples() {
        let unit = ProblemSize::cube(1).unwrap();
        assert_eq!(execution_time(&unit, 1, 1.0f64), 1.0);
        let p = ProblemSize::cube(16384).unwrap();
        let t = execution_time(&p, 1536, 145.7e6f64);
        assert!(approx(t, 19.65, 1e-3), "{t}");
        assert_eq!(execution_time(&p, 3072, 145.7e6f64), t / 2.0);
        let t32 = execution_time(&p, 1536, 145.7e6f32);
        assert!(approx(f64::from(t32), t, 1e-6));
    }

    #[test]
    fn tile_extent_examples() {
        let cfg = TileConfig::chain(8, 192, 5, 204, 1, 1).unwrap();
        assert_eq!(tile_extents(&cfg), (960, 1632));
        assert_eq!(tile_extents(&TileConfig::unit()), (1, 1));
        let cfg = TileConfig::new(2, 1, 3, 1, 5, 1, 7, 1).unwrap();
        assert_eq!(cfg.x_tot(), 210);
    }

    #[test]
    fn intensity_examples() {
        let ci = computational_intensity(960, 1632);
        assert!(approx(to_f64(ci), 604.444, 1e-5));
        assert!(approx(to_f64(arithmetic_intensity(960, 1632, 32)), 302.0, 0.005));
        assert!(approx(to_f64(arithmetic_intensity(1904, 1920, 16)), 956.0, 0.005));
        assert_eq!(computational_intensity(2, 2), Exact::from_integer(1));
        assert_eq!(computational_intensity(37, 37), Exact::new(37, 2));
    }

    #[test]
    fn io_volume_examples() {
        assert_eq!(io_volume(&ProblemSize::cube(4).unwrap(), 2, 2).unwrap(), 80);
        assert_eq!(io_volume(&ProblemSize::cube(1).unwrap(), 1, 1).unwrap(), 3);
        // m = n = k = S with square sqrt(S) tiles: 2mnk/sqrt(S) + mn.
        let s = 64u64;
        let p = ProblemSize::cube(s).unwrap();
        assert_eq!(io_volume(&p, 8, 8).unwrap(), u128::from(2 * s * s * s / 8 + s * s));
        assert!(matches!(
            io_volume(&ProblemSize::cube(4).unwrap(), 8, 2),
            Err(Error::TileExceedsMatrix { axis: "m", .. })
        ));
    }

    #[test]
    fn io_volume_matches_model_when_divisible() {
        let p = ProblemSize::new(48, 60, 7).unwrap();
        for (x, y) in [(1, 1), (4, 5), (16, 12), (48, 60), (3, 30)] {
            assert_eq!(Exact::from_integer(io_volume(&p, x, y).unwrap()), io_volume_model(&p, x, y));
        }
        // Non-divisible: ceilings charge whole edge tiles.
        let p = ProblemSize::new(5, 5, 2).unwrap();
        assert_eq!(io_volume(&p, 2, 2).unwrap(), 25 + 9 * 2 * 4);
    }

    #[test]
    fn square_tile_examples() {
        assert_eq!(optimal_square_tile(1024), (32, 32));
        assert_eq!(optimal_square_tile(1000), (31, 31));
        assert_eq!(optimal_square_tile(1), (1, 1));
    }

    #[test]
    fn square_tile_is_brute_force_optimal() {
        let s = 1024u64;
        let p = ProblemSize::cube(s).unwrap();
        let (x, y) = optimal_square_tile(s);
        let best = io_volume(&p, x, y).unwrap();
        for a in 1..=s {
            for b in 1..=(s / a) {
                if a + b <= s {
                    assert!(best <= io_volume(&p, a, b).unwrap(), "({a},{b}) beats the square");
                }
            }
        }
    }

    #[test]
    fn drain_efficiency_examples() {
        let chain = |x_p| TileConfig::chain(1, x_p, 1, x_p, 1, 1).unwrap();
        let p = |k| ProblemSize::new(1, 1, k).unwrap();
        assert_eq!(drain_efficiency(&p(192), &chain(192)), Exact::new(1, 2));
        assert!(drain_efficiency(&p(384), &chain(192)) > drain_efficiency(&p(192), &chain(192)));
        assert!(approx(to_f64(drain_efficiency(&p(16384), &chain(192))), 0.9884, 1e-4));
        // y_c > 1 keeps the k / (k + N_p) form on the chain.
        let cfg = TileConfig::chain(2, 4, 2, 4, 1, 1).unwrap();
        assert_eq!(drain_efficiency(&p(16), &cfg), Exact::new(16, 20));
    }

    #[test]
    fn collision_examples() {
        let cfg = TileConfig::chain(1, 1, 32, 32, 1, 1).unwrap();
        assert_eq!(collision_distance(&cfg), 1024);
        let short = TileConfig::chain(1, 1, 2, 2, 1, 1).unwrap();
        assert!(!pipeline_safe(&short, 8));
        let fp32 = TileConfig::chain(8, 192, 5, 204, 1, 1).unwrap();
        assert_eq!(collision_distance(&fp32), 1020);
        assert!(pipeline_safe(&fp32, 16));
    }

    #[test]
    fn problem_parsing() {
        assert_eq!("4,5,6".parse::<ProblemSize>().unwrap(), ProblemSize::new(4, 5, 6).unwrap());
        assert_eq!("8".parse::<ProblemSize>().unwrap(), ProblemSize::cube(8).unwrap());
        assert!("0,1,1".parse::<ProblemSize>().is_err());
    }
}
