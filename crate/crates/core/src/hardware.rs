//! Hardware resources, data types, tile configurations and the formulas that
//! map a tile configuration onto compute-unit and memory-block consumption.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Amounts of named logic resources (e.g. `LUT`, `FF`, `DSP`).
///
/// Kinds are free-form so targets with native floating-point DSPs and
/// targets that build arithmetic out of several primitives both fit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceVector(BTreeMap<String, u64>);

impl ResourceVector {
    pub fn new<K: Into<String>>(entries: impl IntoIterator<Item = (K, u64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (kind, amount) in entries {
            let kind = kind.into();
            if map.insert(kind.clone(), amount).is_some() {
                return Err(Error::DuplicateResourceKind(kind));
            }
        }
        Ok(Self(map))
    }

    pub fn get(&self, kind: &str) -> Option<u64> {
        self.0.get(kind).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn kinds(&self) -> Vec<String> {
        self.0.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, factor: u64) -> Self {
        Self(self.0.iter().map(|(k, v)| (k.clone(), v * factor)).collect())
    }

    pub fn same_kinds(&self, other: &Self) -> bool {
        self.0.keys().eq(other.0.keys())
    }

    pub fn ensure_same_kinds(&self, other: &Self) -> Result<()> {
        if self.same_kinds(other) {
            Ok(())
        } else {
            Err(Error::ResourceKindMismatch { left: self.kinds(), right: other.kinds() })
        }
    }
}

impl fmt::Display for ResourceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layout {
    /// PEs collapsed into a single chain: `x_c = 1`, `y_p = 1`.
    #[serde(rename = "1d")]
    Chain1D,
    #[serde(rename = "2d")]
    Grid2D,
}

impl std::str::FromStr for Layout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1d" | "chain" => Ok(Self::Chain1D),
            "2d" | "grid" => Ok(Self::Grid2D),
            other => Err(Error::InvalidConfig(format!("unknown layout `{other}` (expected 1d or 2d)"))),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Chain1D => "1d",
            Self::Grid2D => "2d",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardwareSpec {
    pub name: String,
    pub resources_max: ResourceVector,
    pub memory_blocks_max: u64,
    pub block_capacity_bits: u64,
    /// Configurable block port widths, strictly ascending.
    pub supported_port_widths_bits: Vec<u32>,
    pub max_bus_width_bits: u64,
    pub target_frequency_hz: f64,
}

impl HardwareSpec {
    pub fn validate(&self) -> Result<()> {
        if self.memory_blocks_max == 0 {
            return Err(Error::InvalidConfig("memory_blocks_max must be at least 1".into()));
        }
        if self.supported_port_widths_bits.is_empty() {
            return Err(Error::InvalidConfig("at least one port width is required".into()));
        }
        if !self.supported_port_widths_bits.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig("port widths must be strictly ascending".into()));
        }
        for &w in &self.supported_port_widths_bits {
            if w == 0 || !self.block_capacity_bits.is_multiple_of(u64::from(w)) {
                return Err(Error::InvalidConfig(format!(
                    "block capacity {} bits is not divisible by port width {w}",
                    self.block_capacity_bits
                )));
            }
        }
        if self.max_bus_width_bits == 0 {
            return Err(Error::InvalidConfig("max_bus_width_bits must be positive".into()));
        }
        if self.target_frequency_hz.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidConfig("target frequency must be positive".into()));
        }
        Ok(())
    }

    pub fn widest_port_bits(&self) -> u32 {
        *self.supported_port_widths_bits.last().unwrap_or(&0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticKind {
    #[serde(alias = "int", alias = "integer")]
    Integer,
    #[serde(alias = "fp", alias = "floating-point")]
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataTypeSpec {
    pub name: String,
    pub width_bits: u32,
    pub cost_per_compute_unit: ResourceVector,
    pub overhead_per_pe: ResourceVector,
    pub accumulation_latency_cycles: u64,
    pub arithmetic_kind: ArithmeticKind,
}

impl DataTypeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width_bits == 0 {
            return Err(Error::InvalidConfig(format!("{}: width_bits must be at least 1", self.name)));
        }
        if !self.cost_per_compute_unit.iter().any(|(_, v)| v > 0) {
            return Err(Error::InvalidConfig(format!(
                "{}: a compute unit must consume at least one resource",
                self.name
            )));
        }
        if self.accumulation_latency_cycles == 0 {
            return Err(Error::InvalidConfig(format!("{}: accumulation latency must be positive", self.name)));
        }
        self.cost_per_compute_unit.ensure_same_kinds(&self.overhead_per_pe)
    }

    pub fn validate_against(&self, hw: &HardwareSpec) -> Result<()> {
        self.validate()?;
        hw.resources_max.ensure_same_kinds(&self.cost_per_compute_unit)
    }

    pub fn bytes_per_element(&self) -> f64 {
        f64::from(self.width_bits) / 8.0
    }
}

/// The eight tile extents of the hierarchy: compute units per PE (`c`), PEs
/// per compute tile (`p`), compute tiles per block tile (`t`) and block tiles
/// per memory tile (`b`), along the row (`x`) and column (`y`) dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileConfig {
    pub x_c: u64,
    pub y_c: u64,
    pub x_p: u64,
    pub y_p: u64,
    pub x_t: u64,
    pub y_t: u64,
    pub x_b: u64,
    pub y_b: u64,
}

impl TileConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(x_c: u64, y_c: u64, x_p: u64, y_p: u64, x_t: u64, y_t: u64, x_b: u64, y_b: u64) -> Result<Self> {
        let cfg = Self { x_c, y_c, x_p, y_p, x_t, y_t, x_b, y_b };
        cfg.validate()?;
        Ok(cfg)
    }

    /// A 1D-chain configuration (`x_c = 1`, `y_p = 1`).
    pub fn chain(y_c: u64, x_p: u64, x_t: u64, y_t: u64, x_b: u64, y_b: u64) -> Result<Self> {
        Self::new(1, y_c, x_p, 1, x_t, y_t, x_b, y_b)
    }

    pub fn unit() -> Self {
        Self { x_c: 1, y_c: 1, x_p: 1, y_p: 1, x_t: 1, y_t: 1, x_b: 1, y_b: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.extents().contains(&0) {
            return Err(Error::InvalidConfig(format!("all tile extents must be >= 1: {self}")));
        }
        Ok(())
    }

    pub fn extents(&self) -> [u64; 8] {
        [self.x_c, self.y_c, self.x_p, self.y_p, self.x_t, self.y_t, self.x_b, self.y_b]
    }

    pub fn x_tot(&self) -> u64 {
        self.x_c * self.x_p * self.x_t * self.x_b
    }

    pub fn y_tot(&self) -> u64 {
        self.y_c * self.y_p * self.y_t * self.y_b
    }

    pub fn compute_units(&self) -> u64 {
        self.x_c * self.y_c * self.x_p * self.y_p
    }

    pub fn pe_count(&self) -> u64 {
        self.x_p * self.y_p
    }

    pub fn units_per_pe(&self) -> u64 {
        self.x_c * self.y_c
    }

    /// Compute-tile positions in one block tile.
    pub fn block_positions(&self) -> u64 {
        self.x_t * self.y_t
    }

    /// Compute-tile positions in one memory tile (cycles per k-step).
    pub fn memory_positions(&self) -> u64 {
        self.x_t * self.y_t * self.x_b * self.y_b
    }

    pub fn is_chain(&self) -> bool {
        self.x_c == 1 && self.y_p == 1
    }
}

impl fmt::Display for TileConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x_c={} y_c={} x_p={} y_p={} x_t={} y_t={} x_b={} y_b={}",
            self.x_c, self.y_c, self.x_p, self.y_p, self.x_t, self.y_t, self.x_b, self.y_b
        )
    }
}

impl std::str::FromStr for TileConfig {
    type Err = Error;

    /// Parses `x_c,y_c,x_p,y_p,x_t,y_t,x_b,y_b`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<u64> = s
            .split(',')
            .map(|p| p.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidConfig(format!("tile config `{s}`: {e}")))?;
        match parts[..] {
            [x_c, y_c, x_p, y_p, x_t, y_t, x_b, y_b] => Self::new(x_c, y_c, x_p, y_p, x_t, y_t, x_b, y_b),
            _ => Err(Error::InvalidConfig(format!(
                "tile config `{s}` must have 8 comma-separated extents x_c,y_c,x_p,y_p,x_t,y_t,x_b,y_b"
            ))),
        }
    }
}

/// Port configuration of one memory block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockGeometry {
    pub port_width_bits: u32,
    /// Words addressable per block at this port width (`s_b`).
    pub words_per_block: u64,
}

/// Largest number of compute units the resources admit, ignoring PE overhead.
/// Kinds a compute unit does not consume impose no bound.
pub fn max_compute_units(hw: &HardwareSpec, dt: &DataTypeSpec) -> Result<u64> {
    hw.resources_max.ensure_same_kinds(&dt.cost_per_compute_unit)?;
    dt.cost_per_compute_unit
        .iter()
        .filter(|&(_, cost)| cost > 0)
        .map(|(kind, cost)| hw.resources_max.get(kind).unwrap_or(0) / cost)
        .min()
        .ok_or_else(|| Error::InvalidConfig(format!("{}: compute unit consumes no resources", dt.name)))
}

/// Narrowest supported port that fits one element, and the words per block at
/// that width.
pub fn block_words(hw: &HardwareSpec, dt: &DataTypeSpec) -> Result<BlockGeometry> {
    hw.supported_port_widths_bits
        .iter()
        .find(|&&w| w >= dt.width_bits)
        .map(|&w| geometry_at(hw, w))
        .ok_or(Error::UnsupportedType { width_bits: dt.width_bits, widest_port_bits: hw.widest_port_bits() })
}

/// Geometry for an explicitly chosen port width.
pub fn block_words_at(hw: &HardwareSpec, dt: &DataTypeSpec, port_width_bits: u32) -> Result<BlockGeometry> {
    if !hw.supported_port_widths_bits.contains(&port_width_bits) {
        return Err(Error::UnsupportedPortWidth(port_width_bits));
    }
    if port_width_bits < dt.width_bits {
        return Err(Error::UnsupportedType { width_bits: dt.width_bits, widest_port_bits: port_width_bits });
    }
    Ok(geometry_at(hw, port_width_bits))
}

/// Every supported port width able to hold one element, narrowest first.
pub fn candidate_geometries(hw: &HardwareSpec, dt: &DataTypeSpec) -> Vec<BlockGeometry> {
    hw.supported_port_widths_bits.iter().filter(|&&w| w >= dt.width_bits).map(|&w| geometry_at(hw, w)).collect()
}

fn geometry_at(hw: &HardwareSpec, port_width_bits: u32) -> BlockGeometry {
    BlockGeometry { port_width_bits, words_per_block: hw.block_capacity_bits / u64::from(port_width_bits) }
}

/// `N_b,min = x_p*y_p * ceil(w_c*x_c*y_c / w_b)`.
pub fn min_memory_blocks_with(cfg: &TileConfig, width_bits: u32, port_width_bits: u32) -> u64 {
    let pe_word_bits = u64::from(width_bits) * cfg.units_per_pe();
    cfg.pe_count() * pe_word_bits.div_ceil(u64::from(port_width_bits))
}

pub fn min_memory_blocks(cfg: &TileConfig, hw: &HardwareSpec, dt: &DataTypeSpec) -> Result<u64> {
    let geom = block_words(hw, dt)?;
    Ok(min_memory_blocks_with(cfg, dt.width_bits, geom.port_width_bits))
}

/// `N_b = floor(N_b,max / N_b,min) * N_b,min`.
pub fn usable_memory_blocks_from(min_blocks: u64, max_blocks: u64) -> Result<u64> {
    if min_blocks == 0 || min_blocks > max_blocks {
        return Err(Error::InsufficientMemoryBlocks { min_blocks, max_blocks });
    }
    Ok(max_blocks / min_blocks * min_blocks)
}

pub fn usable_memory_blocks(cfg: &TileConfig, hw: &HardwareSpec, dt: &DataTypeSpec) -> Result<u64> {
    usable_memory_blocks_from(min_memory_blocks(cfg, hw, dt)?, hw.memory_blocks_max)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constraint {
    /// `N_p * (r_p + r_c * x_c*y_c) <= r_max` for one resource kind.
    Resource(String),
    BusX,
    BusY,
    MemoryBlocks,
    /// `x_t*y_t >= N_p` for the 1D chain.
    ChainDepth,
    /// `x_t*y_t <= s_b`: a block tile fits one pass over the allocated blocks.
    BlockTileCapacity,
    /// `x_b*y_b <= floor(N_b,max / N_b,min)`.
    BlockTileCount,
    TileFitsRows,
    TileFitsCols,
    /// `x_tot*y_tot` within on-chip tile capacity.
    TileWords,
    /// `x_tot + y_tot` within on-chip tile capacity.
    TileLoadWords,
    /// Accumulation collisions separated by at least the adder latency.
    AccumulationDistance,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Resource(kind) => write!(f, "resource {kind}: N_p*(r_p + r_c*x_c*y_c) <= r_max"),
            Self::BusX => f.write_str("bus width x_c*w_c <= w_p,max"),
            Self::BusY => f.write_str("bus width y_c*w_c <= w_p,max"),
            Self::MemoryBlocks => f.write_str("memory blocks N_b,min <= N_b,max"),
            Self::ChainDepth => f.write_str("chain depth x_t*y_t >= N_p"),
            Self::BlockTileCapacity => f.write_str("block tile x_t*y_t <= s_b"),
            Self::BlockTileCount => f.write_str("block tiles x_b*y_b <= floor(N_b,max/N_b,min)"),
            Self::TileFitsRows => f.write_str("tile rows x_tot <= m"),
            Self::TileFitsCols => f.write_str("tile cols y_tot <= n"),
            Self::TileWords => f.write_str("tile words x_tot*y_tot <= S"),
            Self::TileLoadWords => f.write_str("tile loads x_tot+y_tot <= S"),
            Self::AccumulationDistance => f.write_str("collision distance >= accumulation latency"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintCheck {
    pub constraint: Constraint,
    pub lhs: u128,
    pub relation: Relation,
    pub rhs: u128,
}

impl ConstraintCheck {
    pub fn at_most(constraint: Constraint, lhs: impl Into<u128>, rhs: impl Into<u128>) -> Self {
        Self { constraint, lhs: lhs.into(), relation: Relation::AtMost, rhs: rhs.into() }
    }

    pub fn at_least(constraint: Constraint, lhs: impl Into<u128>, rhs: impl Into<u128>) -> Self {
        Self { constraint, lhs: lhs.into(), relation: Relation::AtLeast, rhs: rhs.into() }
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.lhs <= self.rhs,
            Relation::AtLeast => self.lhs >= self.rhs,
        }
    }
}

impl fmt::Display for ConstraintCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        let verdict = if self.passed() { "ok" } else { "FAIL" };
        write!(f, "{:<4} {}  [{} {op} {}]", verdict, self.constraint, self.lhs, self.rhs)
    }
}

/// Named constraint outcomes; infeasibility is data, not an error.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub checks: Vec<ConstraintCheck>,
}

impl FeasibilityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(ConstraintCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, constraint: &Constraint) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| &c.constraint == constraint)
    }

    pub fn push(&mut self, check: ConstraintCheck) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: FeasibilityReport) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}

/// Resource, bus, memory-block and (for the 1D chain) chain-depth checks,
/// using the narrowest port that holds one element.
pub fn check_resource_feasibility(
    cfg: &TileConfig,
    hw: &HardwareSpec,
    dt: &DataTypeSpec,
    layout: Layout,
) -> Result<FeasibilityReport> {
    let geom = block_words(hw, dt)?;
    check_resource_feasibility_at(cfg, hw, dt, layout, geom)
}

pub fn check_resource_feasibility_at(
    cfg: &TileConfig,
    hw: &HardwareSpec,
    dt: &DataTypeSpec,
    layout: Layout,
    geom: BlockGeometry,
) -> Result<FeasibilityReport> {
    hw.resources_max.ensure_same_kinds(&dt.cost_per_compute_unit)?;
    dt.cost_per_compute_unit.ensure_same_kinds(&dt.overhead_per_pe)?;

    let mut report = FeasibilityReport::default();
    let n_p = u128::from(cfg.pe_count());
    let units = u128::from(cfg.units_per_pe());
    for (kind, max) in hw.resources_max.iter() {
        let r_c = u128::from(dt.cost_per_compute_unit.get(kind).unwrap_or(0));
        let r_p = u128::from(dt.overhead_per_pe.get(kind).unwrap_or(0));
        report.push(ConstraintCheck::at_most(Constraint::Resource(kind.to_string()), n_p * (r_p + r_c * units), max));
    }
    let w_c = u64::from(dt.width_bits);
    report.push(ConstraintCheck::at_most(Constraint::BusX, cfg.x_c * w_c, hw.max_bus_width_bits));
    report.push(ConstraintCheck::at_most(Constraint::BusY, cfg.y_c * w_c, hw.max_bus_width_bits));
    report.push(ConstraintCheck::at_most(
        Constraint::MemoryBlocks,
        min_memory_blocks_with(cfg, dt.width_bits, geom.port_width_bits),
        hw.memory_blocks_max,
    ));
    if layout == Layout::Chain1D {
        report.push(ConstraintCheck::at_least(Constraint::ChainDepth, cfg.block_positions(), cfg.pe_count()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn rv(entries: &[(&str, u64)]) -> ResourceVector {
        ResourceVector::new(entries.iter().map(|&(k, v)| (k, v))).unwrap()
    }

    fn bram_hw(resources: ResourceVector, blocks: u64, bus: u64) -> HardwareSpec {
        HardwareSpec {
            name: "test".into(),
            resources_max: resources,
            memory_blocks_max: blocks,
            block_capacity_bits: 36864,
            supported_port_widths_bits: vec![9, 18, 36, 72],
            max_bus_width_bits: bus,
            target_frequency_hz: 200e6,
        }
    }

    fn dtype(width: u32, r_c: ResourceVector, r_p: ResourceVector) -> DataTypeSpec {
        DataTypeSpec {
            name: format!("t{width}"),
            width_bits: width,
            cost_per_compute_unit: r_c,
            overhead_per_pe: r_p,
            accumulation_latency_cycles: 8,
            arithmetic_kind: ArithmeticKind::Float,
        }
    }

    #[test]
    fn max_units_single_resource() {
        let hw = bram_hw(rv(&[("LUT", 100)]), 10, 512);
        let dt = dtype(32, rv(&[("LUT", 10)]), rv(&[("LUT", 0)]));
        assert_eq!(max_compute_units(&hw, &dt).unwrap(), 10);
    }

    #[test]
    fn max_units_ignores_unused_kinds() {
        let hw = bram_hw(rv(&[("LUT", 1033608), ("FF", 2174048), ("DSP", 6834)]), 1906, 512);
        let dt = dtype(32, rv(&[("LUT", 0), ("FF", 0), ("DSP", 1)]), rv(&[("LUT", 0), ("FF", 0), ("DSP", 0)]));
        assert_eq!(max_compute_units(&hw, &dt).unwrap(), 6834);
    }

    #[test]
    fn max_units_binding_kind() {
        let hw = bram_hw(rv(&[("LUT", 100), ("DSP", 6)]), 10, 512);
        let dt = dtype(32, rv(&[("LUT", 12), ("DSP", 1)]), rv(&[("LUT", 0), ("DSP", 0)]));
        assert_eq!(max_compute_units(&hw, &dt).unwrap(), 6);
    }

    #[test]
    fn max_units_kind_mismatch() {
        let hw = bram_hw(rv(&[("LUT", 100)]), 10, 512);
        let dt = dtype(32, rv(&[("DSP", 1)]), rv(&[("DSP", 0)]));
        assert!(matches!(max_compute_units(&hw, &dt), Err(Error::ResourceKindMismatch { .. })));
    }

    #[test]
    fn duplicate_kinds_rejected() {
        assert!(matches!(ResourceVector::new([("LUT", 1), ("LUT", 2)]), Err(Error::DuplicateResourceKind(_))));
    }

    #[test]
    fn bram_port_configurations() {
        let hw = bram_hw(rv(&[("DSP", 1)]), 1, 512);
        let geom = |w| block_words(&hw, &dtype(w, rv(&[("DSP", 1)]), rv(&[("DSP", 0)]))).unwrap();
        assert_eq!(geom(32), BlockGeometry { port_width_bits: 36, words_per_block: 1024 });
        assert_eq!(geom(16), BlockGeometry { port_width_bits: 18, words_per_block: 2048 });
        assert_eq!(geom(64), BlockGeometry { port_width_bits: 72, words_per_block: 512 });
        assert_eq!(geom(8), BlockGeometry { port_width_bits: 9, words_per_block: 4096 });
    }

    #[test]
    fn too_wide_type_rejected() {
        let hw = bram_hw(rv(&[("DSP", 1)]), 1, 512);
        let dt = dtype(128, rv(&[("DSP", 1)]), rv(&[("DSP", 0)]));
        assert_eq!(block_words(&hw, &dt), Err(Error::UnsupportedType { width_bits: 128, widest_port_bits: 72 }));
    }

    #[test]
    fn min_blocks_examples() {
        // 144 PEs of 8 units, FP32 in 36-bit ports.
        let cfg = TileConfig::new(1, 8, 144, 1, 1, 1, 1, 1).unwrap();
        assert_eq!(min_memory_blocks_with(&cfg, 32, 36), 1152);
        assert_eq!(min_memory_blocks_with(&TileConfig::unit(), 32, 36), 1);
        let cfg = TileConfig::chain(32, 132, 1, 1, 1, 1).unwrap();
        assert_eq!(min_memory_blocks_with(&cfg, 8, 9), 3828);
    }

    #[test]
    fn usable_blocks_examples() {
        assert_eq!(usable_memory_blocks_from(1152, 1906).unwrap(), 1152);
        assert_eq!(usable_memory_blocks_from(1024, 2048).unwrap(), 2048);
        assert_eq!(usable_memory_blocks_from(500, 1906).unwrap(), 1500);
        assert_eq!(
            usable_memory_blocks_from(2000, 1906),
            Err(Error::InsufficientMemoryBlocks { min_blocks: 2000, max_blocks: 1906 })
        );
    }

    #[test]
    fn bus_width_violation() {
        let hw = bram_hw(rv(&[("DSP", 1000)]), 1906, 512);
        let dt = dtype(32, rv(&[("DSP", 1)]), rv(&[("DSP", 0)]));
        let cfg = TileConfig::chain(17, 1, 32, 32, 1, 1).unwrap();
        let report = check_resource_feasibility(&cfg, &hw, &dt, Layout::Chain1D).unwrap();
        let bus = report.get(&Constraint::BusY).unwrap();
        assert!(!bus.passed());
        assert_eq!((bus.lhs, bus.rhs), (544, 512));
        assert!(report.get(&Constraint::BusX).unwrap().passed());
    }

    #[test]
    fn resource_bound_passes_at_equality() {
        let hw = bram_hw(rv(&[("DSP", 16)]), 1906, 1024);
        let dt = dtype(32, rv(&[("DSP", 1)]), rv(&[("DSP", 0)]));
        let n_max = max_compute_units(&hw, &dt).unwrap();
        let cfg = TileConfig::new(4, 4, 1, 1, 1, 1, 1, 1).unwrap();
        assert_eq!(cfg.compute_units(), n_max);
        let report = check_resource_feasibility(&cfg, &hw, &dt, Layout::Grid2D).unwrap();
        assert!(report.all_passed(), "{report}");
        let over = TileConfig::new(1, 17, 1, 1, 1, 1, 1, 1).unwrap();
        let report = check_resource_feasibility(&over, &hw, &dt, Layout::Grid2D).unwrap();
        assert!(!report.get(&Constraint::Resource("DSP".into())).unwrap().passed());
    }

    #[test]
    fn chain_depth_only_checked_for_chain() {
        let hw = bram_hw(rv(&[("DSP", 1000)]), 1906, 512);
        let dt = dtype(32, rv(&[("DSP", 1)]), rv(&[("DSP", 0)]));
        let cfg = TileConfig::chain(1, 8, 2, 2, 1, 1).unwrap();
        let chain = check_resource_feasibility(&cfg, &hw, &dt, Layout::Chain1D).unwrap();
        assert!(!chain.get(&Constraint::ChainDepth).unwrap().passed());
        let grid = check_resource_feasibility(&cfg, &hw, &dt, Layout::Grid2D).unwrap();
        assert!(grid.get(&Constraint::ChainDepth).is_none());
    }

    #[test]
    fn tile_config_parsing() {
        let cfg: TileConfig = "1,8,192,1,5,204,1,1".parse().unwrap();
        assert_eq!((cfg.x_tot(), cfg.y_tot()), (960, 1632));
        assert_eq!(cfg.compute_units(), 1536);
        assert!("1,2,3".parse::<TileConfig>().is_err());
        assert!("1,0,1,1,1,1,1,1".parse::<TileConfig>().is_err());
    }

    #[test]
    fn invalid_hardware_specs() {
        let mut hw = bram_hw(rv(&[("DSP", 1)]), 1, 512);
        assert!(hw.validate().is_ok());
        hw.supported_port_widths_bits = vec![36, 18];
        assert!(hw.validate().is_err());
        hw.supported_port_widths_bits = vec![35];
        assert!(hw.validate().is_err());
        hw.supported_port_widths_bits = vec![36];
        hw.memory_blocks_max = 0;
        assert!(hw.validate().is_err());
    }
}
