//! Module graph of the kernel: memory readers and feeders, the PE array and
//! the output writer, connected by point-to-point buses.
//!
//! The 1D layout is `Read A -> Transpose -> PE_1 -> ... -> PE_Np`, with
//! `Feed B` streaming into `PE_1` and results drained backwards to `Write C`
//! at the chain head. The 2D layout is an `x_p x y_p` grid where `A` moves
//! along rows from per-row `Feed A` modules, `B` moves down columns from
//! per-column `Feed B` modules, and `C` moves up columns to `Store C`.

use crate::error::{Error, Result};
use crate::hardware::{check_resource_feasibility, DataTypeSpec, HardwareSpec, Layout, TileConfig};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

/// Module labels and labelled edges `(src, dst, channel, width)`.
pub type CanonicalForm = (BTreeSet<String>, BTreeSet<(String, String, Channel, u64)>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModuleKind {
    ReadA,
    Transpose { fifos: u64, depth: u64 },
    FeedA { row: u64 },
    FeedB { col: u64 },
    Pe { row: u64, col: u64 },
    WriteC,
}

impl ModuleKind {
    pub fn is_pe(&self) -> bool {
        matches!(self, Self::Pe { .. })
    }

    fn tag(&self) -> &'static str {
        match self {
            Self::ReadA => "ReadA",
            Self::Transpose { .. } => "Transpose",
            Self::FeedA { .. } => "FeedA",
            Self::FeedB { .. } => "FeedB",
            Self::Pe { .. } => "PE",
            Self::WriteC => "WriteC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub id: usize,
    pub kind: ModuleKind,
    /// Human-readable name, unique within the graph (`PE_3`, `FeedB_2`, ...).
    pub label: String,
    /// Operand registers for `A` (two per PE: current and next).
    pub registers: u64,
    /// Output-tile elements of `C` held by this module.
    pub c_words: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    A,
    B,
    C,
    /// Wide off-chip read feeding the transpose FIFOs.
    Mem,
}

impl Channel {
    fn tag(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
            Self::Mem => "mem",
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Self::A),
            "B" => Ok(Self::B),
            "C" => Ok(Self::C),
            "mem" => Ok(Self::Mem),
            other => Err(Error::InvalidConfig(format!("unknown channel `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Connection {
    pub src: usize,
    pub dst: usize,
    pub channel: Channel,
    pub width_bits: u64,
    pub depth_words: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleGraph {
    pub layout: Layout,
    pub nodes: Vec<Module>,
    pub edges: Vec<Connection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutOptions {
    pub layout: Layout,
    /// Insert a transpose stage between `Read A` and the chain (1D only).
    pub transpose_a: bool,
    /// Elements per `Read A` vector, which is also the transpose FIFO count.
    /// Defaults to `y_c`.
    pub a_vector_width: Option<u64>,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        Self { layout: Layout::Chain1D, transpose_a: true, a_vector_width: None }
    }
}

struct Builder {
    nodes: Vec<Module>,
    edges: Vec<Connection>,
}

impl Builder {
    fn node(&mut self, kind: ModuleKind, label: String, registers: u64, c_words: u64) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Module { id, kind, label, registers, c_words });
        id
    }

    fn edge(&mut self, src: usize, dst: usize, channel: Channel, width_bits: u64, depth_words: u64) {
        self.edges.push(Connection { src, dst, channel, width_bits, depth_words });
    }
}

/// Builds the module graph for `cfg`. Only the structural preconditions of
/// the layout are checked here; see [`build_feasible_layout`] for the
/// resource and memory checks.
pub fn build_layout(cfg: &TileConfig, dt: &DataTypeSpec, opts: &LayoutOptions) -> Result<ModuleGraph> {
    cfg.validate()?;
    let w_c = u64::from(dt.width_bits);
    let c_words = cfg.x_tot() * cfg.y_tot() / cfg.pe_count();
    let mut b = Builder { nodes: Vec::new(), edges: Vec::new() };

    match opts.layout {
        Layout::Chain1D => {
            if !cfg.is_chain() {
                return Err(Error::NotChainLayout { x_c: cfg.x_c, y_p: cfg.y_p });
            }
            if cfg.block_positions() < cfg.pe_count() {
                return Err(Error::ChainDepth { positions: cfg.block_positions(), pes: cfg.pe_count() });
            }
            let n_p = cfg.x_p;
            let bus = cfg.y_c * w_c;
            let read_a = b.node(ModuleKind::ReadA, "ReadA".into(), 0, 0);
            let a_head = if opts.transpose_a {
                let fifos = opts.a_vector_width.unwrap_or(cfg.y_c);
                if fifos == 0 {
                    return Err(Error::InvalidConfig("A vector width must be >= 1".into()));
                }
                let depth = cfg.x_tot();
                let t = b.node(ModuleKind::Transpose { fifos, depth }, "Transpose".into(), 0, 0);
                b.edge(read_a, t, Channel::Mem, fifos * w_c, depth);
                t
            } else {
                read_a
            };
            let feed_b = b.node(ModuleKind::FeedB { col: 0 }, "FeedB".into(), 0, 0);
            let pes: Vec<usize> = (0..n_p)
                .map(|i| b.node(ModuleKind::Pe { row: i, col: 0 }, format!("PE_{}", i + 1), 2, c_words))
                .collect();
            let write_c = b.node(ModuleKind::WriteC, "WriteC".into(), 0, 0);

            b.edge(a_head, pes[0], Channel::A, w_c, 1);
            b.edge(feed_b, pes[0], Channel::B, bus, 1);
            for pair in pes.windows(2) {
                b.edge(pair[0], pair[1], Channel::A, w_c, 1);
                b.edge(pair[0], pair[1], Channel::B, bus, 1);
                b.edge(pair[1], pair[0], Channel::C, bus, 1);
            }
            b.edge(pes[0], write_c, Channel::C, bus, 1);
        }
        Layout::Grid2D => {
            let (rows, cols) = (cfg.x_p, cfg.y_p);
            let a_bus = cfg.x_c * w_c;
            let bc_bus = cfg.y_c * w_c;
            let feed_a: Vec<usize> =
                (0..rows).map(|r| b.node(ModuleKind::FeedA { row: r }, format!("FeedA_{}", r + 1), 0, 0)).collect();
            let feed_b: Vec<usize> =
                (0..cols).map(|c| b.node(ModuleKind::FeedB { col: c }, format!("FeedB_{}", c + 1), 0, 0)).collect();
            let mut grid = vec![0usize; (rows * cols) as usize];
            for r in 0..rows {
                for c in 0..cols {
                    grid[(r * cols + c) as usize] =
                        b.node(ModuleKind::Pe { row: r, col: c }, format!("PE_{}_{}", r + 1, c + 1), 2, c_words);
                }
            }
            let store_c = b.node(ModuleKind::WriteC, "StoreC".into(), 0, 0);
            let at = |r: u64, c: u64| grid[(r * cols + c) as usize];
            for r in 0..rows {
                for c in 0..cols {
                    let src_a = if c == 0 { feed_a[r as usize] } else { at(r, c - 1) };
                    b.edge(src_a, at(r, c), Channel::A, a_bus, 1);
                    let src_b = if r == 0 { feed_b[c as usize] } else { at(r - 1, c) };
                    b.edge(src_b, at(r, c), Channel::B, bc_bus, 1);
                    let dst_c = if r == 0 { store_c } else { at(r - 1, c) };
                    b.edge(at(r, c), dst_c, Channel::C, bc_bus, 1);
                }
            }
        }
    }
    Ok(ModuleGraph { layout: opts.layout, nodes: b.nodes, edges: b.edges })
}

/// [`build_layout`] after the resource, bus and memory-block checks; the
/// error names the first violated constraint.
pub fn build_feasible_layout(
    cfg: &TileConfig,
    hw: &HardwareSpec,
    dt: &DataTypeSpec,
    opts: &LayoutOptions,
) -> Result<ModuleGraph> {
    let report = check_resource_feasibility(cfg, hw, dt, opts.layout)?;
    if let Some(failed) = report.failures().next() {
        return Err(Error::Infeasible(failed.to_string()));
    }
    build_layout(cfg, dt, opts)
}

impl ModuleGraph {
    pub fn pe_count(&self) -> u64 {
        self.nodes.iter().filter(|n| n.kind.is_pe()).count() as u64
    }

    pub fn node_by_label(&self, label: &str) -> Option<&Module> {
        self.nodes.iter().find(|n| n.label == label)
    }

    /// Connections with a PE at either end.
    pub fn compute_connections(&self) -> u64 {
        self.edges.iter().filter(|e| self.nodes[e.src].kind.is_pe() || self.nodes[e.dst].kind.is_pe()).count() as u64
    }

    pub fn registers(&self) -> u64 {
        self.nodes.iter().map(|n| n.registers).sum()
    }

    /// Largest number of receivers driven by one (module, channel) output.
    pub fn max_fan_out(&self) -> u64 {
        let mut fan: BTreeMap<(usize, Channel), u64> = BTreeMap::new();
        for e in &self.edges {
            *fan.entry((e.src, e.channel)).or_insert(0) += 1;
        }
        fan.values().copied().max().unwrap_or(0)
    }

    /// Largest number of buses (in + out) attached to a single PE.
    pub fn max_pe_buses(&self) -> u64 {
        let mut degree = vec![0u64; self.nodes.len()];
        for e in &self.edges {
            degree[e.src] += 1;
            degree[e.dst] += 1;
        }
        self.nodes.iter().filter(|n| n.kind.is_pe()).map(|n| degree[n.id]).max().unwrap_or(0)
    }

    pub fn widest_bus(&self) -> u64 {
        self.edges.iter().map(|e| e.width_bits).max().unwrap_or(0)
    }

    /// Label-based edge set: two graphs with equal canonical forms are
    /// isomorphic under the mapping that preserves module labels.
    pub fn canonical_form(&self) -> CanonicalForm {
        let nodes = self.nodes.iter().map(|n| n.label.clone()).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| (self.nodes[e.src].label.clone(), self.nodes[e.dst].label.clone(), e.channel, e.width_bits))
            .collect();
        (nodes, edges)
    }

    pub fn is_isomorphic_to(&self, other: &Self) -> bool {
        self.canonical_form() == other.canonical_form()
    }
}

/// Collapses a 2D grid with `y_p = 1` into a chain: the per-row `Feed A`
/// modules are replaced by a single `Read A` at the head whose values are
/// forwarded PE to PE, and the grid's feeder and writer become the chain's.
pub fn collapse_to_chain(g: &ModuleGraph) -> Result<ModuleGraph> {
    if g.layout != Layout::Grid2D {
        return Err(Error::InvalidConfig("only a 2D layout can be collapsed".into()));
    }
    if g.nodes.iter().any(|n| matches!(n.kind, ModuleKind::Pe { col, .. } if col > 0)) {
        return Err(Error::InvalidConfig("collapsing requires a single PE column (y_p = 1)".into()));
    }
    let a_width = g.edges.iter().find(|e| e.channel == Channel::A).map_or(0, |e| e.width_bits);
    let mut b = Builder { nodes: Vec::new(), edges: Vec::new() };
    let read_a = b.node(ModuleKind::ReadA, "ReadA".into(), 0, 0);
    let mut remap = BTreeMap::new();
    for n in &g.nodes {
        let id = match n.kind {
            ModuleKind::FeedA { .. } => continue,
            ModuleKind::FeedB { .. } => b.node(n.kind, "FeedB".into(), 0, 0),
            ModuleKind::Pe { row, .. } => b.node(n.kind, format!("PE_{}", row + 1), n.registers, n.c_words),
            ModuleKind::WriteC => b.node(n.kind, "WriteC".into(), 0, 0),
            ModuleKind::ReadA | ModuleKind::Transpose { .. } => {
                return Err(Error::InvalidConfig(format!("unexpected {} in a 2D layout", n.label)));
            }
        };
        remap.insert(n.id, id);
    }
    let pe_at = |row: u64| {
        g.nodes.iter().find(|n| n.kind == ModuleKind::Pe { row, col: 0 }).map(|n| remap[&n.id]).expect("PE exists")
    };
    b.edge(read_a, pe_at(0), Channel::A, a_width, 1);
    for row in 1..g.pe_count() {
        b.edge(pe_at(row - 1), pe_at(row), Channel::A, a_width, 1);
    }
    for e in g.edges.iter().filter(|e| e.channel != Channel::A) {
        b.edge(remap[&e.src], remap[&e.dst], e.channel, e.width_bits, e.depth_words);
    }
    Ok(ModuleGraph { layout: Layout::Chain1D, nodes: b.nodes, edges: b.edges })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub node_count: u64,
    pub pe_count: u64,
    pub compute_connections: u64,
    pub registers: u64,
    pub max_fan_out: u64,
    pub max_pe_buses: u64,
    pub widest_bus: u64,
    pub c_words_per_pe: u64,
    pub checks: Vec<StructureCheck>,
}

impl StructureReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Checks the structural properties of a built graph. Violations are
/// reported, not raised.
pub fn verify_structure(g: &ModuleGraph, cfg: &TileConfig, max_bus_width_bits: u64) -> StructureReport {
    let n_p = g.pe_count();
    let mut checks = Vec::new();
    let mut check = |name, passed, detail: String| checks.push(StructureCheck { name, passed, detail });

    let node_count = g.nodes.len() as u64;
    let has_transpose = g.nodes.iter().any(|n| matches!(n.kind, ModuleKind::Transpose { .. }));
    let expected_nodes = match g.layout {
        Layout::Chain1D => n_p + if has_transpose { 4 } else { 3 },
        Layout::Grid2D => n_p + cfg.x_p + cfg.y_p + 1,
    };
    check("module count", node_count == expected_nodes, format!("{node_count} modules, expected {expected_nodes}"));
    check("PE count", n_p == cfg.pe_count(), format!("{n_p} PEs, N_p = {}", cfg.pe_count()));

    let fan = g.max_fan_out();
    check("constant fan-out", fan == 1, format!("max fan-out {fan}"));
    let buses = g.max_pe_buses();
    check("buses per PE", buses <= 6, format!("at most {buses} buses on a PE (limit 6)"));

    let conn = g.compute_connections();
    check("compute connections", conn == 3 * n_p, format!("{conn}, expected 3*N_p = {}", 3 * n_p));
    let regs = g.registers();
    check("registers", regs == 2 * n_p, format!("{regs}, expected 2*N_p = {}", 2 * n_p));

    if g.layout == Layout::Chain1D {
        let depth = cfg.block_positions();
        check("chain depth", depth >= n_p, format!("x_t*y_t = {depth}, N_p = {n_p}"));
    }

    let widest = g.widest_bus();
    check("bus width", widest <= max_bus_width_bits, format!("widest bus {widest} bits, limit {max_bus_width_bits}"));

    let tile = cfg.x_tot() * cfg.y_tot();
    let per_pe = tile.checked_div(n_p).unwrap_or(0);
    let held: u64 = g.nodes.iter().map(|n| n.c_words).sum();
    let even = g.nodes.iter().filter(|n| n.kind.is_pe()).all(|n| n.c_words == per_pe);
    check(
        "output partition",
        n_p > 0 && tile.is_multiple_of(n_p) && held == tile && even,
        format!("{per_pe} elements per PE, {held} of {tile} held"),
    );

    StructureReport {
        node_count,
        pe_count: n_p,
        compute_connections: conn,
        registers: regs,
        max_fan_out: fan,
        max_pe_buses: buses,
        widest_bus: widest,
        c_words_per_pe: per_pe,
        checks,
    }
}

/// Line-oriented listing: a header, one `node` record per module in id order,
/// then one `edge` record per connection in construction order.
pub fn export_graph(g: &ModuleGraph) -> String {
    let mut out = String::new();
    writeln!(out, "graph layout={} nodes={} edges={}", g.layout, g.nodes.len(), g.edges.len()).unwrap();
    for n in &g.nodes {
        write!(out, "node {} {} {}", n.id, n.kind.tag(), n.label).unwrap();
        match n.kind {
            ModuleKind::Transpose { fifos, depth } => write!(out, " fifos={fifos} depth={depth}").unwrap(),
            ModuleKind::FeedA { row } => write!(out, " row={row}").unwrap(),
            ModuleKind::FeedB { col } => write!(out, " col={col}").unwrap(),
            ModuleKind::Pe { row, col } => {
                write!(out, " row={row} col={col} registers={} c_words={}", n.registers, n.c_words).unwrap()
            }
            ModuleKind::ReadA | ModuleKind::WriteC => {}
        }
        out.push('\n');
    }
    for e in &g.edges {
        writeln!(
            out,
            "edge {} {} {} width={} depth={}",
            g.nodes[e.src].label,
            g.nodes[e.dst].label,
            e.channel.tag(),
            e.width_bits,
            e.depth_words
        )
        .unwrap();
    }
    out
}

/// Inverse of [`export_graph`]. Lines starting with `#` are ignored.
pub fn parse_graph(text: &str) -> Result<ModuleGraph> {
    let bad = |line: usize, msg: &str| Error::InvalidConfig(format!("graph line {}: {msg}", line + 1));
    let mut layout = None;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut by_label = BTreeMap::new();

    for (ln, line) in text.lines().enumerate() {
        let mut words = line.split_whitespace();
        let Some(record) = words.next() else { continue };
        if record.starts_with('#') {
            continue;
        }
        let rest: Vec<&str> = words.collect();
        let attrs: BTreeMap<&str, u64> =
            rest.iter().filter_map(|w| w.split_once('=')).filter_map(|(k, v)| v.parse().ok().map(|v| (k, v))).collect();
        let attr = |key: &str| attrs.get(key).copied().ok_or_else(|| bad(ln, &format!("missing {key}")));
        match record {
            "graph" => {
                let value =
                    rest.iter().find_map(|w| w.strip_prefix("layout=")).ok_or_else(|| bad(ln, "missing layout"))?;
                layout = Some(value.parse::<Layout>()?);
            }
            "node" => {
                let [id, tag, label, ..] = rest[..] else { return Err(bad(ln, "expected `node <id> <kind> <label>`")) };
                let id: usize = id.parse().map_err(|_| bad(ln, "bad id"))?;
                if id != nodes.len() {
                    return Err(bad(ln, "node ids must be consecutive"));
                }
                let kind = match tag {
                    "ReadA" => ModuleKind::ReadA,
                    "Transpose" => ModuleKind::Transpose { fifos: attr("fifos")?, depth: attr("depth")? },
                    "FeedA" => ModuleKind::FeedA { row: attr("row")? },
                    "FeedB" => ModuleKind::FeedB { col: attr("col")? },
                    "PE" => ModuleKind::Pe { row: attr("row")?, col: attr("col")? },
                    "WriteC" => ModuleKind::WriteC,
                    other => return Err(bad(ln, &format!("unknown module kind `{other}`"))),
                };
                let (registers, c_words) = if kind.is_pe() { (attr("registers")?, attr("c_words")?) } else { (0, 0) };
                by_label.insert(label.to_string(), id);
                nodes.push(Module { id, kind, label: label.to_string(), registers, c_words });
            }
            "edge" => {
                let [src, dst, channel, ..] = rest[..] else {
                    return Err(bad(ln, "expected `edge <src> <dst> <channel>`"));
                };
                let lookup =
                    |l: &str| by_label.get(l).copied().ok_or_else(|| bad(ln, &format!("unknown module `{l}`")));
                edges.push(Connection {
                    src: lookup(src)?,
                    dst: lookup(dst)?,
                    channel: channel.parse()?,
                    width_bits: attr("width")?,
                    depth_words: attr("depth")?,
                });
            }
            other => return Err(bad(ln, &format!("unknown record `{other}`"))),
        }
    }
    let layout = layout.ok_or_else(|| Error::InvalidConfig("graph header missing".into()))?;
    Ok(ModuleGraph { layout, nodes, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardware::{ArithmeticKind, ResourceVector};

    fn fp32() -> DataTypeSpec {
        let rv = |v| ResourceVector::new([("DSP", v)]).unwrap();
        DataTypeSpec {
            name: "fp32".into(),
            width_bits: 32,
            cost_per_compute_unit: rv(1),
            overhead_per_pe: rv(0),
            accumulation_latency_cycles: 1,
            arithmetic_kind: ArithmeticKind::Float,
        }
    }

    fn chain(n_p: u64) -> TileConfig {
        TileConfig::chain(2, n_p, n_p, 1, 1, 1).unwrap()
    }

    fn no_transpose() -> LayoutOptions {
        LayoutOptions { transpose_a: false, ..Default::default() }
    }

    #[test]
    fn module_counts() {
        let g = build_layout(&chain(3), &fp32(), &LayoutOptions::default()).unwrap();
        assert_eq!(g.nodes.len(), 7);
        let g = build_layout(&chain(1), &fp32(), &no_transpose()).unwrap();
        let labels: Vec<&str> = g.nodes.iter().map(|n| n.label.as_str()).collect();
        assert_eq!(labels, ["ReadA", "FeedB", "PE_1", "WriteC"]);
    }

    #[test]
    fn grid_two_by_two() {
        let cfg = TileConfig::new(1, 1, 2, 2, 1, 1, 1, 1).unwrap();
        let g = build_layout(&cfg, &fp32(), &LayoutOptions { layout: Layout::Grid2D, ..Default::default() }).unwrap();
        assert_eq!(g.pe_count(), 4);
        assert_eq!(g.nodes.iter().filter(|n| matches!(n.kind, ModuleKind::FeedA { .. })).count(), 2);
        assert_eq!(g.nodes.iter().filter(|n| matches!(n.kind, ModuleKind::FeedB { .. })).count(), 2);
        assert_eq!(g.edges.len(), 12);
        assert_eq!(g.compute_connections(), 12);
        let r = verify_structure(&g, &cfg, 512);
        assert!(r.all_passed(), "{r}");
        assert_eq!(r.max_pe_buses, 6);
    }

    #[test]
    fn fan_out_constant() {
        let fans: Vec<u64> = [1, 8, 64]
            .iter()
            .map(|&n| build_layout(&chain(n), &fp32(), &LayoutOptions::default()).unwrap().max_fan_out())
            .collect();
        assert_eq!(fans, [1, 1, 1]);
    }

    #[test]
    fn long_chain_connections() {
        let cfg = chain(192);
        let g = build_layout(&cfg, &fp32(), &LayoutOptions::default()).unwrap();
        let r = verify_structure(&g, &cfg, 512);
        assert_eq!(r.compute_connections, 576);
        assert_eq!(r.registers, 384);
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn bus_width_boundary() {
        let cfg = TileConfig::chain(16, 2, 2, 1, 1, 1).unwrap();
        let g = build_layout(&cfg, &fp32(), &LayoutOptions::default()).unwrap();
        assert_eq!(g.widest_bus(), 512);
        assert!(verify_structure(&g, &cfg, 512).all_passed());
        let r = verify_structure(&g, &cfg, 511);
        assert!(!r.all_passed());
        assert!(r.checks.iter().any(|c| c.name == "bus width" && !c.passed));
    }

    #[test]
    fn chain_edges_for_two_pes() {
        let g = build_layout(&chain(2), &fp32(), &LayoutOptions::default()).unwrap();
        let text = export_graph(&g);
        assert!(text.contains("edge PE_1 PE_2 A width=32 depth=1\n"));
        assert!(text.contains("edge PE_1 PE_2 B width=64 depth=1\n"));
        assert!(text.contains("edge PE_2 PE_1 C width=64 depth=1\n"));
    }

    #[test]
    fn export_is_deterministic_and_parses_back() {
        let g = build_layout(&chain(1), &fp32(), &no_transpose()).unwrap();
        let text = export_graph(&g);
        assert_eq!(text, export_graph(&build_layout(&chain(1), &fp32(), &no_transpose()).unwrap()));
        assert_eq!(text.lines().filter(|l| l.starts_with("node")).count(), 4);
        assert_eq!(parse_graph(&text).unwrap(), g);

        let cfg = TileConfig::new(1, 2, 3, 2, 1, 1, 1, 1).unwrap();
        let grid =
            build_layout(&cfg, &fp32(), &LayoutOptions { layout: Layout::Grid2D, ..Default::default() }).unwrap();
        assert_eq!(parse_graph(&export_graph(&grid)).unwrap(), grid);
    }

    #[test]
    fn collapse_matches_chain_builder() {
        let cfg = TileConfig::chain(2, 4, 4, 2, 1, 1).unwrap();
        let grid =
            build_layout(&cfg, &fp32(), &LayoutOptions { layout: Layout::Grid2D, ..Default::default() }).unwrap();
        let collapsed = collapse_to_chain(&grid).unwrap();
        let chain = build_layout(&cfg, &fp32(), &no_transpose()).unwrap();
        assert!(collapsed.is_isomorphic_to(&chain));
        assert!(!collapsed.is_isomorphic_to(&build_layout(&cfg, &fp32(), &LayoutOptions::default()).unwrap()));

        let wide = TileConfig::new(1, 1, 2, 2, 1, 1, 1, 1).unwrap();
        let g = build_layout(&wide, &fp32(), &LayoutOptions { layout: Layout::Grid2D, ..Default::default() }).unwrap();
        assert!(collapse_to_chain(&g).is_err());
    }

    #[test]
    fn rejects_bad_chain() {
        let grid = TileConfig::new(2, 1, 1, 1, 1, 1, 1, 1).unwrap();
        assert!(matches!(build_layout(&grid, &fp32(), &LayoutOptions::default()), Err(Error::NotChainLayout { .. })));
        let shallow = TileConfig::chain(1, 8, 2, 2, 1, 1).unwrap();
        assert_eq!(
            build_layout(&shallow, &fp32(), &LayoutOptions::default()).unwrap_err(),
            Error::ChainDepth { positions: 4, pes: 8 }
        );
    }

    #[test]
    fn infeasible_reports_binding_constraint() {
        let hw = HardwareSpec {
            name: "tiny".into(),
            resources_max: ResourceVector::new([("DSP", 4)]).unwrap(),
            memory_blocks_max: 64,
            block_capacity_bits: 36864,
            supported_port_widths_bits: vec![36],
            max_bus_width_bits: 512,
            target_frequency_hz: 1e8,
        };
        let err = build_feasible_layout(&chain(4), &hw, &fp32(), &LayoutOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(ref msg) if msg.contains("DSP")), "{err}");
    }
}
