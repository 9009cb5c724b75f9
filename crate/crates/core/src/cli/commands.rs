use super::csv_rows::{write_rows, DesignRow, EfficiencyRow, MemoryRow, TraceRow};
use super::{
    AnalyzeArgs, CmdResult, Failure, LayoutArgs, OptimizeArgs, SimulateArgs, SpecArgs, SweepArgs, SweepMemoryArgs,
    EXIT_INFEASIBLE, EXIT_USAGE, EXIT_VERIFY,
};
use crate::analytic::{drain_efficiency, io_volume, to_f64, DesignPoint, ProblemSize};
use crate::error::Error;
use crate::hardware::{
    block_words, block_words_at, candidate_geometries, min_memory_blocks_with, ArithmeticKind, DataTypeSpec, TileConfig,
};
use crate::layout::{build_feasible_layout, export_graph, verify_structure, LayoutOptions};
use crate::scalar::{float_tolerance, DTypeCode, Element};
use crate::sim::{
    count_schedule, matrix_file, reference_mmm, simulate_pe_chain, simulate_schedule, MatrixBuffer, Operand, SimOptions,
};
use crate::spec_file::SpecFile;
use crate::tiler::{select_parameters, sweep_top};
use half::f16;
use std::io::Write;

fn load(args: &SpecArgs) -> Result<(SpecFile, DataTypeSpec), Failure> {
    let spec = SpecFile::load(&args.spec)?;
    let dt = spec.datatype(&args.dtype)?.clone();
    Ok((spec, dt))
}

fn rate(bytes_per_s: f64) -> String {
    format!("{:.3} GB/s", bytes_per_s / 1e9)
}

fn write_design(out: &mut dyn Write, d: &DesignPoint, frequency_hz: f64) -> std::io::Result<()> {
    writeln!(out, "config:                  {}", d.config)?;
    writeln!(out, "layout:                  {}", d.layout)?;
    writeln!(out, "problem:                 {}", d.problem)?;
    writeln!(out, "compute units N_c:       {}", d.compute_units)?;
    writeln!(out, "PEs N_p:                 {}", d.pe_count)?;
    writeln!(
        out,
        "memory port:             {} bits, s_b = {} words/block",
        d.geometry.port_width_bits, d.geometry.words_per_block
    )?;
    writeln!(out, "N_b,min:                 {}", d.min_blocks)?;
    match (d.usable_blocks, d.capacity_words) {
        (Some(nb), Some(s)) => {
            writeln!(out, "N_b:                     {nb}")?;
            writeln!(out, "S:                       {s} words")?;
        }
        _ => writeln!(out, "N_b:                     none (N_b,min exceeds available blocks)")?,
    }
    writeln!(out, "blocks used:             {}", d.blocks_used)?;
    writeln!(out, "memory tile:             {} x {}", d.x_tot, d.y_tot)?;
    match d.io_volume {
        Some(q) => writeln!(out, "I/O volume Q:            {q} elements")?,
        None => writeln!(out, "I/O volume Q:            n/a (tile exceeds matrix)")?,
    }
    writeln!(out, "computational intensity: {:.3} madd/element", to_f64(d.computational_intensity))?;
    writeln!(out, "arithmetic intensity:    {:.3} op/B", to_f64(d.arithmetic_intensity))?;
    writeln!(
        out,
        "peak:                    {} op/cycle, {:.2} GOp/s at {:.1} MHz",
        d.peak_ops_per_cycle,
        d.peak_ops_per_cycle as f64 * frequency_hz / 1e9,
        frequency_hz / 1e6
    )?;
    writeln!(out, "execution time T:        {:.6} s", d.execution_time(frequency_hz))?;
    writeln!(out, "bandwidth at peak:       {}", rate(d.bandwidth_at_frequency(frequency_hz)))?;
    writeln!(out, "drain efficiency:        {:.6} ({})", to_f64(d.drain_efficiency), d.drain_efficiency)?;
    writeln!(out, "collision distance:      {} cycles", d.collision_distance)?;
    writeln!(out, "feasible:                {}", if d.is_feasible() { "yes" } else { "no" })?;
    write!(out, "{}", d.feasibility)
}

fn infeasible(d: &DesignPoint) -> Failure {
    let reason = d.feasibility.failures().next().map(|c| c.to_string()).unwrap_or_default();
    Failure::new(EXIT_INFEASIBLE, format!("infeasible: {reason}"))
}

pub fn analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> CmdResult {
    let (spec, dt) = load(&a.spec)?;
    let hw = &spec.hardware;
    let layout = a.layout.unwrap_or(spec.default_layout);
    let frequency = a.frequency.unwrap_or(spec.default_frequency_hz);
    let design = match a.port_width {
        Some(w) => DesignPoint::evaluate_at(&a.config, hw, &dt, &a.problem, layout, block_words_at(hw, &dt, w)?)?,
        None => {
            let mut first = None;
            let mut chosen = None;
            for g in candidate_geometries(hw, &dt) {
                let d = DesignPoint::evaluate_at(&a.config, hw, &dt, &a.problem, layout, g)?;
                if d.is_feasible() {
                    chosen = Some(d);
                    break;
                }
                first.get_or_insert(d);
            }
            match chosen.or(first) {
                Some(d) => d,
                None => DesignPoint::evaluate(&a.config, hw, &dt, &a.problem, layout)?,
            }
        }
    };
    writeln!(out, "hardware:                {} / {} ({} bits)", hw.name, dt.name, dt.width_bits)?;
    write_design(out, &design, frequency)?;
    if let Some(ops) = a.ops_per_second {
        writeln!(out, "bandwidth at {:.1} GOp/s: {}", ops / 1e9, rate(design.bandwidth_at_throughput(ops)))?;
    }
    if design.is_feasible() {
        Ok(())
    } else {
        Err(infeasible(&design))
    }
}

pub fn optimize(a: &OptimizeArgs, out: &mut dyn Write) -> CmdResult {
    let (spec, dt) = load(&a.spec)?;
    let layout = a.layout.unwrap_or(spec.default_layout);
    let frequency = a.frequency.unwrap_or(spec.default_frequency_hz);
    let bounds = a.bounds.to_bounds(layout, frequency);
    let sel = select_parameters(&spec.hardware, &dt, &a.problem, &bounds)?;
    if a.explain {
        for line in &sel.explanation {
            writeln!(out, "{line}")?;
        }
    }
    write_design(out, &sel.design, frequency)?;
    Ok(())
}

pub fn sweep(a: &SweepArgs, out: &mut dyn Write) -> CmdResult {
    let (spec, dt) = load(&a.spec)?;
    let layout = a.layout.unwrap_or(spec.default_layout);
    let bounds = a.bounds.to_bounds(layout, spec.default_frequency_hz);
    let ranked = sweep_top(&spec.hardware, &dt, &a.problem, &bounds, a.top)?;
    if ranked.is_empty() {
        return Err(Failure::new(EXIT_INFEASIBLE, "infeasible: no configuration within bounds"));
    }
    let rows: Vec<DesignRow> = ranked.iter().enumerate().map(|(i, d)| DesignRow::new(i + 1, d)).collect();
    writeln!(out, "rank  config                 port  N_c      blocks  tile          op/B      eff")?;
    for (r, d) in rows.iter().zip(ranked.iter()) {
        writeln!(
            out,
            "{:<5} {:<22} {:<5} {:<8} {:<7} {:<13} {:<9.3} {:.4}",
            r.rank,
            format!("{},{},{},{},{},{},{},{}", r.x_c, r.y_c, r.x_p, r.y_p, r.x_t, r.y_t, r.x_b, r.y_b),
            r.port_width_bits,
            r.compute_units,
            r.blocks_used,
            format!("{}x{}", d.x_tot, d.y_tot),
            r.arithmetic_intensity,
            r.drain_efficiency
        )?;
    }
    if let Some(path) = &a.csv {
        write_rows(path, &rows)?;
    }
    Ok(())
}

/// Rows of the memory sweep; one group of `N_b,min` blocks holds `N_c*s_b`
/// elements and tiles grow in whole groups.
fn memory_rows(a: &SweepMemoryArgs, spec: &SpecFile, dt: &DataTypeSpec) -> Result<Vec<MemoryRow>, Failure> {
    let hw = &spec.hardware;
    if a.units_per_pe == 0 || a.pes == 0 {
        return Err(Failure::new(EXIT_USAGE, "--units-per-pe and --pes must be >= 1"));
    }
    let geom = match a.port_width {
        Some(w) => block_words_at(hw, dt, w)?,
        None => block_words(hw, dt)?,
    };
    let probe = TileConfig { y_c: a.units_per_pe, x_p: a.pes, ..TileConfig::unit() };
    let n_c = a.units_per_pe * a.pes;
    let min_blocks = min_memory_blocks_with(&probe, dt.width_bits, geom.port_width_bits);
    let groups_max = hw.memory_blocks_max / min_blocks;
    if groups_max == 0 {
        return Err(Error::InsufficientMemoryBlocks { min_blocks, max_blocks: hw.memory_blocks_max }.into());
    }
    let group_elems = n_c * geom.words_per_block;
    let from = a.from.unwrap_or(n_c).max(1);
    let to = a.to.unwrap_or(groups_max * group_elems);
    if to < from {
        return Err(Failure::new(EXIT_USAGE, format!("empty range {from}..{to}")));
    }
    let points = if from == to { 1 } else { a.points.max(2) };
    let frequency = a.frequency.unwrap_or(spec.default_frequency_hz);
    let w = f64::from(dt.width_bits);

    let mut rows = Vec::new();
    let mut last = None;
    for i in 0..points {
        let elems =
            if points == 1 { from } else { from + ((to - from) as u128 * i as u128 / (points - 1) as u128) as u64 };
        if last == Some(elems) {
            continue;
        }
        last = Some(elems);
        let groups = elems.div_ceil(group_elems);
        if groups > groups_max {
            break;
        }
        let used = groups * min_blocks;
        // Square tile of `elems` elements: x = y = sqrt(elems).
        let intensity = 8.0 * (elems as f64).sqrt() / w;
        rows.push(MemoryRow {
            memory_tile_elems: elems,
            n_b_used: used,
            utilization_fraction: used as f64 / hw.memory_blocks_max as f64,
            arithmetic_intensity: intensity,
            bandwidth_bytes_per_s: 2.0 * frequency * n_c as f64 / intensity,
        });
    }
    Ok(rows)
}

pub fn sweep_memory(a: &SweepMemoryArgs, out: &mut dyn Write) -> CmdResult {
    let (spec, dt) = load(&a.spec)?;
    let rows = memory_rows(a, &spec, &dt)?;
    writeln!(out, "memory_tile_elems  N_b_used  utilization  op/B       bandwidth")?;
    for r in &rows {
        writeln!(
            out,
            "{:<18} {:<9} {:<12} {:<10.3} {}",
            r.memory_tile_elems,
            r.n_b_used,
            format!("{:.2}%", 100.0 * r.utilization_fraction),
            r.arithmetic_intensity,
            rate(r.bandwidth_bytes_per_s)
        )?;
    }
    if let Some(path) = &a.csv {
        write_rows(path, &rows)?;
    }
    Ok(())
}

const BUILTIN_TYPES: &str = "u8, u16, u32, u64, f16, f32, f64";

fn resolve_element(a: &SimulateArgs) -> Result<(DTypeCode, u64), Failure> {
    if let Some(path) = &a.spec {
        let spec = SpecFile::load(path)?;
        let dt = spec.datatype(&a.dtype)?;
        let code =
            DTypeCode::for_type(dt.arithmetic_kind == ArithmeticKind::Float, dt.width_bits).ok_or_else(|| {
                Failure::new(
                    EXIT_USAGE,
                    format!("no simulated element type for {}-bit {:?}", dt.width_bits, dt.arithmetic_kind),
                )
            })?;
        return Ok((code, dt.accumulation_latency_cycles));
    }
    let code = match a.dtype.to_ascii_lowercase().as_str() {
        "u8" | "uint8" => DTypeCode::U8,
        "u16" | "uint16" => DTypeCode::U16,
        "u32" | "uint32" => DTypeCode::U32,
        "u64" | "uint64" => DTypeCode::U64,
        "f16" | "fp16" | "half" => DTypeCode::F16,
        "f32" | "fp32" | "float" => DTypeCode::F32,
        "f64" | "fp64" | "double" => DTypeCode::F64,
        other => {
            return Err(Failure::new(EXIT_USAGE, format!("unknown dtype `{other}`; available: {BUILTIN_TYPES}")));
        }
    };
    Ok((code, 1))
}

fn sim_config(a: &SimulateArgs) -> Result<TileConfig, Failure> {
    if let Some(cfg) = a.config {
        return Ok(cfg);
    }
    let tile = a.tile.as_deref().ok_or_else(|| Failure::new(EXIT_USAGE, "either --config or --tile is required"))?;
    let parts: Vec<u64> = tile
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::new(EXIT_USAGE, format!("--tile `{tile}`: {e}")))?;
    let (x, y) = match parts[..] {
        [s] => (s, s),
        [x, y] => (x, y),
        _ => return Err(Failure::new(EXIT_USAGE, format!("--tile `{tile}` must be `x,y` or a single size"))),
    };
    Ok(TileConfig::new(1, 1, 1, 1, x, y, 1, 1)?)
}

pub fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let (code, latency) = resolve_element(a)?;
    let cfg = sim_config(a)?;
    if let Some(sizes) = &a.efficiency_sweep {
        return efficiency_sweep(a, &cfg, sizes, out);
    }
    match code {
        DTypeCode::U8 => simulate_typed::<u8>(a, &cfg, latency, out),
        DTypeCode::U16 => simulate_typed::<u16>(a, &cfg, latency, out),
        DTypeCode::U32 => simulate_typed::<u32>(a, &cfg, latency, out),
        DTypeCode::U64 => simulate_typed::<u64>(a, &cfg, latency, out),
        DTypeCode::F16 => simulate_typed::<f16>(a, &cfg, latency, out),
        DTypeCode::F32 => simulate_typed::<f32>(a, &cfg, latency, out),
        DTypeCode::F64 => simulate_typed::<f64>(a, &cfg, latency, out),
    }
}

fn efficiency_sweep(a: &SimulateArgs, cfg: &TileConfig, sizes: &str, out: &mut dyn Write) -> CmdResult {
    let sizes: Vec<u64> = sizes
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::new(EXIT_USAGE, format!("--efficiency-sweep `{sizes}`: {e}")))?;
    let mut rows = Vec::with_capacity(sizes.len());
    for s in sizes {
        let p = ProblemSize::cube(s)?;
        let counts = count_schedule(&p, cfg, a.pad)?;
        rows.push(EfficiencyRow {
            m: p.m,
            n: p.n,
            k: p.k,
            compute_cycles: counts.compute_cycles,
            drain_cycles: counts.drain_cycles,
            efficiency: to_f64(counts.efficiency()),
            closed_form: to_f64(drain_efficiency(&p, cfg)),
        });
    }
    writeln!(out, "size       compute_cycles     drain_cycles     efficiency  closed_form")?;
    for r in &rows {
        writeln!(
            out,
            "{:<10} {:<18} {:<16} {:<11.6} {:.6}",
            r.m, r.compute_cycles, r.drain_cycles, r.efficiency, r.closed_form
        )?;
    }
    if let Some(path) = &a.csv {
        write_rows(path, &rows)?;
    }
    Ok(())
}

fn simulate_typed<T: Element>(a: &SimulateArgs, cfg: &TileConfig, latency: u64, out: &mut dyn Write) -> CmdResult {
    let p = a.problem;
    let (ma, mb) = match (&a.a, &a.b) {
        (Some(pa), Some(pb)) => (matrix_file::read::<T>(pa)?, matrix_file::read::<T>(pb)?),
        _ => (MatrixBuffer::<T>::random(p.m, p.k, a.seed), MatrixBuffer::<T>::random(p.k, p.n, a.seed.wrapping_add(1))),
    };
    let opts = SimOptions { padding: a.pad, log_accesses: a.trace.is_some(), accumulation_latency: latency };
    let result = if a.chain {
        simulate_pe_chain(&p, cfg, &ma, &mb, &opts)?
    } else {
        simulate_schedule(&p, cfg, &ma, &mb, &opts)?
    };
    let reference = reference_mmm(&ma, &mb)?;

    writeln!(out, "engine:             {}", if a.chain { "pe-chain" } else { "schedule" })?;
    writeln!(out, "element:            {:?}", T::DTYPE)?;
    writeln!(out, "problem:            {p}")?;
    writeln!(out, "config:             {cfg}")?;
    let io = &result.io;
    writeln!(out, "loads A / B:        {} / {}", io.loads_a, io.loads_b)?;
    writeln!(out, "stores C:           {}", io.stores_c)?;
    if a.pad {
        writeln!(out, "padding overhead:   {}", io.padding_overhead())?;
    }
    let measured = io.total_loads_with_padding() + u128::from(io.stores_c);
    let analytic = io_volume(&p, cfg.x_tot(), cfg.y_tot())?;
    let io_ok = measured == analytic;
    writeln!(out, "transfers: {measured} (analytic: {analytic}) {}", if io_ok { "OK" } else { "MISMATCH" })?;
    writeln!(
        out,
        "cycles:             {} compute + {} drain, efficiency {:.6}",
        result.compute_cycles,
        result.drain_cycles,
        to_f64(result.efficiency())
    )?;
    match result.min_accumulation_gap {
        Some(gap) => writeln!(
            out,
            "accumulation gap:   {gap} cycles (latency {latency}){}",
            if result.pipeline_safe { "" } else { " HAZARD" }
        )?,
        None => writeln!(out, "accumulation gap:   none")?,
    }

    let oracle_ok = if T::DTYPE.is_float() {
        let err = result.c.max_relative_error(&reference);
        let tol = float_tolerance::<T>(p.k);
        let ok = err <= tol;
        writeln!(out, "oracle: max relative error {err:.3e} (tolerance {tol:.3e}) {}", if ok { "OK" } else { "FAIL" })?;
        ok
    } else {
        let ok = result.c == reference;
        writeln!(out, "oracle: {}", if ok { "exact match OK" } else { "MISMATCH" })?;
        ok
    };

    if let Some(path) = &a.trace {
        let rows: Vec<TraceRow> = io
            .log
            .iter()
            .flatten()
            .enumerate()
            .map(|(seq, acc)| TraceRow {
                seq: seq as u64,
                operand: match acc.operand {
                    Operand::A => "A",
                    Operand::B => "B",
                    Operand::C => "C",
                }
                .into(),
                tile_i: acc.tile.0,
                tile_j: acc.tile.1,
                k: acc.k,
                offset: acc.offset,
            })
            .collect();
        write_rows(path, &rows)?;
    }
    if let Some(path) = &a.out {
        matrix_file::write(path, &result.c)?;
    }

    match (io_ok, oracle_ok) {
        (true, true) => Ok(()),
        (false, _) => Err(Failure::new(EXIT_VERIFY, format!("transfer count {measured} differs from {analytic}"))),
        (true, false) => Err(Failure::new(EXIT_VERIFY, "result differs from the reference product")),
    }
}

pub fn layout(a: &LayoutArgs, out: &mut dyn Write) -> CmdResult {
    let (spec, dt) = load(&a.spec)?;
    let opts = LayoutOptions {
        layout: a.layout.unwrap_or(spec.default_layout),
        transpose_a: !a.no_transpose,
        a_vector_width: a.a_vector_width,
    };
    let graph = build_feasible_layout(&a.config, &spec.hardware, &dt, &opts)?;
    let text = export_graph(&graph);
    match &a.out {
        Some(path) => std::fs::write(path, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    let report = verify_structure(&graph, &a.config, spec.hardware.max_bus_width_bits);
    for line in report.to_string().lines() {
        writeln!(out, "# {line}")?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY, "structure check failed"))
    }
}
