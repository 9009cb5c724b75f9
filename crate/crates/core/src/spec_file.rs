//! Hardware and data-type description files (TOML, strict schema).
//!
//! ```toml
//! [hardware]
//! name = "toy"
//! memory_blocks = 4
//! block_capacity_bits = 36864
//! port_widths_bits = [36]
//! max_bus_width_bits = 64
//! max_frequency_hz = 200e6
//! resources = { DSP = 4 }
//!
//! [defaults]            # optional
//! frequency_hz = 200e6
//! layout = "1d"
//!
//! [[datatype]]
//! name = "fp32"
//! width_bits = 32
//! kind = "float"
//! accumulation_latency_cycles = 1
//! compute_unit = { DSP = 1 }
//! pe_overhead = { DSP = 0 }
//! ```

use crate::error::{Error, Result};
use crate::hardware::{ArithmeticKind, DataTypeSpec, HardwareSpec, Layout, ResourceVector};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    hardware: RawHardware,
    #[serde(default)]
    defaults: RawDefaults,
    #[serde(rename = "datatype", default)]
    datatypes: Vec<RawDataType>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHardware {
    name: String,
    memory_blocks: u64,
    block_capacity_bits: u64,
    port_widths_bits: Vec<u32>,
    max_bus_width_bits: u64,
    max_frequency_hz: f64,
    resources: BTreeMap<String, u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDefaults {
    frequency_hz: Option<f64>,
    layout: Option<Layout>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataType {
    name: String,
    width_bits: u32,
    kind: ArithmeticKind,
    accumulation_latency_cycles: u64,
    compute_unit: BTreeMap<String, u64>,
    pe_overhead: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub hardware: HardwareSpec,
    pub datatypes: Vec<DataTypeSpec>,
    pub default_frequency_hz: f64,
    pub default_layout: Layout,
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::SpecFile(e.to_string()))?;
        let context = |what: String| move |e: Error| Error::SpecFile(format!("{what}: {e}"));

        let h = raw.hardware;
        let hardware = HardwareSpec {
            name: h.name,
            resources_max: ResourceVector::new(h.resources).map_err(context("hardware.resources".into()))?,
            memory_blocks_max: h.memory_blocks,
            block_capacity_bits: h.block_capacity_bits,
            supported_port_widths_bits: h.port_widths_bits,
            max_bus_width_bits: h.max_bus_width_bits,
            target_frequency_hz: h.max_frequency_hz,
        };
        hardware.validate().map_err(context("hardware".into()))?;

        let mut datatypes: Vec<DataTypeSpec> = Vec::with_capacity(raw.datatypes.len());
        for (i, d) in raw.datatypes.into_iter().enumerate() {
            let at = format!("datatype[{i}] ({})", d.name);
            if datatypes.iter().any(|o| o.name == d.name) {
                return Err(Error::SpecFile(format!("{at}: duplicate datatype name")));
            }
            let dt = DataTypeSpec {
                name: d.name,
                width_bits: d.width_bits,
                cost_per_compute_unit: ResourceVector::new(d.compute_unit)
                    .map_err(context(format!("{at}.compute_unit")))?,
                overhead_per_pe: ResourceVector::new(d.pe_overhead).map_err(context(format!("{at}.pe_overhead")))?,
                accumulation_latency_cycles: d.accumulation_latency_cycles,
                arithmetic_kind: d.kind,
            };
            dt.validate_against(&hardware).map_err(context(at))?;
            datatypes.push(dt);
        }

        let default_frequency_hz = raw.defaults.frequency_hz.unwrap_or(hardware.target_frequency_hz);
        if !(default_frequency_hz.is_finite() && default_frequency_hz > 0.0) {
            return Err(Error::SpecFile("defaults.frequency_hz must be positive".into()));
        }
        Ok(Self {
            hardware,
            datatypes,
            default_frequency_hz,
            default_layout: raw.defaults.layout.unwrap_or(Layout::Chain1D),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::SpecFile(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::SpecFile(msg) => Error::SpecFile(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn datatype_names(&self) -> Vec<&str> {
        self.datatypes.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn datatype(&self, name: &str) -> Result<&DataTypeSpec> {
        self.datatypes.iter().find(|d| d.name.eq_ignore_ascii_case(name)).ok_or_else(|| {
            Error::SpecFile(format!("unknown datatype `{name}`; available: {}", self.datatype_names().join(", ")))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = include_str!("../specs/toy.toml");
    const VU9P: &str = include_str!("../specs/vu9p.toml");

    #[test]
    fn shipped_files_parse() {
        let toy = SpecFile::parse(TOY).unwrap();
        assert_eq!(toy.hardware.resources_max.get("DSP"), Some(4));
        let vu9p = SpecFile::parse(VU9P).unwrap();
        let r = &vu9p.hardware.resources_max;
        assert_eq!((r.get("LUT"), r.get("FF"), r.get("DSP")), (Some(1033608), Some(2174048), Some(6834)));
        assert_eq!(vu9p.hardware.memory_blocks_max, 1906);
        assert_eq!(vu9p.datatype_names(), ["fp16", "fp32", "fp64", "uint8", "uint16", "uint32"]);
    }

    #[test]
    fn unknown_key_rejected_with_position() {
        let text = TOY.replace("memory_blocks = 4", "memory_blocks = 4\nbogus = 1");
        let msg = SpecFile::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("bogus") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn mismatched_resource_kinds_named() {
        let text = TOY.replace("compute_unit = { DSP = 1 }", "compute_unit = { LUT = 1 }");
        let msg = SpecFile::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("datatype[0]"), "{msg}");
    }

    #[test]
    fn unknown_datatype_lists_available() {
        let spec = SpecFile::parse(VU9P).unwrap();
        let msg = spec.datatype("fp8").unwrap_err().to_string();
        assert!(msg.contains("fp16, fp32, fp64, uint8, uint16, uint32"), "{msg}");
        assert_eq!(spec.datatype("FP32").unwrap().width_bits, 32);
    }

    #[test]
    fn invalid_hardware_rejected() {
        let text = TOY.replace("port_widths_bits = [36]", "port_widths_bits = [36, 18]");
        assert!(SpecFile::parse(&text).is_err());
    }
}
