//! Design-space exploration and schedule simulation for communication-avoiding
//! matrix-matrix multiplication on resource-constrained spatial accelerators.
//!
//! The crate is organised bottom-up:
//!
//! - [`hardware`]: resource vectors, memory-block geometry and the tile
//!   hierarchy (`c` units, `p` PEs, `t` compute tiles, `b` block tiles).
//! - [`analytic`]: execution time, I/O volume, intensities, drain efficiency.
//! - [`tiler`]: greedy parameter selection and exhaustive ranked sweeps.
//! - [`sim`]: functional execution of the tiled schedule and the 1D PE chain,
//!   with exact transfer and cycle accounting.
//! - [`layout`]: the kernel's module graph and its structural properties.
//! - [`cli`]: the `camm` command-line front end and the spec-file schema.
//!
//! Simulation is generic over [`Element`]; aliases for the supported element
//! types are provided below.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod hardware;
pub mod layout;
pub mod scalar;
pub mod sim;
pub mod spec_file;
pub mod tiler;

pub use analytic::{DesignPoint, ProblemSize};
pub use error::{Error, Result};
pub use hardware::{BlockGeometry, DataTypeSpec, HardwareSpec, Layout, ResourceVector, TileConfig};
pub use scalar::{DTypeCode, Element, Real};
pub use sim::{IoTrace, MatrixBuffer, SimOptions, SimResult};

/// Exact rational used for intensities, volumes and efficiencies.
pub type Exact = num_rational::Ratio<u128>;

pub use half::f16;

pub type MatrixU8 = MatrixBuffer<u8>;
pub type MatrixU16 = MatrixBuffer<u16>;
pub type MatrixU32 = MatrixBuffer<u32>;
pub type MatrixU64 = MatrixBuffer<u64>;
pub type MatrixF16 = MatrixBuffer<f16>;
pub type MatrixF32 = MatrixBuffer<f32>;
pub type MatrixF64 = MatrixBuffer<f64>;

pub type SimResultF32 = SimResult<f32>;
pub type SimResultF64 = SimResult<f64>;
pub type SimResultU32 = SimResult<u32>;
