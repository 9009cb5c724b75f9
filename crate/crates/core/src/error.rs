use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resource kinds differ: {left:?} vs {right:?}")]
    ResourceKindMismatch { left: Vec<String>, right: Vec<String> },

    #[error("duplicate resource kind `{0}`")]
    DuplicateResourceKind(String),

    #[error(
        "unsupported data type: {width_bits}-bit elements exceed the widest memory port ({widest_port_bits} bits)"
    )]
    UnsupportedType { width_bits: u32, widest_port_bits: u32 },

    #[error("port width {0} bits is not supported by the memory blocks")]
    UnsupportedPortWidth(u32),

    #[error("infeasible configuration: {min_blocks} memory blocks required, {max_blocks} available")]
    InsufficientMemoryBlocks { min_blocks: u64, max_blocks: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tile {tile} does not divide matrix extent {extent} along {axis} (enable padding to allow this)")]
    NonDivisible { axis: &'static str, extent: u64, tile: u64 },

    #[error("tile extent {tile} exceeds matrix extent {extent} along {axis}")]
    TileExceedsMatrix { axis: &'static str, extent: u64, tile: u64 },

    #[error("chain too shallow: x_t*y_t = {positions} compute tiles but {pes} PEs in the chain")]
    ChainDepth { positions: u64, pes: u64 },

    #[error("layout requires x_c = 1 and y_p = 1 (got x_c = {x_c}, y_p = {y_p})")]
    NotChainLayout { x_c: u64, y_p: u64 },

    #[error("queue depth {depth} is below the memory-tile column height {height}")]
    QueueTooShallow { depth: u64, height: u64 },

    #[error("matrix file: {0}")]
    MatrixFile(String),

    #[error("spec file: {0}")]
    SpecFile(String),
}
