use thiserror::Error;

/// Errors reported by layout construction, algebra, slicing, and planning.
///
/// Operation failures (grouping, slicing, planning) are first-class results:
/// the conditions the algorithms check are sufficient, not necessary, and
/// callers such as the planners treat failure as "choose another strategy".
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("axis name {0:?} is not a valid identifier")]
    InvalidAxisName(String),
    #[error("iter extent must be >= 1, got {0}")]
    BadExtent(i64),
    #[error("iter stride must be nonzero")]
    ZeroStride,
    #[error("shard list must contain at least one iter")]
    EmptyShard,
    #[error("shape dimension must be >= 1, got {0}")]
    BadDim(i64),
    #[error("shape must have rank >= 1")]
    EmptyShape,
    #[error("region begin must be >= 0 and extent >= 1, got {begin}:{extent}")]
    BadRegion { begin: i64, extent: i64 },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("index {index} out of domain [0, {domain})")]
    IndexOutOfDomain { index: i64, domain: i64 },
    #[error("multi-index {index:?} out of bounds for shape {shape:?}")]
    IndexOutOfShape { index: Vec<i64>, shape: Vec<i64> },
    #[error("shape of size {shape_size} is not admitted by layout domain {domain}")]
    NotAdmitted { shape_size: i64, domain: i64 },
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("region {region:?} does not fit in shape {shape:?}")]
    RegionOutOfShape {
        region: Vec<(i64, i64)>,
        shape: Vec<i64>,
    },

    #[error("gap check requires sign-normalized replica iters, found stride {0}")]
    NegativeReplicaStride(i64),
    #[error("equivalence undecidable: gap condition fails and domain size {size} exceeds oracle limit {limit}")]
    Undecidable { size: i64, limit: i64 },

    #[error("grouping stuck on dim {dim}: iter extent {extent} shares no factor with remaining target {remaining}")]
    GroupStuck {
        dim: usize,
        extent: i64,
        remaining: i64,
    },
    #[error("cannot align iter extents {0:?} against {1:?}")]
    ExtentAlignment(Vec<i64>, Vec<i64>),

    #[error("shape {inner:?} does not divide {outer:?} per dimension")]
    ShapeNotDivisible { outer: Vec<i64>, inner: Vec<i64> },
    #[error("stride {stride} on axis {axis} is not divisible by span {span}")]
    NotSpanDivisible {
        stride: i64,
        axis: String,
        span: i64,
    },
    #[error("inner block at rank {rank} does not match the tile operand")]
    InnerBlockMismatch { rank: usize },
    #[error("outer block extent product {got} != expected {want} at rank {rank}")]
    BlockProductMismatch { rank: usize, got: i64, want: i64 },
    #[error("offset component {offset} on axis {axis} is not divisible by span {span}")]
    OffsetNotDivisible {
        offset: i64,
        axis: String,
        span: i64,
    },
    #[error("replica decomposition failed on axis {0}")]
    ReplicaDecomposition(String),

    #[error("slice: no sufficient form applies at digit {digit} (start {start}, remaining {remaining}, extent {extent})")]
    SliceUnsupported {
        digit: usize,
        start: i64,
        remaining: i64,
        extent: i64,
    },

    #[error("enumeration size {size} exceeds limit {limit}")]
    EnumerationLimit { size: i64, limit: i64 },

    #[error("iter intersection requires matching axes, got {0} and {1}")]
    AxisMismatch(String, String),
    #[error("iter intersection requires positive strides, got {0}")]
    UnnormalizedStride(i64),
    #[error("copy atom rank {rank} must be >= 2 and match the tensor rank {tensor_rank}")]
    BadAtomRank { rank: usize, tensor_rank: usize },
    #[error("copy atom dtype size {0} must be one of 1, 2, 4, 8")]
    BadDtypeSize(i64),
    #[error("copy atom swizzle mode {0} must be one of 32, 64, 128 bytes")]
    BadSwizzleMode(i64),
    #[error("region volumes differ: {0} vs {1}")]
    VolumeMismatch(i64, i64),
    #[error("planning requires addresses on a single memory axis, found {0}")]
    UnsupportedAxis(String),
    #[error("planning requires replica-free operands")]
    ReplicatedOperand,
    #[error("copy planning requires equal region extents, got {0:?} and {1:?}")]
    RegionShapeMismatch(Vec<i64>, Vec<i64>),
    #[error("global layout does not decompose over the atom box at dim {0}")]
    GlobalAtomMismatch(usize),
    #[error("contraction dim of {operand} must map to the partition axis")]
    KNotOnPartition { operand: char },
    #[error("output rows must map to the partition axis of the accumulator")]
    MNotOnPartition,
    #[error("no single-iter column selection exists for the instruction")]
    NoColumnSelection,
    #[error("matmul planning requires layouts over axes P and F only, found {0}")]
    NotPartitionFree(String),
    #[error("plan is malformed: {0}")]
    MalformedPlan(&'static str),
}

/// Errors produced while parsing the textual layout grammar.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(pos: usize, msg: impl Into<String>) -> Self {
        Self {
            pos,
            msg: msg.into(),
        }
    }
}
