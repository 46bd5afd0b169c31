//! A layout algebra for tensor placement across named hardware axes.
//!
//! A layout maps a logical index to a *set* of coordinates over axes such
//! as memory offsets, lanes, warps, device ids, or scratchpad partitions.
//! It decomposes into a shard list `D` (strided iters that split the
//! logical index and produce a base coordinate), a replica collection `R`
//! (iters enumerating extra offsets independent of the index), and a
//! constant offset `O`, so a logical index `x` maps to
//! `{ D(x) + r + O | r ∈ R }`.
//!
//! On top of the core evaluation semantics the crate provides:
//!
//! - [`canon`]: rewrite rules to a canonical form and an equivalence check;
//! - [`algebra`]: grouping by a logical shape, span-scaled tiling and its
//!   inverse decomposition, direct sums, and axiswise scaling;
//! - [`slice`]: region slicing of grouped layouts;
//! - [`oracle`]: brute-force enumeration used to verify everything else;
//! - [`plan`]: layout-driven instruction planning for box copies and
//!   systolic-array matmuls, with interpreters for verification;
//! - [`parse`] and [`cli`]: a textual grammar and a command-line front end.
//!
//! Start with the runnable examples (`cargo run --example tiling`, etc.),
//! one per capability.

pub mod algebra;
pub mod axis;
pub mod canon;
pub mod cli;
pub mod coord;
pub mod error;
pub mod layout;
pub mod oracle;
pub mod parse;
pub mod plan;
pub mod render;
pub mod slice;

pub use algebra::{direct_sum, group_by_shape, scale_by, tile, tile_of, GroupedLayout};
pub use axis::{axis, AxisName};
pub use canon::{canonicalize, equivalent, gap_condition, normalize_replica, normalize_shard};
pub use coord::{CoordSet, Coordinate};
pub use error::{LayoutError, ParseError};
pub use layout::{flatten, span_factor, unflatten, Iter, Layout, Region, Shape};
pub use oracle::{enumerate, oracle_equivalent, oracle_span, Oracle};
pub use parse::{format_layout, parse_layout, LayoutExpr};
pub use slice::{slice, slice_block};
