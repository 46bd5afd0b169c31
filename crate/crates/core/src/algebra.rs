//! Grouping, tiling, tile-of decomposition, direct sum, and axiswise
//! scaling.
//!
//! Grouping refines a shard list into consecutive blocks whose extent
//! products realize a logical shape. Tiling composes two grouped layouts by
//! scaling the outer strides with the inner layout's axis-wise span; the
//! direct sum is the unscaled counterpart on the same interleaved domain.

use std::collections::BTreeSet;
use std::ops::Range;

use crate::axis::AxisName;
use crate::canon::{normalize_iters, normalize_replica, sign_normalize_replica};
use crate::coord::Coordinate;
use crate::error::LayoutError;
use crate::layout::{span_factor, Iter, Layout, Shape};

/// A layout whose shard list is partitioned into consecutive blocks, one
/// per dimension of a logical shape. Splits used to form the blocks never
/// change the induced map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedLayout {
    iters: Vec<Iter>,
    blocks: Vec<Range<usize>>,
    replica: Vec<Iter>,
    offset: Coordinate,
    shape: Shape,
}

impl GroupedLayout {
    pub(crate) fn new(
        iters: Vec<Iter>,
        blocks: Vec<Range<usize>>,
        replica: Vec<Iter>,
        offset: Coordinate,
        shape: Shape,
    ) -> Result<Self, LayoutError> {
        debug_assert_eq!(blocks.len(), shape.rank());
        debug_assert!(blocks.first().map_or(iters.is_empty(), |b| b.start == 0));
        debug_assert!(blocks.windows(2).all(|w| w[0].end == w[1].start));
        debug_assert!(blocks
            .last()
            .map_or(iters.is_empty(), |b| b.end == iters.len()));
        let grouped = Self {
            iters,
            blocks,
            replica,
            offset,
            shape,
        };
        // bounds are enforced by materializing a layout
        grouped.layout();
        for (i, block) in grouped.blocks.iter().enumerate() {
            let product: i64 = grouped.iters[block.clone()]
                .iter()
                .map(Iter::extent)
                .product();
            if product != grouped.shape.dim(i) {
                return Err(LayoutError::BlockProductMismatch {
                    rank: i,
                    got: product,
                    want: grouped.shape.dim(i),
                });
            }
        }
        Ok(grouped)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// The refined shard list the blocks partition.
    pub fn iters(&self) -> &[Iter] {
        &self.iters
    }

    pub fn block(&self, i: usize) -> &[Iter] {
        &self.iters[self.blocks[i].clone()]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[Iter]> {
        self.blocks.iter().map(|r| &self.iters[r.clone()])
    }

    pub fn block_ranges(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn replica(&self) -> &[Iter] {
        &self.replica
    }

    pub fn offset(&self) -> &Coordinate {
        &self.offset
    }

    /// Materializes the plain layout; an all-empty shard gains a unit iter
    /// to satisfy the layout invariant.
    pub fn layout(&self) -> Layout {
        let shard = if self.iters.is_empty() {
            vec![Iter::new(1, 1, AxisName::memory()).unwrap()]
        } else {
            self.iters.clone()
        };
        Layout::new(shard, self.replica.clone(), self.offset.clone())
            .expect("grouped layouts are built from bounded parts")
    }

    /// Evaluates at a multi-index of the grouped shape.
    pub fn eval(&self, index: &[i64]) -> Result<crate::coord::CoordSet, LayoutError> {
        self.layout().eval_shaped(&self.shape, index)
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Refines a layout so consecutive shard blocks realize `shape`, peeling
/// gcd factors left to right. Fails when the shape is not admitted or a
/// needed factor cannot be advanced; each block comes out in normal form.
pub fn group_by_shape(layout: &Layout, shape: &Shape) -> Result<GroupedLayout, LayoutError> {
    if !layout.admits(shape) {
        return Err(LayoutError::NotAdmitted {
            shape_size: shape.size(),
            domain: layout.domain_size(),
        });
    }
    let mut queue: std::collections::VecDeque<Iter> = layout
        .shard()
        .iter()
        .filter(|it| it.extent() > 1)
        .cloned()
        .collect();
    let mut iters = Vec::new();
    let mut blocks = Vec::with_capacity(shape.rank());
    for (dim, &target) in shape.dims().iter().enumerate() {
        let start = iters.len();
        let mut block = Vec::new();
        let mut cur = 1i64;
        while cur < target {
            let Some(head) = queue.pop_front() else {
                return Err(LayoutError::GroupStuck {
                    dim,
                    extent: 1,
                    remaining: target / cur,
                });
            };
            let remaining = target / cur;
            let g = gcd(head.extent(), remaining);
            if g == 1 {
                return Err(LayoutError::GroupStuck {
                    dim,
                    extent: head.extent(),
                    remaining,
                });
            }
            let (peeled, tail) = head.split(g)?;
            block.push(peeled);
            cur *= g;
            if tail.extent() > 1 {
                queue.push_front(tail);
            }
        }
        iters.extend(normalize_iters(&block));
        blocks.push(start..iters.len());
    }
    debug_assert!(queue.is_empty());
    GroupedLayout::new(
        iters,
        blocks,
        layout.replica().to_vec(),
        layout.offset().clone(),
        shape.clone(),
    )
}

fn scale_iter(it: &Iter, span: &Coordinate) -> Result<Iter, LayoutError> {
    let f = span_factor(span, it.axis());
    let stride = it
        .stride()
        .checked_mul(f)
        .ok_or(LayoutError::Overflow("scaled stride"))?;
    Iter::new(it.extent(), stride, it.axis().clone())
}

fn scale_offset(offset: &Coordinate, span: &Coordinate) -> Result<Coordinate, LayoutError> {
    let mut out = Coordinate::zero();
    for (axis, v) in offset.entries() {
        let scaled = v
            .checked_mul(span_factor(span, axis))
            .ok_or(LayoutError::Overflow("scaled offset"))?;
        out.set(axis.clone(), scaled);
    }
    Ok(out)
}

fn interleaved_shape(a: &Shape, b: &Shape) -> Shape {
    let mut dims = Vec::with_capacity(a.rank() * 2);
    for (&x, &y) in a.dims().iter().zip(b.dims()) {
        dims.push(x);
        dims.push(y);
    }
    Shape::new(dims).unwrap()
}

fn check_ranks(a: &Shape, b: &Shape) -> Result<(), LayoutError> {
    if a.rank() != b.rank() {
        return Err(LayoutError::RankMismatch(a.rank(), b.rank()));
    }
    Ok(())
}

/// Tiles `a` by `b`: at every rank position the outer block's strides are
/// scaled by the inner layout's axis-wise span, then the inner block
/// follows unchanged. The result lives on the interleaved shape
/// `(S_a[0], S_b[0], …)` and satisfies
/// `f(x‖y) = f_a(x) ⊙ span(f_b) + f_b(y)` with replicas composing by
/// Minkowski sum and offsets by scaled addition.
pub fn tile(
    a: &Layout,
    a_shape: &Shape,
    b: &Layout,
    b_shape: &Shape,
) -> Result<GroupedLayout, LayoutError> {
    check_ranks(a_shape, b_shape)?;
    let ga = group_by_shape(a, a_shape)?;
    let gb = group_by_shape(b, b_shape)?;
    let span = gb.layout().span();

    let mut iters = Vec::new();
    let mut blocks = Vec::with_capacity(a_shape.rank() * 2);
    for j in 0..a_shape.rank() {
        let start = iters.len();
        for it in ga.block(j) {
            iters.push(scale_iter(it, &span)?);
        }
        blocks.push(start..iters.len());
        let start = iters.len();
        iters.extend_from_slice(gb.block(j));
        blocks.push(start..iters.len());
    }

    let mut replica = Vec::with_capacity(a.replica().len() + b.replica().len());
    for it in a.replica() {
        replica.push(scale_iter(it, &span)?);
    }
    replica.extend_from_slice(b.replica());

    let offset = scale_offset(a.offset(), &span)?
        .checked_add(b.offset())
        .ok_or(LayoutError::Overflow("tiled offset"))?;

    GroupedLayout::new(
        iters,
        blocks,
        replica,
        offset,
        interleaved_shape(a_shape, b_shape),
    )
}

/// Superposes two grouped layouts on the interleaved domain without span
/// scaling: `f(x‖y) = f_a(x) + f_b(y)`.
pub fn direct_sum(
    a: &Layout,
    a_shape: &Shape,
    b: &Layout,
    b_shape: &Shape,
) -> Result<GroupedLayout, LayoutError> {
    check_ranks(a_shape, b_shape)?;
    let ga = group_by_shape(a, a_shape)?;
    let gb = group_by_shape(b, b_shape)?;

    let mut iters = Vec::new();
    let mut blocks = Vec::with_capacity(a_shape.rank() * 2);
    for j in 0..a_shape.rank() {
        let start = iters.len();
        iters.extend_from_slice(ga.block(j));
        blocks.push(start..iters.len());
        let start = iters.len();
        iters.extend_from_slice(gb.block(j));
        blocks.push(start..iters.len());
    }

    let mut replica = a.replica().to_vec();
    replica.extend_from_slice(b.replica());
    let offset = a
        .offset()
        .checked_add(b.offset())
        .ok_or(LayoutError::Overflow("direct-sum offset"))?;

    GroupedLayout::new(
        iters,
        blocks,
        replica,
        offset,
        interleaved_shape(a_shape, b_shape),
    )
}

/// Multiplies every stride and offset component by the matching span
/// component; axes absent from `scale` are left alone. Extents never
/// change.
pub fn scale_by(layout: &Layout, scale: &Coordinate) -> Result<Layout, LayoutError> {
    let shard = layout
        .shard()
        .iter()
        .map(|it| scale_iter(it, scale))
        .collect::<Result<Vec<_>, _>>()?;
    let replica = layout
        .replica()
        .iter()
        .map(|it| scale_iter(it, scale))
        .collect::<Result<Vec<_>, _>>()?;
    Layout::new(shard, replica, scale_offset(layout.offset(), scale)?)
}

/// Decides whether `a = c ⊗ b` for some outer layout `c` and recovers it.
///
/// The shard check groups `a` by the interleaved shape `(S_c‖S_b)` so the
/// inner blocks can be compared against `b`'s blocks exactly and the outer
/// blocks descaled by `b`'s span. Offsets must satisfy
/// `O_a = O_c ⊙ W + O_b` and the replica set of `a` must decompose as the
/// Minkowski sum of `b`'s replicas and a span-scaled remainder; both checks
/// are mandatory and failures are reported rather than ignored.
pub fn tile_of(
    a: &Layout,
    a_shape: &Shape,
    b: &Layout,
    b_shape: &Shape,
) -> Result<(GroupedLayout, Shape), LayoutError> {
    check_ranks(a_shape, b_shape)?;
    let mut outer_dims = Vec::with_capacity(a_shape.rank());
    for (&sa, &sb) in a_shape.dims().iter().zip(b_shape.dims()) {
        if sa % sb != 0 {
            return Err(LayoutError::ShapeNotDivisible {
                outer: a_shape.dims().to_vec(),
                inner: b_shape.dims().to_vec(),
            });
        }
        outer_dims.push(sa / sb);
    }
    let c_shape = Shape::new(outer_dims).unwrap();

    let gb = group_by_shape(b, b_shape)?;
    let span = gb.layout().span();
    let ga = group_by_shape(a, &interleaved_shape(&c_shape, b_shape))?;

    let mut iters = Vec::new();
    let mut blocks = Vec::with_capacity(c_shape.rank());
    for j in 0..c_shape.rank() {
        if ga.block(2 * j + 1) != gb.block(j) {
            return Err(LayoutError::InnerBlockMismatch { rank: j });
        }
        let start = iters.len();
        for it in ga.block(2 * j) {
            let w = span_factor(&span, it.axis());
            if it.stride() % w != 0 {
                return Err(LayoutError::NotSpanDivisible {
                    stride: it.stride(),
                    axis: it.axis().to_string(),
                    span: w,
                });
            }
            iters.push(Iter::new(it.extent(), it.stride() / w, it.axis().clone())?);
        }
        blocks.push(start..iters.len());
    }

    // the offset equation only needs sign normalization; absorption never
    // moves the offset
    let (a_offset, a_replica) = sign_normalize_replica(a.offset(), a.replica());
    let (b_offset, b_replica) = sign_normalize_replica(b.offset(), b.replica());

    let mut c_offset = Coordinate::zero();
    let mut offset_axes: Vec<&AxisName> = a_offset.axes().chain(b_offset.axes()).collect();
    offset_axes.sort();
    offset_axes.dedup();
    for axis in offset_axes {
        let diff = a_offset.get(axis) - b_offset.get(axis);
        let w = span_factor(&span, axis);
        if diff % w != 0 {
            return Err(LayoutError::OffsetNotDivisible {
                offset: diff,
                axis: axis.to_string(),
                span: w,
            });
        }
        c_offset.set(axis.clone(), diff / w);
    }

    let c_replica = recover_replica(&a_replica, &b_replica, &span)?;

    let c = GroupedLayout::new(iters, blocks, c_replica, c_offset, c_shape.clone())?;
    Ok((c, c_shape))
}

// The replication collection of `a` must be the Minkowski sum of `b`'s
// replicas and a span-scaled remainder. Three attempts, cheapest first:
// peel `b`'s iters out of `a`'s as a multiset, first on the sign-normalized
// lists (exact for anything the tiling constructor built), then on the
// saturated canonical lists, and finally per axis as value sets, splitting
// each value into quotient and remainder by the span and folding the
// quotient set back into iters by stripping its smallest-stride run.
fn recover_replica(
    a_replica: &[Iter],
    b_replica: &[Iter],
    span: &Coordinate,
) -> Result<Vec<Iter>, LayoutError> {
    if let Some(found) = multiset_descale(a_replica, b_replica, span) {
        return Ok(found);
    }
    let (_, a_canon) = normalize_replica(&Coordinate::zero(), a_replica);
    let (_, b_canon) = normalize_replica(&Coordinate::zero(), b_replica);
    if let Some(found) = multiset_descale(&a_canon, &b_canon, span) {
        return Ok(found);
    }
    setwise_descale(&a_canon, &b_canon, span)
}

// Exact multiset decomposition: every `b` iter must appear verbatim in `a`
// and the remainder must descale by the span. When it succeeds the value
// sets match by construction.
fn multiset_descale(
    a_replica: &[Iter],
    b_replica: &[Iter],
    span: &Coordinate,
) -> Option<Vec<Iter>> {
    let mut rest: Vec<Iter> = a_replica.to_vec();
    for needle in b_replica {
        let pos = rest.iter().position(|it| it == needle)?;
        rest.remove(pos);
    }
    let mut out = Vec::with_capacity(rest.len());
    for it in rest {
        let w = span_factor(span, it.axis());
        if it.stride() % w != 0 {
            return None;
        }
        out.push(Iter::new(it.extent(), it.stride() / w, it.axis().clone()).ok()?);
    }
    Some(out)
}

fn setwise_descale(
    a_replica: &[Iter],
    b_replica: &[Iter],
    span: &Coordinate,
) -> Result<Vec<Iter>, LayoutError> {
    const REPLICA_ENUM_CAP: i64 = 65536;
    let mut axes: Vec<&AxisName> = a_replica.iter().chain(b_replica).map(Iter::axis).collect();
    axes.sort();
    axes.dedup();

    let mut out = Vec::new();
    for axis in axes {
        let fail = || LayoutError::ReplicaDecomposition(axis.to_string());
        let set_a = axis_value_set(a_replica, axis, REPLICA_ENUM_CAP).ok_or_else(fail)?;
        let set_b = axis_value_set(b_replica, axis, REPLICA_ENUM_CAP).ok_or_else(fail)?;
        let w = span_factor(span, axis);
        let quotients: BTreeSet<i64> = set_a.iter().map(|v| v.div_euclid(w)).collect();
        let mut product = BTreeSet::new();
        for &q in &quotients {
            for &b in &set_b {
                product.insert(q * w + b);
            }
        }
        if product != set_a {
            return Err(fail());
        }
        for (stride, extent) in iters_from_value_set(&quotients).ok_or_else(fail)? {
            out.push(Iter::new(extent, stride, axis.clone())?);
        }
    }
    Ok(out)
}

fn axis_value_set(replica: &[Iter], axis: &AxisName, cap: i64) -> Option<BTreeSet<i64>> {
    let mut set = BTreeSet::new();
    set.insert(0i64);
    for it in replica.iter().filter(|it| it.axis() == axis) {
        if set.len() as i64 * it.extent() > cap {
            return None;
        }
        let mut next = BTreeSet::new();
        for v in &set {
            for k in 0..it.extent() {
                next.insert(v + k * it.stride());
            }
        }
        set = next;
    }
    Some(set)
}

// Inverse of enumeration for saturated replication sets: strip the run
// along the smallest nonzero stride, keep the lower-boundary points, and
// recurse. The reconstruction is verified before being accepted.
fn iters_from_value_set(set: &BTreeSet<i64>) -> Option<Vec<(i64, i64)>> {
    let mut out = Vec::new();
    let mut current: BTreeSet<i64> = set.clone();
    if !current.contains(&0) {
        return None;
    }
    while current.len() > 1 {
        let stride = *current.iter().find(|&&v| v != 0)?;
        if stride < 0 {
            return None;
        }
        let mut extent = 1;
        while current.contains(&(extent * stride)) {
            extent += 1;
        }
        out.push((stride, extent));
        // keep the lower-boundary points: the predicate reads the set, so
        // this cannot be a retain in place
        let boundary: BTreeSet<i64> = current
            .iter()
            .filter(|&&v| !current.contains(&(v - stride)))
            .copied()
            .collect();
        current = boundary;
    }
    // accept only exact reconstructions
    let mut check = BTreeSet::new();
    check.insert(0i64);
    for &(stride, extent) in &out {
        let mut next = BTreeSet::new();
        for v in &check {
            for k in 0..extent {
                next.insert(v + k * stride);
            }
        }
        check = next;
    }
    if &check == set {
        Some(out)
    } else {
        None
    }
}
