//! Region slicing of grouped layouts.
//!
//! Each block of the grouped shape is sliced independently: fastest digits
//! whose start is zero and whose extent divides the remaining length are
//! peeled off unchanged, and the pivot digit is then handled by one of two
//! sufficient forms — no wrap (the region stays inside the pivot digit) or
//! a symmetric single wrap whose midpoint lands exactly on the next digit
//! boundary. The conditions are sufficient, not necessary, so failure is an
//! ordinary result and callers pick another strategy.

use crate::axis::AxisName;
use crate::coord::Coordinate;
use crate::error::LayoutError;
use crate::layout::{unflatten, Iter, Layout, Region, Shape};

use crate::algebra::group_by_shape;

/// Slices one canonicalized block over `[begin, begin+extent)` of its local
/// domain. Returns the replacement iters (slowest first, extent-1 iters for
/// frozen digits retained) and the block's digit contribution at `begin`.
pub fn slice_block(
    block: &[Iter],
    begin: i64,
    extent: i64,
) -> Result<(Vec<Iter>, Coordinate), LayoutError> {
    let block_size: i64 = block.iter().map(Iter::extent).product();
    if extent < 1 || begin < 0 || begin + extent > block_size {
        return Err(LayoutError::BadRegion { begin, extent });
    }
    let extents: Vec<i64> = block.iter().map(Iter::extent).collect();
    let start_digits = unflatten(&extents, begin)?;

    let mut origin = Coordinate::zero();
    for (d, it) in start_digits.iter().zip(block) {
        let v = origin.get(it.axis()) + d * it.stride();
        origin.set(it.axis().clone(), v);
    }

    let mut peeled = Vec::new();
    let mut rem = extent;
    let mut pivot = None;
    for j in (0..block.len()).rev() {
        if start_digits[j] == 0 && rem % block[j].extent() == 0 {
            peeled.insert(0, block[j].clone());
            rem /= block[j].extent();
        } else {
            pivot = Some(j);
            break;
        }
    }

    if rem == 1 {
        let mut out = Vec::new();
        if let Some(k) = pivot {
            for it in &block[..=k] {
                out.push(Iter::new(1, it.stride(), it.axis().clone())?);
            }
        }
        out.extend(peeled);
        return Ok((out, origin));
    }

    let k = pivot.expect("rem > 1 leaves an unpeeled digit");
    let d_k = start_digits[k];
    let e_k = block[k].extent();
    let stride_k = block[k].stride();
    let axis_k = block[k].axis().clone();
    let unsupported = LayoutError::SliceUnsupported {
        digit: k,
        start: d_k,
        remaining: rem,
        extent: e_k,
    };

    let mut out = Vec::new();
    if d_k + rem <= e_k {
        // no wrap: digits left of the pivot stay frozen
        for it in &block[..k] {
            out.push(Iter::new(1, it.stride(), it.axis().clone())?);
        }
        out.push(Iter::new(rem, stride_k, axis_k)?);
        out.extend(peeled);
        return Ok((out, origin));
    }

    let half = rem / 2;
    // the carry must fit in the digit left of the pivot
    let capacity = k == 0 || start_digits[k - 1] < block[k - 1].extent();
    if rem % 2 == 0 && d_k + half == e_k && capacity {
        // symmetric one-wrap: two chunks of `half`, the second starting one
        // carry into the digit left of the pivot
        let step = (e_k - half)
            .checked_mul(stride_k)
            .ok_or(LayoutError::Overflow("slice chunk step"))?;
        let (delta, axis) = if k == 0 {
            (-step, axis_k.clone())
        } else {
            if block[k - 1].axis() != &axis_k {
                return Err(unsupported);
            }
            (block[k - 1].stride() - step, axis_k.clone())
        };
        if delta == 0 {
            return Err(unsupported);
        }
        for it in &block[..k.saturating_sub(1)] {
            out.push(Iter::new(1, it.stride(), it.axis().clone())?);
        }
        out.push(Iter::new(2, delta, axis)?);
        out.push(Iter::new(half, stride_k, axis_k)?);
        out.extend(peeled);
        return Ok((out, origin));
    }

    Err(unsupported)
}

/// Slices `layout` (under an admitted `shape`) by an axis-aligned region.
/// The result maps every local index `u` of the region extents to the same
/// coordinates the source maps `u + begin` to; replicas pass through
/// unchanged and the region origin folds into the offset.
pub fn slice(layout: &Layout, shape: &Shape, region: &Region) -> Result<Layout, LayoutError> {
    region.check_within(shape)?;
    let grouped = group_by_shape(layout, shape)?;

    let mut shard = Vec::new();
    let mut offset = layout.offset().clone();
    for (i, &(begin, extent)) in region.dims().iter().enumerate() {
        let (iters, origin) = slice_block(grouped.block(i), begin, extent)?;
        shard.extend(iters);
        offset = offset
            .checked_add(&origin)
            .ok_or(LayoutError::Overflow("slice offset"))?;
    }
    if shard.is_empty() {
        shard.push(Iter::new(1, 1, AxisName::memory())?);
    }
    Layout::new(shard, layout.replica().to_vec(), offset)
}
