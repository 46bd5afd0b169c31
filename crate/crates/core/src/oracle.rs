//! Brute-force reference semantics: exhaustive evaluation of a layout over
//! its whole domain. Every property test and the equivalence fallback check
//! against this module rather than the algebraic implementations.

use crate::axis::AxisName;
use crate::coord::{CoordSet, Coordinate};
use crate::error::LayoutError;
use crate::layout::Layout;

/// Default enumeration budget: `domain · replicas` must stay below this.
pub const DEFAULT_LIMIT: i64 = 65536;

/// Exhaustive evaluator with a configurable size budget.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    limit: i64,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new(DEFAULT_LIMIT)
    }
}

impl Oracle {
    pub fn new(limit: i64) -> Self {
        Self { limit }
    }

    pub fn limit(&self) -> i64 {
        self.limit
    }

    fn check_size(&self, layout: &Layout) -> Result<(), LayoutError> {
        let size = layout
            .domain_size()
            .checked_mul(layout.replica_size())
            .unwrap_or(i64::MAX);
        if size > self.limit {
            return Err(LayoutError::EnumerationLimit {
                size,
                limit: self.limit,
            });
        }
        Ok(())
    }

    /// Evaluates every index in `[0, domain)` in order.
    pub fn enumerate(&self, layout: &Layout) -> Result<Vec<CoordSet>, LayoutError> {
        self.check_size(layout)?;
        (0..layout.domain_size()).map(|x| layout.eval(x)).collect()
    }

    /// Pointwise image equality over the whole domain; layouts with
    /// different domain sizes are simply not equivalent.
    pub fn equivalent(&self, a: &Layout, b: &Layout) -> Result<bool, LayoutError> {
        if a.domain_size() != b.domain_size() {
            return Ok(false);
        }
        self.check_size(a)?;
        self.check_size(b)?;
        for x in 0..a.domain_size() {
            if a.eval(x)? != b.eval(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Axis-wise `max − min + 1` over every coordinate the layout produces.
    /// Axes spanning a single value are left out, matching the sparse
    /// convention of [`Layout::span`].
    pub fn span(&self, layout: &Layout) -> Result<Coordinate, LayoutError> {
        self.check_size(layout)?;
        let mut ranges: std::collections::BTreeMap<AxisName, (i64, i64)> =
            std::collections::BTreeMap::new();
        for x in 0..layout.domain_size() {
            for coord in layout.eval(x)?.iter() {
                for (axis, _) in coord.entries() {
                    ranges.entry(axis.clone()).or_insert((i64::MAX, i64::MIN));
                }
            }
        }
        for x in 0..layout.domain_size() {
            for coord in layout.eval(x)?.iter() {
                for (axis, range) in ranges.iter_mut() {
                    // absent axes read as zero, which is the real value
                    let v = coord.get(axis);
                    range.0 = range.0.min(v);
                    range.1 = range.1.max(v);
                }
            }
        }
        let mut span = Coordinate::zero();
        for (axis, (lo, hi)) in ranges {
            if hi > lo {
                span.set(axis, hi - lo + 1);
            }
        }
        Ok(span)
    }
}

/// [`Oracle::enumerate`] with the default budget.
pub fn enumerate(layout: &Layout) -> Result<Vec<CoordSet>, LayoutError> {
    Oracle::default().enumerate(layout)
}

/// [`Oracle::equivalent`] with the default budget.
pub fn oracle_equivalent(a: &Layout, b: &Layout) -> Result<bool, LayoutError> {
    Oracle::default().equivalent(a, b)
}

/// [`Oracle::span`] with the default budget.
pub fn oracle_span(layout: &Layout) -> Result<Coordinate, LayoutError> {
    Oracle::default().span(layout)
}
