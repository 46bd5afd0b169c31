//! Semantics-preserving normalization.
//!
//! The shard list rewrites to a fixpoint of two rules: drop extent-1 iters,
//! and merge an adjacent same-axis pair whose strides chain (the earlier
//! stride equals the later extent times the later stride). Replica iters
//! normalize per axis: drop extent-1, flip negative strides into the offset,
//! and absorb stride multiples into a single longer run. Saturated replica
//! lists that also satisfy the gap condition have a unique canonical form,
//! which makes structural comparison a sound equivalence check.

use std::collections::BTreeMap;

use crate::axis::AxisName;
use crate::coord::Coordinate;
use crate::error::LayoutError;
use crate::layout::{Iter, Layout};
use crate::oracle;

/// Oracle fallback budget for [`equivalent`].
pub const DEFAULT_EQUIV_LIMIT: i64 = 65536;

/// Rewrites a shard list to its unique normal form. If every iter is
/// dropped, a single unit iter is retained so the result stays a valid
/// shard list.
pub fn normalize_shard(shard: &[Iter]) -> Vec<Iter> {
    let mut iters = normalize_iters(shard);
    if iters.is_empty() {
        iters.push(Iter::new(1, 1, AxisName::memory()).unwrap());
    }
    iters
}

// The same rewrite without the unit-iter guard; grouped blocks may be empty.
pub(crate) fn normalize_iters(shard: &[Iter]) -> Vec<Iter> {
    let mut iters: Vec<Iter> = shard.iter().filter(|it| it.extent() > 1).cloned().collect();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < iters.len() {
            let merged = {
                let (a, b) = (&iters[i], &iters[i + 1]);
                if a.axis() == b.axis() && b.extent().checked_mul(b.stride()) == Some(a.stride()) {
                    a.extent()
                        .checked_mul(b.extent())
                        .map(|e| Iter::new(e, b.stride(), b.axis().clone()).unwrap())
                } else {
                    None
                }
            };
            match merged {
                Some(it) => {
                    iters[i] = it;
                    iters.remove(i + 1);
                    changed = true;
                }
                None => i += 1,
            }
        }
        if !changed {
            break;
        }
    }
    iters
}

/// Normalizes the offset/replica pair: per axis, drops extent-1 iters,
/// flips negative strides (compensating in the offset), and absorbs stride
/// multiples until saturated. The replication set plus offset is unchanged.
pub fn normalize_replica(offset: &Coordinate, replica: &[Iter]) -> (Coordinate, Vec<Iter>) {
    let (off, iters) = sign_normalize_replica(offset, replica);
    let mut per_axis: BTreeMap<AxisName, Vec<(i64, i64)>> = BTreeMap::new();
    for it in iters {
        per_axis
            .entry(it.axis().clone())
            .or_default()
            .push((it.stride(), it.extent()));
    }
    let mut out = Vec::new();
    for (axis, mut iters) in per_axis {
        saturate_axis(&mut iters);
        for (stride, extent) in iters {
            out.push(Iter::new(extent, stride, axis.clone()).unwrap());
        }
    }
    (off, out)
}

// C0 and C1 only: drops unit iters and flips negative strides into the
// offset, leaving absorption to the caller.
pub(crate) fn sign_normalize_replica(
    offset: &Coordinate,
    replica: &[Iter],
) -> (Coordinate, Vec<Iter>) {
    let mut off = offset.clone();
    let mut out = Vec::new();
    for it in replica {
        if it.extent() == 1 {
            continue; // C0
        }
        if it.stride() < 0 {
            // C1: iterating with stride -s is iterating with stride s from
            // an origin shifted by (e-1)(-s)
            let shift = off.get(it.axis()) + (it.extent() - 1) * it.stride();
            off.set(it.axis().clone(), shift);
            out.push(Iter::new(it.extent(), -it.stride(), it.axis().clone()).unwrap());
        } else {
            out.push(it.clone());
        }
    }
    (off, out)
}

// C2 sweeps on one axis, smallest-stride absorber first, until saturated.
fn saturate_axis(iters: &mut Vec<(i64, i64)>) {
    loop {
        iters.sort_unstable();
        let mut merged = None;
        'search: for i in 0..iters.len() {
            for j in (i + 1)..iters.len() {
                let (s_i, e_i) = iters[i];
                let (s_j, e_j) = iters[j];
                if s_j % s_i != 0 {
                    continue;
                }
                let q = s_j / s_i;
                if q < 1 || q > e_i {
                    continue;
                }
                let extent = q.checked_mul(e_j - 1).and_then(|v| v.checked_add(e_i));
                if let Some(extent) = extent {
                    merged = Some((i, j, (s_i, extent)));
                    break 'search;
                }
            }
        }
        match merged {
            Some((i, j, it)) => {
                iters[i] = it;
                iters.remove(j);
            }
            None => return,
        }
    }
}

/// Checks the gap condition: per axis, with strides sorted increasing,
/// every consecutive pair must satisfy `σ_{k+1} > E_k · σ_k`. True for an
/// empty list; the caller must sign-normalize first.
pub fn gap_condition(replica: &[Iter]) -> Result<bool, LayoutError> {
    let mut per_axis: BTreeMap<&AxisName, Vec<(i64, i64)>> = BTreeMap::new();
    for it in replica {
        if it.stride() < 0 {
            return Err(LayoutError::NegativeReplicaStride(it.stride()));
        }
        per_axis
            .entry(it.axis())
            .or_default()
            .push((it.stride(), it.extent()));
    }
    for iters in per_axis.values_mut() {
        iters.sort_unstable();
        for w in iters.windows(2) {
            let ((s_k, e_k), (s_next, _)) = (w[0], w[1]);
            match e_k.checked_mul(s_k) {
                Some(bound) if s_next > bound => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

/// Full normalization of a layout; evaluation semantics are preserved
/// pointwise and the rewrite is idempotent.
pub fn canonicalize(layout: &Layout) -> Layout {
    let shard = normalize_shard(layout.shard());
    let (offset, replica) = normalize_replica(layout.offset(), layout.replica());
    Layout::from_parts_unchecked(shard, replica, offset)
}

/// Decides whether two layouts induce the same set-valued map, using the
/// default oracle budget when the gap condition fails.
pub fn equivalent(a: &Layout, b: &Layout) -> Result<bool, LayoutError> {
    equivalent_with_limit(a, b, DEFAULT_EQUIV_LIMIT)
}

/// Like [`equivalent`] with an explicit enumeration budget. Canonical forms
/// are compared structurally; when the gap condition fails for either side
/// the decision falls back to exhaustive enumeration, and reports
/// [`LayoutError::Undecidable`] if the domains exceed `limit`.
pub fn equivalent_with_limit(a: &Layout, b: &Layout, limit: i64) -> Result<bool, LayoutError> {
    if a.domain_size() != b.domain_size() {
        return Ok(false);
    }
    let ca = canonicalize(a);
    let cb = canonicalize(b);
    if ca == cb {
        return Ok(true);
    }
    let gc = gap_condition(ca.replica())? && gap_condition(cb.replica())?;
    if gc {
        // canonical forms are unique under the gap condition
        return Ok(false);
    }
    let size_a = ca.domain_size().saturating_mul(ca.replica_size());
    let size_b = cb.domain_size().saturating_mul(cb.replica_size());
    let size = size_a.max(size_b);
    if size > limit {
        return Err(LayoutError::Undecidable { size, limit });
    }
    oracle::Oracle::new(limit).equivalent(&ca, &cb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::axis;
    use crate::coord::CoordSet;

    fn it(e: i64, s: i64, a: &str) -> Iter {
        Iter::new(e, s, axis(a)).unwrap()
    }

    fn m_layout(dims: &[(i64, i64)]) -> Layout {
        Layout::strided(dims, axis("m")).unwrap()
    }

    #[test]
    fn shard_rules() {
        assert_eq!(
            normalize_shard(&[it(2, 8, "m"), it(8, 1, "m")]),
            vec![it(16, 1, "m")]
        );
        assert_eq!(
            normalize_shard(&[it(1, 5, "m"), it(4, 1, "m")]),
            vec![it(4, 1, "m")]
        );
        // no adjacent pair chains: 192 != 8*8, 8 != 3*64, 64 != 8*1
        let stable = vec![
            it(2, 192, "m"),
            it(8, 8, "m"),
            it(3, 64, "m"),
            it(8, 1, "m"),
        ];
        assert_eq!(normalize_shard(&stable), stable);
        // all-unit shard keeps one unit iter
        assert_eq!(normalize_shard(&[it(1, 3, "m")]), vec![it(1, 1, "m")]);
        // merges do not cross axes
        let mixed = vec![it(2, 8, "lane"), it(8, 1, "m")];
        assert_eq!(normalize_shard(&mixed), mixed);
    }

    #[test]
    fn replica_sign_flip() {
        let (off, reps) = normalize_replica(&Coordinate::zero(), &[it(3, -2, "m")]);
        assert_eq!(reps, vec![it(3, 2, "m")]);
        assert_eq!(off, Coordinate::of(axis("m"), -4));
    }

    #[test]
    fn replica_absorb_multiples() {
        // oracle: {0,1} + {0,2,4} enumerates 0..=5
        let mut sums = std::collections::BTreeSet::new();
        for a in [0, 1] {
            for b in [0, 2, 4] {
                sums.insert(a + b);
            }
        }
        assert_eq!(
            sums.into_iter().collect::<Vec<_>>(),
            (0..=5).collect::<Vec<_>>()
        );

        let (off, reps) = normalize_replica(&Coordinate::zero(), &[it(2, 1, "m"), it(3, 2, "m")]);
        assert_eq!(reps, vec![it(6, 1, "m")]);
        assert!(off.is_zero());
    }

    #[test]
    fn replica_unit_dropped() {
        let (off, reps) = normalize_replica(&Coordinate::zero(), &[it(1, 7, "m")]);
        assert!(reps.is_empty());
        assert!(off.is_zero());
    }

    #[test]
    fn gap_condition_examples() {
        assert!(gap_condition(&[it(2, 1, "m"), it(2, 4, "m")]).unwrap());
        assert!(!gap_condition(&[it(2, 1, "m"), it(2, 2, "m")]).unwrap());
        assert!(gap_condition(&[]).unwrap());
        assert!(gap_condition(&[it(3, -2, "m")]).is_err());
        // independent axes do not interact
        assert!(gap_condition(&[it(2, 1, "m"), it(2, 1, "warp")]).unwrap());
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(
            canonicalize(&m_layout(&[(2, 8), (8, 1)])),
            m_layout(&[(16, 1)])
        );
        assert_eq!(
            canonicalize(&m_layout(&[(2, 8), (2, 4), (2, 2), (2, 1)])),
            m_layout(&[(16, 1)])
        );
        let tile = crate::layout::tests::register_tile();
        assert_eq!(canonicalize(&tile), tile);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let l = Layout::new(
            vec![it(1, 3, "m"), it(2, 8, "m"), it(8, 1, "m")],
            vec![it(3, -2, "m"), it(2, 1, "warp")],
            Coordinate::of(axis("m"), 7),
        )
        .unwrap();
        let once = canonicalize(&l);
        assert_eq!(canonicalize(&once), once);
    }

    #[test]
    fn canonicalize_preserves_eval() {
        let l = Layout::new(
            vec![it(2, 8, "m"), it(8, 1, "m")],
            vec![it(3, -2, "warp")],
            Coordinate::zero(),
        )
        .unwrap();
        let c = canonicalize(&l);
        for x in 0..l.domain_size() {
            assert_eq!(l.eval(x).unwrap(), c.eval(x).unwrap());
        }
    }

    #[test]
    fn equivalence_examples() {
        assert!(equivalent(&m_layout(&[(2, 8), (8, 1)]), &m_layout(&[(16, 1)])).unwrap());
        assert!(!equivalent(&m_layout(&[(2, 2), (4, 1)]), &m_layout(&[(4, 1)])).unwrap());
        // images {0,1,4,5} vs {0,1,2,3} differ at x=2
        let l = m_layout(&[(2, 2), (2, 1)]);
        assert_eq!(
            l.eval(2).unwrap(),
            CoordSet::singleton(Coordinate::of(axis("m"), 2))
        );
        assert!(!equivalent(&m_layout(&[(2, 4), (2, 1)]), &m_layout(&[(4, 1)])).unwrap());
    }

    #[test]
    fn equivalence_undecidable_reports() {
        // saturated but gap-condition-violating replicas on both sides with
        // a domain too large to enumerate
        let big = Layout::new(
            vec![it(1 << 14, 1, "m")],
            vec![it(3, 2, "warp"), it(2, 3, "warp")],
            Coordinate::zero(),
        )
        .unwrap();
        let other = Layout::new(
            vec![it(1 << 14, 1, "m")],
            vec![it(3, 2, "warp"), it(2, 3, "warp")],
            Coordinate::of(axis("lane"), 1),
        )
        .unwrap();
        let err = equivalent_with_limit(&big, &other, 4096).unwrap_err();
        assert!(matches!(err, LayoutError::Undecidable { .. }));
        // the same comparison succeeds with a larger budget
        assert!(!equivalent_with_limit(&big, &other, 1 << 20).unwrap());
    }
}
