//! Shared helpers for the integration suites: seeded random layout
//! generators, semantics-preserving perturbations, and an independent
//! brute-force search over split/fuse decompositions.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use layout_algebra::{axis, AxisName, Coordinate, Iter, Layout, Shape};

pub const AXES: &[&str] = &["m", "lane", "warp", "reg", "gpuid"];

#[derive(Clone)]
pub struct LayoutGen {
    pub max_shard: usize,
    pub max_replica: usize,
    pub max_extent: i64,
    pub max_stride: i64,
    pub negative_strides: bool,
    pub axes: Vec<&'static str>,
    pub offset_range: i64,
    pub domain_limit: i64,
}

impl Default for LayoutGen {
    fn default() -> Self {
        Self {
            max_shard: 5,
            max_replica: 2,
            max_extent: 8,
            max_stride: 32,
            negative_strides: true,
            axes: AXES.to_vec(),
            offset_range: 16,
            domain_limit: 4096,
        }
    }
}

pub fn random_iter(rng: &mut StdRng, cfg: &LayoutGen) -> Iter {
    let extent = rng.gen_range(1..=cfg.max_extent);
    let mut stride = rng.gen_range(1..=cfg.max_stride);
    if cfg.negative_strides && rng.gen_bool(0.2) {
        stride = -stride;
    }
    let a = cfg.axes[rng.gen_range(0..cfg.axes.len())];
    Iter::new(extent, stride, axis(a)).unwrap()
}

pub fn random_layout(rng: &mut StdRng, cfg: &LayoutGen) -> Layout {
    loop {
        let n_shard = rng.gen_range(1..=cfg.max_shard);
        let shard: Vec<Iter> = (0..n_shard).map(|_| random_iter(rng, cfg)).collect();
        let n_rep = rng.gen_range(0..=cfg.max_replica);
        let replica: Vec<Iter> = (0..n_rep).map(|_| random_iter(rng, cfg)).collect();
        let mut offset = Coordinate::zero();
        if rng.gen_bool(0.4) {
            let a = cfg.axes[rng.gen_range(0..cfg.axes.len())];
            offset.set(axis(a), rng.gen_range(-cfg.offset_range..=cfg.offset_range));
        }
        let Ok(layout) = Layout::new(shard, replica, offset) else {
            continue;
        };
        if layout.domain_size() * layout.replica_size() <= cfg.domain_limit {
            return layout;
        }
    }
}

/// A layout built block by block so that grouping by the returned shape
/// always succeeds. Blocks may be empty (shape dim 1).
pub fn random_blocked_layout(rng: &mut StdRng, rank: usize, cfg: &LayoutGen) -> (Layout, Shape) {
    loop {
        let mut shard = Vec::new();
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            let n = rng.gen_range(0..=2usize);
            let mut product = 1i64;
            for _ in 0..n {
                let it = random_iter(rng, cfg);
                product *= it.extent();
                shard.push(it);
            }
            dims.push(product);
        }
        let n_rep = rng.gen_range(0..=cfg.max_replica);
        let replica: Vec<Iter> = (0..n_rep).map(|_| random_iter(rng, cfg)).collect();
        let mut offset = Coordinate::zero();
        if rng.gen_bool(0.4) {
            let a = cfg.axes[rng.gen_range(0..cfg.axes.len())];
            offset.set(axis(a), rng.gen_range(-cfg.offset_range..=cfg.offset_range));
        }
        let layout = if shard.is_empty() {
            Layout::new(
                vec![Iter::new(1, 1, AxisName::memory()).unwrap()],
                replica,
                offset,
            )
        } else {
            Layout::new(shard, replica, offset)
        };
        let Ok(layout) = layout else { continue };
        if layout.domain_size() * layout.replica_size() <= cfg.domain_limit {
            return (layout, Shape::new(dims).unwrap());
        }
    }
}

/// One semantics-preserving rewrite: a shard split, a replica sign flip
/// with offset compensation, or a replica split whose re-merge reproduces
/// the original iter.
pub fn perturb(rng: &mut StdRng, layout: &Layout) -> Layout {
    for _ in 0..64 {
        let mut shard = layout.shard().to_vec();
        let mut replica = layout.replica().to_vec();
        let mut offset = layout.offset().clone();
        match rng.gen_range(0..3) {
            // split a shard iter, possibly inserting a unit head
            0 => {
                let i = rng.gen_range(0..shard.len());
                let extent = shard[i].extent();
                let divisors: Vec<i64> = (1..=extent).filter(|d| extent % d == 0).collect();
                let head = divisors[rng.gen_range(0..divisors.len())];
                let Ok((a, b)) = shard[i].split(head) else {
                    continue;
                };
                shard.splice(i..=i, [a, b]);
            }
            // flip a replica stride sign, compensating in the offset
            1 => {
                if replica.is_empty() {
                    continue;
                }
                let i = rng.gen_range(0..replica.len());
                let it = &replica[i];
                let shift = (it.extent() - 1) * it.stride();
                offset.set(it.axis().clone(), offset.get(it.axis()) + shift);
                replica[i] = Iter::new(it.extent(), -it.stride(), it.axis().clone()).unwrap();
            }
            // split a replica iter into two whose absorption re-merges it
            _ => {
                if replica.is_empty() {
                    continue;
                }
                let i = rng.gen_range(0..replica.len());
                let it = replica[i].clone();
                let total = it.extent();
                if total < 2 {
                    continue;
                }
                let e2 = rng.gen_range(2..=total.min(4));
                let max_q = (total - 1) / (e2 - 1);
                if max_q < 1 {
                    continue;
                }
                let q = rng.gen_range(1..=max_q);
                let e1 = total - q * (e2 - 1);
                if e1 < q || e1 < 1 {
                    continue;
                }
                let first = Iter::new(e1, it.stride(), it.axis().clone()).unwrap();
                let second = Iter::new(e2, q * it.stride(), it.axis().clone()).unwrap();
                replica.splice(i..=i, [first, second]);
            }
        }
        if let Ok(next) = Layout::new(shard, replica, offset) {
            return next;
        }
    }
    layout.clone()
}

type State = Vec<(i64, i64, u8)>;

/// Minimum iter count over every split/fuse decomposition of `shard` that
/// realizes `shape` as consecutive blocks; `None` when no decomposition
/// exists. Exhaustive search, only suitable for small layouts.
pub fn min_split_fuse_iters(shard: &[Iter], shape: &[i64]) -> Option<usize> {
    let mut axes: Vec<&AxisName> = shard.iter().map(Iter::axis).collect();
    axes.sort();
    axes.dedup();
    let axis_id = |a: &AxisName| axes.iter().position(|x| *x == a).unwrap() as u8;

    let start: State = shard
        .iter()
        .filter(|it| it.extent() > 1)
        .map(|it| (it.extent(), it.stride(), axis_id(it.axis())))
        .collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut queue = vec![start.clone()];
    seen.insert(start);
    let mut best: Option<usize> = None;
    while let Some(state) = queue.pop() {
        if valid_blocks(&state, shape) {
            best = Some(best.map_or(state.len(), |b| b.min(state.len())));
        }
        // fuse adjacent chainable pairs
        for i in 0..state.len().saturating_sub(1) {
            let ((e1, s1, a1), (e2, s2, a2)) = (state[i], state[i + 1]);
            if a1 == a2 && s1 == e2 * s2 {
                let mut next = state.clone();
                next[i] = (e1 * e2, s2, a1);
                next.remove(i + 1);
                if seen.insert(next.clone()) {
                    queue.push(next);
                }
            }
        }
        // split any iter into two factors >= 2
        for i in 0..state.len() {
            let (e, s, a) = state[i];
            for head in 2..e {
                if e % head != 0 || e / head < 2 {
                    continue;
                }
                let mut next = state.clone();
                next[i] = (head, (e / head) * s, a);
                next.insert(i + 1, (e / head, s, a));
                if seen.insert(next.clone()) {
                    queue.push(next);
                }
            }
        }
    }
    best
}

fn valid_blocks(state: &State, shape: &[i64]) -> bool {
    let mut i = 0;
    for &target in shape {
        let mut cur = 1i64;
        while cur < target {
            let Some(&(e, _, _)) = state.get(i) else {
                return false;
            };
            cur *= e;
            i += 1;
            if cur > target {
                return false;
            }
        }
    }
    i == state.len()
}
