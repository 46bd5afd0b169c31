//! Property suites: every algebraic operation is checked pointwise against
//! brute-force enumeration, and the rewrite system is checked for
//! confluence against an independent randomized rule applier.

mod common;

use proptest::collection::vec;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{
    min_split_fuse_iters, perturb, random_blocked_layout, random_layout, LayoutGen, AXES,
};
use layout_algebra::canon::DEFAULT_EQUIV_LIMIT;
use layout_algebra::oracle::{oracle_equivalent, oracle_span, Oracle};
use layout_algebra::plan::iter_intersect;
use layout_algebra::{
    axis, canonicalize, direct_sum, equivalent, flatten, gap_condition, group_by_shape,
    parse_layout, scale_by, slice, span_factor, tile, tile_of, unflatten, AxisName, CoordSet,
    Coordinate, Iter, Layout, Region, Shape,
};

fn arb_iter(max_extent: i64, max_stride: i64) -> impl Strategy<Value = Iter> {
    (1..=max_extent, 1..=max_stride, any::<bool>(), 0..AXES.len()).prop_map(
        |(extent, stride, neg, ax)| {
            Iter::new(extent, if neg { -stride } else { stride }, axis(AXES[ax])).unwrap()
        },
    )
}

fn arb_layout() -> impl Strategy<Value = Layout> {
    (
        vec(arb_iter(6, 24), 1..=4),
        vec(arb_iter(4, 12), 0..=2),
        proptest::option::of((0..AXES.len(), -10i64..=10)),
    )
        .prop_map(|(shard, replica, off)| {
            let mut offset = Coordinate::zero();
            if let Some((ax, v)) = off {
                offset.set(axis(AXES[ax]), v);
            }
            Layout::new(shard, replica, offset).unwrap()
        })
        .prop_filter("domain budget", |l| {
            l.domain_size() * l.replica_size() <= 2048
        })
}

fn arb_shape() -> impl Strategy<Value = Shape> {
    vec(1i64..=8, 1..=4)
        .prop_filter("size budget", |dims| dims.iter().product::<i64>() <= 4096)
        .prop_map(|dims| Shape::new(dims).unwrap())
}

/// Scales a coordinate by a span vector, axes absent from the span scaling
/// by one; mirrors the tiling formula's Hadamard factor.
fn scale_coord(c: &Coordinate, span: &Coordinate) -> Coordinate {
    let mut out = Coordinate::zero();
    for (a, v) in c.entries() {
        out.set(a.clone(), v * span_factor(span, a));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_cardinality_equals_replica_size(l in arb_layout()) {
        let step = (l.domain_size() / 64).max(1);
        for x in (0..l.domain_size()).step_by(step as usize) {
            prop_assert_eq!(l.eval(x).unwrap().len() as i64, l.replica_size());
        }
    }

    #[test]
    fn eval_ignores_replica_order(l in arb_layout(), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut replica = l.replica().to_vec();
        for i in (1..replica.len()).rev() {
            replica.swap(i, rng.gen_range(0..=i));
        }
        let shuffled = Layout::new(l.shard().to_vec(), replica, l.offset().clone()).unwrap();
        for x in 0..l.domain_size().min(64) {
            prop_assert_eq!(l.eval(x).unwrap(), shuffled.eval(x).unwrap());
        }
    }

    #[test]
    fn flatten_unflatten_inverse(shape in arb_shape()) {
        for x in 0..shape.size() {
            let digits = unflatten(shape.dims(), x).unwrap();
            prop_assert_eq!(flatten(&shape, &digits).unwrap(), x);
        }
    }

    #[test]
    fn span_matches_oracle(l in arb_layout()) {
        prop_assert_eq!(l.span(), oracle_span(&l).unwrap());
    }

    #[test]
    fn canonicalize_preserves_semantics(l in arb_layout()) {
        let c = canonicalize(&l);
        prop_assert!(oracle_equivalent(&l, &c).unwrap());
    }

    #[test]
    fn canonicalize_idempotent(l in arb_layout()) {
        let once = canonicalize(&l);
        prop_assert_eq!(canonicalize(&once), once);
    }

    #[test]
    fn rewrites_confluent_under_random_order(l in arb_layout(), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (shard, replica, offset) = randomized_rewrite(&mut rng, &l);
        let c = canonicalize(&l);
        prop_assert_eq!(shard, c.shard().to_vec());
        prop_assert_eq!(replica, c.replica().to_vec());
        prop_assert_eq!(offset, c.offset().clone());
    }

    #[test]
    fn canonical_form_unique_under_gc(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = LayoutGen::default();
        let canonical = loop {
            let c = canonicalize(&random_layout(&mut rng, &cfg));
            if gap_condition(c.replica()).unwrap() {
                break c;
            }
        };
        let mut mutated = canonical.clone();
        for _ in 0..rng.gen_range(1..=5) {
            mutated = perturb(&mut rng, &mutated);
        }
        prop_assert_eq!(canonicalize(&mutated), canonical);
    }

    #[test]
    fn grouping_preserves_semantics(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let rank = rng.gen_range(1..=3);
        let (l, shape) = random_blocked_layout(&mut rng, rank, &LayoutGen::default());
        let grouped = group_by_shape(&l, &shape).unwrap();
        prop_assert!(oracle_equivalent(&grouped.layout(), &l).unwrap());
    }

    #[test]
    fn grouping_is_minimal_among_split_fuse(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = LayoutGen {
            max_shard: 4,
            max_extent: 8,
            max_stride: 8,
            max_replica: 0,
            negative_strides: false,
            ..LayoutGen::default()
        };
        let rank = rng.gen_range(1..=3);
        let (l, shape) = random_blocked_layout(&mut rng, rank, &cfg);
        if let Ok(grouped) = group_by_shape(&l, &shape) {
            let best = min_split_fuse_iters(l.shard(), shape.dims())
                .expect("a successful grouping is itself reachable");
            prop_assert!(grouped.iters().len() <= best,
                "grouping produced {} iters, search found {best}", grouped.iters().len());
        }
    }

    #[test]
    fn tiling_formula_holds_pointwise(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = LayoutGen { max_extent: 4, max_stride: 12, domain_limit: 64, ..LayoutGen::default() };
        let rank = rng.gen_range(1..=2);
        let (a, sa) = random_blocked_layout(&mut rng, rank, &cfg);
        let (b, sb) = random_blocked_layout(&mut rng, rank, &cfg);
        let Ok(t) = tile(&a, &sa, &b, &sb) else { return Ok(()) };
        let span = group_by_shape(&b, &sb).unwrap().layout().span();
        let t_layout = t.layout();
        let t_shape = t.shape();
        for xa in 0..sa.size() {
            for xb in 0..sb.size() {
                let ua = unflatten(sa.dims(), xa).unwrap();
                let ub = unflatten(sb.dims(), xb).unwrap();
                let mut interleaved = Vec::new();
                for j in 0..sa.rank() {
                    interleaved.push(ua[j]);
                    interleaved.push(ub[j]);
                }
                let got = t_layout.eval_shaped(t_shape, &interleaved).unwrap();
                let fa = a.eval_shaped(&sa, &ua).unwrap();
                let fb = b.eval_shaped(&sb, &ub).unwrap();
                let scaled = CoordSet::new(fa.iter().map(|c| scale_coord(c, &span)).collect());
                let want = scaled.minkowski_add(&fb).unwrap();
                prop_assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn tile_of_inverts_tile(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = LayoutGen { max_extent: 4, max_stride: 8, domain_limit: 128, ..LayoutGen::default() };
        let rank = rng.gen_range(1..=3);
        let (c, sc) = random_blocked_layout(&mut rng, rank, &cfg);
        let (b, sb) = random_blocked_layout(&mut rng, rank, &cfg);
        let Ok(t) = tile(&c, &sc, &b, &sb) else { return Ok(()) };
        let (rec, rec_shape) = tile_of(&t.layout(), &full_shape(&sc, &sb), &b, &sb).unwrap();
        prop_assert_eq!(rec_shape.dims(), sc.dims());
        prop_assert!(equivalent(&rec.layout(), &c).unwrap());
    }

    #[test]
    fn scaled_direct_sum_is_tiling(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = LayoutGen { max_extent: 4, max_stride: 8, domain_limit: 128, ..LayoutGen::default() };
        let rank = rng.gen_range(1..=3);
        let (a, sa) = random_blocked_layout(&mut rng, rank, &cfg);
        let (b, sb) = random_blocked_layout(&mut rng, rank, &cfg);
        let span = group_by_shape(&b, &sb).unwrap().layout().span();
        let (Ok(scaled), Ok(t)) = (scale_by(&a, &span), tile(&a, &sa, &b, &sb)) else {
            return Ok(());
        };
        let Ok(d) = direct_sum(&scaled, &sa, &b, &sb) else { return Ok(()) };
        prop_assert!(equivalent(&d.layout(), &t.layout()).unwrap());
    }

    #[test]
    fn slice_matches_shifted_source(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = LayoutGen { max_extent: 6, max_stride: 16, domain_limit: 1024, ..LayoutGen::default() };
        let rank = rng.gen_range(1..=3);
        let (l, shape) = random_blocked_layout(&mut rng, rank, &cfg);
        let bounds: Vec<(i64, i64)> = shape
            .dims()
            .iter()
            .map(|&s| {
                if rng.gen_bool(0.4) {
                    (0, s)
                } else {
                    let b = rng.gen_range(0..s);
                    (b, rng.gen_range(b + 1..=s))
                }
            })
            .collect();
        let region = Region::from_bounds(bounds).unwrap();
        let Ok(sliced) = slice(&l, &shape, &region) else { return Ok(()) };
        let volume: i64 = sliced.shard().iter().map(Iter::extent).product();
        prop_assert_eq!(volume, region.volume());
        let target = Shape::new(region.extents()).unwrap();
        for u in 0..region.volume() {
            let local = unflatten(target.dims(), u).unwrap();
            let shifted: Vec<i64> = local
                .iter()
                .zip(region.begins())
                .map(|(&x, b)| x + b)
                .collect();
            prop_assert_eq!(
                sliced.eval_shaped(&target, &local).unwrap(),
                l.eval_shaped(&shape, &shifted).unwrap()
            );
        }
    }

    #[test]
    fn peel_only_regions_always_slice(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = LayoutGen { max_extent: 6, max_stride: 16, domain_limit: 1024, ..LayoutGen::default() };
        let rank = rng.gen_range(1..=3);
        let (l, shape) = random_blocked_layout(&mut rng, rank, &cfg);
        let grouped = group_by_shape(&l, &shape).unwrap();
        let mut bounds = Vec::new();
        let mut suffixes: Vec<Iter> = Vec::new();
        for i in 0..shape.rank() {
            let block = grouped.block(i);
            let keep = rng.gen_range(0..=block.len());
            let suffix = &block[block.len() - keep..];
            suffixes.extend_from_slice(suffix);
            bounds.push((0, suffix.iter().map(Iter::extent).product::<i64>()));
        }
        let region = Region::new(bounds).unwrap();
        let sliced = slice(&l, &shape, &region).expect("peel-only regions always succeed");
        let non_unit: Vec<Iter> = sliced
            .shard()
            .iter()
            .filter(|it| it.extent() > 1)
            .cloned()
            .collect();
        let want: Vec<Iter> = suffixes.into_iter().filter(|it| it.extent() > 1).collect();
        prop_assert_eq!(non_unit, want);
    }

    #[test]
    fn intersect_enumerates_exact_sets(e1 in 1i64..=24, s1 in 1i64..=8, e2 in 1i64..=24, s2 in 1i64..=8) {
        let got = iter_intersect(
            &Iter::new(e1, s1, axis("P")).unwrap(),
            &Iter::new(e2, s2, axis("P")).unwrap(),
        )
        .unwrap();
        let a: std::collections::BTreeSet<i64> = (0..e1).map(|k| k * s1).collect();
        let b: std::collections::BTreeSet<i64> = (0..e2).map(|k| k * s2).collect();
        let want: Vec<i64> = a.intersection(&b).copied().collect();
        let produced: Vec<i64> = if got.extent() == 1 {
            vec![0]
        } else {
            (0..got.extent()).map(|k| k * got.stride()).collect()
        };
        prop_assert_eq!(produced, want);
    }

    #[test]
    fn parse_format_round_trip(l in arb_layout()) {
        let printed = l.to_string();
        let reparsed = parse_layout(&printed).unwrap();
        prop_assert_eq!(reparsed, l);
    }

    #[test]
    fn parser_never_panics(text in "\\PC*") {
        let _ = parse_layout(&text);
    }

    #[test]
    fn parser_never_panics_on_grammar_shaped_noise(
        text in "[(),:@+\\[\\] 0-9a-z-]{0,48}",
    ) {
        let _ = parse_layout(&text);
    }

    #[test]
    fn cli_never_panics(args in vec("[(),:@+\\[\\]<> 0-9a-zO{}*-]{0,20}", 0..6)) {
        // @file indirection reads files; keep fuzzed args away from it
        let args: Vec<String> = args.into_iter().filter(|a| !a.starts_with('@')).collect();
        let out = layout_algebra::cli::run_command(args);
        prop_assert!([0, 1, 2].contains(&out.code));
    }

    #[test]
    fn cli_commands_never_panic_on_noise(
        cmd in prop::sample::select(vec![
            "eval", "canon", "equiv", "span", "group", "tile", "tileof", "dsum",
            "slice", "render", "plan-copy", "plan-matmul",
        ]),
        args in vec("[(),:@+\\[\\] 0-9a-z-]{0,16}", 0..5),
    ) {
        let mut argv = vec![cmd.to_string()];
        argv.extend(args.into_iter().filter(|a| !a.starts_with('@')));
        let out = layout_algebra::cli::run_command(argv);
        prop_assert!([0, 1, 2].contains(&out.code));
    }

    #[test]
    fn equivalence_agrees_with_oracle(a in arb_layout(), b in arb_layout()) {
        let oracle = Oracle::new(DEFAULT_EQUIV_LIMIT);
        match equivalent(&a, &b) {
            Ok(verdict) => prop_assert_eq!(verdict, oracle.equivalent(&a, &b).unwrap()),
            Err(e) => prop_assert!(false, "undecidable on small inputs: {e}"),
        }
        // a layout is always equivalent to itself after perturbing nothing
        prop_assert!(equivalent(&a, &a).unwrap());
    }
}

fn full_shape(sc: &Shape, sb: &Shape) -> Shape {
    Shape::new(
        sc.dims()
            .iter()
            .zip(sb.dims())
            .map(|(&c, &b)| c * b)
            .collect(),
    )
    .unwrap()
}

// An independent rewriter: applies one applicable rule at a time in random
// order until none applies. Written directly from the rule definitions, not
// via the library's normalizers.
fn randomized_rewrite(rng: &mut StdRng, l: &Layout) -> (Vec<Iter>, Vec<Iter>, Coordinate) {
    #[derive(Clone, Copy)]
    enum Rule {
        DropShardUnit(usize),
        MergeShardChain(usize),
        DropReplicaUnit(usize),
        FlipReplicaSign(usize),
        AbsorbReplica(usize, usize),
    }

    let mut shard = l.shard().to_vec();
    let mut replica = l.replica().to_vec();
    let mut offset = l.offset().clone();
    loop {
        let mut applicable = Vec::new();
        for (i, it) in shard.iter().enumerate() {
            if it.extent() == 1 {
                applicable.push(Rule::DropShardUnit(i));
            }
        }
        for i in 0..shard.len().saturating_sub(1) {
            let (a, b) = (&shard[i], &shard[i + 1]);
            if a.axis() == b.axis() && a.stride() == b.extent() * b.stride() {
                applicable.push(Rule::MergeShardChain(i));
            }
        }
        for (i, it) in replica.iter().enumerate() {
            if it.extent() == 1 {
                applicable.push(Rule::DropReplicaUnit(i));
            } else if it.stride() < 0 {
                applicable.push(Rule::FlipReplicaSign(i));
            }
        }
        for i in 0..replica.len() {
            for j in 0..replica.len() {
                if i == j {
                    continue;
                }
                let (a, b) = (&replica[i], &replica[j]);
                if a.axis() == b.axis()
                    && a.stride() > 0
                    && b.stride() > 0
                    && b.stride() % a.stride() == 0
                    && (1..=a.extent()).contains(&(b.stride() / a.stride()))
                {
                    applicable.push(Rule::AbsorbReplica(i, j));
                }
            }
        }
        let Some(&rule) = applicable
            .get(rng.gen_range(0..applicable.len().max(1)))
            .filter(|_| !applicable.is_empty())
        else {
            break;
        };
        match rule {
            Rule::DropShardUnit(i) => {
                shard.remove(i);
            }
            Rule::MergeShardChain(i) => {
                let merged = Iter::new(
                    shard[i].extent() * shard[i + 1].extent(),
                    shard[i + 1].stride(),
                    shard[i].axis().clone(),
                )
                .unwrap();
                shard.splice(i..=i + 1, [merged]);
            }
            Rule::DropReplicaUnit(i) => {
                replica.remove(i);
            }
            Rule::FlipReplicaSign(i) => {
                let it = replica[i].clone();
                offset.set(
                    it.axis().clone(),
                    offset.get(it.axis()) + (it.extent() - 1) * it.stride(),
                );
                replica[i] = Iter::new(it.extent(), -it.stride(), it.axis().clone()).unwrap();
            }
            Rule::AbsorbReplica(i, j) => {
                let q = replica[j].stride() / replica[i].stride();
                let merged = Iter::new(
                    replica[i].extent() + q * (replica[j].extent() - 1),
                    replica[i].stride(),
                    replica[i].axis().clone(),
                )
                .unwrap();
                replica[i] = merged;
                replica.remove(j);
            }
        }
    }
    if shard.is_empty() {
        shard.push(Iter::new(1, 1, AxisName::memory()).unwrap());
    }
    replica.sort_by(|a, b| {
        (a.axis(), a.stride(), a.extent()).cmp(&(b.axis(), b.stride(), b.extent()))
    });
    (shard, replica, offset)
}
