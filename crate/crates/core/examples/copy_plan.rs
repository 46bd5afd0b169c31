//! Planning a box copy from global memory into an atom-tiled shared
//! buffer.
//!
//! Run with: cargo run --example copy_plan

use layout_algebra::plan::{interpret_copy_plan, plan_copy, verify_copy_plan, CopyAtomSpec};
use layout_algebra::{axis, Layout, Region, Shape};

fn main() {
    // A 16x64 fp16 sheet with 128-byte swizzle: the atom box is 8x64, so
    // the sheet splits into two atoms stacked in shared memory.
    let shape = Shape::new(vec![16, 64]).unwrap();
    let full = Region::from_bounds(vec![(0, 16), (0, 64)]).unwrap();
    let shared = Layout::row_major(&shape, axis("m")).unwrap();

    // The global tensor is a 16x64 window at column 64 of a wider sheet,
    // so the descriptor keeps the 128-element pitch.
    let global_shape = Shape::new(vec![16, 128]).unwrap();
    let global = Layout::row_major(&global_shape, axis("m")).unwrap();
    let window = Region::from_bounds(vec![(0, 16), (64, 128)]).unwrap();

    let atom = CopyAtomSpec::new(2, 128, 2).unwrap();
    println!("atom box: {}", atom.box_shape());

    let plan = plan_copy(
        &global,
        &global_shape,
        &window,
        &shared,
        &shape,
        &full,
        &atom,
    )
    .unwrap();
    println!("global base: {}", plan.global_base);
    for d in &plan.descriptor {
        println!(
            "  descriptor dim: extent {} stride {} box {}",
            d.extent, d.stride, d.box_extent
        );
    }
    for (i, a) in plan.atoms.iter().enumerate() {
        println!(
            "  atom {i}: shared {} global origin {:?}",
            a.shared_offset, a.global_origin
        );
    }

    // The interpreter expands atoms into element transfers, and the
    // verifier checks the expansion is a bijection consistent with what
    // both layouts say about every element.
    let pairs = interpret_copy_plan(&plan);
    println!("transfers: {} elements", pairs.len());
    println!(
        "  first: {:?} -> shared {}",
        pairs[0].global, pairs[0].shared_offset
    );
    verify_copy_plan(
        &plan,
        &global,
        &global_shape,
        &window,
        &shared,
        &shape,
        &full,
    )
    .unwrap();
    println!("verified: bijective and consistent with both layouts");

    // A column-major staging buffer cannot be carved into row-major atoms.
    let column_major = Layout::strided(&[(16, 1), (64, 16)], axis("m")).unwrap();
    match plan_copy(
        &global,
        &global_shape,
        &window,
        &column_major,
        &shape,
        &full,
        &atom,
    ) {
        Ok(_) => unreachable!(),
        Err(e) => println!("column-major shared fails: {e}"),
    }
}
