//! Region slicing: a layout for the sub-tensor that reproduces the source
//! mapping shifted by the region origin.
//!
//! Run with: cargo run --example slicing

use layout_algebra::{parse_layout, slice, slice_block, Iter, Region, Shape};

fn main() {
    let layout = parse_layout("(2,8,3,8):(192,8,64,1)").unwrap();
    let shape = Shape::new(vec![16, 24]).unwrap();

    // Rows [0,8) and columns [8,24) of the 16x24 tile grid.
    let region = Region::from_bounds(vec![(0, 8), (8, 24)]).unwrap();
    let sliced = slice(&layout, &shape, &region).unwrap();
    println!("{layout}[0:8, 8:24] = {sliced}");

    // Full regions peel every digit and change nothing.
    let full = Region::from_bounds(vec![(0, 16), (0, 24)]).unwrap();
    println!(
        "{layout}[0:16, 0:24] = {}",
        slice(&layout, &shape, &full).unwrap()
    );

    // Per-block view: peeling stops at the first digit that moved, and the
    // pivot digit either stays inside its extent (no wrap) or crosses one
    // boundary symmetrically.
    let block = [
        Iter::new(3, 64, layout_algebra::axis("m")).unwrap(),
        Iter::new(8, 1, layout_algebra::axis("m")).unwrap(),
    ];
    let (iters, origin) = slice_block(&block, 8, 16).unwrap();
    println!("\nblock (3,8):(64,1) over [8,24): {iters:?} from {origin}");

    let wrap = [
        Iter::new(4, 8, layout_algebra::axis("m")).unwrap(),
        Iter::new(4, 1, layout_algebra::axis("m")).unwrap(),
    ];
    let (iters, origin) = slice_block(&wrap, 6, 4).unwrap();
    println!("block (4,4):(8,1) over [6,10): {iters:?} from {origin}");

    // The sufficient forms do not cover every region; failure is an
    // ordinary result and callers fall back to another strategy.
    match slice_block(&wrap, 1, 4) {
        Ok(_) => unreachable!(),
        Err(e) => println!("block over [1,5): {e}"),
    }
}
