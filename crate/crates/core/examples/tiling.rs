//! Tiling composition and its inverse decomposition.
//!
//! Tiling scales the outer layout's strides by the inner layout's
//! axis-wise span so tiles land side by side without overlap; the inverse
//! recovers the outer layout from a tiled result.
//!
//! Run with: cargo run --example tiling

use layout_algebra::{equivalent, parse_layout, tile, tile_of, Shape};

fn shape(dims: &[i64]) -> Shape {
    Shape::new(dims.to_vec()).unwrap()
}

fn main() {
    // An 8x8 grid of 2x3 tiles: a 16x24 matrix.
    let outer = parse_layout("(2,3):(3,1)").unwrap();
    let inner = parse_layout("(8,8):(8,1)").unwrap();
    let tiled = tile(&outer, &shape(&[2, 3]), &inner, &shape(&[8, 8])).unwrap();
    println!("{outer} ⊗ {inner} = {}", tiled.layout());
    println!("  grouped by {}", tiled.shape());
    println!("  inner span: {}", inner.span());

    // Recover the outer layout: shapes divide, inner blocks match, and the
    // leftover strides descale by the span.
    let (recovered, rec_shape) =
        tile_of(&tiled.layout(), &shape(&[16, 24]), &inner, &shape(&[8, 8])).unwrap();
    println!(
        "tile_of returns {} with shape {rec_shape} (equivalent: {})",
        recovered.layout(),
        equivalent(&recovered.layout(), &outer).unwrap()
    );

    // Mixed axes: a device dimension times a per-device 4x4 sheet.
    let devices = parse_layout("(2):(1@gpuid)").unwrap();
    let sheet = parse_layout("(4,4):(4,1)").unwrap();
    let placed = tile(&devices, &shape(&[2, 1]), &sheet, &shape(&[4, 4])).unwrap();
    println!("\n{devices} ⊗ {sheet} = {}", placed.layout());

    // Not every layout is a tile: a contiguous run cannot be built from a
    // strided inner block whose span exceeds its population.
    let contiguous = parse_layout("(16):(1)").unwrap();
    let gapped = parse_layout("(2,2):(4,1)").unwrap();
    match tile_of(&contiguous, &shape(&[4, 4]), &gapped, &shape(&[2, 2])) {
        Ok(_) => unreachable!(),
        Err(e) => println!("\n(16):(1) is no tile of (2,2):(4,1): {e}"),
    }
}
