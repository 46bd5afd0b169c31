//! Direct sums: superposing two layouts on the tiling domain without span
//! scaling.
//!
//! Run with: cargo run --example direct_sum

use layout_algebra::{canonicalize, direct_sum, equivalent, parse_layout, scale_by, tile, Shape};

fn shape(dims: &[i64]) -> Shape {
    Shape::new(dims.to_vec()).unwrap()
}

fn main() {
    // Quadrant origins of a 4x4 matrix plus a 2x2 block pattern: their sum
    // enumerates 0..16 contiguously even though neither side could tile it.
    let origins = parse_layout("(2,2):(8,2)").unwrap();
    let block = parse_layout("(2,2):(4,1)").unwrap();
    let two = shape(&[2, 2]);
    let summed = direct_sum(&origins, &two, &block, &two).unwrap();
    println!("{origins} + {block} = {}", summed.layout());
    println!("  canonicalizes to {}", canonicalize(&summed.layout()));

    // Scaling the outer side by the inner span first turns a direct sum
    // into the tiling composition.
    let outer = parse_layout("(2,3):(3,1)").unwrap();
    let inner = parse_layout("(8,8):(8,1)").unwrap();
    let scaled = scale_by(&outer, &inner.span()).unwrap();
    println!("\nscale {outer} by {}: {scaled}", inner.span());
    let via_sum = direct_sum(&scaled, &shape(&[2, 3]), &inner, &shape(&[8, 8])).unwrap();
    let via_tile = tile(&outer, &shape(&[2, 3]), &inner, &shape(&[8, 8])).unwrap();
    println!("scaled sum:   {}", via_sum.layout());
    println!("tiling:       {}", via_tile.layout());
    assert!(equivalent(&via_sum.layout(), &via_tile.layout()).unwrap());

    // Strided patterns like (2,2):(4,1) matter for box engines that accept
    // a pitch: the direct sum recognizes them as-is, where tiling would
    // demand the compact (2,2):(2,1) arrangement.
    let loop_nest = direct_sum(
        &parse_layout("(2):(8)").unwrap(),
        &shape(&[2, 1]),
        &block,
        &two,
    )
    .unwrap();
    println!(
        "\nstrided atoms under an outer loop: {}",
        loop_nest.layout()
    );
}
