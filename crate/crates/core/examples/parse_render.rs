//! The textual grammar and mapping tables.
//!
//! Run with: cargo run --example parse_render

use layout_algebra::oracle::enumerate;
use layout_algebra::render::render_text;
use layout_algebra::{format_layout, parse_layout, Shape};

fn main() {
    // shard ( "+" replica )? ( "+" offset )*, axis m when omitted
    let text = "(8,2,4,2):(4@lane,1@warp,1@lane,1@reg) + [(2):(4@warp)] + 5@warp";
    let tile = parse_layout(text).unwrap();
    println!("parsed:    {tile:?}");
    println!("formatted: {}", format_layout(&tile));

    // Errors carry byte positions.
    for bad in ["(2,3):(3,0)", "(2,3):(3)", "(2):(1) extra"] {
        println!("{bad:>14}: {}", parse_layout(bad).unwrap_err());
    }

    // A mapping table over a logical shape.
    let block = parse_layout("(2,2):(4,1)").unwrap();
    let shape = Shape::new(vec![2, 2]).unwrap();
    println!("\n{block} over {shape}:");
    print!("{}", render_text(&block, Some(&shape)).unwrap());

    // The brute-force oracle behind the property suites is a public API.
    println!("full image: {:?}", enumerate(&block).unwrap());
}
