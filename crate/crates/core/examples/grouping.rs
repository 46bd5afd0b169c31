//! Grouping a shard list into blocks that realize a logical shape.
//!
//! Run with: cargo run --example grouping

use layout_algebra::{group_by_shape, parse_layout, Shape};

fn show(text: &str, dims: &[i64]) {
    let layout = parse_layout(text).unwrap();
    let shape = Shape::new(dims.to_vec()).unwrap();
    match group_by_shape(&layout, &shape) {
        Ok(grouped) => {
            let blocks: Vec<String> = grouped
                .blocks()
                .map(|block| {
                    block
                        .iter()
                        .map(|it| format!("({},{})", it.extent(), it.stride()))
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            println!("{text} by {shape}:  {}", blocks.join(" | "));
        }
        Err(e) => println!("{text} by {shape}:  fails ({e})"),
    }
}

fn main() {
    // a 16x24 matrix stored as an 8x8 grid of 2x3 tiles
    show("(2,8,3,8):(192,8,64,1)", &[16, 24]);

    // contiguous memory splits to any shape
    show("(4):(1)", &[2, 2]);
    show("(1024):(1)", &[2, 8, 64]);

    // a factor of 2 cannot produce the leading 3
    show("(2,3):(3,1)", &[3, 2]);

    // dimensions of extent 1 take an empty block
    show("(6):(1)", &[1, 6, 1]);
}
