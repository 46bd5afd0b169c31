//! Constructing layouts and evaluating them.
//!
//! A layout maps a logical index to a set of coordinates over named axes.
//! Run with: cargo run --example evaluate

use layout_algebra::{axis, Coordinate, Iter, Layout, Shape};

fn main() {
    // An 8x16 tile distributed over two warps' registers: rows stride the
    // lane axis by 4, columns split over warp/lane/reg, the whole tile is
    // replicated once 4 warps away, and everything shifts up by 5 warps.
    let tile = Layout::new(
        vec![
            Iter::new(8, 4, axis("lane")).unwrap(),
            Iter::new(2, 1, axis("warp")).unwrap(),
            Iter::new(4, 1, axis("lane")).unwrap(),
            Iter::new(2, 1, axis("reg")).unwrap(),
        ],
        vec![Iter::new(2, 4, axis("warp")).unwrap()],
        Coordinate::of(axis("warp"), 5),
    )
    .unwrap();

    println!("register tile: {tile}");
    println!(
        "domain {} x replicas {}",
        tile.domain_size(),
        tile.replica_size()
    );
    for x in [0, 1, 17] {
        println!("  index {x:>2} -> {}", tile.eval(x).unwrap());
    }

    // The same evaluation through a logical 8x16 shape.
    let shape = Shape::new(vec![8, 16]).unwrap();
    assert!(tile.admits(&shape));
    println!(
        "  (1, 0)  -> {}",
        tile.eval_shaped(&shape, &[1, 0]).unwrap()
    );

    // Axis-wise span: how much of each axis the layout touches.
    println!("span: {}", tile.span());

    // A 64x128 tensor fully sharded across a 2x2 device mesh.
    let mesh = Layout::new(
        vec![
            Iter::new(2, 1, axis("gpuid")).unwrap(),
            Iter::new(32, 128, axis("m")).unwrap(),
            Iter::new(2, 2, axis("gpuid")).unwrap(),
            Iter::new(64, 1, axis("m")).unwrap(),
        ],
        vec![],
        Coordinate::zero(),
    )
    .unwrap();
    let mesh_shape = Shape::new(vec![64, 128]).unwrap();
    println!("\nmesh sharding: {mesh}");
    for index in [[0, 0], [0, 64], [32, 0], [63, 127]] {
        println!(
            "  element ({:>2},{:>3}) -> {}",
            index[0],
            index[1],
            mesh.eval_shaped(&mesh_shape, &index).unwrap()
        );
    }
}
