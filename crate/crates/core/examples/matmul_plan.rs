//! Planning a systolic-array matmul dispatch from operand layouts.
//!
//! Run with: cargo run --example matmul_plan

use layout_algebra::plan::{interpret_matmul_plan, plan_matmul, verify_matmul_plan, DigitRole};
use layout_algebra::{parse_layout, Shape};

fn shape(dims: &[i64]) -> Shape {
    Shape::new(dims.to_vec()).unwrap()
}

fn main() {
    // Operands live in a 2D scratchpad: partitions (P) by free columns (F).
    // The contraction dim of both inputs must sit on P; output rows on P.
    let a = parse_layout("(128,2,128):(1@P,128@F,1@F)").unwrap(); // [K=128, M=256]
    let b = parse_layout("(128,128):(1@P,1@F)").unwrap(); //          [K=128, N=128]
    let c = parse_layout("(2,128,128):(128@P,1@P,1@F)").unwrap(); // [M=256, N=128]

    let plan = plan_matmul(
        &a,
        &shape(&[128, 256]),
        &b,
        &shape(&[128, 128]),
        &c,
        &shape(&[256, 128]),
    )
    .unwrap();

    let (m, n, k) = plan.instruction;
    println!("instruction: {m} x {n} x {k}   (cap 128 x 128 x 512)");
    println!("n selected from: {:?}", plan.n_selected_from);
    for d in &plan.digits {
        let role = match d.role {
            DigitRole::Instruction => "stream",
            DigitRole::Loop => "loop  ",
        };
        println!(
            "  {role} {:?} extent {:>3} coeff {:>3}",
            d.dim, d.extent, d.coeff
        );
    }

    // The loop nest and instruction together cover every logical (m, n, k)
    // exactly once; the interpreter expands them for verification.
    verify_matmul_plan(&plan, 256, 128, 128).unwrap();
    println!(
        "coverage: {} contraction triples",
        interpret_matmul_plan(&plan).len()
    );

    // The contraction dim on the free axis violates the engine contract.
    let swapped = parse_layout("(128,128):(1@F,1@P)").unwrap();
    let err = plan_matmul(
        &swapped,
        &shape(&[128, 128]),
        &b,
        &shape(&[128, 128]),
        &parse_layout("(128,128):(1@P,1@F)").unwrap(),
        &shape(&[128, 128]),
    )
    .unwrap_err();
    println!("K on F fails: {err}");
}
