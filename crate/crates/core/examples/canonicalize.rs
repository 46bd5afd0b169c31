//! Canonical forms and equivalence checking.
//!
//! Run with: cargo run --example canonicalize

use layout_algebra::canon::gap_condition;
use layout_algebra::{canonicalize, equivalent, parse_layout};

fn main() {
    // Chained shard iters merge: step 8 eight times equals step 1 of the
    // next iter around, so (2,8):(8,1) is just (16):(1).
    for text in [
        "(2,8):(8,1)",
        "(1,5):(5,1)",
        "(2,2,2,2):(8,4,2,1)",
        "(2,8,3,8):(192,8,64,1)",
    ] {
        let l = parse_layout(text).unwrap();
        println!("{text:>24}  ->  {}", canonicalize(&l));
    }

    // Replica normalization flips negative strides into the offset and
    // absorbs stride multiples into one run.
    for text in ["(4):(1) + [(3):(-2)]", "(4):(1) + [(2,3):(1,2)]"] {
        let l = parse_layout(text).unwrap();
        println!("{text:>24}  ->  {}", canonicalize(&l));
    }

    // Equivalence is structural equality of canonical forms when the gap
    // condition holds, and falls back to enumeration otherwise.
    let pairs = [
        ("(2,8):(8,1)", "(16):(1)"),
        ("(2,2):(4,1)", "(4):(1)"),
        ("(4):(1) + [(3):(-2)]", "(4):(1) + [(3):(2)] + -4@m"),
    ];
    for (a, b) in pairs {
        let la = parse_layout(a).unwrap();
        let lb = parse_layout(b).unwrap();
        println!("{a} == {b} ?  {}", equivalent(&la, &lb).unwrap());
    }

    // The gap condition: replica strides must clear each other's reach.
    let tight = parse_layout("(2):(1) + [(2,2):(1,2)]").unwrap();
    let canon = canonicalize(&tight);
    println!(
        "replicas of {canon} satisfy the gap condition: {}",
        gap_condition(canon.replica()).unwrap()
    );
}
