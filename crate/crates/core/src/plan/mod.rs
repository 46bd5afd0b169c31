//! Layout-driven instruction planning.
//!
//! [`copy`] plans box-copy dispatches: a shared-memory tensor is tiled by a
//! hardware copy atom and each atom becomes one box transfer described by a
//! shape–stride descriptor over global memory. [`matmul`] plans
//! systolic-array matmul dispatches: the largest instruction shape the
//! operand layouts admit, plus a loop nest covering the rest of the logical
//! contraction. Both planners come with interpreters that expand a plan
//! back into element-level facts so tests can check plans against layout
//! semantics.

pub mod copy;
pub mod matmul;

pub use copy::{
    interpret_copy_plan, plan_copy, verify_copy_plan, CopyAtom, CopyAtomSpec, CopyPair, CopyPlan,
    DescriptorDim,
};
pub use matmul::{
    interpret_matmul_plan, iter_intersect, plan_matmul, verify_matmul_plan, DigitRole, MatmulDim,
    MatmulPlan, NSource, PlanDigit,
};
