//! Systolic-array matmul dispatch.
//!
//! Operand tiles live in a 2D scratchpad addressed by a partition axis `P`
//! and a free axis `F`. The contraction dimension of both inputs must sit
//! on `P`; output rows must sit on the accumulator's `P`. Planning aligns
//! the operand iter lists digit by digit, streams the digits whose
//! partition patterns agree, picks single-iter row/column selections for
//! the instruction, clamps to the hardware instruction cap, and turns
//! everything left over into a loop nest.

use serde::Serialize;

use crate::algebra::group_by_shape;
use crate::axis::AxisName;
use crate::canon::canonicalize;
use crate::error::LayoutError;
use crate::layout::{Iter, Layout, Shape};

/// Hardware cap on one instruction, `(M, N, K)`.
pub const INSTRUCTION_CAP: (i64, i64, i64) = (128, 128, 512);

/// Exact intersection of two strided value sets on one axis. Both iters
/// enumerate `{k·s : k < e}`; the intersection is again strided with the
/// stride lcm, and a bare `{0}` comes back as the unit iter.
pub fn iter_intersect(a: &Iter, b: &Iter) -> Result<Iter, LayoutError> {
    if a.axis() != b.axis() {
        return Err(LayoutError::AxisMismatch(
            a.axis().to_string(),
            b.axis().to_string(),
        ));
    }
    for it in [a, b] {
        if it.stride() < 0 {
            return Err(LayoutError::UnnormalizedStride(it.stride()));
        }
    }
    let g = gcd(a.stride(), b.stride());
    let lcm = a.stride() / g * b.stride();
    let top = (a.stride() * (a.extent() - 1)).min(b.stride() * (b.extent() - 1));
    let count = top / lcm + 1;
    if count <= 1 {
        Iter::new(1, 1, a.axis().clone())
    } else {
        Iter::new(count, lcm, a.axis().clone())
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatmulDim {
    M,
    N,
    K,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DigitRole {
    Instruction,
    Loop,
}

/// Which operand supplied the column selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NSource {
    B,
    C,
}

/// One aligned digit of the logical matmul iteration space.
///
/// `coeff` is the digit's mixed-radix coefficient within its logical
/// dimension; the operand strides give the address step the digit induces
/// on each operand.
#[derive(Debug, Clone, Serialize)]
pub struct PlanDigit {
    pub dim: MatmulDim,
    pub extent: i64,
    pub coeff: i64,
    pub role: DigitRole,
    pub a_stride: Option<(i64, AxisName)>,
    pub b_stride: Option<(i64, AxisName)>,
    pub c_stride: Option<(i64, AxisName)>,
}

/// A matmul dispatch: the instruction shape plus the digit list whose loop
/// digits form the surrounding nest.
#[derive(Debug, Clone, Serialize)]
pub struct MatmulPlan {
    pub instruction: (i64, i64, i64),
    pub digits: Vec<PlanDigit>,
    pub n_selected_from: NSource,
}

impl MatmulPlan {
    pub fn loop_digits(&self) -> impl Iterator<Item = &PlanDigit> {
        self.digits.iter().filter(|d| d.role == DigitRole::Loop)
    }

    pub fn logical_sizes(&self) -> (i64, i64, i64) {
        let mut sizes = (1, 1, 1);
        for d in &self.digits {
            match d.dim {
                MatmulDim::M => sizes.0 *= d.extent,
                MatmulDim::N => sizes.1 *= d.extent,
                MatmulDim::K => sizes.2 *= d.extent,
            }
        }
        sizes
    }
}

fn axis_p() -> AxisName {
    AxisName::new("P").unwrap()
}

fn axis_f() -> AxisName {
    AxisName::new("F").unwrap()
}

fn check_operand(layout: &Layout) -> Result<(), LayoutError> {
    if !layout.replica().is_empty() {
        return Err(LayoutError::ReplicatedOperand);
    }
    let (p, f) = (axis_p(), axis_f());
    for it in layout.shard() {
        if it.axis() != &p && it.axis() != &f {
            return Err(LayoutError::NotPartitionFree(it.axis().to_string()));
        }
        if it.stride() < 0 {
            return Err(LayoutError::UnnormalizedStride(it.stride()));
        }
    }
    for axis in layout.offset().axes() {
        if axis != &p && axis != &f {
            return Err(LayoutError::NotPartitionFree(axis.to_string()));
        }
    }
    Ok(())
}

// Aligns two iter lists over the same logical extent product by splitting
// iters until the extent sequences match elementwise.
fn zip_align(xs: &[Iter], ys: &[Iter]) -> Result<Vec<(Iter, Iter)>, LayoutError> {
    let mut out = Vec::new();
    let mut xs: std::collections::VecDeque<Iter> = xs.iter().cloned().collect();
    let mut ys: std::collections::VecDeque<Iter> = ys.iter().cloned().collect();
    loop {
        match (xs.pop_front(), ys.pop_front()) {
            (None, None) => return Ok(out),
            (Some(x), Some(y)) => {
                if x.extent() == y.extent() {
                    out.push((x, y));
                } else if x.extent() < y.extent() && y.extent() % x.extent() == 0 {
                    let (head, tail) = y.split(x.extent())?;
                    out.push((x, head));
                    ys.push_front(tail);
                } else if y.extent() < x.extent() && x.extent() % y.extent() == 0 {
                    let (head, tail) = x.split(y.extent())?;
                    out.push((head, y));
                    xs.push_front(tail);
                } else {
                    return Err(LayoutError::ExtentAlignment(
                        std::iter::once(&x)
                            .chain(xs.iter())
                            .map(Iter::extent)
                            .collect(),
                        std::iter::once(&y)
                            .chain(ys.iter())
                            .map(Iter::extent)
                            .collect(),
                    ));
                }
            }
            (x, y) => {
                return Err(LayoutError::ExtentAlignment(
                    x.iter().chain(xs.iter()).map(Iter::extent).collect(),
                    y.iter().chain(ys.iter()).map(Iter::extent).collect(),
                ))
            }
        }
    }
}

// Consecutive runs of iters merge into a single replication-style iter when,
// sorted by stride, each next stride is a multiple of the running stride
// absorbed within the running extent.
fn merges_to_single_iter(iters: &[Iter]) -> bool {
    let mut sorted: Vec<(i64, i64)> = iters.iter().map(|i| (i.stride(), i.extent())).collect();
    sorted.sort_unstable();
    let Some(&(stride, mut extent)) = sorted.first() else {
        return false;
    };
    for &(s, e) in &sorted[1..] {
        if s % stride != 0 {
            return false;
        }
        let q = s / stride;
        if q < 1 || q > extent {
            return false;
        }
        extent += q * (e - 1);
    }
    true
}

struct Selection {
    range: std::ops::Range<usize>,
    product: i64,
}

// Largest consecutive run of eligible pairs containing the minimum-stride
// iter of `keys` whose key iters merge to a single iter.
fn select_run(
    pairs: &[(Iter, Iter)],
    eligible: &[bool],
    keys: &[Iter],
) -> Result<Selection, LayoutError> {
    if pairs.is_empty() {
        return Ok(Selection {
            range: 0..0,
            product: 1,
        });
    }
    let min_idx = keys
        .iter()
        .enumerate()
        .min_by_key(|(i, it)| (it.stride().abs(), *i))
        .map(|(i, _)| i)
        .unwrap();
    if !eligible[min_idx] {
        return Err(LayoutError::NoColumnSelection);
    }
    let mut best: Option<Selection> = None;
    for lo in 0..=min_idx {
        for hi in min_idx..pairs.len() {
            if !eligible[lo..=hi].iter().all(|&e| e) {
                continue;
            }
            if !merges_to_single_iter(&keys[lo..=hi]) {
                continue;
            }
            let product: i64 = keys[lo..=hi].iter().map(Iter::extent).product();
            if best.as_ref().is_none_or(|b| product > b.product) {
                best = Some(Selection {
                    range: lo..hi + 1,
                    product,
                });
            }
        }
    }
    best.ok_or(LayoutError::NoColumnSelection)
}

struct DimBuild {
    dim: MatmulDim,
    digits: Vec<PlanDigit>,
}

impl DimBuild {
    fn new(dim: MatmulDim) -> Self {
        Self {
            dim,
            digits: Vec::new(),
        }
    }

    fn push(
        &mut self,
        extent: i64,
        role: DigitRole,
        a: Option<&Iter>,
        b: Option<&Iter>,
        c: Option<&Iter>,
    ) {
        let strides = |it: Option<&Iter>| it.map(|i| (i.stride(), i.axis().clone()));
        self.digits.push(PlanDigit {
            dim: self.dim,
            extent,
            coeff: 0,
            role,
            a_stride: strides(a),
            b_stride: strides(b),
            c_stride: strides(c),
        });
    }

    // Mixed-radix coefficients, then split instruction digits down to the
    // cap, pushing quotients into the loop nest.
    fn finish(mut self, cap: i64) -> (i64, Vec<PlanDigit>) {
        let mut coeff = 1;
        for d in self.digits.iter_mut().rev() {
            d.coeff = coeff;
            coeff *= d.extent;
        }
        let mut out = Vec::new();
        let mut budget = cap;
        // fastest digits keep streaming until the cap is hit
        for mut d in self.digits.into_iter().rev() {
            if d.role == DigitRole::Instruction {
                if d.extent <= budget {
                    budget /= d.extent;
                } else {
                    let keep = largest_divisor_at_most(d.extent, budget);
                    if keep > 1 {
                        let outer = PlanDigit {
                            extent: d.extent / keep,
                            coeff: d.coeff * keep,
                            role: DigitRole::Loop,
                            a_stride: scale_stride(&d.a_stride, keep),
                            b_stride: scale_stride(&d.b_stride, keep),
                            c_stride: scale_stride(&d.c_stride, keep),
                            ..d.clone()
                        };
                        d.extent = keep;
                        budget /= keep;
                        out.push(d);
                        out.push(outer);
                        continue;
                    }
                    d.role = DigitRole::Loop;
                }
            }
            out.push(d);
        }
        out.reverse();
        let instr = out
            .iter()
            .filter(|d| d.role == DigitRole::Instruction)
            .map(|d| d.extent)
            .product();
        (instr, out)
    }
}

fn scale_stride(s: &Option<(i64, AxisName)>, k: i64) -> Option<(i64, AxisName)> {
    s.as_ref().map(|(v, a)| (v * k, a.clone()))
}

fn largest_divisor_at_most(n: i64, bound: i64) -> i64 {
    let mut best = 1;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            if d <= bound {
                best = best.max(d);
            }
            if n / d <= bound {
                best = best.max(n / d);
            }
        }
        d += 1;
    }
    best
}

/// Plans a matmul dispatch for operand tiles `a: [K, M]`, `b: [K, N]`, and
/// accumulator `c: [M, N]`.
pub fn plan_matmul(
    a: &Layout,
    a_shape: &Shape,
    b: &Layout,
    b_shape: &Shape,
    c: &Layout,
    c_shape: &Shape,
) -> Result<MatmulPlan, LayoutError> {
    for shape in [a_shape, b_shape, c_shape] {
        if shape.rank() != 2 {
            return Err(LayoutError::RankMismatch(shape.rank(), 2));
        }
    }
    let (k, m, n) = (a_shape.dim(0), a_shape.dim(1), b_shape.dim(1));
    if b_shape.dim(0) != k || c_shape.dim(0) != m || c_shape.dim(1) != n {
        return Err(LayoutError::RankMismatch(2, 2));
    }
    for l in [a, b, c] {
        check_operand(l)?;
    }
    // plans are invariant under canonicalization of the inputs
    let (a, b, c) = (canonicalize(a), canonicalize(b), canonicalize(c));
    let ga = group_by_shape(&a, a_shape)?;
    let gb = group_by_shape(&b, b_shape)?;
    let gc = group_by_shape(&c, c_shape)?;
    let (p, f) = (axis_p(), axis_f());

    // K: aligned digits stream when the partition patterns agree exactly
    let mut k_build = DimBuild::new(MatmulDim::K);
    for (ia, ib) in zip_align(ga.block(0), gb.block(0))? {
        if ia.axis() != &p {
            return Err(LayoutError::KNotOnPartition { operand: 'A' });
        }
        if ib.axis() != &p {
            return Err(LayoutError::KNotOnPartition { operand: 'B' });
        }
        let common = iter_intersect(&ia, &ib)?;
        let full = common.extent() == ia.extent()
            && common.stride() == ia.stride()
            && common.stride() == ib.stride();
        let role = if full {
            DigitRole::Instruction
        } else {
            DigitRole::Loop
        };
        k_build.push(ia.extent(), role, Some(&ia), Some(&ib), None);
    }

    // M: rows of A (free axis) against rows of C (partition axis)
    let m_pairs = zip_align(ga.block(1), gc.block(0))?;
    let m_eligible: Vec<bool> = m_pairs
        .iter()
        .map(|(ia, ic)| ia.axis() == &f && ic.axis() == &p)
        .collect();
    let m_keys: Vec<Iter> = m_pairs.iter().map(|(_, ic)| ic.clone()).collect();
    let m_run =
        select_run(&m_pairs, &m_eligible, &m_keys).map_err(|_| LayoutError::MNotOnPartition)?;
    let mut m_build = DimBuild::new(MatmulDim::M);
    for (i, (ia, ic)) in m_pairs.iter().enumerate() {
        let role = if m_run.range.contains(&i) {
            DigitRole::Instruction
        } else {
            DigitRole::Loop
        };
        m_build.push(ia.extent(), role, Some(ia), None, Some(ic));
    }

    // N: columns of B against columns of C, selected from whichever side
    // admits the larger single-iter run
    let n_pairs = zip_align(gb.block(1), gc.block(1))?;
    let n_eligible: Vec<bool> = n_pairs
        .iter()
        .map(|(ib, ic)| ib.axis() == &f && ic.axis() == &f)
        .collect();
    let c_keys: Vec<Iter> = n_pairs.iter().map(|(_, ic)| ic.clone()).collect();
    let b_keys: Vec<Iter> = n_pairs.iter().map(|(ib, _)| ib.clone()).collect();
    let from_c = select_run(&n_pairs, &n_eligible, &c_keys);
    let from_b = select_run(&n_pairs, &n_eligible, &b_keys);
    let (n_run, n_selected_from) = match (from_c, from_b) {
        (Ok(c_run), Ok(b_run)) if b_run.product > c_run.product => (b_run, NSource::B),
        (Ok(c_run), _) => (c_run, NSource::C),
        (Err(_), Ok(b_run)) => (b_run, NSource::B),
        (Err(e), Err(_)) => return Err(e),
    };
    let mut n_build = DimBuild::new(MatmulDim::N);
    for (i, (ib, ic)) in n_pairs.iter().enumerate() {
        let role = if n_run.range.contains(&i) {
            DigitRole::Instruction
        } else {
            DigitRole::Loop
        };
        n_build.push(ib.extent(), role, None, Some(ib), Some(ic));
    }

    let (instr_m, m_digits) = m_build.finish(INSTRUCTION_CAP.0);
    let (instr_n, n_digits) = n_build.finish(INSTRUCTION_CAP.1);
    let (instr_k, k_digits) = k_build.finish(INSTRUCTION_CAP.2);
    let mut digits = m_digits;
    digits.extend(n_digits);
    digits.extend(k_digits);
    Ok(MatmulPlan {
        instruction: (instr_m, instr_n, instr_k),
        digits,
        n_selected_from,
    })
}

/// Expands a plan into the multiset of `(m, n, k)` contraction triples it
/// covers. A plan whose instruction shape has a non-positive dimension
/// covers nothing.
pub fn interpret_matmul_plan(plan: &MatmulPlan) -> Vec<(i64, i64, i64)> {
    if plan.instruction.0 < 1 || plan.instruction.1 < 1 || plan.instruction.2 < 1 {
        return Vec::new();
    }
    let mut triples = Vec::new();
    let mut values = vec![0i64; plan.digits.len()];
    loop {
        let mut triple = (0i64, 0i64, 0i64);
        for (v, d) in values.iter().zip(&plan.digits) {
            match d.dim {
                MatmulDim::M => triple.0 += v * d.coeff,
                MatmulDim::N => triple.1 += v * d.coeff,
                MatmulDim::K => triple.2 += v * d.coeff,
            }
        }
        triples.push(triple);
        let mut pos = values.len();
        loop {
            if pos == 0 {
                return triples;
            }
            pos -= 1;
            values[pos] += 1;
            if values[pos] < plan.digits[pos].extent {
                break;
            }
            values[pos] = 0;
        }
    }
}

/// Checks a plan covers every `(m, n, k)` of the logical problem exactly
/// once and respects the instruction cap.
pub fn verify_matmul_plan(plan: &MatmulPlan, m: i64, n: i64, k: i64) -> Result<(), LayoutError> {
    let (im, inn, ik) = plan.instruction;
    if im > INSTRUCTION_CAP.0 || inn > INSTRUCTION_CAP.1 || ik > INSTRUCTION_CAP.2 {
        return Err(LayoutError::MalformedPlan(
            "instruction exceeds hardware cap",
        ));
    }
    let total = m * n * k;
    let triples = interpret_matmul_plan(plan);
    if triples.len() as i64 != total {
        return Err(LayoutError::MalformedPlan("coverage count mismatch"));
    }
    let mut seen = vec![false; total as usize];
    for (tm, tn, tk) in triples {
        if tm < 0 || tm >= m || tn < 0 || tn >= n || tk < 0 || tk >= k {
            return Err(LayoutError::MalformedPlan("triple out of range"));
        }
        let idx = ((tm * n + tn) * k + tk) as usize;
        if seen[idx] {
            return Err(LayoutError::MalformedPlan("triple covered twice"));
        }
        seen[idx] = true;
    }
    Ok(())
}
