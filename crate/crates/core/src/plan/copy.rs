//! Box-copy dispatch.
//!
//! A shared-memory region is carved into hardware copy atoms: boxes whose
//! innermost two logical dims are `8 × (swizzle bytes / element size)`. The
//! sliced shared layout must be a tile of the atom's row-major box; the
//! tiler then enumerates the shared-memory base of every atom. On the
//! global side the sliced layout has to regroup over the interleaved
//! (outer ‖ atom) shape and reproduce the atom-sized slice at the origin in
//! every inner block, which yields one shape–stride descriptor per grouped
//! iter. Swizzling permutes addresses inside an atom only, so it is carried
//! as a tag and the intra-atom addressing stays row-major.

use serde::Serialize;

use crate::algebra::{group_by_shape, tile_of};
use crate::axis::AxisName;
use crate::error::LayoutError;
use crate::layout::{unflatten, Layout, Region, Shape};
use crate::slice::slice;

/// Shared-memory copy atom parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CopyAtomSpec {
    pub dtype_size: i64,
    pub swizzle_mode: i64,
    pub rank: usize,
}

impl CopyAtomSpec {
    pub fn new(dtype_size: i64, swizzle_mode: i64, rank: usize) -> Result<Self, LayoutError> {
        if ![1, 2, 4, 8].contains(&dtype_size) {
            return Err(LayoutError::BadDtypeSize(dtype_size));
        }
        if ![32, 64, 128].contains(&swizzle_mode) {
            return Err(LayoutError::BadSwizzleMode(swizzle_mode));
        }
        if rank < 2 {
            return Err(LayoutError::BadAtomRank {
                rank,
                tensor_rank: rank,
            });
        }
        Ok(Self {
            dtype_size,
            swizzle_mode,
            rank,
        })
    }

    /// Elements along the innermost dim: swizzle bytes over element size.
    pub fn columns(&self) -> i64 {
        self.swizzle_mode / self.dtype_size
    }

    /// Logical box shape: `(1, …, 1, 8, columns)`.
    pub fn box_shape(&self) -> Shape {
        let mut dims = vec![1i64; self.rank];
        dims[self.rank - 2] = 8;
        dims[self.rank - 1] = self.columns();
        Shape::new(dims).unwrap()
    }
}

/// One grouped iter of the sliced global layout: the box extent is the
/// iter's extent for intra-atom dims and 1 for atom-enumerating dims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DescriptorDim {
    pub extent: i64,
    pub stride: i64,
    pub box_extent: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CopyAtom {
    pub shared_offset: i64,
    pub global_origin: Vec<i64>,
}

/// A box-copy dispatch: every atom is one transfer of `atom_box` elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CopyPlan {
    pub atom_box: Vec<i64>,
    pub global_base: i64,
    pub descriptor: Vec<DescriptorDim>,
    pub atoms: Vec<CopyAtom>,
}

impl CopyPlan {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }
}

/// One expanded element transfer: a global element coordinate (absolute
/// multi-index) paired with the shared element offset it lands on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyPair {
    pub global: Vec<i64>,
    pub shared_offset: i64,
}

fn memory_component(layout: &Layout, shape: &Shape, index: &[i64]) -> Result<i64, LayoutError> {
    let coords = layout.eval_shaped(shape, index)?;
    let coord = coords.iter().next().expect("eval is never empty");
    Ok(coord.get(&AxisName::memory()))
}

fn check_memory_operand(layout: &Layout) -> Result<(), LayoutError> {
    if !layout.replica().is_empty() {
        return Err(LayoutError::ReplicatedOperand);
    }
    let m = AxisName::memory();
    for it in layout.shard() {
        if it.axis() != &m {
            return Err(LayoutError::UnsupportedAxis(it.axis().to_string()));
        }
    }
    for axis in layout.offset().axes() {
        if axis != &m {
            return Err(LayoutError::UnsupportedAxis(axis.to_string()));
        }
    }
    Ok(())
}

/// Plans a box copy of `global[g_region]` into `shared[s_region]`.
pub fn plan_copy(
    global: &Layout,
    g_shape: &Shape,
    g_region: &Region,
    shared: &Layout,
    s_shape: &Shape,
    s_region: &Region,
    atom: &CopyAtomSpec,
) -> Result<CopyPlan, LayoutError> {
    if g_region.volume() != s_region.volume() {
        return Err(LayoutError::VolumeMismatch(
            g_region.volume(),
            s_region.volume(),
        ));
    }
    if g_region.extents() != s_region.extents() {
        return Err(LayoutError::RegionShapeMismatch(
            g_region.extents(),
            s_region.extents(),
        ));
    }
    if atom.rank != s_region.rank() {
        return Err(LayoutError::BadAtomRank {
            rank: atom.rank,
            tensor_rank: s_region.rank(),
        });
    }
    check_memory_operand(global)?;
    check_memory_operand(shared)?;

    let sliced_global = slice(global, g_shape, g_region)?;
    let sliced_shared = slice(shared, s_shape, s_region)?;
    let extents = Shape::new(s_region.extents())?;

    // the sliced shared layout must tile by the atom's row-major box
    let atom_box = atom.box_shape();
    let atom_layout = Layout::row_major(&atom_box, AxisName::memory())?;
    let (tiler, tiler_shape) = tile_of(&sliced_shared, &extents, &atom_layout, &atom_box)?;
    debug_assert!(tiler.replica().is_empty());

    // shared atom bases, checked disjoint so no element is written twice
    let atom_elems = atom_box.size();
    let mut atoms = Vec::with_capacity(tiler_shape.size() as usize);
    for x in 0..tiler_shape.size() {
        let tile_index = unflatten(tiler_shape.dims(), x)?;
        let origin: Vec<i64> = tile_index
            .iter()
            .zip(atom_box.dims())
            .map(|(&t, &e)| t * e)
            .collect();
        let shared_offset = memory_component(&sliced_shared, &extents, &origin)?;
        let global_origin: Vec<i64> = origin
            .iter()
            .zip(g_region.begins())
            .map(|(&o, b)| o + b)
            .collect();
        atoms.push(CopyAtom {
            shared_offset,
            global_origin,
        });
    }
    let mut bases: Vec<i64> = atoms.iter().map(|a| a.shared_offset).collect();
    bases.sort_unstable();
    if bases.windows(2).any(|w| w[1] - w[0] < atom_elems) {
        return Err(LayoutError::MalformedPlan("shared atoms overlap"));
    }

    // the global side must regroup over (outer ‖ atom) and reproduce the
    // atom-sized slice at the origin in every inner block
    let mut interleaved = Vec::with_capacity(extents.rank() * 2);
    for (&outer, &inner) in tiler_shape.dims().iter().zip(atom_box.dims()) {
        interleaved.push(outer);
        interleaved.push(inner);
    }
    let grouped_global = group_by_shape(&sliced_global, &Shape::new(interleaved)?)?;
    let origin_region = Region::new(atom_box.dims().iter().map(|&e| (0, e)).collect())?;
    let atom_slice = slice(&sliced_global, &extents, &origin_region)?;
    let grouped_atom = group_by_shape(&atom_slice, &atom_box)?;
    for j in 0..extents.rank() {
        if grouped_global.block(2 * j + 1) != grouped_atom.block(j) {
            return Err(LayoutError::GlobalAtomMismatch(j));
        }
    }

    let mut descriptor = Vec::new();
    for j in 0..extents.rank() {
        for it in grouped_global.block(2 * j) {
            descriptor.push(DescriptorDim {
                extent: it.extent(),
                stride: it.stride(),
                box_extent: 1,
            });
        }
        for it in grouped_global.block(2 * j + 1) {
            descriptor.push(DescriptorDim {
                extent: it.extent(),
                stride: it.stride(),
                box_extent: it.extent(),
            });
        }
    }

    Ok(CopyPlan {
        atom_box: atom_box.dims().to_vec(),
        global_base: sliced_global.offset().get(&AxisName::memory()),
        descriptor,
        atoms,
    })
}

/// Expands every atom into element transfers by row-major traversal of the
/// box.
pub fn interpret_copy_plan(plan: &CopyPlan) -> Vec<CopyPair> {
    let box_shape = Shape::new(plan.atom_box.clone()).expect("plans carry valid boxes");
    let mut pairs = Vec::new();
    for atom in &plan.atoms {
        for y in 0..box_shape.size() {
            let local = unflatten(box_shape.dims(), y).unwrap();
            let global: Vec<i64> = atom
                .global_origin
                .iter()
                .zip(&local)
                .map(|(&o, &l)| o + l)
                .collect();
            pairs.push(CopyPair {
                global,
                shared_offset: atom.shared_offset + y,
            });
        }
    }
    pairs
}

/// Checks a plan against layout semantics: the expansion must be a
/// bijection from the global region onto distinct shared offsets, each pair
/// consistent with what the two layouts say about that element, and the
/// descriptor must reproduce the sliced global addresses.
pub fn verify_copy_plan(
    plan: &CopyPlan,
    global: &Layout,
    g_shape: &Shape,
    g_region: &Region,
    shared: &Layout,
    s_shape: &Shape,
    s_region: &Region,
) -> Result<(), LayoutError> {
    let pairs = interpret_copy_plan(plan);
    if pairs.len() as i64 != g_region.volume() {
        return Err(LayoutError::MalformedPlan("element count mismatch"));
    }
    let region_extents = Shape::new(g_region.extents())?;
    let mut seen_global = std::collections::BTreeSet::new();
    let mut seen_shared = std::collections::BTreeSet::new();
    for pair in &pairs {
        let rel: Vec<i64> = pair
            .global
            .iter()
            .zip(g_region.begins())
            .map(|(&g, b)| g - b)
            .collect();
        if rel
            .iter()
            .zip(region_extents.dims())
            .any(|(&r, &e)| r < 0 || r >= e)
        {
            return Err(LayoutError::MalformedPlan(
                "global element outside the region",
            ));
        }
        if !seen_global.insert(rel.clone()) {
            return Err(LayoutError::MalformedPlan("global element copied twice"));
        }
        if !seen_shared.insert(pair.shared_offset) {
            return Err(LayoutError::MalformedPlan("shared offset written twice"));
        }
        // the same logical element in both tensors
        let shared_index: Vec<i64> = rel
            .iter()
            .zip(s_region.begins())
            .map(|(&r, b)| r + b)
            .collect();
        let want_shared = memory_component(shared, s_shape, &shared_index)?;
        if want_shared != pair.shared_offset {
            return Err(LayoutError::MalformedPlan("shared address mismatch"));
        }
        let descriptor_addr = descriptor_address(plan, g_region, &rel)?;
        let want_global = memory_component(global, g_shape, &pair.global)?;
        if descriptor_addr != want_global {
            return Err(LayoutError::MalformedPlan("global address mismatch"));
        }
    }
    Ok(())
}

// Address of a region-relative element per the descriptor: digits of each
// region dim over its grouped iters, dotted with the descriptor strides.
fn descriptor_address(plan: &CopyPlan, g_region: &Region, rel: &[i64]) -> Result<i64, LayoutError> {
    let mut addr = plan.global_base;
    let mut dims = plan.descriptor.iter();
    let mut local = rel.to_vec();
    for (d, &(_, region_extent)) in local.iter_mut().zip(g_region.dims()) {
        let mut extents = Vec::new();
        let mut strides = Vec::new();
        let mut covered = 1;
        while covered < region_extent {
            let dim = dims
                .next()
                .ok_or(LayoutError::MalformedPlan("descriptor too short"))?;
            extents.push(dim.extent);
            strides.push(dim.stride);
            covered *= dim.extent;
        }
        let digits = unflatten(&extents, *d)?;
        addr += digits
            .iter()
            .zip(&strides)
            .map(|(&g, &s)| g * s)
            .sum::<i64>();
    }
    Ok(addr)
}
