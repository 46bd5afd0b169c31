//! Mapping tables: one row per logical index listing every coordinate the
//! layout produces for it.

use crate::coord::CoordSet;
use crate::error::LayoutError;
use crate::layout::{unflatten, Layout, Shape};

/// Rendering stops after this many rows and reports the truncation.
pub const RENDER_ROW_CAP: i64 = 4096;

#[derive(Debug, Clone)]
pub struct RenderRow {
    pub index: Vec<i64>,
    pub coords: CoordSet,
}

#[derive(Debug, Clone)]
pub struct Rendering {
    pub rows: Vec<RenderRow>,
    pub total: i64,
    pub truncated: bool,
}

/// Tabulates the layout over its domain, as multi-indices when a shape is
/// given and as linear indices otherwise.
pub fn render(layout: &Layout, shape: Option<&Shape>) -> Result<Rendering, LayoutError> {
    if let Some(shape) = shape {
        if !layout.admits(shape) {
            return Err(LayoutError::NotAdmitted {
                shape_size: shape.size(),
                domain: layout.domain_size(),
            });
        }
    }
    let total = layout.domain_size();
    let shown = total.min(RENDER_ROW_CAP);
    let mut rows = Vec::with_capacity(shown as usize);
    for x in 0..shown {
        let index = match shape {
            Some(shape) => unflatten(shape.dims(), x)?,
            None => vec![x],
        };
        rows.push(RenderRow {
            index,
            coords: layout.eval(x)?,
        });
    }
    Ok(Rendering {
        rows,
        total,
        truncated: shown < total,
    })
}

/// Human-readable table.
pub fn render_text(layout: &Layout, shape: Option<&Shape>) -> Result<String, LayoutError> {
    use std::fmt::Write;
    let rendering = render(layout, shape)?;
    let mut out = String::new();
    for row in &rendering.rows {
        let idx = row
            .index
            .iter()
            .map(i64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "({idx}) -> {}", row.coords).unwrap();
    }
    if rendering.truncated {
        writeln!(
            out,
            "... truncated ({} of {} rows shown)",
            rendering.rows.len(),
            rendering.total
        )
        .unwrap();
    }
    Ok(out)
}
