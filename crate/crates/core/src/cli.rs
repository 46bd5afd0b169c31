//! Command-line front end.
//!
//! Subcommands: `eval`, `canon`, `equiv`, `span`, `group`, `tile`,
//! `tileof`, `slice`, `dsum`, `render`, `plan-copy`, `plan-matmul`. The
//! global `--json` flag switches from human-readable text to a stable
//! structured schema (top-level `schema_version`, layouts under `shard` /
//! `replica` / `offset`, grouped results adding `blocks`, planners adding
//! `plan`). Exit codes: 0 success, 1 operation failure (including
//! `equiv` deciding "not equivalent"), 2 parse or usage error. Layout
//! arguments may be `@file` to read the text from a file.

use serde_json::{json, Value};

use crate::algebra::{direct_sum, group_by_shape, tile, tile_of, GroupedLayout};
use crate::canon::{canonicalize, equivalent};
use crate::coord::{CoordSet, Coordinate};
use crate::error::LayoutError;
use crate::layout::{Iter, Layout, Region, Shape};
use crate::parse::parse_layout;
use crate::plan::{plan_copy, plan_matmul, CopyAtomSpec, CopyPlan, DigitRole, MatmulPlan, NSource};
use crate::render::render;
use crate::slice::slice;

pub const SCHEMA_VERSION: i64 = 1;

/// Result of one command invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutput {
    fn fail(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: format!("error: {}\n", message.into()),
        }
    }
}

// Usage and grammar problems exit 2; everything else is an operation
// failure and exits 1.
enum CliError {
    Usage(String),
    Operation(String),
}

impl From<crate::error::ParseError> for CliError {
    fn from(e: crate::error::ParseError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<LayoutError> for CliError {
    fn from(e: LayoutError) -> Self {
        CliError::Operation(e.to_string())
    }
}

type CliResult = Result<(i32, String), CliError>;

/// Runs one command; never panics on bad input.
pub fn run_command<I, S>(args: I) -> CommandOutput
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let json = if let Some(pos) = argv.iter().position(|a| a == "--json") {
        argv.remove(pos);
        true
    } else {
        false
    };
    if argv.is_empty() {
        return CommandOutput::fail(2, usage_line());
    }
    let command = argv.remove(0);
    let mut reader = ArgReader { args: argv, pos: 0 };
    let result = match command.as_str() {
        "eval" => cmd_eval(&mut reader, json),
        "canon" => cmd_canon(&mut reader, json),
        "equiv" => cmd_equiv(&mut reader, json),
        "span" => cmd_span(&mut reader, json),
        "group" => cmd_group(&mut reader, json),
        "tile" => cmd_binary_op(&mut reader, json, BinaryOp::Tile),
        "tileof" => cmd_binary_op(&mut reader, json, BinaryOp::TileOf),
        "dsum" => cmd_binary_op(&mut reader, json, BinaryOp::DirectSum),
        "slice" => cmd_slice(&mut reader, json),
        "render" => cmd_render(&mut reader, json),
        "plan-copy" => cmd_plan_copy(&mut reader, json),
        "plan-matmul" => cmd_plan_matmul(&mut reader, json),
        other => Err(CliError::Usage(format!(
            "unknown command {other:?}; {}",
            usage_line()
        ))),
    };
    match result {
        Ok((code, stdout)) => CommandOutput {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(CliError::Usage(msg)) => CommandOutput::fail(2, msg),
        Err(CliError::Operation(msg)) => CommandOutput::fail(1, msg),
    }
}

fn usage_line() -> String {
    "usage: layout [--json] <eval|canon|equiv|span|group|tile|tileof|dsum|slice|render|plan-copy|plan-matmul> ...".into()
}

struct ArgReader {
    args: Vec<String>,
    pos: usize,
}

impl ArgReader {
    fn next(&mut self, what: &str) -> Result<String, CliError> {
        if self.pos < self.args.len() {
            self.pos += 1;
            Ok(self.args[self.pos - 1].clone())
        } else {
            Err(CliError::Usage(format!("missing {what}")))
        }
    }

    fn next_opt(&mut self) -> Option<String> {
        if self.pos < self.args.len() {
            self.pos += 1;
            Some(self.args[self.pos - 1].clone())
        } else {
            None
        }
    }

    fn flag(&mut self, name: &str) -> Result<String, CliError> {
        let got = self.next(&format!("flag {name}"))?;
        if got != name {
            return Err(CliError::Usage(format!("expected {name}, got {got:?}")));
        }
        self.next(&format!("value for {name}"))
    }

    fn named(&mut self, spec: &[&str]) -> Result<Vec<String>, CliError> {
        let mut values: Vec<Option<String>> = vec![None; spec.len()];
        while let Some(arg) = self.next_opt() {
            let Some(idx) = spec.iter().position(|&s| s == arg) else {
                return Err(CliError::Usage(format!("unexpected argument {arg:?}")));
            };
            let value = self.next(&format!("value for {arg}"))?;
            values[idx] = Some(value);
        }
        spec.iter()
            .zip(values)
            .map(|(name, v)| v.ok_or_else(|| CliError::Usage(format!("missing {name}"))))
            .collect()
    }

    fn finish(&mut self) -> Result<(), CliError> {
        match self.next_opt() {
            Some(extra) => Err(CliError::Usage(format!("unexpected argument {extra:?}"))),
            None => Ok(()),
        }
    }
}

fn read_layout(arg: &str) -> Result<Layout, CliError> {
    let text = if let Some(path) = arg.strip_prefix('@') {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?
    } else {
        arg.to_string()
    };
    Ok(parse_layout(text.trim())?)
}

fn parse_shape(text: &str) -> Result<Shape, CliError> {
    let dims = text
        .split(',')
        .map(|d| d.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("bad shape {text:?}")))?;
    Shape::new(dims).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_region(text: &str) -> Result<Region, CliError> {
    let bounds = text
        .split(',')
        .map(|part| {
            let (b, e) = part
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("bad region bound {part:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|_| CliError::Usage(format!("bad region bound {part:?}")))
            };
            Ok((parse(b)?, parse(e)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Region::from_bounds(bounds).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_index(text: &str) -> Result<Vec<i64>, CliError> {
    text.split(',')
        .map(|d| d.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("bad index {text:?}")))
}

// --- JSON builders -------------------------------------------------------

fn iter_json(it: &Iter) -> Value {
    json!({ "extent": it.extent(), "stride": it.stride(), "axis": it.axis().as_str() })
}

fn iters_json(iters: &[Iter]) -> Value {
    Value::Array(iters.iter().map(iter_json).collect())
}

fn coord_json(c: &Coordinate) -> Value {
    let mut map = serde_json::Map::new();
    for (axis, v) in c.entries() {
        map.insert(axis.to_string(), json!(v));
    }
    Value::Object(map)
}

fn coords_json(set: &CoordSet) -> Value {
    Value::Array(set.iter().map(coord_json).collect())
}

fn layout_fields(l: &Layout) -> serde_json::Map<String, Value> {
    let mut map = serde_json::Map::new();
    map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    map.insert("shard".into(), iters_json(l.shard()));
    map.insert("replica".into(), iters_json(l.replica()));
    map.insert("offset".into(), coord_json(l.offset()));
    map
}

fn layout_json(l: &Layout) -> Value {
    Value::Object(layout_fields(l))
}

fn grouped_json(g: &GroupedLayout) -> Value {
    let mut map = layout_fields(&g.layout());
    map.insert(
        "blocks".into(),
        Value::Array(g.blocks().map(iters_json).collect()),
    );
    map.insert("shape".into(), json!(g.shape().dims()));
    Value::Object(map)
}

fn emit(json_value: Value) -> String {
    format!("{json_value}\n")
}

// --- human renderings ----------------------------------------------------

fn grouped_text(g: &GroupedLayout) -> String {
    let blocks = g
        .blocks()
        .map(|block| {
            block
                .iter()
                .map(|it| format!("({},{}@{})", it.extent(), it.stride(), it.axis()))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(" | ");
    format!("{}\nblocks: {blocks}\n", g.layout())
}

fn copy_plan_text(plan: &CopyPlan) -> String {
    use std::fmt::Write;
    let mut out = String::from("copy plan\n");
    let box_dims = plan
        .atom_box
        .iter()
        .map(i64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    writeln!(out, "  atom box: ({box_dims})").unwrap();
    writeln!(out, "  global base: {}", plan.global_base).unwrap();
    writeln!(out, "  descriptor:").unwrap();
    for (i, d) in plan.descriptor.iter().enumerate() {
        writeln!(
            out,
            "    dim {i}: extent {} stride {} box {}",
            d.extent, d.stride, d.box_extent
        )
        .unwrap();
    }
    writeln!(out, "  atoms: {}", plan.atoms.len()).unwrap();
    for (i, a) in plan.atoms.iter().enumerate() {
        let origin = a
            .global_origin
            .iter()
            .map(i64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        writeln!(
            out,
            "    [{i}] shared {} global ({origin})",
            a.shared_offset
        )
        .unwrap();
    }
    out
}

fn matmul_plan_text(plan: &MatmulPlan) -> String {
    use std::fmt::Write;
    let mut out = String::from("matmul plan\n");
    writeln!(
        out,
        "  instruction: m {} n {} k {}",
        plan.instruction.0, plan.instruction.1, plan.instruction.2
    )
    .unwrap();
    writeln!(out, "  n selected from: {:?}", plan.n_selected_from).unwrap();
    writeln!(out, "  digits:").unwrap();
    for d in &plan.digits {
        let role = match d.role {
            DigitRole::Instruction => "instr",
            DigitRole::Loop => "loop",
        };
        let mut line = format!(
            "    {:?} extent {} coeff {} {role}",
            d.dim, d.extent, d.coeff
        );
        for (name, s) in [("a", &d.a_stride), ("b", &d.b_stride), ("c", &d.c_stride)] {
            if let Some((stride, axis)) = s {
                line.push_str(&format!(" {name}:{stride}@{axis}"));
            }
        }
        writeln!(out, "{line}").unwrap();
    }
    out
}

// --- subcommands ---------------------------------------------------------

fn cmd_eval(reader: &mut ArgReader, json: bool) -> CliResult {
    let layout = read_layout(&reader.next("layout")?)?;
    let index_text = reader.next("index")?;
    let shape = match reader.next_opt() {
        Some(flag) if flag == "--shape" => Some(parse_shape(&reader.next("shape")?)?),
        Some(other) => return Err(CliError::Usage(format!("unexpected argument {other:?}"))),
        None => None,
    };
    reader.finish()?;
    let index = parse_index(&index_text)?;
    let coords = match shape {
        Some(shape) => layout.eval_shaped(&shape, &index)?,
        None => {
            if index.len() != 1 {
                return Err(CliError::Usage("a multi-index needs --shape".into()));
            }
            layout.eval(index[0])?
        }
    };
    if json {
        Ok((
            0,
            emit(json!({
                "schema_version": SCHEMA_VERSION,
                "index": index,
                "coords": coords_json(&coords),
            })),
        ))
    } else {
        Ok((0, format!("{coords}\n")))
    }
}

fn cmd_canon(reader: &mut ArgReader, json: bool) -> CliResult {
    let layout = read_layout(&reader.next("layout")?)?;
    reader.finish()?;
    let canon = canonicalize(&layout);
    if json {
        Ok((0, emit(layout_json(&canon))))
    } else {
        Ok((0, format!("{canon}\n")))
    }
}

fn cmd_equiv(reader: &mut ArgReader, json: bool) -> CliResult {
    let a = read_layout(&reader.next("first layout")?)?;
    let b = read_layout(&reader.next("second layout")?)?;
    reader.finish()?;
    let equal = equivalent(&a, &b)?;
    let out = if json {
        emit(json!({ "schema_version": SCHEMA_VERSION, "equivalent": equal }))
    } else if equal {
        "equivalent\n".to_string()
    } else {
        "not equivalent\n".to_string()
    };
    Ok((if equal { 0 } else { 1 }, out))
}

fn cmd_span(reader: &mut ArgReader, json: bool) -> CliResult {
    let layout = read_layout(&reader.next("layout")?)?;
    reader.finish()?;
    let span = layout.span();
    if json {
        Ok((
            0,
            emit(json!({ "schema_version": SCHEMA_VERSION, "span": coord_json(&span) })),
        ))
    } else if span.is_zero() {
        Ok((0, "1\n".to_string()))
    } else {
        let parts: Vec<String> = span.entries().map(|(a, v)| format!("{a}:{v}")).collect();
        Ok((0, format!("{}\n", parts.join(" "))))
    }
}

fn cmd_group(reader: &mut ArgReader, json: bool) -> CliResult {
    let layout = read_layout(&reader.next("layout")?)?;
    let shape = parse_shape(&reader.flag("--shape")?)?;
    reader.finish()?;
    let grouped = group_by_shape(&layout, &shape)?;
    if json {
        Ok((0, emit(grouped_json(&grouped))))
    } else {
        Ok((0, grouped_text(&grouped)))
    }
}

enum BinaryOp {
    Tile,
    TileOf,
    DirectSum,
}

fn cmd_binary_op(reader: &mut ArgReader, json: bool, op: BinaryOp) -> CliResult {
    let a = read_layout(&reader.next("first layout")?)?;
    let a_shape = parse_shape(&reader.flag("--shape")?)?;
    let b = read_layout(&reader.next("second layout")?)?;
    let b_shape = parse_shape(&reader.flag("--shape")?)?;
    reader.finish()?;
    match op {
        BinaryOp::Tile => {
            let t = tile(&a, &a_shape, &b, &b_shape)?;
            if json {
                Ok((0, emit(grouped_json(&t))))
            } else {
                Ok((0, format!("{}\n", t.layout())))
            }
        }
        BinaryOp::DirectSum => {
            let d = direct_sum(&a, &a_shape, &b, &b_shape)?;
            if json {
                Ok((0, emit(grouped_json(&d))))
            } else {
                Ok((0, format!("{}\n", d.layout())))
            }
        }
        BinaryOp::TileOf => {
            let (c, c_shape) = tile_of(&a, &a_shape, &b, &b_shape)?;
            if json {
                Ok((0, emit(grouped_json(&c))))
            } else {
                Ok((0, format!("{}\nshape: {}\n", c.layout(), c_shape)))
            }
        }
    }
}

fn cmd_slice(reader: &mut ArgReader, json: bool) -> CliResult {
    let layout = read_layout(&reader.next("layout")?)?;
    let values = reader.named(&["--shape", "--region"])?;
    let shape = parse_shape(&values[0])?;
    let region = parse_region(&values[1])?;
    let sliced = slice(&layout, &shape, &region)?;
    if json {
        Ok((0, emit(layout_json(&sliced))))
    } else {
        Ok((0, format!("{sliced}\n")))
    }
}

fn cmd_render(reader: &mut ArgReader, json: bool) -> CliResult {
    let layout = read_layout(&reader.next("layout")?)?;
    let shape = match reader.next_opt() {
        Some(flag) if flag == "--shape" => Some(parse_shape(&reader.next("shape")?)?),
        Some(other) => return Err(CliError::Usage(format!("unexpected argument {other:?}"))),
        None => None,
    };
    reader.finish()?;
    let rendering = render(&layout, shape.as_ref())?;
    if json {
        let rows: Vec<Value> = rendering
            .rows
            .iter()
            .map(|r| json!({ "index": r.index, "coords": coords_json(&r.coords) }))
            .collect();
        Ok((
            0,
            emit(json!({
                "schema_version": SCHEMA_VERSION,
                "rows": rows,
                "total": rendering.total,
                "truncated": rendering.truncated,
            })),
        ))
    } else {
        Ok((0, crate::render::render_text(&layout, shape.as_ref())?))
    }
}

fn cmd_plan_copy(reader: &mut ArgReader, json: bool) -> CliResult {
    let values = reader.named(&[
        "--global",
        "--global-shape",
        "--global-region",
        "--shared",
        "--shared-shape",
        "--shared-region",
        "--dtype-size",
        "--swizzle",
    ])?;
    let global = read_layout(&values[0])?;
    let g_shape = parse_shape(&values[1])?;
    let g_region = parse_region(&values[2])?;
    let shared = read_layout(&values[3])?;
    let s_shape = parse_shape(&values[4])?;
    let s_region = parse_region(&values[5])?;
    let parse_num = |s: &str| {
        s.parse::<i64>()
            .map_err(|_| CliError::Usage(format!("bad number {s:?}")))
    };
    let atom = CopyAtomSpec::new(
        parse_num(&values[6])?,
        parse_num(&values[7])?,
        s_region.rank(),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let plan = plan_copy(
        &global, &g_shape, &g_region, &shared, &s_shape, &s_region, &atom,
    )?;
    if json {
        let mut plan_value = serde_json::to_value(&plan).expect("plans serialize");
        plan_value["type"] = json!("copy");
        Ok((
            0,
            emit(json!({ "schema_version": SCHEMA_VERSION, "plan": plan_value })),
        ))
    } else {
        Ok((0, copy_plan_text(&plan)))
    }
}

fn cmd_plan_matmul(reader: &mut ArgReader, json: bool) -> CliResult {
    let values = reader.named(&["--a", "--a-shape", "--b", "--b-shape", "--c", "--c-shape"])?;
    let a = read_layout(&values[0])?;
    let a_shape = parse_shape(&values[1])?;
    let b = read_layout(&values[2])?;
    let b_shape = parse_shape(&values[3])?;
    let c = read_layout(&values[4])?;
    let c_shape = parse_shape(&values[5])?;
    let plan = plan_matmul(&a, &a_shape, &b, &b_shape, &c, &c_shape)?;
    if json {
        let mut plan_value = serde_json::to_value(&plan).expect("plans serialize");
        plan_value["type"] = json!("matmul");
        plan_value["n_selected_from"] = match plan.n_selected_from {
            NSource::B => json!("B"),
            NSource::C => json!("C"),
        };
        Ok((
            0,
            emit(json!({ "schema_version": SCHEMA_VERSION, "plan": plan_value })),
        ))
    } else {
        Ok((0, matmul_plan_text(&plan)))
    }
}
