//! Textual layout grammar.
//!
//! ```text
//! layout  := shard ( "+" replica )? ( "+" offset )*
//! shard   := "(" INT ("," INT)* "):(" stride ("," stride)* ")"
//! stride  := INT ("@" AXIS)?            // axis m when omitted
//! replica := "[" shard "]"
//! offset  := INT ("@" AXIS)?            // axis m when omitted
//! ```
//!
//! Whitespace is insignificant, extent and stride lists must have equal
//! length, and repeated offset terms accumulate. Formatting omits `@m` on
//! strides and always spells the axis on offsets, matching how layouts are
//! printed throughout the crate.

use crate::axis::AxisName;
use crate::coord::Coordinate;
use crate::error::ParseError;
use crate::layout::{Iter, Layout, Shape};

/// A parsed layout together with its source text and an optional logical
/// shape attached later (for example from a command-line flag).
#[derive(Debug, Clone)]
pub struct LayoutExpr {
    pub source: String,
    pub layout: Layout,
    pub shape: Option<Shape>,
}

/// Parses the layout grammar.
pub fn parse_layout(text: &str) -> Result<Layout, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let layout = p.layout()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    Ok(layout)
}

/// Parses and keeps the source text alongside the layout.
pub fn parse_layout_expr(text: &str) -> Result<LayoutExpr, ParseError> {
    Ok(LayoutExpr {
        source: text.to_string(),
        layout: parse_layout(text)?,
        shape: None,
    })
}

/// Formats a layout back into the grammar; inverse of [`parse_layout`] up
/// to structural equality.
pub fn format_layout(layout: &Layout) -> String {
    layout.to_string()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.pos, msg)
    }

    fn skip_ws(&mut self) {
        while self
            .src
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, want: u8) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {:?}", want as char)))
        }
    }

    fn try_eat(&mut self, want: u8) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.error("expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError::new(start, "integer out of range"))
    }

    fn axis(&mut self) -> Result<AxisName, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        AxisName::new(name).map_err(|e| ParseError::new(start, e.to_string()))
    }

    // "(" INT ("," INT)* "):(" stride ("," stride)* ")"
    fn iter_group(&mut self) -> Result<Vec<Iter>, ParseError> {
        self.eat(b'(')?;
        let mut extents = Vec::new();
        loop {
            let at = self.pos;
            let e = self.int()?;
            if e < 1 {
                return Err(ParseError::new(at, format!("extent must be >= 1, got {e}")));
            }
            extents.push(e);
            if !self.try_eat(b',') {
                break;
            }
        }
        self.eat(b')')?;
        self.eat(b':')?;
        self.eat(b'(')?;
        let mut iters = Vec::new();
        loop {
            let at = self.pos;
            let s = self.int()?;
            if s == 0 {
                return Err(ParseError::new(at, "stride must be nonzero"));
            }
            let axis = if self.try_eat(b'@') {
                self.axis()?
            } else {
                AxisName::memory()
            };
            iters.push((s, axis));
            if !self.try_eat(b',') {
                break;
            }
        }
        self.eat(b')')?;
        if extents.len() != iters.len() {
            return Err(self.error(format!(
                "{} extents but {} strides",
                extents.len(),
                iters.len()
            )));
        }
        Ok(extents
            .into_iter()
            .zip(iters)
            .map(|(e, (s, a))| Iter::new(e, s, a).expect("validated above"))
            .collect())
    }

    fn layout(&mut self) -> Result<Layout, ParseError> {
        let start = self.pos;
        let shard = self.iter_group()?;
        let mut replica = Vec::new();
        let mut offset = Coordinate::zero();
        let mut seen_offset = false;
        while self.try_eat(b'+') {
            match self.peek() {
                Some(b'[') if !seen_offset && replica.is_empty() => {
                    self.eat(b'[')?;
                    replica = self.iter_group()?;
                    self.eat(b']')?;
                }
                Some(b'[') => return Err(self.error("replica group must precede offsets")),
                _ => {
                    let v = self.int()?;
                    let axis = if self.try_eat(b'@') {
                        self.axis()?
                    } else {
                        AxisName::memory()
                    };
                    seen_offset = true;
                    offset.set(axis.clone(), offset.get(&axis) + v);
                }
            }
        }
        Layout::new(shard, replica, offset).map_err(|e| ParseError::new(start, e.to_string()))
    }
}
