use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::LayoutError;

/// The axis used when textual inputs omit one.
pub const DEFAULT_AXIS: &str = "m";

/// A named hardware axis: memory offset, lane, warp, register slot, device
/// id, scratchpad partition, and so on.
///
/// Names are identifiers: a leading alphabetic character or underscore
/// followed by alphanumerics or underscores.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AxisName(Arc<str>);

impl AxisName {
    pub fn new(name: &str) -> Result<Self, LayoutError> {
        let mut chars = name.chars();
        let valid = match chars.next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
            }
            _ => false,
        };
        if !valid {
            return Err(LayoutError::InvalidAxisName(name.to_string()));
        }
        Ok(Self(name.into()))
    }

    /// The default memory axis `m`.
    pub fn memory() -> Self {
        Self(DEFAULT_AXIS.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_default(&self) -> bool {
        &*self.0 == DEFAULT_AXIS
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

impl Serialize for AxisName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for AxisName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        AxisName::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Shorthand constructor, handy in examples and tests.
pub fn axis(name: &str) -> AxisName {
    AxisName::new(name).expect("invalid axis name")
}
