use std::collections::BTreeMap;
use std::fmt;

use crate::axis::AxisName;
use crate::error::LayoutError;

/// A sparse integer coordinate over named axes.
///
/// Axes not present map to 0; the stored form never holds zero entries, so
/// structural equality coincides with componentwise equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coordinate(BTreeMap<AxisName, i64>);

impl Coordinate {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A coordinate with a single component, e.g. `5@warp`.
    pub fn of(axis: AxisName, value: i64) -> Self {
        let mut c = Self::zero();
        c.set(axis, value);
        c
    }

    pub fn get(&self, axis: &AxisName) -> i64 {
        self.0.get(axis).copied().unwrap_or(0)
    }

    /// Sets one component; a zero value removes the entry.
    pub fn set(&mut self, axis: AxisName, value: i64) {
        if value == 0 {
            self.0.remove(&axis);
        } else {
            self.0.insert(axis, value);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&AxisName, i64)> {
        self.0.iter().map(|(a, v)| (a, *v))
    }

    pub fn axes(&self) -> impl Iterator<Item = &AxisName> {
        self.0.keys()
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let mut out = self.clone();
        for (axis, v) in other.entries() {
            let sum = out.get(axis).checked_add(v)?;
            out.set(axis.clone(), sum);
        }
        Some(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut out = self.clone();
        for (axis, v) in other.entries() {
            let diff = out.get(axis).checked_sub(v)?;
            out.set(axis.clone(), diff);
        }
        Some(out)
    }

    /// Componentwise product; entries survive only where both sides are set.
    pub fn hadamard(&self, other: &Self) -> Option<Self> {
        let mut out = Self::zero();
        for (axis, v) in self.entries() {
            let w = other.get(axis);
            out.set(axis.clone(), v.checked_mul(w)?);
        }
        Some(out)
    }

    pub fn checked_scale(&self, k: i64) -> Option<Self> {
        let mut out = Self::zero();
        for (axis, v) in self.entries() {
            out.set(axis.clone(), v.checked_mul(k)?);
        }
        Some(out)
    }
}

impl fmt::Debug for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (axis, v)) in self.entries().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{v}@{axis}")?;
        }
        Ok(())
    }
}

/// The set of coordinates a layout produces for one logical index.
///
/// Stored sorted with replica multiplicity retained, so `len` always equals
/// the replica domain size; equality compares images (duplicates collapse).
#[derive(Clone, Eq, Default)]
pub struct CoordSet(Vec<Coordinate>);

impl CoordSet {
    pub fn new(mut coords: Vec<Coordinate>) -> Self {
        coords.sort();
        Self(coords)
    }

    pub fn singleton(c: Coordinate) -> Self {
        Self(vec![c])
    }

    /// Number of stored coordinates, counting replica multiplicity.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Coordinate> {
        self.0.iter()
    }

    pub fn contains(&self, c: &Coordinate) -> bool {
        self.0.binary_search(c).is_ok()
    }

    /// Distinct coordinates in sorted order.
    pub fn image(&self) -> impl Iterator<Item = &Coordinate> {
        self.0.iter().enumerate().filter_map(|(i, c)| {
            if i == 0 || self.0[i - 1] != *c {
                Some(c)
            } else {
                None
            }
        })
    }

    /// Pointwise Minkowski sum of the two images.
    pub fn minkowski_add(&self, other: &Self) -> Result<Self, LayoutError> {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in self.iter() {
            for b in other.iter() {
                let sum = a
                    .checked_add(b)
                    .ok_or(LayoutError::Overflow("coordinate sum"))?;
                out.push(sum);
            }
        }
        Ok(Self::new(out))
    }
}

impl PartialEq for CoordSet {
    fn eq(&self, other: &Self) -> bool {
        self.image().eq(other.image())
    }
}

impl fmt::Debug for CoordSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CoordSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}
