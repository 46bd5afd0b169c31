use std::fmt;

use crate::axis::AxisName;
use crate::coord::{CoordSet, Coordinate};
use crate::error::LayoutError;

/// An atomic strided access descriptor: `extent` steps of size `stride`
/// along one named axis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Iter {
    extent: i64,
    stride: i64,
    axis: AxisName,
}

impl Iter {
    pub fn new(extent: i64, stride: i64, axis: AxisName) -> Result<Self, LayoutError> {
        if extent < 1 {
            return Err(LayoutError::BadExtent(extent));
        }
        if stride == 0 {
            return Err(LayoutError::ZeroStride);
        }
        Ok(Self {
            extent,
            stride,
            axis,
        })
    }

    pub fn extent(&self) -> i64 {
        self.extent
    }

    pub fn stride(&self) -> i64 {
        self.stride
    }

    pub fn axis(&self) -> &AxisName {
        &self.axis
    }

    /// Coordinate range this iter alone can span on its axis: `|s|·(e−1)`.
    pub fn reach(&self) -> Option<i64> {
        self.stride.abs().checked_mul(self.extent - 1)
    }

    /// Splits into `(head, tail)` with `extent = head_extent · tail_extent`,
    /// preserving the induced map.
    pub fn split(&self, head_extent: i64) -> Result<(Iter, Iter), LayoutError> {
        if head_extent < 1 || self.extent % head_extent != 0 {
            return Err(LayoutError::BadExtent(head_extent));
        }
        let tail_extent = self.extent / head_extent;
        let head_stride = tail_extent
            .checked_mul(self.stride)
            .ok_or(LayoutError::Overflow("iter split"))?;
        Ok((
            Iter::new(head_extent, head_stride, self.axis.clone())?,
            Iter::new(tail_extent, self.stride, self.axis.clone())?,
        ))
    }
}

impl fmt::Debug for Iter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}@{})", self.extent, self.stride, self.axis)
    }
}

/// A logical tensor shape: ordered dimensions, each at least 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Shape(Vec<i64>);

impl Shape {
    pub fn new(dims: Vec<i64>) -> Result<Self, LayoutError> {
        if dims.is_empty() {
            return Err(LayoutError::EmptyShape);
        }
        let mut size: i64 = 1;
        for &d in &dims {
            if d < 1 {
                return Err(LayoutError::BadDim(d));
            }
            size = size
                .checked_mul(d)
                .ok_or(LayoutError::Overflow("shape size"))?;
        }
        Ok(Self(dims))
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn dims(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self, i: usize) -> i64 {
        self.0[i]
    }

    pub fn size(&self) -> i64 {
        self.0.iter().product()
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// An axis-aligned region: per-dimension `(begin, extent)` pairs.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Region(Vec<(i64, i64)>);

impl Region {
    pub fn new(dims: Vec<(i64, i64)>) -> Result<Self, LayoutError> {
        if dims.is_empty() {
            return Err(LayoutError::EmptyShape);
        }
        for &(begin, extent) in &dims {
            if begin < 0 || extent < 1 {
                return Err(LayoutError::BadRegion { begin, extent });
            }
        }
        Ok(Self(dims))
    }

    /// Converts half-open `begin..end` bounds.
    pub fn from_bounds(bounds: Vec<(i64, i64)>) -> Result<Self, LayoutError> {
        Self::new(bounds.into_iter().map(|(b, e)| (b, e - b)).collect())
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn dims(&self) -> &[(i64, i64)] {
        &self.0
    }

    pub fn begins(&self) -> Vec<i64> {
        self.0.iter().map(|&(b, _)| b).collect()
    }

    pub fn extents(&self) -> Vec<i64> {
        self.0.iter().map(|&(_, t)| t).collect()
    }

    pub fn volume(&self) -> i64 {
        self.0.iter().map(|&(_, t)| t).product()
    }

    pub fn check_within(&self, shape: &Shape) -> Result<(), LayoutError> {
        let fit = self.rank() == shape.rank()
            && self
                .0
                .iter()
                .zip(shape.dims())
                .all(|(&(b, t), &s)| b + t <= s);
        if fit {
            Ok(())
        } else {
            Err(LayoutError::RegionOutOfShape {
                region: self.0.clone(),
                shape: shape.dims().to_vec(),
            })
        }
    }
}

/// Row-major linearization of `index` within `shape`.
pub fn flatten(shape: &Shape, index: &[i64]) -> Result<i64, LayoutError> {
    if index.len() != shape.rank()
        || index
            .iter()
            .zip(shape.dims())
            .any(|(&u, &s)| u < 0 || u >= s)
    {
        return Err(LayoutError::IndexOutOfShape {
            index: index.to_vec(),
            shape: shape.dims().to_vec(),
        });
    }
    let mut x = 0i64;
    for (&u, &s) in index.iter().zip(shape.dims()) {
        x = x * s + u;
    }
    Ok(x)
}

/// Lexicographic digits of `x` with the last extent fastest; inverse of
/// [`flatten`] when the extents are a shape.
pub fn unflatten(extents: &[i64], x: i64) -> Result<Vec<i64>, LayoutError> {
    let total: i64 = extents.iter().product();
    if x < 0 || x >= total {
        return Err(LayoutError::IndexOutOfDomain {
            index: x,
            domain: total,
        });
    }
    let mut digits = vec![0i64; extents.len()];
    let mut rest = x;
    for (i, &e) in extents.iter().enumerate().rev() {
        digits[i] = rest % e;
        rest /= e;
    }
    Ok(digits)
}

/// A set-valued layout: a shard list mapping logical indices to a base
/// coordinate, a replica collection enumerating extra offsets, and a
/// constant offset added to every result.
///
/// The replica collection is stored as a list but compares as a multiset.
#[derive(Clone, Eq)]
pub struct Layout {
    shard: Vec<Iter>,
    replica: Vec<Iter>,
    offset: Coordinate,
}

impl Layout {
    fn replica_key(&self) -> Vec<(&AxisName, i64, i64)> {
        let mut key: Vec<_> = self
            .replica
            .iter()
            .map(|it| (it.axis(), it.stride(), it.extent()))
            .collect();
        key.sort_unstable();
        key
    }
}

impl PartialEq for Layout {
    fn eq(&self, other: &Self) -> bool {
        self.shard == other.shard
            && self.offset == other.offset
            && self.replica_key() == other.replica_key()
    }
}

impl std::hash::Hash for Layout {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.shard.hash(state);
        for entry in self.replica_key() {
            entry.hash(state);
        }
        self.offset.hash(state);
    }
}

impl Layout {
    pub fn new(
        shard: Vec<Iter>,
        replica: Vec<Iter>,
        offset: Coordinate,
    ) -> Result<Self, LayoutError> {
        if shard.is_empty() {
            return Err(LayoutError::EmptyShard);
        }
        let layout = Self {
            shard,
            replica,
            offset,
        };
        layout.check_bounds()?;
        Ok(layout)
    }

    // For rewrites that already hold a validated layout: merges and sign
    // flips never enlarge the evaluated range, but may exceed the stricter
    // construction bound on offsets.
    pub(crate) fn from_parts_unchecked(
        shard: Vec<Iter>,
        replica: Vec<Iter>,
        offset: Coordinate,
    ) -> Self {
        debug_assert!(!shard.is_empty());
        Self {
            shard,
            replica,
            offset,
        }
    }

    /// The single-point layout `(1):(1)` on the memory axis.
    pub fn unit() -> Self {
        Self {
            shard: vec![Iter::new(1, 1, AxisName::memory()).unwrap()],
            replica: Vec::new(),
            offset: Coordinate::zero(),
        }
    }

    /// Shard-only layout from parallel extent/stride lists on one axis.
    pub fn strided(dims: &[(i64, i64)], axis: AxisName) -> Result<Self, LayoutError> {
        let shard = dims
            .iter()
            .map(|&(e, s)| Iter::new(e, s, axis.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(shard, Vec::new(), Coordinate::zero())
    }

    /// Row-major contiguous layout for `shape` on one axis.
    pub fn row_major(shape: &Shape, axis: AxisName) -> Result<Self, LayoutError> {
        let mut stride = 1i64;
        let mut shard = vec![Iter::new(1, 1, axis.clone())?; shape.rank()];
        for (i, &d) in shape.dims().iter().enumerate().rev() {
            shard[i] = Iter::new(d, stride, axis.clone())?;
            stride = stride
                .checked_mul(d)
                .ok_or(LayoutError::Overflow("row-major strides"))?;
        }
        Self::new(shard, Vec::new(), Coordinate::zero())
    }

    // Rejects layouts whose evaluation could overflow i64: the per-axis
    // reach plus offset must fit, and the domain sizes must fit.
    fn check_bounds(&self) -> Result<(), LayoutError> {
        let mut domain: i64 = 1;
        for it in &self.shard {
            domain = domain
                .checked_mul(it.extent())
                .ok_or(LayoutError::Overflow("shard domain"))?;
        }
        let mut replicas: i64 = 1;
        for it in &self.replica {
            replicas = replicas
                .checked_mul(it.extent())
                .ok_or(LayoutError::Overflow("replica domain"))?;
        }
        let mut axes: Vec<&AxisName> = self
            .shard
            .iter()
            .chain(&self.replica)
            .map(Iter::axis)
            .chain(self.offset.axes())
            .collect();
        axes.sort();
        axes.dedup();
        for axis in axes {
            let mut reach: i64 = 0;
            for it in self.shard.iter().chain(&self.replica) {
                if it.axis() == axis {
                    let r = it.reach().ok_or(LayoutError::Overflow("axis reach"))?;
                    reach = reach
                        .checked_add(r)
                        .ok_or(LayoutError::Overflow("axis reach"))?;
                }
            }
            reach
                .checked_add(self.offset.get(axis).abs())
                .and_then(|v| v.checked_add(1))
                .ok_or(LayoutError::Overflow("axis reach"))?;
        }
        Ok(())
    }

    pub fn shard(&self) -> &[Iter] {
        &self.shard
    }

    pub fn replica(&self) -> &[Iter] {
        &self.replica
    }

    pub fn offset(&self) -> &Coordinate {
        &self.offset
    }

    /// Domain size: the product of shard extents.
    pub fn domain_size(&self) -> i64 {
        self.shard.iter().map(Iter::extent).product()
    }

    /// Replica count: the product of replica extents, 1 when empty.
    pub fn replica_size(&self) -> i64 {
        self.replica.iter().map(Iter::extent).product()
    }

    /// A shape is admitted iff its size equals the shard domain size.
    pub fn admits(&self, shape: &Shape) -> bool {
        shape.size() == self.domain_size()
    }

    /// Base coordinate of logical index `x`: shard digits times strides.
    pub fn shard_coord(&self, x: i64) -> Result<Coordinate, LayoutError> {
        let extents: Vec<i64> = self.shard.iter().map(Iter::extent).collect();
        let digits = unflatten(&extents, x)?;
        let mut out = Coordinate::zero();
        for (d, it) in digits.iter().zip(&self.shard) {
            let v = out.get(it.axis()) + d * it.stride();
            out.set(it.axis().clone(), v);
        }
        Ok(out)
    }

    /// All coordinates produced for logical index `x`: one per replica
    /// combination, each `base + replica + offset`.
    pub fn eval(&self, x: i64) -> Result<CoordSet, LayoutError> {
        let base = self
            .shard_coord(x)?
            .checked_add(&self.offset)
            .expect("bounded by construction");
        if self.replica.is_empty() {
            return Ok(CoordSet::singleton(base));
        }
        let mut coords = Vec::with_capacity(self.replica_size() as usize);
        let mut digits = vec![0i64; self.replica.len()];
        loop {
            let mut c = base.clone();
            for (d, it) in digits.iter().zip(&self.replica) {
                let v = c.get(it.axis()) + d * it.stride();
                c.set(it.axis().clone(), v);
            }
            coords.push(c);
            // odometer over replica digits, last fastest
            let mut pos = self.replica.len();
            loop {
                if pos == 0 {
                    return Ok(CoordSet::new(coords));
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < self.replica[pos].extent() {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }

    /// Evaluates at a multi-index under an admitted shape.
    pub fn eval_shaped(&self, shape: &Shape, index: &[i64]) -> Result<CoordSet, LayoutError> {
        if !self.admits(shape) {
            return Err(LayoutError::NotAdmitted {
                shape_size: shape.size(),
                domain: self.domain_size(),
            });
        }
        self.eval(flatten(shape, index)?)
    }

    /// Axis-wise span: per axis, `1 + Σ |s|·(e−1)` over shard and replica
    /// iters on that axis. Axes the layout never touches span 1 and are
    /// left out of the sparse result.
    pub fn span(&self) -> Coordinate {
        let mut out = Coordinate::zero();
        for it in self.shard.iter().chain(&self.replica) {
            let v = out.get(it.axis()) + it.reach().expect("bounded by construction");
            out.set(it.axis().clone(), v);
        }
        let mut span = Coordinate::zero();
        for (axis, reach) in out.entries() {
            if reach > 0 {
                span.set(axis.clone(), reach + 1);
            }
        }
        span
    }
}

/// Reads a span vector component: absent axes span 1.
pub fn span_factor(span: &Coordinate, axis: &AxisName) -> i64 {
    match span.get(axis) {
        0 => 1,
        v => v,
    }
}

fn write_stride_list(f: &mut fmt::Formatter<'_>, iters: &[Iter]) -> fmt::Result {
    write!(f, "(")?;
    for (i, it) in iters.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{}", it.extent())?;
    }
    write!(f, "):(")?;
    for (i, it) in iters.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{}", it.stride())?;
        if !it.axis().is_default() {
            write!(f, "@{}", it.axis())?;
        }
    }
    write!(f, ")")
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_stride_list(f, &self.shard)?;
        if !self.replica.is_empty() {
            write!(f, " + [")?;
            write_stride_list(f, &self.replica)?;
            write!(f, "]")?;
        }
        for (axis, v) in self.offset.entries() {
            write!(f, " + {v}@{axis}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::axis::axis;

    fn it(e: i64, s: i64, a: &str) -> Iter {
        Iter::new(e, s, axis(a)).unwrap()
    }

    fn shape(dims: &[i64]) -> Shape {
        Shape::new(dims.to_vec()).unwrap()
    }

    /// The register-tile layout used across the test suite: an 8x16 tile
    /// sharded over lanes, a warp pair, and registers, replicated once
    /// across warps with an offset of 5 warps.
    pub(crate) fn register_tile() -> Layout {
        Layout::new(
            vec![
                it(8, 4, "lane"),
                it(2, 1, "warp"),
                it(4, 1, "lane"),
                it(2, 1, "reg"),
            ],
            vec![it(2, 4, "warp")],
            Coordinate::of(axis("warp"), 5),
        )
        .unwrap()
    }

    #[test]
    fn flatten_examples() {
        assert_eq!(flatten(&shape(&[16, 24]), &[0, 0]).unwrap(), 0);
        assert_eq!(flatten(&shape(&[16, 24]), &[1, 0]).unwrap(), 24);
        // enumeration oracle: row-major order visits indices in flat order
        let s = shape(&[2, 3, 4]);
        let mut flat = 0;
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..4 {
                    assert_eq!(flatten(&s, &[i, j, k]).unwrap(), flat);
                    flat += 1;
                }
            }
        }
        assert_eq!(flatten(&s, &[1, 2, 3]).unwrap(), 23);
        assert!(flatten(&s, &[2, 0, 0]).is_err());
    }

    #[test]
    fn unflatten_examples() {
        assert_eq!(unflatten(&[2, 4], 0).unwrap(), vec![0, 0]);
        assert_eq!(unflatten(&[2, 4], 5).unwrap(), vec![1, 1]);
        assert_eq!(unflatten(&[24, 24], 25).unwrap(), vec![1, 1]);
        assert!(unflatten(&[2, 4], 8).is_err());
        assert!(unflatten(&[2, 4], -1).is_err());
    }

    #[test]
    fn eval_register_tile_origin() {
        let l = register_tile();
        let got = l.eval(0).unwrap();
        let want = CoordSet::new(vec![
            Coordinate::of(axis("warp"), 5),
            Coordinate::of(axis("warp"), 9),
        ]);
        assert_eq!(got, want);
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn eval_unit_and_column_major() {
        let unit = Layout::unit();
        assert_eq!(
            unit.eval(0).unwrap(),
            CoordSet::singleton(Coordinate::zero())
        );

        let l = Layout::strided(&[(24, 1), (24, 24)], axis("m")).unwrap();
        for (x, want) in [(1, 24), (2, 48), (3, 72)] {
            let got = l.eval(x).unwrap();
            assert_eq!(got, CoordSet::singleton(Coordinate::of(axis("m"), want)));
        }
    }

    #[test]
    fn eval_shaped_fully_sharded() {
        let l = Layout::new(
            vec![
                it(2, 1, "gpuid"),
                it(32, 128, "m"),
                it(2, 2, "gpuid"),
                it(64, 1, "m"),
            ],
            vec![],
            Coordinate::zero(),
        )
        .unwrap();
        let s = shape(&[64, 128]);
        assert_eq!(
            l.eval_shaped(&s, &[0, 64]).unwrap(),
            CoordSet::singleton(Coordinate::of(axis("gpuid"), 2))
        );
        assert_eq!(
            l.eval_shaped(&s, &[32, 0]).unwrap(),
            CoordSet::singleton(Coordinate::of(axis("gpuid"), 1))
        );
        // rank-1 shape is the identity flatten
        let s1 = shape(&[l.domain_size()]);
        assert_eq!(l.eval_shaped(&s1, &[64]).unwrap(), l.eval(64).unwrap());
    }

    #[test]
    fn admits_checks_products() {
        let l = Layout::strided(&[(16, 24), (24, 1)], axis("m")).unwrap();
        assert!(l.admits(&shape(&[16, 24])));
        assert!(!l.admits(&shape(&[16, 25])));
        assert!(Layout::unit().admits(&shape(&[1, 1, 1])));
    }

    #[test]
    fn span_examples() {
        let b = Layout::strided(&[(2, 4), (2, 1)], axis("m")).unwrap();
        assert_eq!(b.span(), Coordinate::of(axis("m"), 6));

        let single = Layout::strided(&[(8, 1)], axis("m")).unwrap();
        assert_eq!(single.span(), Coordinate::of(axis("m"), 8));

        let unit = Layout::unit();
        assert!(unit.span().is_zero());

        let tile = register_tile();
        let span = tile.span();
        assert_eq!(span.get(&axis("lane")), 32);
        assert_eq!(span.get(&axis("warp")), 6);
        assert_eq!(span.get(&axis("reg")), 2);
    }

    #[test]
    fn display_matches_grammar() {
        let l = register_tile();
        assert_eq!(
            l.to_string(),
            "(8,2,4,2):(4@lane,1@warp,1@lane,1@reg) + [(2):(4@warp)] + 5@warp"
        );
        let m = Layout::strided(&[(2, 8), (8, 1)], axis("m")).unwrap();
        assert_eq!(m.to_string(), "(2,8):(8,1)");
    }

    #[test]
    fn replica_order_does_not_matter_for_equality() {
        let a = Layout::new(
            vec![it(4, 1, "m")],
            vec![it(2, 4, "warp"), it(3, 2, "lane")],
            Coordinate::zero(),
        )
        .unwrap();
        let b = Layout::new(
            vec![it(4, 1, "m")],
            vec![it(3, 2, "lane"), it(2, 4, "warp")],
            Coordinate::zero(),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Layout>();
        assert_send_sync::<Coordinate>();
        assert_send_sync::<CoordSet>();
        assert_send_sync::<Shape>();
        assert_send_sync::<Region>();
        assert_send_sync::<Iter>();
    }

    #[test]
    fn invalid_construction() {
        assert!(Iter::new(0, 1, axis("m")).is_err());
        assert!(Iter::new(2, 0, axis("m")).is_err());
        assert!(Layout::new(vec![], vec![], Coordinate::zero()).is_err());
        assert!(Shape::new(vec![]).is_err());
        assert!(Shape::new(vec![3, 0]).is_err());
        // reach overflow is rejected at construction
        assert!(Layout::strided(&[(i64::MAX, 2)], axis("m")).is_err());
    }
}
