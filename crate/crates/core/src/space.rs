//! Finite factored spaces, the canonical point encoding, events and the
//! operations on indexed families (projection, merge, Cartesian product).

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::bitset::BitSet;
use crate::subset::IndexSubset;
use crate::{Error, Result};

/// Largest number of points a space may have unless a different cap is given.
pub const DEFAULT_MAX_POINTS: usize = 1 << 24;

/// Index sets are stored as 64-bit masks.
pub const MAX_FACTORS: usize = 64;

/// Dense index of a factor in its space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Factor {
    label: String,
    cardinality: usize,
}

/// `Ω = ⨉ᵢ Ωᵢ` with `Ωᵢ = {0, .., cardᵢ - 1}`.
///
/// Points are encoded as `Σ coordᵢ · strideᵢ` where factor 0 varies fastest.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredSpace {
    factors: Vec<Factor>,
    strides: Vec<usize>,
    total: usize,
}

impl FactoredSpace {
    pub fn new<L, It>(factors: It) -> Result<Self>
    where
        L: Into<String>,
        It: IntoIterator<Item = (L, usize)>,
    {
        Self::with_cap(factors, DEFAULT_MAX_POINTS)
    }

    pub fn with_cap<L, It>(factors: It, max_points: usize) -> Result<Self>
    where
        L: Into<String>,
        It: IntoIterator<Item = (L, usize)>,
    {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, cardinality)| Factor {
                label: label.into(),
                cardinality,
            })
            .collect();
        if factors.len() > MAX_FACTORS {
            return Err(Error::Capacity {
                what: "number of factors",
                requested: factors.len(),
                limit: MAX_FACTORS,
            });
        }
        let mut labels = BTreeSet::new();
        for f in &factors {
            if f.cardinality == 0 {
                return Err(Error::InvalidSpace(format!(
                    "factor '{}' has cardinality 0",
                    f.label
                )));
            }
            if !labels.insert(f.label.as_str()) {
                return Err(Error::InvalidSpace(format!(
                    "duplicate factor label '{}'",
                    f.label
                )));
            }
        }
        let mut strides = Vec::with_capacity(factors.len() + 1);
        let mut total: usize = 1;
        for f in &factors {
            strides.push(total);
            total = total
                .checked_mul(f.cardinality)
                .filter(|&t| t <= max_points)
                .ok_or(Error::Capacity {
                    what: "number of points",
                    requested: usize::MAX,
                    limit: max_points,
                })?;
        }
        strides.push(total);
        Ok(FactoredSpace {
            factors,
            strides,
            total,
        })
    }

    /// Space with labels `u0, u1, ...`.
    pub fn from_cardinalities(cards: &[usize]) -> Result<Self> {
        Self::new(cards.iter().enumerate().map(|(i, &c)| (format!("u{i}"), c)))
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn total_size(&self) -> usize {
        self.total
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.factors[i].cardinality
    }

    pub fn cardinalities(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.iter().map(|f| f.cardinality)
    }

    pub fn label(&self, i: usize) -> &str {
        &self.factors[i].label
    }

    pub fn factor_by_label(&self, label: &str) -> Option<FactorId> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .map(FactorId)
    }

    /// Stride of factor `i`; `stride(num_factors())` is the total size.
    #[inline]
    pub fn stride(&self, i: usize) -> usize {
        self.strides[i]
    }

    /// The full index set `I`.
    pub fn all_factors(&self) -> IndexSubset {
        IndexSubset::full(self.factors.len())
    }

    pub(crate) fn check_subset(&self, j: IndexSubset) -> Result<()> {
        match j.difference(self.all_factors()).iter().next() {
            Some(i) => Err(Error::UnknownFactor(i)),
            None => Ok(()),
        }
    }

    pub(crate) fn check_factor(&self, i: usize) -> Result<()> {
        if i < self.factors.len() {
            Ok(())
        } else {
            Err(Error::UnknownFactor(i))
        }
    }

    /// Coordinate of factor `i` in the point with index `idx`.
    #[inline]
    pub fn coord(&self, idx: usize, i: usize) -> usize {
        (idx / self.strides[i]) % self.factors[i].cardinality
    }

    pub fn encode(&self, p: &Point) -> Result<usize> {
        self.encode_coords(&p.0)
    }

    pub fn encode_coords(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.factors.len() {
            return Err(Error::PointArity {
                expected: self.factors.len(),
                got: coords.len(),
            });
        }
        let mut idx = 0;
        for (i, (&c, f)) in coords.iter().zip(&self.factors).enumerate() {
            if c >= f.cardinality {
                return Err(Error::InvalidPoint {
                    factor: i,
                    value: c,
                    cardinality: f.cardinality,
                });
            }
            idx += c * self.strides[i];
        }
        Ok(idx)
    }

    pub fn decode(&self, idx: usize) -> Point {
        debug_assert!(idx < self.total);
        Point(
            (0..self.factors.len())
                .map(|i| self.coord(idx, i))
                .collect(),
        )
    }

    /// Code of the projection of point `idx` onto `j`, in the canonical
    /// encoding of [`FactoredSpace::subspace`]`(j)`.
    pub fn project_index(&self, idx: usize, j: IndexSubset) -> usize {
        let mut code = 0;
        let mut stride = 1;
        for i in j.iter() {
            code += self.coord(idx, i) * stride;
            stride *= self.factors[i].cardinality;
        }
        code
    }

    /// Same as [`FactoredSpace::project_index`] but keeps the digits at their
    /// positions in the full encoding. Equal projections give equal codes.
    #[inline]
    pub(crate) fn mask_index(&self, idx: usize, j: IndexSubset) -> usize {
        j.iter().map(|i| self.coord(idx, i) * self.strides[i]).sum()
    }

    /// `Ω_J` as a space of its own, factors in increasing id order.
    pub fn subspace(&self, j: IndexSubset) -> Result<FactoredSpace> {
        self.check_subset(j)?;
        Self::with_cap(
            j.iter()
                .map(|i| (self.factors[i].label.clone(), self.factors[i].cardinality)),
            usize::MAX,
        )
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.total).map(|idx| self.decode(idx))
    }

    /// `{c1,c2}` style rendering of an index subset with factor labels.
    pub fn format_subset(&self, j: IndexSubset) -> String {
        let labels: Vec<&str> = j.iter().map(|i| self.label(i)).collect();
        format!("{{{}}}", labels.join(","))
    }
}

/// A full assignment `ω = (ωᵢ)ᵢ∈I`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub Vec<usize>);

impl Point {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn as_partial(&self) -> PartialPoint {
        PartialPoint {
            domain: IndexSubset::full(self.0.len()),
            coords: self.0.clone(),
        }
    }

    /// `ω_J`.
    pub fn project(&self, j: IndexSubset) -> Result<PartialPoint> {
        self.as_partial().project(j)
    }
}

/// An indexed family over a subset `J` of the factors: an element of `Ω_J`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialPoint {
    domain: IndexSubset,
    /// Values for the domain's indices in increasing order.
    coords: Vec<usize>,
}

impl PartialPoint {
    pub fn empty() -> Self {
        PartialPoint {
            domain: IndexSubset::EMPTY,
            coords: Vec::new(),
        }
    }

    pub fn new<It: IntoIterator<Item = (usize, usize)>>(entries: It) -> Result<Self> {
        let mut entries: Vec<(usize, usize)> = entries.into_iter().collect();
        entries.sort_unstable();
        let mut domain = IndexSubset::EMPTY;
        for &(i, _) in &entries {
            if i >= MAX_FACTORS {
                return Err(Error::UnknownFactor(i));
            }
            if domain.contains(i) {
                return Err(Error::Overlap);
            }
            domain = domain.with(i);
        }
        Ok(PartialPoint {
            domain,
            coords: entries.into_iter().map(|(_, v)| v).collect(),
        })
    }

    pub fn domain(&self) -> IndexSubset {
        self.domain
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        if !self.domain.contains(i) {
            return None;
        }
        let rank = (self.domain.bits() & ((1u64 << i) - 1)).count_ones() as usize;
        Some(self.coords[rank])
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.domain.iter().zip(self.coords.iter().copied())
    }

    pub fn project(&self, j: IndexSubset) -> Result<PartialPoint> {
        if !j.is_subset(self.domain) {
            return Err(Error::Domain);
        }
        Ok(PartialPoint {
            domain: j,
            coords: self
                .entries()
                .filter(|(i, _)| j.contains(*i))
                .map(|(_, v)| v)
                .collect(),
        })
    }

    /// `a ⊔ b`; the domains must be disjoint.
    pub fn merge(&self, other: &PartialPoint) -> Result<PartialPoint> {
        if !self.domain.is_disjoint(other.domain) {
            return Err(Error::Overlap);
        }
        PartialPoint::new(self.entries().chain(other.entries()))
    }

    /// Converts a family over all of `I` back into a point.
    pub fn to_point(&self, space: &FactoredSpace) -> Result<Point> {
        if self.domain != space.all_factors() {
            return Err(Error::Domain);
        }
        let p = Point(self.coords.clone());
        space.encode(&p)?;
        Ok(p)
    }
}

impl fmt::Display for PartialPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, (i, v)) in self.entries().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} at {i}")?;
        }
        f.write_str(")")
    }
}

/// A set of indexed families sharing the domain `J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySet {
    domain: IndexSubset,
    members: BTreeSet<PartialPoint>,
}

impl FamilySet {
    pub fn new(domain: IndexSubset) -> Self {
        FamilySet {
            domain,
            members: BTreeSet::new(),
        }
    }

    pub fn from_members<It: IntoIterator<Item = PartialPoint>>(
        domain: IndexSubset,
        members: It,
    ) -> Result<Self> {
        let mut s = FamilySet::new(domain);
        for m in members {
            s.insert(m)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, p: PartialPoint) -> Result<bool> {
        if p.domain != self.domain {
            return Err(Error::Domain);
        }
        Ok(self.members.insert(p))
    }

    pub fn domain(&self) -> IndexSubset {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: &PartialPoint) -> bool {
        self.members.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PartialPoint> {
        self.members.iter()
    }

    /// `B × C = {b ⊔ c}`.
    pub fn cartesian(&self, other: &FamilySet) -> Result<FamilySet> {
        if !self.domain.is_disjoint(other.domain) {
            return Err(Error::Overlap);
        }
        let mut out = FamilySet::new(self.domain.union(other.domain));
        for b in &self.members {
            for c in &other.members {
                out.members.insert(b.merge(c)?);
            }
        }
        Ok(out)
    }

    /// Projection of every member onto `j`, duplicates collapsed.
    pub fn project(&self, j: IndexSubset) -> Result<FamilySet> {
        if !j.is_subset(self.domain) {
            return Err(Error::Domain);
        }
        let mut out = FamilySet::new(j);
        for m in &self.members {
            out.members.insert(m.project(j)?);
        }
        Ok(out)
    }
}

/// A subset of `Ω`, as a bitset over the canonical encoding.
#[derive(Clone, PartialEq, Eq)]
pub struct Event {
    space: Arc<FactoredSpace>,
    bits: BitSet,
}

impl Event {
    pub fn empty(space: &Arc<FactoredSpace>) -> Self {
        Event {
            space: space.clone(),
            bits: BitSet::new(space.total_size()),
        }
    }

    /// The whole sample space `Ω`.
    pub fn full(space: &Arc<FactoredSpace>) -> Self {
        Event {
            space: space.clone(),
            bits: BitSet::full(space.total_size()),
        }
    }

    pub fn from_indices<It: IntoIterator<Item = usize>>(
        space: &Arc<FactoredSpace>,
        indices: It,
    ) -> Result<Self> {
        let mut e = Self::empty(space);
        for idx in indices {
            if idx >= space.total_size() {
                return Err(Error::InvalidPoint {
                    factor: 0,
                    value: idx,
                    cardinality: space.total_size(),
                });
            }
            e.bits.set(idx, true);
        }
        Ok(e)
    }

    pub fn from_points<'a, It: IntoIterator<Item = &'a Point>>(
        space: &Arc<FactoredSpace>,
        points: It,
    ) -> Result<Self> {
        let mut e = Self::empty(space);
        for p in points {
            e.bits.set(space.encode(p)?, true);
        }
        Ok(e)
    }

    pub fn from_predicate(space: &Arc<FactoredSpace>, f: impl Fn(usize) -> bool) -> Self {
        let mut e = Self::empty(space);
        for idx in 0..space.total_size() {
            if f(idx) {
                e.bits.set(idx, true);
            }
        }
        e
    }

    pub fn space(&self) -> &Arc<FactoredSpace> {
        &self.space
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.bits.get(idx)
    }

    pub fn contains_point(&self, p: &Point) -> Result<bool> {
        Ok(self.bits.get(self.space.encode(p)?))
    }

    pub fn insert(&mut self, idx: usize) {
        self.bits.set(idx, true);
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.ones().next().is_none()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.bits.len()
    }

    /// Member indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.bits.ones().map(|idx| self.space.decode(idx))
    }

    fn check_same(&self, other: &Event) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn intersection(&self, other: &Event) -> Result<Event> {
        self.check_same(other)?;
        Ok(Event {
            space: self.space.clone(),
            bits: self.bits.zip_with(&other.bits, |a, b| a & b),
        })
    }

    pub fn union(&self, other: &Event) -> Result<Event> {
        self.check_same(other)?;
        Ok(Event {
            space: self.space.clone(),
            bits: self.bits.zip_with(&other.bits, |a, b| a | b),
        })
    }

    pub fn complement(&self) -> Event {
        Event {
            space: self.space.clone(),
            bits: self.bits.not(),
        }
    }

    /// `proj_J(A)`. Empty when `A` is empty, even for `J = ∅`.
    pub fn project(&self, j: IndexSubset) -> Result<FamilySet> {
        self.space.check_subset(j)?;
        let mut out = FamilySet::new(j);
        for p in self.points() {
            out.members.insert(p.project(j)?);
        }
        Ok(out)
    }

    /// The event made of the full-domain members of `set`.
    pub fn from_family_set(space: &Arc<FactoredSpace>, set: &FamilySet) -> Result<Event> {
        if set.domain() != space.all_factors() {
            return Err(Error::Domain);
        }
        let mut e = Self::empty(space);
        for m in set.iter() {
            e.bits.set(space.encode(&m.to_point(space)?)?, true);
        }
        Ok(e)
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

pub(crate) fn same_space(a: &Arc<FactoredSpace>, b: &Arc<FactoredSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Parses `"2x3x2"` into cardinalities.
pub fn parse_shape(shape: &str) -> Result<Vec<usize>> {
    shape
        .split(['x', 'X'])
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidSpace(format!("bad shape component '{s}'")))
        })
        .collect()
}

impl fmt::Display for FactoredSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| format!("{}:{}", x.label, x.cardinality))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}
