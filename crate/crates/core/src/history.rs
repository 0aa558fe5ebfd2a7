//! Disintegration, generation and histories.
//!
//! `J` disintegrates `C` when `C = C_J × C_{I∖J}`. The sets disintegrating a
//! fixed `C` are closed under union, intersection and complement, so they are
//! exactly the unions of the blocks of one partition of `I`. [`Conditioning`]
//! computes that partition once per event. A set generates `X` given `C` iff
//! it is a union of blocks on which `U_J` determines `X`; because derivation
//! is monotone in `J` and generation is closed under intersection, dropping
//! blocks greedily lands on the history. [`history_by_enumeration`] is the
//! literal definition (intersection over all `2^|I|` subsets) and is kept as
//! the reference the fast path is tested against.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use rand::Rng;

use crate::distribution::{
    sample_factorizing, sample_vector, Distribution, FactorizingDistribution,
};
use crate::space::{same_space, Event, FactorId, FactoredSpace};
use crate::subset::IndexSubset;
use crate::variable::{is_derived, Variable};
use crate::{Error, Result};

/// Largest `|I|` accepted by the history functions.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

fn check_cap(space: &FactoredSpace, cap: usize) -> Result<()> {
    if space.num_factors() > cap {
        Err(Error::Capacity {
            what: "number of factors",
            requested: space.num_factors(),
            limit: cap,
        })
    } else {
        Ok(())
    }
}

fn distinct(mut codes: Vec<usize>) -> usize {
    codes.sort_unstable();
    codes.dedup();
    codes.len()
}

/// `|S| = |S_A| · |S_{U∖A}|` for a duplicate-free set of codes whose
/// digits outside `universe` are zero.
fn splits(space: &FactoredSpace, codes: &[usize], a: IndexSubset, universe: IndexSubset) -> bool {
    if codes.is_empty() {
        return true;
    }
    let rest = universe.difference(a);
    let na = distinct(codes.iter().map(|&c| space.mask_index(c, a)).collect());
    let nr = distinct(codes.iter().map(|&c| space.mask_index(c, rest)).collect());
    na * nr == codes.len()
}

/// Whether `J` disintegrates `C`. Always true for `C = ∅`, `J = ∅` and `J = I`.
pub fn disintegrates(j: IndexSubset, c: &Event) -> Result<bool> {
    let space = c.space();
    space.check_subset(j)?;
    let codes: Vec<usize> = c.indices().collect();
    Ok(splits(space, &codes, j, space.all_factors()))
}

/// `J` generates `X` given `C`: `J` disintegrates `C` and `U_J ▷_C X`.
pub fn generates(j: IndexSubset, x: &Variable, c: &Event) -> Result<bool> {
    x.check_same(c.space())?;
    if !disintegrates(j, c)? {
        return Ok(false);
    }
    let uj = Variable::background_set(c.space(), j)?;
    is_derived(&uj, x, c)
}

/// An event `C` together with its finest disintegrating partition of `I`.
///
/// Build one per conditioning event and reuse it for every variable whose
/// history given `C` is needed.
#[derive(Clone, Debug)]
pub struct Conditioning {
    space: Arc<FactoredSpace>,
    points: Vec<usize>,
    /// `digits[i][t]`: digit `i` of point `t`, scaled by its stride.
    digits: Vec<Vec<usize>>,
    blocks: Vec<IndexSubset>,
    scratch: RefCell<Scratch>,
}

/// Dense marks over point codes, reset in O(1) by bumping a generation.
#[derive(Clone, Debug)]
struct Scratch {
    stamp: Vec<u32>,
    value: Vec<u32>,
    generation: u32,
    codes: Vec<usize>,
}

impl Scratch {
    fn new(size: usize) -> Self {
        Scratch {
            stamp: vec![0; size],
            value: vec![0; size],
            generation: 0,
            codes: Vec::new(),
        }
    }

    fn bump(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
    }

    /// Fills `codes` with `Σ_{i∈j} digits[i]`.
    fn load(&mut self, digits: &[Vec<usize>], len: usize, j: IndexSubset) {
        self.codes.clear();
        self.codes.resize(len, 0);
        for i in j.iter() {
            for (c, d) in self.codes.iter_mut().zip(&digits[i]) {
                *c += d;
            }
        }
    }

    fn distinct(&mut self) -> usize {
        self.bump();
        let g = self.generation;
        let mut n = 0;
        for &c in &self.codes {
            if self.stamp[c] != g {
                self.stamp[c] = g;
                n += 1;
            }
        }
        n
    }

    /// Whether equal codes always carry equal values.
    fn functional(&mut self, values: impl Fn(usize) -> u32) -> bool {
        self.bump();
        let g = self.generation;
        for (t, &c) in self.codes.iter().enumerate() {
            let v = values(t);
            if self.stamp[c] != g {
                self.stamp[c] = g;
                self.value[c] = v;
            } else if self.value[c] != v {
                return false;
            }
        }
        true
    }
}

impl Conditioning {
    pub fn new(c: &Event) -> Self {
        let space = c.space().clone();
        let points: Vec<usize> = c.indices().collect();
        let digits: Vec<Vec<usize>> = (0..space.num_factors())
            .map(|i| {
                let stride = space.stride(i);
                points.iter().map(|&p| space.coord(p, i) * stride).collect()
            })
            .collect();
        let mut scratch = Scratch::new(space.total_size());
        let blocks = if points.is_empty() {
            space
                .all_factors()
                .iter()
                .map(IndexSubset::singleton)
                .collect()
        } else {
            finest_partition(&space, &digits, points.len(), &mut scratch)
        };
        Conditioning {
            space,
            points,
            digits,
            blocks,
            scratch: RefCell::new(scratch),
        }
    }

    pub fn space(&self) -> &Arc<FactoredSpace> {
        &self.space
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Atoms of the algebra of disintegrating sets.
    pub fn blocks(&self) -> &[IndexSubset] {
        &self.blocks
    }

    pub fn disintegrates(&self, j: IndexSubset) -> bool {
        self.blocks
            .iter()
            .all(|b| b.is_subset(j) || b.is_disjoint(j))
    }

    /// `h(X | C)`; empty when `C` is.
    pub fn history(&self, x: &Variable) -> Result<IndexSubset> {
        x.check_same(&self.space)?;
        if self.points.is_empty() {
            return Ok(IndexSubset::EMPTY);
        }
        let mut scratch = self.scratch.borrow_mut();
        let table = x.table();
        let mut j = self.space.all_factors();
        for &b in &self.blocks {
            let cand = j.difference(b);
            scratch.load(&self.digits, self.points.len(), cand);
            if scratch.functional(|t| table[self.points[t]]) {
                j = cand;
            }
        }
        Ok(j)
    }
}

/// Finest partition of `I` into blocks that each disintegrate the set.
///
/// Works factor by factor on the projections onto `{0..k}`: the finest
/// partition for `{0..=k}` keeps every earlier block except those merged
/// with `k`, and the smallest mergeable union is found greedily since valid
/// unions are closed under intersection and supersets. A set `A` of the
/// prefix splits the projection `S` when `|S| = |S_A|·|S_{rest}|`.
fn finest_partition(
    space: &FactoredSpace,
    digits: &[Vec<usize>],
    len: usize,
    scratch: &mut Scratch,
) -> Vec<IndexSubset> {
    let mut blocks: Vec<IndexSubset> = Vec::new();
    for k in 0..space.num_factors() {
        if space.cardinality(k) == 1 {
            blocks.push(IndexSubset::singleton(k));
            continue;
        }
        let universe = IndexSubset::full(k + 1);
        scratch.load(digits, len, universe);
        let size = scratch.distinct();
        if size == space.stride(k + 1) {
            // full product so far
            blocks.push(IndexSubset::singleton(k));
            continue;
        }
        let mut merged = IndexSubset::full(k);
        for &b in &blocks {
            let cand = merged.difference(b);
            let a = cand.with(k);
            scratch.load(digits, len, a);
            let na = scratch.distinct();
            scratch.load(digits, len, universe.difference(a));
            let nr = scratch.distinct();
            if na * nr == size {
                merged = cand;
            }
        }
        blocks.retain(|b| b.is_disjoint(merged));
        blocks.push(merged.with(k));
    }
    blocks.sort_unstable();
    blocks
}

/// `h(X | C)`: the smallest set of factors generating `X` given `C`.
pub fn history(x: &Variable, c: &Event) -> Result<IndexSubset> {
    history_with_cap(x, c, DEFAULT_ENUMERATION_CAP)
}

pub fn history_with_cap(x: &Variable, c: &Event, cap: usize) -> Result<IndexSubset> {
    x.check_same(c.space())?;
    check_cap(c.space(), cap)?;
    Conditioning::new(c).history(x)
}

/// `h(X) = h(X | Ω)`.
pub fn unconditional_history(x: &Variable) -> Result<IndexSubset> {
    history(x, &Event::full(x.space()))
}

/// The intersection of all generating subsets, by enumerating every
/// `J ⊆ I`. Exponential; meant as a reference implementation.
pub fn history_by_enumeration(x: &Variable, c: &Event) -> Result<IndexSubset> {
    x.check_same(c.space())?;
    let space = c.space();
    check_cap(space, DEFAULT_ENUMERATION_CAP)?;
    let n = space.num_factors();
    let mut acc = space.all_factors();
    for j in IndexSubset::all_subsets(n) {
        if acc.is_subset(j) {
            // cannot shrink the intersection
            continue;
        }
        if generates(j, x, c)? {
            acc = acc.intersection(j);
        }
    }
    Ok(acc)
}

/// `h(X | z)` where `z` stands for the event `{Z = z}`.
pub fn history_given_value(x: &Variable, z: &Variable, value: u32) -> Result<IndexSubset> {
    history(x, &z.fiber(value)?)
}

/// `h(A | C)` for an event `A`, i.e. the history of its indicator.
pub fn event_history(a: &Event, c: &Event) -> Result<IndexSubset> {
    history(&Variable::indicator(a), c)
}

/// Factors irrelevant to `A` given `C`, computed as `I ∖ h(A | C)`.
pub fn cohistory(a: &Event, c: &Event) -> Result<IndexSubset> {
    if !same_space(a.space(), c.space()) {
        return Err(Error::SpaceMismatch);
    }
    Ok(event_history(a, c)?.complement(c.space().num_factors()))
}

/// Searches for factorizing `(P, Q)` that agree on every factor except `i`,
/// give `C` positive probability, and disagree on `P(A | C)`.
///
/// Such a pair exists exactly when `i` belongs to `h(A | C)`. Both
/// distributions are strictly positive with denominators at most 64.
pub fn relevance_witness<R: Rng + ?Sized>(
    i: FactorId,
    a: &Event,
    c: &Event,
    trials: usize,
    rng: &mut R,
) -> Result<Option<(FactorizingDistribution, FactorizingDistribution)>> {
    let space = c.space();
    if !same_space(a.space(), space) {
        return Err(Error::SpaceMismatch);
    }
    space.check_factor(i.0)?;
    if c.is_empty() || space.cardinality(i.0) == 1 {
        return Ok(None);
    }
    let ac = a.intersection(c)?;
    for _ in 0..trials {
        let p = sample_factorizing(space, rng, crate::distribution::DEFAULT_DENOMINATOR_BOUND);
        let alt = sample_vector(
            space.cardinality(i.0),
            rng,
            crate::distribution::DEFAULT_DENOMINATOR_BOUND,
        );
        if alt.as_slice() == p.factor(i.0) {
            continue;
        }
        let q = p.with_factor(i.0, alt)?;
        // P(A∩C)·Q(C) ≠ Q(A∩C)·P(C)
        let lhs = p.prob_event(&ac)? * q.prob_event(c)?;
        let rhs = q.prob_event(&ac)? * p.prob_event(c)?;
        if lhs != rhs {
            return Ok(Some((p, q)));
        }
    }
    Ok(None)
}
