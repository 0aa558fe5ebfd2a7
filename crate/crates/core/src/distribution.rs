//! Exact distributions on factored spaces and conditional independence.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::index;
use rand::Rng;

use crate::relations::structurally_independent;
use crate::space::{same_space, Event, FactoredSpace, Point};
use crate::subset::IndexSubset;
use crate::variable::Variable;
use crate::weights::Weights;
use crate::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Default denominator bound for sampled distributions.
pub const DEFAULT_DENOMINATOR_BOUND: u64 = 64;

/// Default number of sampled distributions per completeness search.
pub const DEFAULT_TRIALS: usize = 200;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn check_vector(v: &[Rational], what: &str) -> Result<()> {
    if let Some(p) = v.iter().find(|p| p.is_negative()) {
        return Err(Error::InvalidDistribution(format!(
            "{what} has negative entry {p}"
        )));
    }
    let total: Rational = v.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {total}, not 1"
        )));
    }
    Ok(())
}

/// Point probabilities of a distribution scaled to integers.
///
/// Computing this once and asking many independence queries avoids
/// redoing the rational arithmetic.
pub struct PointWeights {
    space: Arc<FactoredSpace>,
    inner: Weights,
}

impl PointWeights {
    /// `A ⊥⊥ B | C`; holds by convention when `P(C) = 0`.
    pub fn cond_indep(&self, a: &Event, b: &Event, c: &Event) -> Result<bool> {
        for e in [a, b, c] {
            if !same_space(&self.space, e.space()) {
                return Err(Error::SpaceMismatch);
            }
        }
        Ok(self.inner.event_ci(a, b, c))
    }

    /// `X ⊥⊥ Y | Z`, checked on every value triple; `Z = None` is the
    /// unconditional case.
    pub fn cond_indep_vars(
        &self,
        x: &Variable,
        y: &Variable,
        z: Option<&Variable>,
    ) -> Result<IndependenceVerdict> {
        x.check_same(&self.space)?;
        y.check_same(&self.space)?;
        if let Some(z) = z {
            z.check_same(&self.space)?;
        }
        let witness = self
            .inner
            .vars_ci(x.table(), y.table(), z.map(|z| z.table()));
        Ok(IndependenceVerdict { witness })
    }

    #[cfg(test)]
    pub(crate) fn force_big(&self) -> PointWeights {
        PointWeights {
            space: self.space.clone(),
            inner: crate::weights::force_big(&self.inner),
        }
    }
}

pub trait Distribution {
    fn space(&self) -> &Arc<FactoredSpace>;

    fn point_prob(&self, idx: usize) -> Rational;

    fn weights(&self) -> PointWeights;

    /// `P(A) = Σ_{ω∈A} P(ω)`.
    fn prob_event(&self, a: &Event) -> Result<Rational> {
        if !same_space(self.space(), a.space()) {
            return Err(Error::SpaceMismatch);
        }
        Ok(a.indices().map(|i| self.point_prob(i)).sum())
    }

    /// `supp(P)`.
    fn support(&self) -> Event {
        Event::from_predicate(self.space(), |i| !self.point_prob(i).is_zero())
    }
}

pub fn prob_event<D: Distribution + ?Sized>(p: &D, a: &Event) -> Result<Rational> {
    p.prob_event(a)
}

/// `P(A∩C)·P(B∩C) = P(A∩B∩C)·P(C)`, exactly. True when `P(C) = 0`.
pub fn cond_indep<D: Distribution + ?Sized>(
    p: &D,
    a: &Event,
    b: &Event,
    c: &Event,
) -> Result<bool> {
    p.weights().cond_indep(a, b, c)
}

pub fn cond_indep_vars<D: Distribution + ?Sized>(
    p: &D,
    x: &Variable,
    y: &Variable,
    z: Option<&Variable>,
) -> Result<IndependenceVerdict> {
    p.weights().cond_indep_vars(x, y, z)
}

/// Outcome of a conditional-independence check on variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceVerdict {
    witness: Option<(u32, u32, u32)>,
}

impl IndependenceVerdict {
    pub fn is_independent(&self) -> bool {
        self.witness.is_none()
    }

    /// A value triple `(x, y, z)` violating the defining identity; `z` is 0
    /// for unconditional queries.
    pub fn witness(&self) -> Option<(u32, u32, u32)> {
        self.witness
    }
}

/// `P = ⨂ᵢ Pᵢ`, one exact probability vector per factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizingDistribution {
    space: Arc<FactoredSpace>,
    factors: Vec<Vec<Rational>>,
}

impl FactorizingDistribution {
    pub fn new(space: &Arc<FactoredSpace>, factors: Vec<Vec<Rational>>) -> Result<Self> {
        if factors.len() != space.num_factors() {
            return Err(Error::InvalidDistribution(format!(
                "{} factor vectors for {} factors",
                factors.len(),
                space.num_factors()
            )));
        }
        for (i, f) in factors.iter().enumerate() {
            if f.len() != space.cardinality(i) {
                return Err(Error::InvalidDistribution(format!(
                    "factor '{}' has {} entries, cardinality is {}",
                    space.label(i),
                    f.len(),
                    space.cardinality(i)
                )));
            }
            check_vector(f, &format!("factor '{}'", space.label(i)))?;
        }
        Ok(FactorizingDistribution {
            space: space.clone(),
            factors,
        })
    }

    pub fn uniform(space: &Arc<FactoredSpace>) -> Self {
        let factors = space
            .cardinalities()
            .map(|c| vec![rational(1, c as i64); c])
            .collect();
        FactorizingDistribution {
            space: space.clone(),
            factors,
        }
    }

    pub fn factor(&self, i: usize) -> &[Rational] {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[Vec<Rational>] {
        &self.factors
    }

    /// Copy with the vector of factor `i` replaced.
    pub fn with_factor(&self, i: usize, v: Vec<Rational>) -> Result<Self> {
        self.space.check_factor(i)?;
        let mut factors = self.factors.clone();
        factors[i] = v;
        Self::new(&self.space, factors)
    }

    pub fn to_general(&self) -> GeneralDistribution {
        GeneralDistribution {
            space: self.space.clone(),
            probs: (0..self.space.total_size())
                .map(|i| self.point_prob(i))
                .collect(),
        }
    }
}

impl Distribution for FactorizingDistribution {
    fn space(&self) -> &Arc<FactoredSpace> {
        &self.space
    }

    fn point_prob(&self, idx: usize) -> Rational {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, f)| &f[self.space.coord(idx, i)])
            .fold(Rational::one(), |acc, p| acc * p)
    }

    fn weights(&self) -> PointWeights {
        PointWeights {
            space: self.space.clone(),
            inner: Weights::from_factors(&self.space, &self.factors),
        }
    }
}

/// An arbitrary distribution on `Ω`, dense over the canonical encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralDistribution {
    space: Arc<FactoredSpace>,
    probs: Vec<Rational>,
}

impl GeneralDistribution {
    pub fn new(space: &Arc<FactoredSpace>, probs: Vec<Rational>) -> Result<Self> {
        if probs.len() != space.total_size() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities for {} points",
                probs.len(),
                space.total_size()
            )));
        }
        check_vector(&probs, "distribution")?;
        Ok(GeneralDistribution {
            space: space.clone(),
            probs,
        })
    }

    /// `δ_ω`.
    pub fn delta(space: &Arc<FactoredSpace>, point: &Point) -> Result<Self> {
        let idx = space.encode(point)?;
        let mut probs = vec![Rational::zero(); space.total_size()];
        probs[idx] = Rational::one();
        Ok(GeneralDistribution {
            space: space.clone(),
            probs,
        })
    }

    pub fn uniform(space: &Arc<FactoredSpace>) -> Self {
        Self::uniform_on(&Event::full(space)).expect("a space has at least one point")
    }

    /// Uniform on the members of a nonempty event.
    pub fn uniform_on(a: &Event) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::InvalidDistribution(
                "uniform on an empty event".into(),
            ));
        }
        let p = rational(1, n as i64);
        let space = a.space();
        Ok(GeneralDistribution {
            space: space.clone(),
            probs: (0..space.total_size())
                .map(|i| {
                    if a.contains(i) {
                        p.clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
        })
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    /// `P(ωᵢ)` for every value of factor `i`.
    pub fn factor_marginal(&self, i: usize) -> Result<Vec<Rational>> {
        self.space.check_factor(i)?;
        let mut out = vec![Rational::zero(); self.space.cardinality(i)];
        for (idx, p) in self.probs.iter().enumerate() {
            out[self.space.coord(idx, i)] += p;
        }
        Ok(out)
    }

    /// Whether `P(ω) = ∏ᵢ P(ωᵢ)` at every point.
    pub fn factorizes(&self) -> bool {
        let marginals: Vec<Vec<Rational>> = (0..self.space.num_factors())
            .map(|i| self.factor_marginal(i).expect("factor in range"))
            .collect();
        self.probs.iter().enumerate().all(|(idx, p)| {
            let prod = marginals
                .iter()
                .enumerate()
                .fold(Rational::one(), |acc, (i, m)| {
                    acc * &m[self.space.coord(idx, i)]
                });
            *p == prod
        })
    }

    /// The factor marginals, if the distribution factorizes.
    pub fn to_factorizing(&self) -> Option<FactorizingDistribution> {
        if !self.factorizes() {
            return None;
        }
        let factors = (0..self.space.num_factors())
            .map(|i| self.factor_marginal(i).expect("factor in range"))
            .collect();
        Some(FactorizingDistribution {
            space: self.space.clone(),
            factors,
        })
    }

    /// `P_J = P ∘ U_J⁻¹`, a distribution on `Ω_J`.
    pub fn marginal(&self, j: IndexSubset) -> Result<GeneralDistribution> {
        let sub = Arc::new(self.space.subspace(j)?);
        let mut probs = vec![Rational::zero(); sub.total_size()];
        for (idx, p) in self.probs.iter().enumerate() {
            probs[self.space.project_index(idx, j)] += p;
        }
        Ok(GeneralDistribution { space: sub, probs })
    }

    /// Push-forward through `X`, indexed by value id.
    pub fn push_forward(&self, x: &Variable) -> Result<Vec<Rational>> {
        x.check_same(&self.space)?;
        let mut out = vec![Rational::zero(); x.num_values() as usize];
        for (idx, p) in self.probs.iter().enumerate() {
            out[x.value(idx) as usize] += p;
        }
        Ok(out)
    }
}

impl Distribution for GeneralDistribution {
    fn space(&self) -> &Arc<FactoredSpace> {
        &self.space
    }

    fn point_prob(&self, idx: usize) -> Rational {
        self.probs[idx].clone()
    }

    fn weights(&self) -> PointWeights {
        PointWeights {
            space: self.space.clone(),
            inner: Weights::from_points(&self.probs),
        }
    }
}

/// `P_J ⊗ P_K (α) = P_J(α_J) · P_K(α_K)` on `Ω_{J∪K}` of `parent`.
///
/// `pj` and `pk` must live on `parent.subspace(j)` and `parent.subspace(k)`.
pub fn outer(
    parent: &FactoredSpace,
    j: IndexSubset,
    pj: &GeneralDistribution,
    k: IndexSubset,
    pk: &GeneralDistribution,
) -> Result<GeneralDistribution> {
    if !j.is_disjoint(k) {
        return Err(Error::Overlap);
    }
    let sj = parent.subspace(j)?;
    let sk = parent.subspace(k)?;
    if *pj.space != sj || *pk.space != sk {
        return Err(Error::SpaceMismatch);
    }
    let jk = j.union(k);
    let target = Arc::new(parent.subspace(jk)?);
    // factor positions of J and K inside Ω_{J∪K}
    let pos_j = IndexSubset::from_indices(
        jk.iter()
            .enumerate()
            .filter(|(_, i)| j.contains(*i))
            .map(|(p, _)| p),
    );
    let pos_k = pos_j.complement(jk.len());
    let probs = (0..target.total_size())
        .map(|idx| {
            &pj.probs[target.project_index(idx, pos_j)]
                * &pk.probs[target.project_index(idx, pos_k)]
        })
        .collect();
    Ok(GeneralDistribution {
        space: target,
        probs,
    })
}

/// A strictly positive probability vector of length `card` whose entries
/// are multiples of `1/max(bound, card)`, uniform over such vectors.
pub fn sample_vector<R: Rng + ?Sized>(card: usize, rng: &mut R, bound: u64) -> Vec<Rational> {
    let den = bound.max(card as u64).max(1) as usize;
    if card == 1 {
        return vec![Rational::one()];
    }
    // stars and bars: card-1 distinct cut points among 1..den
    let mut cuts: Vec<usize> = index::sample(rng, den - 1, card - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(card);
    for c in cuts.into_iter().chain([den]) {
        out.push(rational((c - prev) as i64, den as i64));
        prev = c;
    }
    out
}

/// Random strictly positive factorizing distribution with entries of
/// denominator at most `bound` (raised to the cardinality when smaller).
pub fn sample_factorizing<R: Rng + ?Sized>(
    space: &Arc<FactoredSpace>,
    rng: &mut R,
    bound: u64,
) -> FactorizingDistribution {
    let factors = space
        .cardinalities()
        .map(|c| sample_vector(c, rng, bound))
        .collect();
    FactorizingDistribution {
        space: space.clone(),
        factors,
    }
}

/// Structural independence of `X` and `Y` given `Z` implies statistical
/// independence under `p`. Never false for a factorizing `p`.
pub fn soundness_check(
    x: &Variable,
    y: &Variable,
    z: Option<&Variable>,
    p: &FactorizingDistribution,
) -> Result<bool> {
    if !structurally_independent(x, y, z)? {
        return Ok(true);
    }
    Ok(cond_indep_vars(p, x, y, z)?.is_independent())
}

/// Samples factorizing distributions until one violates `X ⊥⊥ Y | Z`.
pub fn completeness_witness<R: Rng + ?Sized>(
    x: &Variable,
    y: &Variable,
    z: Option<&Variable>,
    trials: usize,
    rng: &mut R,
) -> Result<Option<FactorizingDistribution>> {
    completeness_witness_with_bound(x, y, z, trials, rng, DEFAULT_DENOMINATOR_BOUND)
}

pub fn completeness_witness_with_bound<R: Rng + ?Sized>(
    x: &Variable,
    y: &Variable,
    z: Option<&Variable>,
    trials: usize,
    rng: &mut R,
    bound: u64,
) -> Result<Option<FactorizingDistribution>> {
    let space = x.space().clone();
    y.check_same(&space)?;
    if let Some(z) = z {
        z.check_same(&space)?;
    }
    for _ in 0..trials {
        let p = sample_factorizing(&space, rng, bound);
        if !cond_indep_vars(&p, x, y, z)?.is_independent() {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FactorId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(cards: &[usize]) -> Arc<FactoredSpace> {
        Arc::new(FactoredSpace::from_cardinalities(cards).unwrap())
    }

    fn r(n: i64, d: i64) -> Rational {
        rational(n, d)
    }

    fn u(s: &Arc<FactoredSpace>, i: usize) -> Variable {
        Variable::background(s, FactorId(i)).unwrap()
    }

    fn xor(s: &Arc<FactoredSpace>) -> Variable {
        Variable::from_fn(s, 2, |i| (s.coord(i, 0) ^ s.coord(i, 1)) as u32).unwrap()
    }

    #[test]
    fn prob_event_examples() {
        let s = space(&[2, 2]);
        let p = FactorizingDistribution::uniform(&s);
        let agree = Event::from_indices(&s, [0, 3]).unwrap();
        assert_eq!(p.prob_event(&agree).unwrap(), r(1, 2));
        assert_eq!(p.prob_event(&Event::full(&s)).unwrap(), r(1, 1));
        let q =
            FactorizingDistribution::new(&s, vec![vec![r(3, 4), r(1, 4)], vec![r(1, 2), r(1, 2)]])
                .unwrap();
        assert_eq!(q.prob_event(&u(&s, 0).fiber(0).unwrap()).unwrap(), r(3, 4));
        assert_eq!(
            q.to_general().prob_event(&Event::full(&s)).unwrap(),
            r(1, 1)
        );
    }

    #[test]
    fn validation() {
        let s = space(&[2]);
        assert!(FactorizingDistribution::new(&s, vec![vec![r(1, 2), r(2, 5)]]).is_err());
        assert!(FactorizingDistribution::new(&s, vec![vec![r(3, 2), r(-1, 2)]]).is_err());
        assert!(FactorizingDistribution::new(&s, vec![vec![r(1, 1)]]).is_err());
        assert!(GeneralDistribution::new(&s, vec![r(1, 1)]).is_err());
    }

    #[test]
    fn factorizes_examples() {
        let s = space(&[2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert!(sample_factorizing(&s, &mut rng, 64)
                .to_general()
                .factorizes());
        }
        let s2 = space(&[2, 2]);
        let agree = Event::from_indices(&s2, [0, 3]).unwrap();
        assert!(!GeneralDistribution::uniform_on(&agree)
            .unwrap()
            .factorizes());
        for p in s.points() {
            assert!(GeneralDistribution::delta(&s, &p).unwrap().factorizes());
        }
    }

    #[test]
    fn cond_indep_examples() {
        let s = space(&[2, 2]);
        let full = Event::full(&s);
        let uni = FactorizingDistribution::uniform(&s);
        let a = u(&s, 0).fiber(0).unwrap();
        let b = xor(&s).fiber(0).unwrap();
        assert!(cond_indep(&uni, &a, &b, &full).unwrap());
        let biased = FactorizingDistribution::new(
            &s,
            vec![vec![r(51, 100), r(49, 100)], vec![r(1, 2), r(1, 2)]],
        )
        .unwrap();
        assert!(cond_indep(&biased, &a, &b, &full).unwrap());
        // coin 1 biased, coin 2 fair: XOR still fair and independent of coin 1;
        // the dependence appears once the coin being XORed in is biased
        let biased2 = FactorizingDistribution::new(
            &s,
            vec![vec![r(1, 2), r(1, 2)], vec![r(51, 100), r(49, 100)]],
        )
        .unwrap();
        assert!(!cond_indep(&biased2, &a, &b, &full).unwrap());
        // P(C) = 0
        let delta = GeneralDistribution::delta(&s, &Point(vec![0, 0])).unwrap();
        let c = Event::from_indices(&s, [3]).unwrap();
        assert!(cond_indep(&delta, &a, &b, &c).unwrap());
    }

    #[test]
    fn cond_indep_vars_examples() {
        let s = space(&[2, 2]);
        let uni = FactorizingDistribution::uniform(&s);
        let c = Variable::constant(&s);
        assert!(cond_indep_vars(&uni, &c, &c, None)
            .unwrap()
            .is_independent());
        assert!(cond_indep_vars(&uni, &u(&s, 0), &xor(&s), None)
            .unwrap()
            .is_independent());
        let v = cond_indep_vars(&uni, &u(&s, 0), &u(&s, 0), None).unwrap();
        assert!(!v.is_independent());
        assert!(v.witness().is_some());
    }

    #[test]
    fn big_and_small_weights_agree() {
        let s = space(&[2, 3, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = Variable::from_fn(&s, 2, |i| ((s.coord(i, 0) + s.coord(i, 1)) % 2) as u32).unwrap();
        let y = Variable::from_fn(&s, 3, |i| ((s.coord(i, 1) + s.coord(i, 2)) % 3) as u32).unwrap();
        let z = u(&s, 1);
        for _ in 0..30 {
            let p = sample_factorizing(&s, &mut rng, 8);
            let w = p.weights();
            for zz in [None, Some(&z)] {
                assert_eq!(
                    w.cond_indep_vars(&x, &y, zz).unwrap(),
                    w.force_big().cond_indep_vars(&x, &y, zz).unwrap()
                );
            }
        }
    }

    #[test]
    fn sample_vector_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(sample_vector(2, &mut rng, 2), vec![r(1, 2), r(1, 2)]);
        let s = space(&[3, 2, 4]);
        let p = sample_factorizing(&s, &mut rng, 64);
        let q = sample_factorizing(&s, &mut rng, 64);
        assert_ne!(p, q);
        for f in p.factors() {
            assert!(f
                .iter()
                .all(|x| x.is_positive() && *x.denom() <= BigInt::from(64)));
        }
        // bound below the cardinality is raised
        let v = sample_vector(5, &mut rng, 2);
        assert_eq!(v, vec![r(1, 5); 5]);
    }

    #[test]
    fn support_marginal_outer() {
        let s = space(&[2, 3]);
        let uni = GeneralDistribution::uniform(&s);
        let m = uni.marginal(IndexSubset::singleton(1)).unwrap();
        assert_eq!(m.probs(), [r(1, 3), r(1, 3), r(1, 3)]);
        let pt = Point(vec![1, 2]);
        let d = GeneralDistribution::delta(&s, &pt).unwrap();
        assert_eq!(d.support(), Event::from_points(&s, &[pt]).unwrap());

        let p = FactorizingDistribution::new(
            &s,
            vec![vec![r(1, 4), r(3, 4)], vec![r(0, 1), r(1, 3), r(2, 3)]],
        )
        .unwrap()
        .to_general();
        let j = IndexSubset::singleton(0);
        let k = IndexSubset::singleton(1);
        let pj = p.marginal(j).unwrap();
        let pk = p.marginal(k).unwrap();
        assert_eq!(pj.probs(), [r(1, 4), r(3, 4)]);
        let o = outer(&s, j, &pj, k, &pk).unwrap();
        assert_eq!(o.probs(), p.probs());
        assert_eq!(o.marginal(k).unwrap(), pk);
        assert!(matches!(outer(&s, j, &pj, j, &pj), Err(Error::Overlap)));
    }

    #[test]
    fn soundness_and_completeness_examples() {
        let s = space(&[2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = sample_factorizing(&s, &mut rng, 64);
            assert!(soundness_check(&u(&s, 0), &u(&s, 1), None, &p).unwrap());
            assert!(soundness_check(&u(&s, 0), &xor(&s), None, &p).unwrap());
        }
        let w = completeness_witness(&u(&s, 0), &xor(&s), None, 200, &mut rng)
            .unwrap()
            .expect("coin and xor are structurally dependent");
        assert!(!cond_indep_vars(&w, &u(&s, 0), &xor(&s), None)
            .unwrap()
            .is_independent());
        assert!(
            completeness_witness(&u(&s, 0), &u(&s, 1), None, 200, &mut rng)
                .unwrap()
                .is_none()
        );
    }
}
