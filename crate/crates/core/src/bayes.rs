//! Bayesian networks and the factored space model built from a DAG.
//!
//! For a DAG `G` the construction has one factor `(v, x_pa(v))` per node
//! and parent configuration, with the values of `v` as its outcomes. Node
//! variables follow the recursion `X_v(ω) = ω_(v, X_pa(v)(ω))`.
//!
//! Factors are enumerated in topological node order (Kahn's algorithm,
//! smallest node id first), and within a node by parent configuration.
//! Parent configurations are ordered lexicographically with parents sorted
//! by node id, the first parent being the most significant digit.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::Rng;

use crate::distribution::{
    sample_factorizing, sample_vector, Distribution, FactorizingDistribution, GeneralDistribution,
    Rational,
};
use crate::history::Conditioning;
use crate::space::{Event, FactorId, FactoredSpace, DEFAULT_MAX_POINTS, MAX_FACTORS};
use crate::subset::IndexSubset;
use crate::variable::Variable;
use crate::weights::{scale, Weights};
use crate::{Error, Result};

/// A directed acyclic graph whose nodes carry finite value sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    cards: Vec<usize>,
    parents: Vec<Vec<usize>>,
    order: Vec<usize>,
    ancestors: Vec<IndexSubset>,
}

impl Dag {
    /// `nodes` are `(name, cardinality)`, `edges` are `(from, to)` node ids.
    pub fn new<S: Into<String>>(
        nodes: impl IntoIterator<Item = (S, usize)>,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        let (names, cards): (Vec<String>, Vec<usize>) =
            nodes.into_iter().map(|(s, c)| (s.into(), c)).unzip();
        let n = names.len();
        if n > MAX_FACTORS {
            return Err(Error::Capacity {
                what: "number of nodes",
                requested: n,
                limit: MAX_FACTORS,
            });
        }
        for (v, &c) in cards.iter().enumerate() {
            if c < 2 {
                return Err(Error::InvalidGraph(format!(
                    "node '{}' has {} values, at least 2 are required",
                    names[v], c
                )));
            }
            if names[..v].contains(&names[v]) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate node name '{}'",
                    names[v]
                )));
            }
        }
        let mut parents = vec![Vec::new(); n];
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::UnknownNode(v));
                }
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at '{}'", names[a])));
            }
            if parents[b].contains(&a) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge '{}' -> '{}'",
                    names[a], names[b]
                )));
            }
            parents[b].push(a);
        }
        for p in &mut parents {
            p.sort_unstable();
        }

        let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let Some(v) = (0..n).find(|&v| !placed[v] && indegree[v] == 0) else {
                let stuck: Vec<&str> = (0..n)
                    .filter(|&v| !placed[v])
                    .map(|v| names[v].as_str())
                    .collect();
                return Err(Error::InvalidGraph(format!(
                    "graph has a cycle among {}",
                    stuck.join(", ")
                )));
            };
            placed[v] = true;
            order.push(v);
            for (w, ps) in parents.iter().enumerate() {
                if ps.contains(&v) {
                    indegree[w] -= 1;
                }
            }
        }

        let mut ancestors = vec![IndexSubset::EMPTY; n];
        for &v in &order {
            let mut a = IndexSubset::EMPTY;
            for &p in &parents[v] {
                a = a.union(ancestors[p]).with(p);
            }
            ancestors[v] = a;
        }
        Ok(Dag {
            names,
            cards,
            parents,
            order,
            ancestors,
        })
    }

    /// Nodes named `v0, v1, ...`.
    pub fn from_cardinalities(cards: &[usize], edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            cards.iter().enumerate().map(|(i, &c)| (format!("v{i}"), c)),
            edges,
        )
    }

    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn all_nodes(&self) -> IndexSubset {
        IndexSubset::full(self.num_nodes())
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn node_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn cardinality(&self, v: usize) -> usize {
        self.cards[v]
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    /// Parents in increasing id order.
    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = (0..self.num_nodes())
            .flat_map(|v| self.parents[v].iter().map(move |&p| (p, v)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Proper ancestors `A(v)`.
    pub fn ancestors(&self, v: usize) -> IndexSubset {
        self.ancestors[v]
    }

    pub fn is_ancestor(&self, a: usize, v: usize) -> bool {
        self.ancestors[v].contains(a)
    }

    /// `|Val_pa(v)|`.
    pub fn num_configs(&self, v: usize) -> usize {
        self.parents[v].iter().map(|&p| self.cards[p]).product()
    }

    /// Index of the parent configuration of `v` under the assignment
    /// `value(node)`.
    pub fn config_index(&self, v: usize, value: impl Fn(usize) -> usize) -> usize {
        self.parents[v]
            .iter()
            .fold(0, |acc, &p| acc * self.cards[p] + value(p))
    }

    /// Parent values of configuration `cfg` of `v`, in parent order.
    pub fn config_values(&self, v: usize, mut cfg: usize) -> Vec<usize> {
        let mut out = vec![0; self.parents[v].len()];
        for (slot, &p) in out.iter_mut().zip(&self.parents[v]).rev() {
            *slot = cfg % self.cards[p];
            cfg /= self.cards[p];
        }
        out
    }

    /// `⨉ᵥ Val_v` with one factor per node, in node id order.
    pub fn value_space(&self) -> Result<FactoredSpace> {
        FactoredSpace::new(self.names.iter().cloned().zip(self.cards.iter().copied()))
    }

    pub(crate) fn check_nodes(&self, s: IndexSubset) -> Result<()> {
        match s.iter().find(|&v| v >= self.num_nodes()) {
            Some(v) => Err(Error::UnknownNode(v)),
            None => Ok(()),
        }
    }
}

/// `V1` and `V2` are d-separated by `V3` in `G`.
///
/// Nodes of `V3` are removed from `V1` and `V2` first. A node left in both
/// `V1` and `V2` is connected to itself, so the sets are not separated.
pub fn d_separated(g: &Dag, v1: IndexSubset, v2: IndexSubset, v3: IndexSubset) -> Result<bool> {
    for s in [v1, v2, v3] {
        g.check_nodes(s)?;
    }
    let a = v1.difference(v3);
    let b = v2.difference(v3);
    if a.is_empty() || b.is_empty() {
        return Ok(true);
    }
    if !a.is_disjoint(b) {
        return Ok(false);
    }
    let mut keep = v1.union(v2).union(v3);
    for v in keep.iter() {
        keep = keep.union(g.ancestors(v));
    }

    let n = g.num_nodes();
    let mut adj = vec![IndexSubset::EMPTY; n];
    for v in keep.iter() {
        let ps = g.parents(v);
        for (k, &p) in ps.iter().enumerate() {
            adj[v] = adj[v].with(p);
            adj[p] = adj[p].with(v);
            for &q in &ps[k + 1..] {
                adj[p] = adj[p].with(q);
                adj[q] = adj[q].with(p);
            }
        }
    }

    let open = keep.difference(v3);
    let mut seen = a;
    let mut queue: VecDeque<usize> = a.iter().collect();
    while let Some(v) = queue.pop_front() {
        for w in adj[v].intersection(open).difference(seen).iter() {
            if b.contains(w) {
                return Ok(false);
            }
            seen = seen.with(w);
            queue.push_back(w);
        }
    }
    Ok(true)
}

/// Conditional probability tables, one row per parent configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cpt {
    tables: Vec<Vec<Vec<Rational>>>,
}

impl Cpt {
    pub fn new(g: &Dag, tables: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        if tables.len() != g.num_nodes() {
            return Err(Error::InvalidDistribution(format!(
                "{} tables for {} nodes",
                tables.len(),
                g.num_nodes()
            )));
        }
        for (v, rows) in tables.iter().enumerate() {
            if rows.len() != g.num_configs(v) {
                return Err(Error::InvalidDistribution(format!(
                    "node '{}' has {} rows, expected {}",
                    g.name(v),
                    rows.len(),
                    g.num_configs(v)
                )));
            }
            for (cfg, row) in rows.iter().enumerate() {
                if row.len() != g.cardinality(v) {
                    return Err(Error::InvalidDistribution(format!(
                        "row {} of node '{}' has {} entries, expected {}",
                        cfg,
                        g.name(v),
                        row.len(),
                        g.cardinality(v)
                    )));
                }
                if row.iter().any(|p| *p < Rational::zero()) {
                    return Err(Error::InvalidDistribution(format!(
                        "row {} of node '{}' has a negative entry",
                        cfg,
                        g.name(v)
                    )));
                }
                if row.iter().sum::<Rational>() != Rational::one() {
                    return Err(Error::InvalidDistribution(format!(
                        "row {} of node '{}' does not sum to 1",
                        cfg,
                        g.name(v)
                    )));
                }
            }
        }
        Ok(Cpt { tables })
    }

    pub fn uniform(g: &Dag) -> Self {
        Cpt {
            tables: (0..g.num_nodes())
                .map(|v| {
                    let c = g.cardinality(v);
                    vec![vec![Rational::new(BigInt::one(), BigInt::from(c)); c]; g.num_configs(v)]
                })
                .collect(),
        }
    }

    /// Strictly positive rows with denominators at most `bound`.
    pub fn random<R: Rng + ?Sized>(g: &Dag, rng: &mut R, bound: u64) -> Self {
        Cpt {
            tables: (0..g.num_nodes())
                .map(|v| {
                    (0..g.num_configs(v))
                        .map(|_| sample_vector(g.cardinality(v), rng, bound))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn row(&self, v: usize, cfg: usize) -> &[Rational] {
        &self.tables[v][cfg]
    }

    pub fn tables(&self) -> &[Vec<Vec<Rational>>] {
        &self.tables
    }

    /// `P(x) = ∏ᵥ P(x_v | x_pa(v))` over `g.value_space()`.
    pub fn joint(&self, g: &Dag) -> Result<GeneralDistribution> {
        let val = Arc::new(g.value_space()?);
        let probs = (0..val.total_size())
            .map(|idx| {
                (0..g.num_nodes()).fold(Rational::one(), |acc, v| {
                    let cfg = g.config_index(v, |p| val.coord(idx, p));
                    acc * &self.tables[v][cfg][val.coord(idx, v)]
                })
            })
            .collect();
        GeneralDistribution::new(&val, probs)
    }
}

/// Whether `p` satisfies `P(x) = ∏ᵥ P(x_v | x_pa(v))`, checked in the
/// division-free form `P(x)·∏ᵥ P(x_pa(v)) = ∏ᵥ P(x_v, x_pa(v))`.
pub fn bn_factorizes(g: &Dag, p: &GeneralDistribution) -> Result<bool> {
    let val = p.space();
    if val.num_factors() != g.num_nodes() || !val.cardinalities().eq(g.cards.iter().copied()) {
        return Err(Error::SpaceMismatch);
    }
    // with P(x) = m(x)/D on integers m, the identity reads
    // m(x)·∏ m(x_pa) = D·∏ m(x_v, x_pa)
    let (masses, den) = scale(p.probs());
    let (family, parent) = family_masses(g, val, &masses);
    for (idx, m) in masses.iter().enumerate() {
        let mut lhs = m.clone();
        let mut rhs = den.clone();
        for v in 0..g.num_nodes() {
            let cfg = g.config_index(v, |u| val.coord(idx, u));
            lhs *= &parent[v][cfg];
            rhs *= &family[v][cfg][val.coord(idx, v)];
        }
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Masses of `(x_v, x_pa(v))` indexed `[v][cfg][x_v]` and of `x_pa(v)`
/// indexed `[v][cfg]`.
#[allow(clippy::type_complexity)]
fn family_masses(
    g: &Dag,
    val: &FactoredSpace,
    masses: &[BigUint],
) -> (Vec<Vec<Vec<BigUint>>>, Vec<Vec<BigUint>>) {
    let n = g.num_nodes();
    let mut family: Vec<Vec<Vec<BigUint>>> = (0..n)
        .map(|v| vec![vec![BigUint::zero(); g.cardinality(v)]; g.num_configs(v)])
        .collect();
    for (idx, m) in masses.iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        for (v, fam) in family.iter_mut().enumerate() {
            let cfg = g.config_index(v, |u| val.coord(idx, u));
            fam[cfg][val.coord(idx, v)] += m;
        }
    }
    let parent = family
        .iter()
        .map(|rows| rows.iter().map(|r| r.iter().sum()).collect())
        .collect();
    (family, parent)
}

/// The factored space model of a DAG.
#[derive(Clone, Debug)]
pub struct FsmConstruction {
    dag: Dag,
    space: Arc<FactoredSpace>,
    value_space: Arc<FactoredSpace>,
    factor_ids: Vec<Vec<usize>>,
    node_factors: Vec<IndexSubset>,
    node_vars: Vec<Variable>,
    observation: Variable,
}

/// Builds the construction with the default point cap.
pub fn build_fsm(g: &Dag) -> Result<FsmConstruction> {
    FsmConstruction::with_cap(g, DEFAULT_MAX_POINTS)
}

impl FsmConstruction {
    pub fn with_cap(g: &Dag, max_points: usize) -> Result<Self> {
        let n = g.num_nodes();
        let mut factors: Vec<(String, usize)> = Vec::new();
        let mut factor_ids = vec![Vec::new(); n];
        for &v in g.topological_order() {
            for cfg in 0..g.num_configs(v) {
                let assignment: Vec<String> = g
                    .parents(v)
                    .iter()
                    .zip(g.config_values(v, cfg))
                    .map(|(&p, x)| format!("{}={}", g.name(p), x))
                    .collect();
                factor_ids[v].push(factors.len());
                factors.push((
                    format!("{}({})", g.name(v), assignment.join(",")),
                    g.cardinality(v),
                ));
            }
        }
        let total = factors.len();
        if total > MAX_FACTORS {
            return Err(Error::Capacity {
                what: "number of factors",
                requested: total,
                limit: MAX_FACTORS,
            });
        }
        let space = Arc::new(FactoredSpace::with_cap(factors, max_points)?);
        let value_space = Arc::new(g.value_space()?);
        let node_factors: Vec<IndexSubset> = factor_ids
            .iter()
            .map(|ids| IndexSubset::from_indices(ids.iter().copied()))
            .collect();

        let size = space.total_size();
        let mut tables = vec![vec![0u32; size]; n];
        let mut obs = vec![0u32; size];
        let mut x = vec![0usize; n];
        for idx in 0..size {
            for &v in g.topological_order() {
                let cfg = g.config_index(v, |p| x[p]);
                x[v] = space.coord(idx, factor_ids[v][cfg]);
                tables[v][idx] = x[v] as u32;
            }
            obs[idx] = (0..n).map(|v| x[v] * value_space.stride(v)).sum::<usize>() as u32;
        }
        let node_vars = tables
            .into_iter()
            .enumerate()
            .map(|(v, t)| Variable::new(&space, t, g.cardinality(v) as u32))
            .collect::<Result<Vec<_>>>()?;
        let observation = Variable::new(&space, obs, value_space.total_size() as u32)?;
        Ok(FsmConstruction {
            dag: g.clone(),
            space,
            value_space,
            factor_ids,
            node_factors,
            node_vars,
            observation,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn space(&self) -> &Arc<FactoredSpace> {
        &self.space
    }

    /// `⨉ᵥ Val_v`, the codomain of the observation.
    pub fn value_space(&self) -> &Arc<FactoredSpace> {
        &self.value_space
    }

    /// The factor `(v, x_pa(v))` for configuration index `cfg`.
    pub fn factor(&self, v: usize, cfg: usize) -> FactorId {
        FactorId(self.factor_ids[v][cfg])
    }

    /// `I_v`.
    pub fn node_factors(&self, v: usize) -> IndexSubset {
        self.node_factors[v]
    }

    pub fn node_var(&self, v: usize) -> &Variable {
        &self.node_vars[v]
    }

    pub fn node_vars(&self) -> &[Variable] {
        &self.node_vars
    }

    /// `X = (X_v)_v`, valued in the canonical encoding of the value space.
    pub fn observation(&self) -> &Variable {
        &self.observation
    }

    /// `X_S`, the joint of the node variables of `s` in node id order.
    pub fn node_set_variable(&self, s: IndexSubset) -> Result<Variable> {
        self.dag.check_nodes(s)?;
        let vars: Vec<&Variable> = s.iter().map(|v| &self.node_vars[v]).collect();
        Variable::joint(&self.space, &vars)
    }

    /// `τ(P^Ω)(x) = P^Ω(X = x)`.
    pub fn tau(&self, p: &FactorizingDistribution) -> Result<GeneralDistribution> {
        if !crate::space::same_space(p.space(), &self.space) {
            return Err(Error::SpaceMismatch);
        }
        // every point weight is at most the denominator, so sums fit in u128
        let (w, den) = Weights::from_factors_with_denominator(&self.space, p.factors(), 127);
        let den = BigInt::from(den);
        let probs = w
            .push_forward(self.observation.table(), self.value_space.total_size())
            .into_iter()
            .map(|s| Rational::new(BigInt::from(s), den.clone()))
            .collect();
        GeneralDistribution::new(&self.value_space, probs)
    }

    /// `τ⁻¹(P)`: factor `(v, x_pa(v))` gets the row `P(· | x_pa(v))`.
    /// Parent configurations of probability zero get the uniform row.
    pub fn tau_inverse(&self, p: &GeneralDistribution) -> Result<FactorizingDistribution> {
        if !bn_factorizes(&self.dag, p)? {
            return Err(Error::NotFactorizing);
        }
        let (masses, _) = scale(p.probs());
        let (family, parent) = family_masses(&self.dag, &self.value_space, &masses);
        let mut factors = vec![Vec::new(); self.space.num_factors()];
        for v in 0..self.dag.num_nodes() {
            let c = self.dag.cardinality(v);
            for (cfg, row) in family[v].iter().enumerate() {
                let pc = &parent[v][cfg];
                factors[self.factor_ids[v][cfg]] = if pc.is_zero() {
                    vec![Rational::new(BigInt::one(), BigInt::from(c)); c]
                } else {
                    row.iter()
                        .map(|q| Rational::new(BigInt::from(q.clone()), BigInt::from(pc.clone())))
                        .collect()
                };
            }
        }
        FactorizingDistribution::new(&self.space, factors)
    }

    /// The factorizing distribution whose factor vectors are the CPT rows.
    pub fn tau_inverse_cpt(&self, cpt: &Cpt) -> Result<FactorizingDistribution> {
        let mut factors = vec![Vec::new(); self.space.num_factors()];
        for v in 0..self.dag.num_nodes() {
            for cfg in 0..self.dag.num_configs(v) {
                factors[self.factor_ids[v][cfg]] = cpt.row(v, cfg).to_vec();
            }
        }
        FactorizingDistribution::new(&self.space, factors)
    }
}

/// Outcome of comparing the graphical and the structural notions on one DAG.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub triples_checked: usize,
    /// `(V1, V2, V3, d_separated)` where the two notions disagree.
    pub separation_mismatches: Vec<(IndexSubset, IndexSubset, IndexSubset, bool)>,
    pub pairs_checked: usize,
    /// `(a, v, is_ancestor)` where ancestry and strict precedence disagree.
    pub ancestor_mismatches: Vec<(usize, usize, bool)>,
    /// Nodes whose history differs from `⋃_{u ∈ A(v)∪{v}} I_u`.
    pub history_mismatches: Vec<usize>,
    pub tau_checked: usize,
    pub tau_failures: usize,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.separation_mismatches.is_empty()
            && self.ancestor_mismatches.is_empty()
            && self.history_mismatches.is_empty()
            && self.tau_failures == 0
    }

    pub fn merge(&mut self, other: EquivalenceReport) {
        self.triples_checked += other.triples_checked;
        self.separation_mismatches
            .extend(other.separation_mismatches);
        self.pairs_checked += other.pairs_checked;
        self.ancestor_mismatches.extend(other.ancestor_mismatches);
        self.history_mismatches.extend(other.history_mismatches);
        self.tau_checked += other.tau_checked;
        self.tau_failures += other.tau_failures;
    }
}

impl FsmConstruction {
    /// Compares d-separation with structural independence of node
    /// variables for every triple of node sets.
    pub fn check_separation(&self) -> Result<EquivalenceReport> {
        let n = self.dag.num_nodes();
        let subsets: Vec<IndexSubset> = IndexSubset::all_subsets(n).collect();
        let vars = subsets
            .iter()
            .map(|&s| self.node_set_variable(s))
            .collect::<Result<Vec<_>>>()?;
        let mut report = EquivalenceReport::default();
        for (k3, &v3) in subsets.iter().enumerate() {
            let z = &vars[k3];
            // hist[z][S] = h(X_S | X_V3 = z)
            let mut hist: Vec<Vec<IndexSubset>> = Vec::new();
            for value in z.realized_values() {
                let cond = Conditioning::new(&z.fiber(value)?);
                hist.push(
                    vars.iter()
                        .map(|x| cond.history(x))
                        .collect::<Result<_>>()?,
                );
            }
            for (k1, &v1) in subsets.iter().enumerate() {
                for (k2, &v2) in subsets.iter().enumerate() {
                    let structural = hist.iter().all(|h| h[k1].is_disjoint(h[k2]));
                    let graphical = d_separated(&self.dag, v1, v2, v3)?;
                    report.triples_checked += 1;
                    if structural != graphical {
                        report.separation_mismatches.push((v1, v2, v3, graphical));
                    }
                }
            }
        }
        Ok(report)
    }

    /// Compares ancestry with strict structural precedence, and each
    /// node's history with the union of its ancestors' factors.
    pub fn check_ancestors(&self) -> Result<EquivalenceReport> {
        let n = self.dag.num_nodes();
        let cond = Conditioning::new(&Event::full(&self.space));
        let hist = self
            .node_vars
            .iter()
            .map(|x| cond.history(x))
            .collect::<Result<Vec<_>>>()?;
        let mut report = EquivalenceReport::default();
        for v in 0..n {
            let expected = self
                .dag
                .ancestors(v)
                .with(v)
                .iter()
                .fold(IndexSubset::EMPTY, |acc, u| acc.union(self.node_factors[u]));
            if hist[v] != expected {
                report.history_mismatches.push(v);
            }
            for a in 0..n {
                if a == v {
                    continue;
                }
                let graphical = self.dag.is_ancestor(a, v);
                let structural = hist[a].is_strict_subset(hist[v]);
                report.pairs_checked += 1;
                if graphical != structural {
                    report.ancestor_mismatches.push((a, v, graphical));
                }
            }
        }
        Ok(report)
    }

    /// Round trips `τ⁻¹∘τ` on random factorizing distributions and `τ∘τ⁻¹`
    /// on random CPTs, `samples` of each.
    pub fn check_tau<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        samples: usize,
        bound: u64,
    ) -> Result<EquivalenceReport> {
        let mut report = EquivalenceReport::default();
        for _ in 0..samples {
            let p_omega = sample_factorizing(&self.space, rng, bound);
            let pushed = self.tau(&p_omega)?;
            // tau_inverse rejects distributions that do not factorize over G
            let ok = matches!(self.tau_inverse(&pushed), Ok(back) if back == p_omega);
            report.tau_checked += 1;
            report.tau_failures += usize::from(!ok);

            let cpt = Cpt::random(&self.dag, rng, bound);
            let p = cpt.joint(&self.dag)?;
            let ok = match self.tau_inverse(&p) {
                Ok(inv) => self.tau(&inv)? == p,
                Err(_) => false,
            };
            report.tau_checked += 1;
            report.tau_failures += usize::from(!ok);
        }
        Ok(report)
    }
}

/// Runs every check of the DAG equivalences on `g`.
pub fn equivalence_suite<R: Rng + ?Sized>(
    g: &Dag,
    rng: &mut R,
    samples: usize,
) -> Result<EquivalenceReport> {
    let fsm = build_fsm(g)?;
    let mut report = fsm.check_separation()?;
    report.merge(fsm.check_ancestors()?);
    report.merge(fsm.check_tau(rng, samples, crate::distribution::DEFAULT_DENOMINATOR_BOUND)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::rational;
    use crate::relations::structurally_independent;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[usize]) -> IndexSubset {
        IndexSubset::from_indices(v.iter().copied())
    }

    fn chain() -> Dag {
        Dag::new([("a", 2), ("b", 2), ("c", 2)], &[(0, 1), (1, 2)]).unwrap()
    }

    fn collider() -> Dag {
        Dag::new([("a", 2), ("b", 2), ("c", 2)], &[(0, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn dag_validation() {
        assert!(matches!(
            Dag::from_cardinalities(&[2, 2], &[(0, 1), (1, 0)]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(Dag::from_cardinalities(&[2, 1], &[]).is_err());
        assert!(Dag::from_cardinalities(&[2], &[(0, 0)]).is_err());
        assert_eq!(
            Dag::from_cardinalities(&[2], &[(0, 3)]),
            Err(Error::UnknownNode(3))
        );
        let g = Dag::from_cardinalities(&[2, 2, 2], &[(2, 0), (1, 0)]).unwrap();
        assert_eq!(g.topological_order(), [1, 2, 0]);
        assert_eq!(g.parents(0), [1, 2]);
        assert!(g.is_ancestor(2, 0));
        assert!(!g.is_ancestor(0, 2));
    }

    #[test]
    fn config_order() {
        let g = Dag::from_cardinalities(&[2, 3, 2], &[(0, 2), (1, 2)]).unwrap();
        assert_eq!(g.num_configs(2), 6);
        // first parent most significant
        assert_eq!(g.config_index(2, |p| [1, 2, 0][p]), 5);
        assert_eq!(g.config_index(2, |p| [0, 1, 0][p]), 1);
        assert_eq!(g.config_values(2, 4), [1, 1]);
    }

    #[test]
    fn d_separation_examples() {
        let c = chain();
        assert!(d_separated(&c, set(&[0]), set(&[2]), set(&[1])).unwrap());
        assert!(!d_separated(&c, set(&[0]), set(&[2]), set(&[])).unwrap());
        let k = collider();
        assert!(d_separated(&k, set(&[0]), set(&[1]), set(&[])).unwrap());
        assert!(!d_separated(&k, set(&[0]), set(&[1]), set(&[2])).unwrap());
        let fig2 = Dag::new([("x", 4), ("y", 2), ("z", 2)], &[(0, 1), (1, 2)]).unwrap();
        assert!(!d_separated(&fig2, set(&[1]), set(&[2]), set(&[0])).unwrap());
        assert!(d_separated(&k, set(&[2]), set(&[2]), set(&[2])).unwrap());
        assert!(!d_separated(&k, set(&[2]), set(&[2]), set(&[])).unwrap());
        assert_eq!(
            d_separated(&k, set(&[5]), set(&[0]), set(&[])),
            Err(Error::UnknownNode(5))
        );
    }

    #[test]
    fn construction_examples() {
        let root = Dag::from_cardinalities(&[2], &[]).unwrap();
        let f = build_fsm(&root).unwrap();
        assert_eq!(f.space().num_factors(), 1);
        assert_eq!(f.space().total_size(), 2);
        assert_eq!(f.node_var(0).table(), [0, 1]);
        assert_eq!(f.space().label(0), "v0()");

        let pair = Dag::from_cardinalities(&[2, 2], &[(0, 1)]).unwrap();
        let f = build_fsm(&pair).unwrap();
        assert_eq!(f.space().num_factors(), 3);
        assert_eq!(f.space().total_size(), 8);
        let labels: Vec<&str> = (0..3).map(|i| f.space().label(i)).collect();
        assert_eq!(labels, ["v0()", "v1(v0=0)", "v1(v0=1)"]);
        // X_v1(ω) = ω_(v1, ω_(v0))
        for idx in 0..8 {
            let s = f.space();
            let x0 = s.coord(idx, 0);
            assert_eq!(f.node_var(1).value(idx) as usize, s.coord(idx, 1 + x0));
        }

        let f = build_fsm(&collider()).unwrap();
        assert_eq!(f.node_factors(2).len(), 4);
        assert_eq!(f.space().num_factors(), 6);
        assert_eq!(f.space().total_size(), 64);
        assert_eq!(f.space().label(5), "c(a=1,b=1)");
    }

    #[test]
    fn collider_structural_side() {
        let f = build_fsm(&collider()).unwrap();
        let (a, b, c) = (f.node_var(0), f.node_var(1), f.node_var(2));
        assert!(structurally_independent(a, b, None).unwrap());
        assert!(!structurally_independent(a, b, Some(c)).unwrap());
    }

    #[test]
    fn tau_examples() {
        let root = Dag::from_cardinalities(&[3], &[]).unwrap();
        let f = build_fsm(&root).unwrap();
        let t = f.tau(&FactorizingDistribution::uniform(f.space())).unwrap();
        assert_eq!(t.probs(), vec![rational(1, 3); 3]);

        let pair = Dag::from_cardinalities(&[2, 2], &[(0, 1)]).unwrap();
        let f = build_fsm(&pair).unwrap();
        let (p, q0, q1) = (rational(1, 3), rational(1, 4), rational(5, 8));
        let one = Rational::one();
        let factors = vec![
            vec![&one - &p, p.clone()],
            vec![&one - &q0, q0.clone()],
            vec![&one - &q1, q1.clone()],
        ];
        let p_omega = FactorizingDistribution::new(f.space(), factors).unwrap();
        let t = f.tau(&p_omega).unwrap();
        // value space index = x0 + 2 x1
        let expected = [
            (&one - &p) * (&one - &q0),
            &p * (&one - &q1),
            (&one - &p) * &q0,
            &p * &q1,
        ];
        assert_eq!(t.probs(), expected);
        assert_eq!(f.tau_inverse(&t).unwrap(), p_omega);
    }

    #[test]
    fn tau_inverse_deterministic_and_zero_rows() {
        let pair = Dag::from_cardinalities(&[2, 2], &[(0, 1)]).unwrap();
        let f = build_fsm(&pair).unwrap();
        // x0 = 0 surely, x1 = x0
        let p = GeneralDistribution::new(
            f.value_space(),
            vec![
                rational(1, 1),
                rational(0, 1),
                rational(0, 1),
                rational(0, 1),
            ],
        )
        .unwrap();
        let inv = f.tau_inverse(&p).unwrap();
        assert_eq!(inv.factor(0), [rational(1, 1), rational(0, 1)]);
        assert_eq!(inv.factor(1), [rational(1, 1), rational(0, 1)]);
        assert_eq!(inv.factor(2), [rational(1, 2), rational(1, 2)]);
        assert_eq!(f.tau(&inv).unwrap(), p);
    }

    #[test]
    fn bn_factorizes_examples() {
        let g = Dag::from_cardinalities(&[2, 2], &[]).unwrap();
        let val = Arc::new(g.value_space().unwrap());
        let diag = GeneralDistribution::new(
            &val,
            vec![
                rational(1, 2),
                rational(0, 1),
                rational(0, 1),
                rational(1, 2),
            ],
        )
        .unwrap();
        assert!(!bn_factorizes(&g, &diag).unwrap());
        let f = build_fsm(&g).unwrap();
        assert_eq!(f.tau_inverse(&diag), Err(Error::NotFactorizing));

        let single = Dag::from_cardinalities(&[3], &[]).unwrap();
        let val = Arc::new(single.value_space().unwrap());
        let p =
            GeneralDistribution::new(&val, vec![rational(1, 2), rational(1, 2), rational(0, 1)])
                .unwrap();
        assert!(bn_factorizes(&single, &p).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cpt = Cpt::random(&collider(), &mut rng, 16);
        assert!(bn_factorizes(&collider(), &cpt.joint(&collider()).unwrap()).unwrap());
    }

    #[test]
    fn cpt_validation() {
        let g = Dag::from_cardinalities(&[2, 2], &[(0, 1)]).unwrap();
        let row = vec![rational(1, 2), rational(1, 2)];
        assert!(Cpt::new(&g, vec![vec![row.clone()], vec![row.clone(), row.clone()]]).is_ok());
        assert!(Cpt::new(&g, vec![vec![row.clone()], vec![row.clone()]]).is_err());
        let bad = vec![rational(1, 2), rational(1, 3)];
        assert!(Cpt::new(&g, vec![vec![row.clone()], vec![row, bad]]).is_err());
    }

    #[test]
    fn small_suites_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in [chain(), collider()] {
            let r = equivalence_suite(&g, &mut rng, 5).unwrap();
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.triples_checked, 512);
            assert_eq!(r.pairs_checked, 6);
        }
    }
}
