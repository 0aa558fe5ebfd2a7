//! Random and exhaustive test material: spaces, variables, events, DAGs.

use std::sync::Arc;

use fsk_core::{Dag, Event, FactorId, FactoredSpace, IndexSubset, Variable};
use rand::seq::SliceRandom;
use rand::Rng;

/// `1..=max_factors` factors with cardinalities in `2..=max_card`.
pub fn random_space<R: Rng + ?Sized>(
    rng: &mut R,
    max_factors: usize,
    max_card: usize,
) -> Arc<FactoredSpace> {
    let n = rng.gen_range(1..=max_factors);
    let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=max_card)).collect();
    Arc::new(FactoredSpace::from_cardinalities(&cards).expect("small space"))
}

/// A random variable, most often a function of a few factors so that
/// structural independences are not rare.
pub fn random_variable<R: Rng + ?Sized>(rng: &mut R, space: &Arc<FactoredSpace>) -> Variable {
    let n = space.num_factors();
    match rng.gen_range(0..10) {
        0 => Variable::constant(space),
        1..=3 => Variable::background(space, FactorId(rng.gen_range(0..n))).expect("factor exists"),
        4..=8 => {
            let j = random_subset(rng, n, 1..=n.min(2));
            function_of(rng, space, j)
        }
        _ => function_of(rng, space, space.all_factors()),
    }
}

/// `f(U_J)` for a random `f` into two or three values.
pub fn function_of<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<FactoredSpace>,
    j: IndexSubset,
) -> Variable {
    let uj = Variable::background_set(space, j).expect("subset of the factors");
    let values = rng.gen_range(2..=3u32);
    let f: Vec<u32> = (0..uj.num_values())
        .map(|_| rng.gen_range(0..values))
        .collect();
    let table = uj.table().iter().map(|&v| f[v as usize]).collect();
    Variable::new(space, table, values).expect("values in range")
}

/// A nonempty random subset of `{0..n}` with size in `sizes`.
pub fn random_subset<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    sizes: std::ops::RangeInclusive<usize>,
) -> IndexSubset {
    let k = rng.gen_range(sizes);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    IndexSubset::from_indices(ids.into_iter().take(k))
}

/// A random event: either a fiber union of a random variable, or a
/// uniformly random set of points.
pub fn random_event<R: Rng + ?Sized>(rng: &mut R, space: &Arc<FactoredSpace>) -> Event {
    if rng.gen_bool(0.5) {
        let x = random_variable(rng, space);
        let keep: Vec<bool> = (0..x.num_values()).map(|_| rng.gen_bool(0.5)).collect();
        Event::from_predicate(space, |i| keep[x.value(i) as usize])
    } else {
        let keep: Vec<bool> = (0..space.total_size()).map(|_| rng.gen_bool(0.5)).collect();
        Event::from_predicate(space, |i| keep[i])
    }
}

/// Every labeled DAG on `n` nodes with the given cardinality.
pub fn all_dags(n: usize, card: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if let Ok(g) = Dag::from_cardinalities(&vec![card; n], &edges) {
            out.push(g);
        }
    }
    out
}

/// A random DAG: a random node order, each forward edge present with
/// probability one half.
pub fn random_dag<R: Rng + ?Sized>(rng: &mut R, cards: &[usize]) -> Dag {
    let n = cards.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((order[a], order[b]));
            }
        }
    }
    Dag::from_cardinalities(cards, &edges).expect("forward edges are acyclic")
}

/// Random DAGs with `n` nodes of cardinality `2..=max_card`, redrawn until
/// the constructed space has at most `max_factors` factors and
/// `max_points` points.
pub fn random_bounded_dag<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_card: usize,
    max_factors: usize,
    max_points: usize,
) -> Dag {
    loop {
        let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=max_card)).collect();
        let g = random_dag(rng, &cards);
        let mut factors = 0;
        let mut points: f64 = 1.0;
        for v in 0..n {
            let k = g.num_configs(v);
            factors += k;
            points *= (g.cardinality(v) as f64).powi(k as i32);
        }
        if factors <= max_factors && points <= max_points as f64 {
            return g;
        }
    }
}
