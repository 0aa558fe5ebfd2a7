use std::sync::Arc;

use fsk_core::distribution::{cond_indep_vars, outer, Distribution, GeneralDistribution};
use fsk_core::history::{disintegrates, generates, history, history_by_enumeration, Conditioning};
use fsk_core::relations::structurally_independent;
use fsk_core::variable::is_derived;
use fsk_core::{distribution, Event, FactorId, FactoredSpace, IndexSubset, PartialPoint, Variable};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
struct Case {
    space: Arc<FactoredSpace>,
    x: Variable,
    y: Variable,
    c: Event,
}

fn cards(max_factors: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=max_factors)
}

fn table(size: usize, values: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..values, size)
}

fn case(max_factors: usize) -> impl Strategy<Value = Case> {
    cards(max_factors).prop_flat_map(|cards| {
        let space = Arc::new(FactoredSpace::from_cardinalities(&cards).unwrap());
        let n = space.total_size();
        (
            Just(space),
            1u32..=3,
            1u32..=3,
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_flat_map(move |(space, kx, ky, mask)| {
                (
                    Just(space),
                    table(n, kx),
                    table(n, ky),
                    Just(mask),
                    Just((kx, ky)),
                )
            })
            .prop_map(|(space, tx, ty, mask, (kx, ky))| {
                let c = Event::from_predicate(&space, |i| mask[i]);
                Case {
                    x: Variable::new(&space, tx, kx).unwrap(),
                    y: Variable::new(&space, ty, ky).unwrap(),
                    c,
                    space,
                }
            })
    })
}

/// Events that are unions of fibers of a coarse random variable, so they
/// are more often products than a uniformly random subset would be.
fn structured_event(space: &Arc<FactoredSpace>, keep: &[bool], j: IndexSubset) -> Event {
    let u = Variable::background_set(space, j).unwrap();
    Event::from_predicate(space, |i| keep[u.value(i) as usize % keep.len()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn encode_decode_bijection(cards in cards(5)) {
        let s = FactoredSpace::from_cardinalities(&cards).unwrap();
        for idx in 0..s.total_size() {
            let p = s.decode(idx);
            prop_assert_eq!(s.encode(&p).unwrap(), idx);
        }
    }

    #[test]
    fn history_matches_enumeration(c in case(4)) {
        prop_assert_eq!(history(&c.x, &c.c).unwrap(), history_by_enumeration(&c.x, &c.c).unwrap());
    }

    #[test]
    fn history_matches_enumeration_on_structured_events(
        c in case(4),
        keep in prop::collection::vec(any::<bool>(), 1..6),
        bits in any::<u64>(),
    ) {
        let j = IndexSubset::from_bits(bits).intersection(c.space.all_factors());
        let e = structured_event(&c.space, &keep, j);
        prop_assert_eq!(history(&c.x, &e).unwrap(), history_by_enumeration(&c.x, &e).unwrap());
    }

    #[test]
    fn history_generates_and_is_minimal(c in case(4)) {
        let h = history(&c.x, &c.c).unwrap();
        prop_assert!(generates(h, &c.x, &c.c).unwrap());
        for j in IndexSubset::all_subsets(c.space.num_factors()) {
            if generates(j, &c.x, &c.c).unwrap() {
                prop_assert!(h.is_subset(j));
            }
        }
    }

    #[test]
    fn joint_history_is_union(c in case(4)) {
        let xy = Variable::joint(&c.space, &[&c.x, &c.y]).unwrap();
        let cond = Conditioning::new(&c.c);
        prop_assert_eq!(
            cond.history(&xy).unwrap(),
            cond.history(&c.x).unwrap().union(cond.history(&c.y).unwrap())
        );
    }

    #[test]
    fn history_is_union_over_values(c in case(4)) {
        let cond = Conditioning::new(&c.c);
        let by_value = (0..c.x.num_values())
            .map(|v| cond.history(&Variable::indicator(&c.x.fiber(v).unwrap())).unwrap())
            .fold(IndexSubset::EMPTY, IndexSubset::union);
        prop_assert_eq!(cond.history(&c.x).unwrap(), by_value);
    }

    #[test]
    fn disintegrating_sets_form_an_algebra(c in case(4)) {
        let n = c.space.num_factors();
        let cond = Conditioning::new(&c.c);
        let dis: Vec<IndexSubset> = IndexSubset::all_subsets(n)
            .filter(|&j| disintegrates(j, &c.c).unwrap())
            .collect();
        for j in IndexSubset::all_subsets(n) {
            prop_assert_eq!(cond.disintegrates(j), dis.contains(&j));
        }
        for &a in &dis {
            prop_assert!(dis.contains(&a.complement(n)));
            for &b in &dis {
                prop_assert!(dis.contains(&a.union(b)));
                prop_assert!(dis.contains(&a.intersection(b)));
            }
        }
    }

    #[test]
    fn fibers_partition_the_space(c in case(4)) {
        let mut seen = vec![0usize; c.space.total_size()];
        for v in 0..c.x.num_values() {
            for i in c.x.fiber(v).unwrap().indices() {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&k| k == 1));
    }

    #[test]
    fn derivation_is_reflexive_and_transitive(c in case(3), tz in table(81, 2)) {
        let z = Variable::new(&c.space, tz[..c.space.total_size()].to_vec(), 2).unwrap();
        prop_assert!(is_derived(&c.x, &c.x, &c.c).unwrap());
        if is_derived(&c.x, &c.y, &c.c).unwrap() && is_derived(&c.y, &z, &c.c).unwrap() {
            prop_assert!(is_derived(&c.x, &z, &c.c).unwrap());
        }
        let xy = Variable::joint(&c.space, &[&c.x, &c.y]).unwrap();
        prop_assert!(is_derived(&xy, &c.y, &c.c).unwrap());
    }

    #[test]
    fn merge_is_commutative_and_associative(
        a in prop::collection::btree_map(0usize..12, 0usize..3, 0..4),
        b in prop::collection::btree_map(0usize..12, 0usize..3, 0..4),
        d in prop::collection::btree_map(0usize..12, 0usize..3, 0..4),
    ) {
        let pa = PartialPoint::new(a).unwrap();
        let pb = PartialPoint::new(b).unwrap();
        let pd = PartialPoint::new(d).unwrap();
        match (pa.merge(&pb), pb.merge(&pa)) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "merge defined in one order only"),
        }
        if let (Ok(ab), Ok(bd)) = (pa.merge(&pb), pb.merge(&pd)) {
            let left = ab.merge(&pd);
            let right = pa.merge(&bd);
            prop_assert_eq!(left.is_ok(), right.is_ok());
            if let (Ok(l), Ok(r)) = (left, right) {
                prop_assert_eq!(l, r);
            }
        }
    }

    #[test]
    fn support_of_outer_is_product(
        cards in prop::collection::vec(1usize..=3, 2..=4),
        split in any::<u64>(),
        wa in prop::collection::vec(0i64..3, 81),
        wb in prop::collection::vec(0i64..3, 81),
    ) {
        let s = Arc::new(FactoredSpace::from_cardinalities(&cards).unwrap());
        let n = cards.len();
        let j = IndexSubset::from_bits(split).intersection(IndexSubset::full(n));
        let k = j.complement(n);
        let pj = weights_to_dist(&Arc::new(s.subspace(j).unwrap()), &wa);
        let pk = weights_to_dist(&Arc::new(s.subspace(k).unwrap()), &wb);
        let prod = outer(&s, j, &pj, k, &pk).unwrap();
        let supp = prod.support();
        let sj = pj.support();
        let sk = pk.support();
        for idx in 0..s.total_size() {
            let inside = sj.contains(s.project_index(idx, j)) && sk.contains(s.project_index(idx, k));
            prop_assert_eq!(supp.contains(idx), inside);
        }
    }

    #[test]
    fn structural_independence_is_sound(c in case(3), tz in table(27, 2), seed in any::<u64>()) {
        let z = Variable::new(&c.space, tz[..c.space.total_size()].to_vec(), 2).unwrap();
        if structurally_independent(&c.x, &c.y, Some(&z)).unwrap() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..5 {
                let p = distribution::sample_factorizing(&c.space, &mut rng, 64);
                prop_assert!(cond_indep_vars(&p, &c.x, &c.y, Some(&z)).unwrap().is_independent());
            }
        }
    }

    #[test]
    fn background_variables_are_independent(cards in cards(4)) {
        let s = Arc::new(FactoredSpace::from_cardinalities(&cards).unwrap());
        for i in 0..cards.len() {
            for j in 0..cards.len() {
                let ui = Variable::background(&s, FactorId(i)).unwrap();
                let uj = Variable::background(&s, FactorId(j)).unwrap();
                let ind = structurally_independent(&ui, &uj, None).unwrap();
                prop_assert_eq!(ind, i != j || cards[i] == 1);
            }
        }
    }
}

/// Normalizes nonnegative integer weights into a distribution, falling back
/// to the uniform one when all weights vanish.
fn weights_to_dist(space: &Arc<FactoredSpace>, w: &[i64]) -> GeneralDistribution {
    let w = &w[..space.total_size()];
    let total: i64 = w.iter().sum();
    if total == 0 {
        return GeneralDistribution::uniform(space);
    }
    let probs = w
        .iter()
        .map(|&x| distribution::rational(x, total))
        .collect();
    GeneralDistribution::new(space, probs).unwrap()
}
