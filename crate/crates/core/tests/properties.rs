use std::collections::{BTreeMap, BTreeSet};

use ksrti_core::gen::{
    agent_ids, completeness_degree, gen_er_sri, generate, mutual_acceptability_rate,
    truncate_lists, GenSpec,
};
use ksrti_core::knet::{build_accept_graph, k_extend_with, ExtendOptions};
use ksrti_core::personalize::infer_list;
use ksrti_core::solver::{enumerate_k_stable, Budget};
use ksrti_core::stability::mutual_pairs;
use ksrti_core::{k_extend, AgentId, Instance, Matching, Pair, Provenance, RankedList};
use proptest::prelude::*;

fn instance_strategy(max_n: usize) -> impl Strategy<Value = Instance> {
    (
        2..=max_n,
        prop::sample::select(vec![0.0, 0.15, 0.3, 0.6, 1.0]),
        any::<u64>(),
        prop::option::of(1usize..5),
        prop::sample::select(vec![0usize, 2, 5]),
        prop::sample::select(vec![0.0, 0.2, 0.5, 1.0]),
        prop::sample::select(vec![0.0, 0.1, 0.4]),
    )
        .prop_map(|(n, p, seed, truncate, criteria, response, unwanted)| {
            let spec = GenSpec {
                truncate,
                criteria_count: criteria,
                response_rate: response,
                unwanted_prob: unwanted,
                ..GenSpec::new(n, p, seed)
            };
            generate(&spec).unwrap()
        })
}

/// Position of every agent in a list, counting tiers.
fn ranks(list: &RankedList) -> BTreeMap<AgentId, usize> {
    list.agents()
        .map(|y| (y.clone(), list.rank_of(y).unwrap()))
        .collect()
}

/// `true` when every strict preference of `small` holds in `big`, and no
/// tie of `small` is broken in the wrong direction.
fn order_preserved(small: &RankedList, big: &RankedList) -> bool {
    let r = ranks(big);
    small.agents().all(|y| {
        small
            .agents()
            .all(|z| !small.prefers(y, z) || r.get(y).zip(r.get(z)).is_some_and(|(a, b)| a < b))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matchings_are_involutions(n in 1usize..16, picks in prop::collection::vec((0usize..16, 0usize..16), 0..16)) {
        let ids = agent_ids(n);
        let mut used = BTreeSet::new();
        let mut pairs = Vec::new();
        for (i, j) in picks {
            let (i, j) = (i % n, j % n);
            if i != j && used.insert(i) {
                if used.insert(j) {
                    pairs.push((ids[i].clone(), ids[j].clone()));
                } else {
                    used.remove(&i);
                }
            }
        }
        let m = Matching::from_pairs(ids.iter().cloned(), pairs.clone()).unwrap();
        for x in &ids {
            let y = m.partner(x).unwrap();
            prop_assert_eq!(m.partner(y).unwrap(), x);
        }
        prop_assert_eq!(m.pairs().len(), pairs.len());
        prop_assert_eq!(m.singles().len(), n - 2 * pairs.len());
        let back = Matching::from_partner_map(m.iter().map(|(a, b)| (a.clone(), b.clone())).collect()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn broken_involutions_are_rejected(
        (n, picked) in (3usize..10).prop_flat_map(|n| (Just(n), Just((0..n).collect::<Vec<_>>()).prop_shuffle())),
    ) {
        let ids = agent_ids(n);
        let (i, j, k) = (picked[0], picked[1], picked[2]);
        // i points to j, but j points to k.
        let mut map: BTreeMap<AgentId, AgentId> = ids.iter().map(|a| (a.clone(), a.clone())).collect();
        map.insert(ids[i].clone(), ids[j].clone());
        map.insert(ids[j].clone(), ids[k].clone());
        prop_assert!(Matching::from_partner_map(map).is_err());
    }

    #[test]
    fn distance_classes_are_disjoint(inst in instance_strategy(12)) {
        let g = build_accept_graph(&inst);
        let mut seen: BTreeSet<Pair> = BTreeSet::new();
        for k in 1..=inst.len() as u32 {
            let pk = g.k_connected_pairs(k);
            for pair in &pk {
                prop_assert_eq!(g.distance(pair.first(), pair.second()), Some(k));
                prop_assert!(seen.insert(pair.clone()), "{} in two classes", pair);
            }
        }
        // Every reachable pair lands in exactly one class.
        let agents: Vec<&AgentId> = inst.agents.iter().collect();
        for (a, x) in agents.iter().enumerate() {
            for y in &agents[a + 1..] {
                let pair = Pair::new((*x).clone(), (*y).clone());
                prop_assert_eq!(g.distance(x, y).is_some(), seen.contains(&pair));
            }
        }
        prop_assert_eq!(g.k_connected_pairs(1), g.edges());
    }

    #[test]
    fn forbidden_pairs_stay_apart(inst in instance_strategy(8), k in 0u32..4) {
        let forbidden = inst.forbidden_pairs();
        let g = build_accept_graph(&inst);
        let ext = k_extend(&inst, k).unwrap();
        for pair in &forbidden {
            prop_assert!(!g.has_edge(pair.first(), pair.second()));
            prop_assert!(!ext.mutually_acceptable(pair.first(), pair.second()));
        }
        prop_assert!(mutual_pairs(&ext.lists).is_disjoint(&forbidden));
        for x in &inst.agents {
            for y in inst.unwanted_by(x) {
                prop_assert!(!ext.list(x).contains(y));
            }
        }
        let all = enumerate_k_stable(&inst, k, usize::MAX, Budget::unlimited()).unwrap();
        for m in &all.matchings {
            prop_assert!(m.pairs().iter().all(|p| !forbidden.contains(p)));
        }
    }

    #[test]
    fn zero_extension_is_stated_then_inferred(inst in instance_strategy(12)) {
        let ext = k_extend(&inst, 0).unwrap();
        for x in &inst.agents {
            let expected = inst.stated(x).concat(&infer_list(x, &inst)).unwrap();
            prop_assert_eq!(ext.list(x), &expected);
            for (y, tag) in &ext.provenance[x] {
                prop_assert!(matches!(tag, Provenance::Stated | Provenance::Inferred), "{} has {}", y, tag);
            }
        }
        if inst.profiles.is_empty() {
            prop_assert_eq!(&ext.lists, &inst.stated_lists());
        }
    }

    #[test]
    fn extension_keeps_earlier_orders(inst in instance_strategy(12), k in 0u32..5) {
        let ext = k_extend(&inst, k).unwrap();
        for x in &inst.agents {
            let full = ext.list(x);
            let stated = inst.stated(x);
            // The stated list is a prefix, tier for tier.
            prop_assert_eq!(&full.tiers()[..stated.tier_count()], stated.tiers());
            // Inferred order survives distance tie-breaking.
            let inferred = infer_list(x, &inst);
            prop_assert!(order_preserved(&inferred, full));
            let r = ranks(full);
            for s in stated.agents() {
                for i in inferred.agents() {
                    prop_assert!(r[s] < r[i]);
                }
            }
        }
    }

    #[test]
    fn candidates_only_grow_with_k(inst in instance_strategy(12), k in 0u32..5) {
        let small = k_extend(&inst, k).unwrap();
        let big = k_extend(&inst, k + 1).unwrap();
        for x in &inst.agents {
            let (a, b) = (small.list(x), big.list(x));
            prop_assert!(a.agent_set().is_subset(&b.agent_set()));
            // From k = 1 on both sides use the same tie-breaking, so the
            // shared part must agree exactly.
            if k >= 1 {
                let rb = ranks(b);
                for y in a.agents() {
                    for z in a.agents() {
                        prop_assert_eq!(a.prefers(y, z), rb[y] < rb[z]);
                    }
                }
            } else {
                prop_assert!(order_preserved(a, b));
            }
        }
        prop_assert!(mutual_pairs(&small.lists).is_subset(&mutual_pairs(&big.lists)));
    }

    #[test]
    fn tie_breaking_at_zero_only_refines(inst in instance_strategy(10)) {
        let plain = k_extend(&inst, 0).unwrap();
        let broken = k_extend_with(&inst, 0, ExtendOptions { tie_break_at_zero: true }).unwrap();
        for x in &inst.agents {
            prop_assert_eq!(plain.list(x).agent_set(), broken.list(x).agent_set());
            prop_assert!(order_preserved(plain.list(x), broken.list(x)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn generator_is_deterministic_and_symmetric(n in 2usize..40, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let spec = GenSpec::new(n, p, seed);
        let inst = gen_er_sri(&spec).unwrap();
        prop_assert_eq!(&inst, &gen_er_sri(&spec).unwrap());
        for x in &inst.agents {
            prop_assert!(inst.stated(x).is_strict());
            for y in inst.stated(x).agents() {
                prop_assert!(inst.stated(y).contains(x), "{} lists {} but not back", x, y);
            }
        }
        let truncated = truncate_lists(&inst, 3).unwrap();
        for x in &inst.agents {
            prop_assert_eq!(truncated.stated(x), &inst.stated(x).prefix(3));
        }
    }

    #[test]
    fn full_spec_is_deterministic(
        n in 2usize..30,
        seed in any::<u64>(),
        criteria in prop::sample::select(vec![2usize, 5]),
        response in 0.0f64..=1.0,
    ) {
        let spec = GenSpec {
            truncate: Some(5),
            criteria_count: criteria,
            response_rate: response,
            unwanted_prob: 0.05,
            ..GenSpec::new(n, 0.3, seed)
        };
        let inst = generate(&spec).unwrap();
        prop_assert_eq!(&inst, &generate(&spec).unwrap());
        prop_assert!(inst.validate().is_valid());
        prop_assert_eq!(inst.profiles.len(), (response * n as f64).floor() as usize);
        for (x, w) in &inst.weights {
            prop_assert_eq!(w.0.len(), criteria);
            prop_assert!(w.0.iter().all(|&v| v as usize <= criteria));
            prop_assert_eq!(inst.profiles[x].0.len(), criteria);
        }
    }

    #[test]
    fn reciprocation_never_drops_when_extending(inst in instance_strategy(20), k in 0u32..4) {
        let stated = mutual_pairs(&inst.stated_lists()).len();
        let ext = mutual_pairs(&k_extend(&inst, k).unwrap().lists).len();
        prop_assert!(ext >= stated);
    }
}

#[test]
fn mean_completeness_matches_edge_probability() {
    let total: f64 = (0..100u64)
        .map(|seed| {
            completeness_degree(&gen_er_sri(&GenSpec::new(200, 0.25, seed)).unwrap()).unwrap()
        })
        .sum();
    let mean = total / 100.0;
    assert!((mean - 0.25).abs() <= 0.01, "mean c.d. {mean}");
}

#[test]
fn complete_graph_is_fully_mutual() {
    let inst = gen_er_sri(&GenSpec::new(12, 1.0, 3)).unwrap();
    assert_eq!(completeness_degree(&inst).unwrap(), 1.0);
    assert_eq!(mutual_acceptability_rate(&inst.stated).unwrap(), 1.0);
}
