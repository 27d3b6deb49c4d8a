#![allow(clippy::needless_range_loop)]

mod common;

use common::{blocks, brute_reach, brute_scc, brute_within, fixture, random_network, set};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use synckit::connectivity::{
    condensation, cumulative_in_k, in_neighborhood, in_reachability, rdc_decomposition,
    scc_decomposition, ReachabilityIndex,
};

#[test]
fn chain_sets() {
    let net = fixture("chain4");
    assert_eq!(in_neighborhood(&net, 2).unwrap(), set(&[2]));
    assert_eq!(cumulative_in_k(&net, 2, 1).unwrap(), set(&[2, 3]));
    assert_eq!(cumulative_in_k(&net, 2, 2).unwrap(), set(&[1, 2, 3]));
    assert_eq!(in_reachability(&net, 2).unwrap(), set(&[1, 2, 3]));
    assert_eq!(cumulative_in_k(&net, 3, 3).unwrap(), in_reachability(&net, 3).unwrap());
    assert_eq!(cumulative_in_k(&net, 0, 0).unwrap(), set(&[1]));
    assert_eq!(in_reachability(&net, 0).unwrap(), set(&[1]));
}

#[test]
fn four_component_network() {
    let net = fixture("four_scc");
    let scc = scc_decomposition(&net);
    assert_eq!(scc.assignment(), blocks(&[&[1, 2, 3], &[4], &[5], &[6, 7]]).as_slice());
    let cond = condensation(&net);
    assert_eq!(cond.dag_edges, BTreeSet::from([(0, 1), (0, 3), (2, 3)]));
    assert_eq!(cond.roots, BTreeSet::from([0, 2]));
    assert_eq!(
        rdc_decomposition(&net).assignment(),
        blocks(&[&[1, 2, 3, 4], &[5], &[6, 7]]).as_slice()
    );
    let index = ReachabilityIndex::new(&net);
    assert_eq!(index.reach(3), &set(&[1, 2, 3, 4]));
    assert_eq!(index.roots_of(6), BTreeSet::from([0, 2]));
}

fn check_against_oracles(net: &synckit::network::Network) {
    let reach = brute_reach(net);
    assert_eq!(scc_decomposition(net).assignment(), brute_scc(net).as_slice());
    let index = ReachabilityIndex::new(net);
    for c in 0..net.len() {
        let expected: BTreeSet<usize> = (0..net.len()).filter(|&d| reach[d][c]).collect();
        assert_eq!(in_reachability(net, c).unwrap(), expected);
        assert_eq!(index.reach(c), &expected);
        for k in 0..=net.len() {
            assert_eq!(cumulative_in_k(net, c, k).unwrap(), brute_within(net, c, k));
        }
    }
    let cond = condensation(net);
    let order = cond.topological_order();
    assert_eq!(order.len(), cond.num_components());
    for &(a, b) in &cond.dag_edges {
        let pa = order.iter().position(|&s| s == a).unwrap();
        let pb = order.iter().position(|&s| s == b).unwrap();
        assert!(pa < pb);
    }
    let scc = &cond.scc_partition;
    for s in 0..scc.rank() {
        let has_external_in = (0..net.len()).any(|c| {
            scc.color_of(c) == s
                && (0..net.len()).any(|d| scc.color_of(d) != s && reach[d][c])
        });
        assert_eq!(cond.roots.contains(&s), !has_external_in);
    }
    let rdc = rdc_decomposition(net);
    for a in 0..net.len() {
        for b in 0..net.len() {
            let roots = |c: usize| -> BTreeSet<usize> {
                cond.roots
                    .iter()
                    .copied()
                    .filter(|&r| (0..net.len()).any(|d| scc.color_of(d) == r && reach[d][c]))
                    .collect()
            };
            assert_eq!(rdc.color_of(a) == rdc.color_of(b), roots(a) == roots(b));
        }
    }
}

#[test]
fn random_networks_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let net = random_network(&mut rng, 10, 2, &[-1, 1, 2], 0.75);
        check_against_oracles(&net);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn neighborhoods_grow_monotonically(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 8, 2, &[-1, 1], 0.7);
        for c in 0..net.len() {
            let mut prev = cumulative_in_k(&net, c, 0).unwrap();
            for k in 1..=net.len() {
                let next = cumulative_in_k(&net, c, k).unwrap();
                prop_assert!(prev.is_subset(&next));
                prev = next;
            }
            prop_assert_eq!(prev, in_reachability(&net, c).unwrap());
        }
    }

    #[test]
    fn scc_refines_rdc(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 8, 1, &[1], 0.7);
        prop_assert!(scc_decomposition(&net).refines(&rdc_decomposition(&net)).unwrap());
        prop_assert!(!condensation(&net).roots.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reachability_is_transitively_closed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 8, 1, &[1, -1], 0.75);
        let sets: Vec<_> = (0..net.len()).map(|c| in_reachability(&net, c).unwrap()).collect();
        for d in 0..net.len() {
            for &c in &sets[d] {
                prop_assert!(sets[c].is_subset(&sets[d]));
            }
        }
    }

    #[test]
    fn root_count_bounds_rdc_rank(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 10, 1, &[1], 0.85);
        let roots = condensation(&net).roots.len() as u32;
        let rank = rdc_decomposition(&net).rank() as u64;
        prop_assert!(rank < (1u64 << roots));
    }

    #[test]
    fn cumulative_sets_stabilize(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 8, 1, &[1], 0.8);
        for c in 0..net.len() {
            let sets: Vec<_> = (0..=net.len() + 2).map(|k| cumulative_in_k(&net, c, k).unwrap()).collect();
            for k in 0..sets.len() - 1 {
                if sets[k] == sets[k + 1] {
                    prop_assert!(sets[k + 1..].iter().all(|s| *s == sets[k]));
                }
            }
        }
    }
}
