//! Randomized invariants over the complete-graph family and small random
//! multigraphs.

use proptest::prelude::*;

use sandpiles::dynamics::{
    add_grain, det_stabilize, det_topple, is_stable, level, max_stable, sto_topple_with_coins,
};
use sandpiles::graph::Multigraph;
use sandpiles::recurrence::{
    dhar_burning, is_dr, is_dr_complete, is_parking_function, is_sr_complete, is_sr_flow,
    stochastic_burning,
};

fn complete_config() -> impl Strategy<Value = (usize, Vec<u32>)> {
    (2usize..=6).prop_flat_map(|n| {
        (
            Just(n),
            proptest::collection::vec(0..n as u32, n),
        )
    })
}

proptest! {
    // the complement map carries DR states to parking functions and back
    #[test]
    fn dr_iff_complement_parking((n, c) in complete_config()) {
        let complement: Vec<u32> = c.iter().map(|&x| n as u32 - x).collect();
        prop_assert_eq!(
            is_dr_complete(&c).unwrap(),
            is_parking_function(&complement).unwrap()
        );
    }

    // both recurrence notions are label-symmetric on K_n
    #[test]
    fn recurrence_is_permutation_invariant((n, c) in complete_config(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut permuted = c.clone();
        permuted.shuffle(&mut rng);
        prop_assert_eq!(is_dr_complete(&c).unwrap(), is_dr_complete(&permuted).unwrap());
        prop_assert_eq!(is_sr_complete(&c).unwrap(), is_sr_complete(&permuted).unwrap());
        let _ = n;
    }

    #[test]
    fn dr_implies_sr((n, c) in complete_config()) {
        if is_dr_complete(&c).unwrap() {
            prop_assert!(is_sr_complete(&c).unwrap());
        }
        let _ = n;
    }

    // Algorithm-2 verdict matches the general checkers on K_n
    #[test]
    fn fast_paths_match_general_checkers((n, c) in complete_config()) {
        let g = Multigraph::complete(n).unwrap();
        let (k, _) = stochastic_burning(&c).unwrap();
        prop_assert_eq!(k == 0, is_sr_flow(&g, &c).unwrap().recurrent);
        let report = dhar_burning(&g, &c).unwrap();
        prop_assert_eq!(report.remain.is_empty(), is_dr_complete(&c).unwrap());
        prop_assert_eq!(report.remain.is_empty(), is_dr(&g, &c).unwrap().recurrent);
    }

    // toppling with every coin heads is exactly the deterministic toppling
    #[test]
    fn all_heads_is_deterministic((n, c) in complete_config(), extra in 1u32..=4) {
        let g = Multigraph::complete(n).unwrap();
        let mut loaded = c.clone();
        loaded[0] += extra + n as u32;
        let i = 1;
        let coins = vec![true; g.degree(i).unwrap() as usize];
        prop_assert_eq!(
            sto_topple_with_coins(&g, &loaded, i, &coins).unwrap(),
            det_topple(&g, &loaded, i).unwrap()
        );
    }

    // a toppling lowers the level by the vertex's sink multiplicity
    #[test]
    fn level_drop_is_sink_multiplicity((n, c) in complete_config(), sink_mult in 1u32..=3) {
        let g = Multigraph::complete_multi_sink(n, sink_mult).unwrap();
        let mut loaded = c.clone();
        loaded[0] += g.degree(1).unwrap();
        let before = level(&g, &loaded).unwrap();
        let after = level(&g, &det_topple(&g, &loaded, 1).unwrap()).unwrap();
        prop_assert_eq!(before - after, g.multiplicity(1, 0) as i64);
    }

    // stabilization reaches a stable state and only sheds grains via the sink
    #[test]
    fn stabilization_accounts_for_grains((n, c) in complete_config(), extra in 0u32..=5) {
        let g = Multigraph::complete(n).unwrap();
        let mut loaded = c.clone();
        loaded[n - 1] += extra;
        let trace = det_stabilize(&g, &loaded).unwrap();
        prop_assert!(is_stable(&g, &trace.result).unwrap());
        let before: u64 = loaded.iter().map(|&x| x as u64).sum();
        let after: u64 = trace.result.iter().map(|&x| x as u64).sum();
        prop_assert_eq!(after + trace.grains_to_sink(), before);
    }

    // one grain on a stable state topples every vertex at most once, and
    // seeding c^max always lands on a DR state
    #[test]
    fn single_grain_topples_each_vertex_at_most_once((n, c) in complete_config(), i in 1usize..=6) {
        let g = Multigraph::complete(n).unwrap();
        let i = (i - 1) % n + 1;
        let trace = det_stabilize(&g, &add_grain(&g, &c, i).unwrap()).unwrap();
        prop_assert!(trace.topple_counts.iter().all(|&t| t <= 1));
        let cmax = max_stable(&g);
        let seeded = det_stabilize(&g, &add_grain(&g, &cmax, i).unwrap()).unwrap();
        prop_assert!(is_dr_complete(&seeded.result).unwrap());
    }
}
