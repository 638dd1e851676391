use proptest::prelude::*;
use sbmis::formulations::{gen_random_graph, Graph, GraphSpec};
use sbmis::ising::SpinConfig;
use sbmis::mis::{baseline_mis, decode_and_repair, exact_mis, MisSolver};

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, 0.0f64..=1.0, any::<u64>())
        .prop_map(|(n, p, seed)| gen_random_graph(&GraphSpec::Er { n, p }, seed).unwrap())
}

fn brute_force(g: &Graph) -> usize {
    let n = g.num_nodes();
    (0u32..1 << n)
        .filter(|m| g.edges().iter().all(|&(u, v)| m >> u & 1 == 0 || m >> v & 1 == 0))
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn repair_is_maximal_independent(g in graph(40), bits in prop::collection::vec(any::<bool>(), 40)) {
        let s = SpinConfig::new(bits[..g.num_nodes()].iter().map(|&b| if b { 1 } else { -1 }).collect()).unwrap();
        let set = decode_and_repair(&s, &g);
        prop_assert!(g.is_maximal_independent(&set));
        // nodes outside the original selection are only added, never needed for feasibility
        let selected: Vec<usize> = (0..g.num_nodes()).filter(|&i| bits[i]).collect();
        if g.is_independent(&selected) {
            prop_assert!(selected.iter().all(|v| set.contains(v)));
        }
    }

    #[test]
    fn exact_matches_brute_force(g in graph(14)) {
        let s = exact_mis(&g).unwrap();
        prop_assert!(g.is_independent(&s));
        prop_assert_eq!(s.len(), brute_force(&g));
    }

    #[test]
    fn baseline_is_maximal(g in graph(60), seed in any::<u64>()) {
        prop_assert!(g.is_maximal_independent(&baseline_mis(&g, seed).nodes));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn solver_is_always_feasible(g in graph(60), seed in any::<u64>()) {
        let s = MisSolver::new().solve(&g, seed).unwrap();
        prop_assert!(g.is_maximal_independent(&s.nodes));
    }
}
