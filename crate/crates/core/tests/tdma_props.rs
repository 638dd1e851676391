use proptest::prelude::*;
use sbmis::mis::{BaselineSolver, MisSolver};
use sbmis::tdma::{
    build_interference, build_tree, build_unit_graph, gen_field, validate_schedule, Field, InterferenceClass,
    Scheduler, CENTER,
};

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn schedules_are_valid(n_s in 10usize..90, seed in any::<u64>(), sb in any::<bool>()) {
        let f = gen_field(n_s, InterferenceClass::Lif, seed).unwrap();
        let mut s = Scheduler::new(f.clone(), seed).unwrap();
        let sched = if sb { s.run(&MisSolver::new()).unwrap() } else { s.run(&BaselineSolver).unwrap() };
        prop_assert_eq!(validate_schedule(&f, s.tree(), s.interference(), &sched), Ok(()));
        prop_assert!(sched.total_slots() >= s.tree().depth());
        prop_assert!(sched.total_slots() <= n_s);
        prop_assert!(s.trace().iter().all(|t| !t.scheduled.is_empty()));
    }

    #[test]
    fn tree_is_spanning_shortest_path(n_s in 10usize..120, seed in any::<u64>()) {
        let f = gen_field(n_s, InterferenceClass::Lif, seed).unwrap();
        let u = build_unit_graph(&f);
        let t = build_tree(&f, &u).unwrap();
        prop_assert_eq!(t.edges().len(), n_s);
        for (v, p) in t.edges() {
            prop_assert!(f.within(v, p));
        }
        let g = build_interference(&f, &t);
        for (a, b) in g.edges() {
            prop_assert!(*a != 0 && *b != 0);
        }
    }
}

#[test]
fn figure_scenario_conflict() {
    // 2 is the parent of 1; 3 transmits to the BS but sits inside 2's radius.
    let f = Field::new(vec![[0.5, 0.68], [0.5, 0.59], [0.58, 0.56]], CENTER, 0.1).unwrap();
    let t = build_tree(&f, &build_unit_graph(&f)).unwrap();
    assert_eq!(t.parent_of(1), Some(2));
    assert_eq!(t.parent_of(3), Some(0));
    assert!(build_interference(&f, &t).has_edge(1, 3));
}

#[test]
fn step_and_run_agree() {
    let f = gen_field(80, InterferenceClass::Lif, 5).unwrap();
    let mut a = Scheduler::new(f.clone(), 1).unwrap();
    let mut b = Scheduler::new(f, 1).unwrap();
    let solver = MisSolver::new();
    while a.step(&solver).unwrap().is_some() {}
    assert_eq!(a.slots(), b.run(&solver).unwrap().slots.as_slice());
}
