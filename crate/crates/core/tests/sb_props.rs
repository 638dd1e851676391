use proptest::prelude::*;
use sbmis::formulations::{build_mis_ising, gen_random_graph, GraphSpec, MisWeights};
use sbmis::indexed::FixedPointFormat;
use sbmis::ising::{IsingModel, SpinConfig};
use sbmis::sb::{batch_map, decode_replicas, sb_step, DenseCoupling, LightEngine, SbParams, SbState, WideEngine};

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn wall_holds_after_every_step(
        n in 1usize..12,
        j in prop::collection::vec(-2.0f64..2.0, 144),
        h in prop::collection::vec(-2.0f64..2.0, 12),
        x in prop::collection::vec(-1.0f64..=1.0, 12),
        y in prop::collection::vec(-3.0f64..3.0, 12),
        c in 0.01f64..2.0, dt in 0.01f64..1.5, a in 0.0f64..=1.0,
    ) {
        let mut sym = vec![0.0; n * n];
        for a in 0..n {
            for b in a + 1..n {
                sym[a * n + b] = j[a * 12 + b];
                sym[b * n + a] = j[a * 12 + b];
            }
        }
        let params = SbParams { c, dt, step: 1, a0: 1.0 };
        let mut s = SbState { x: x[..n].to_vec(), y: y[..n].to_vec(), k: 0 };
        for _ in 0..5 {
            let before = s.clone();
            sb_step(&mut s, &mut DenseCoupling::new(&sym, n), &h[..n], &params, a);
            for i in 0..n {
                prop_assert!(s.x[i].abs() <= 1.0);
                // nonzero momentum at the wall only if the update landed exactly on it
                if s.x[i].abs() == 1.0 && s.y[i] != 0.0 {
                    prop_assert!((before.x[i] + s.y[i] * dt).abs() <= 1.0);
                }
            }
        }
    }

    #[test]
    fn engines_agree_on_mis(n in 2usize..64, p in 0.05f64..0.6, seed in 0u64..1000) {
        let g = gen_random_graph(&GraphSpec::Er { n, p }, seed).unwrap();
        let m = build_mis_ising(&g, MisWeights::default());
        let params = SbParams { c: 0.4, dt: 0.3, step: 120, a0: 1.0 };
        let wide = WideEngine::default().run(&m, &params, 3, seed).unwrap();
        let light = LightEngine::quantized(FixedPointFormat::default());
        for r in wide.results.iter().take(8) {
            let l = light.shot(&m, &params, seed, r.shot_index).unwrap();
            prop_assert_eq!(&l.spins, &r.spins);
            prop_assert_eq!(l.energy.to_bits(), r.energy.to_bits());
        }
    }

    #[test]
    fn padding_does_not_change_replica_energies(n in 1usize..40, seed in any::<u64>(), noise in prop::collection::vec(any::<bool>(), 128)) {
        let g = gen_random_graph(&GraphSpec::Er { n, p: 0.3 }, seed).unwrap();
        let m = build_mis_ising(&g, MisWeights::default());
        let (_, layout) = batch_map(&m, 128).unwrap();
        let base: Vec<i8> = (0..128).map(|i| if (seed >> (i % 64)) & 1 == 1 { 1 } else { -1 }).collect();
        let mut noisy = base.clone();
        for i in layout.used()..128 {
            noisy[i] = if noise[i] { 1 } else { -1 };
        }
        let a = decode_replicas(&SpinConfig::new(base).unwrap(), &layout).unwrap();
        let b = decode_replicas(&SpinConfig::new(noisy).unwrap(), &layout).unwrap();
        prop_assert_eq!(a.len(), layout.replicas);
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(m.energy(x).unwrap(), m.energy(y).unwrap());
        }
    }
}

#[test]
fn stacked_energy_is_sum_of_replica_energies() {
    let g = gen_random_graph(&GraphSpec::Er { n: 30, p: 0.2 }, 4).unwrap();
    let m = build_mis_ising(&g, MisWeights::default());
    let (big, layout) = batch_map(&m, 100).unwrap();
    assert_eq!(layout.replicas, 3);
    let s = SpinConfig::new((0..100).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect()).unwrap();
    let parts: f64 = decode_replicas(&s, &layout).unwrap().iter().map(|r| m.energy(r).unwrap()).sum();
    let pad = &s.as_slice()[layout.used()..];
    let pad_model = IsingModel::zeros(pad.len()).unwrap();
    let pad_e = pad_model.energy(&SpinConfig::new(pad.to_vec()).unwrap()).unwrap();
    assert_eq!(big.energy(&s).unwrap(), parts + pad_e);
}

#[test]
fn replica_results_do_not_depend_on_neighbours() {
    // The same shot index gives the same spins whether it runs alone on the
    // light engine or stacked with other replicas on the wide engine.
    let g = gen_random_graph(&GraphSpec::Er { n: 200, p: 0.05 }, 8).unwrap();
    let m = build_mis_ising(&g, MisWeights::default());
    let params = SbParams { c: 0.4, dt: 0.3, step: 100, a0: 1.0 };
    let wide = WideEngine { n_max: 1000, ..WideEngine::default() }.run(&m, &params, 5, 2).unwrap();
    assert_eq!(wide.results.len(), 5);
    let light = LightEngine::quantized(FixedPointFormat::default());
    for r in &wide.results {
        assert_eq!(light.shot(&m, &params, 2, r.shot_index).unwrap().spins, r.spins);
    }
}
