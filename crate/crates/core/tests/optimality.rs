use idnc_core::cooperation::{build_full_graph, build_pruned_graph, build_reduced_graph};
use idnc_core::model::expected_delay;
use idnc_core::schedulers::{schedule_oracle, schedule_pc_optimal};
use idnc_core::verify;

#[test]
fn optimal_policy_matches_oracle() {
    let check = verify::oracle_optimality(11, 150);
    assert!(check.passed, "{check}");
}

#[test]
fn pruned_graph_reaches_full_optimum() {
    let check = verify::pruned_equivalence(12, 100);
    assert!(check.passed, "{check}");
}

/// Layered merging only keeps a merge that is at least as heavy as both of
/// its parents. Here the best cluster {0, 1, 6} is heavier than every
/// singleton, but each of its two-device subsets is lighter than one of its
/// parents, so it is never generated and the pruned graph settles for a
/// worse schedule. The full graph still finds the optimum.
#[test]
fn layered_merging_can_miss_a_cluster() {
    use idnc_core::{DeviceSet, ErasureModel, PacketSet, SideInformation, Topology};

    let p = |items: &[usize]| items.iter().copied().collect::<PacketSet>();
    let has = vec![p(&[0]), p(&[0, 1, 2]), p(&[2]), p(&[0, 1, 2]), p(&[]), p(&[0]), p(&[3]), p(&[0, 1])];
    let state = SideInformation::new(4, has).unwrap();
    let edges = [(0, 1), (0, 6), (0, 7), (1, 3), (1, 4), (1, 6), (2, 4), (2, 6), (5, 6)];
    let topology = Topology::from_edges(8, &edges).unwrap();
    let erasure = ErasureModel::uniform(8, 0.7, 0.6).unwrap();

    let oracle = schedule_oracle(&state, &topology, &erasure).unwrap();
    let best = expected_delay(&state, &topology, &erasure, &oracle).unwrap();
    let full = build_full_graph(&state, &topology, &erasure).unwrap().best_schedule();
    let pruned = build_pruned_graph(&state, &topology, &erasure).best_schedule();

    assert_eq!(oracle.transmitters(), [0, 1, 6].into_iter().collect::<DeviceSet>());
    assert!((expected_delay(&state, &topology, &erasure, &full).unwrap() - best).abs() < 1e-9);
    assert!(expected_delay(&state, &topology, &erasure, &pruned).unwrap() > best + 0.1);
}

#[test]
fn reduced_graph_keeps_the_layered_optimum() {
    for (seed, max_m, max_n) in [(5, 8, 4), (6, 10, 5), (7, 12, 3)] {
        for k in 0..300 {
            let i = verify::random_instance(seed, k, max_m, max_n);
            let layered = build_pruned_graph(&i.state, &i.topology, &i.erasure);
            let reduced = build_reduced_graph(&i.state, &i.topology, &i.erasure);
            assert!(reduced.len() <= layered.len());
            let (a, b) = (layered.best_clique().weight, reduced.best_clique().weight);
            assert!((a - b).abs() < 1e-9, "seed {seed} instance {k}: {a} vs {b}");
            let schedule = schedule_pc_optimal(&i.state, &i.topology, &i.erasure);
            let delay = expected_delay(&i.state, &i.topology, &i.erasure, &schedule).unwrap();
            let wanting = i.state.wanting().len() as f64;
            assert!((wanting - delay - b).abs() < 1e-9);
        }
    }
}

#[test]
fn reduced_graph_ignores_devices_out_of_reach() {
    use idnc_core::{ErasureModel, PacketSet, SideInformation, Topology};

    // Only device 0 misses anything; devices 3..6 hang off a path far away.
    let mut has = vec![PacketSet::full(3); 7];
    has[0] = PacketSet::empty();
    let state = SideInformation::new(3, has).unwrap();
    let topology = Topology::line(7);
    let erasure = ErasureModel::uniform(7, 0.1, 0.2).unwrap();
    let graph = build_reduced_graph(&state, &topology, &erasure);
    assert!(graph.plans().iter().all(|p| p.cluster.members().iter().all(|d| d < 2)));
    let schedule = graph.best_schedule();
    assert_eq!(schedule.transmitters().iter().collect::<Vec<_>>(), vec![1]);
}
