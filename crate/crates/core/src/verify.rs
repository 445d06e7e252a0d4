//! Seeded randomized checks of the scheduler against independent references:
//! exhaustive search, brute-force cliques, direct set classification, and
//! Monte Carlo replay.

use std::fmt;

use itertools::Itertools;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clique::{brute_force_clique, max_weight_clique, Clique, WeightedGraph, WEIGHT_TOLERANCE};
use crate::cooperation::{build_clustering_seeded, build_full_graph, build_pruned_graph, schedule_from_clique};
use crate::idnc::{best_combination, build_local_graph};
use crate::model::{
    classify_packet, expected_delay, interference_set, opportunity_zone, shadow_set, DelayTally, ErasureModel,
    Reception, Schedule, Sender, SideInformation, Topology,
};
use crate::schedulers::{schedule, schedule_oracle, schedule_pc_optimal, PolicyId};
use crate::sets::DeviceSet;
use crate::simulator::{generate_topology, initial_phase, realize_round, trial_rng};

/// Connectivities used by the instance generator.
pub const CONNECTIVITIES: [f64; 3] = [0.2, 0.5, 0.8];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub state: SideInformation,
    pub topology: Topology,
    pub erasure: ErasureModel,
}

/// Per-link erasures uniform in `[0, 0.5)`, base-station erasures uniform
/// in `[0.1, 0.6)`.
pub fn random_erasure(devices: usize, rng: &mut ChaCha8Rng) -> ErasureModel {
    let d2d = (0..devices)
        .map(|i| {
            (0..devices)
                .map(|j| if i == j { 0.0 } else { rng.gen_range(0.0..0.5) })
                .collect()
        })
        .collect();
    let bs = (0..devices).map(|_| rng.gen_range(0.1..0.6)).collect();
    ErasureModel::new(d2d, bs).expect("probabilities lie in [0, 1)")
}

/// Random connected instance number `index` of `seed`, with `2..=max_devices`
/// devices, `1..=max_packets` packets and a connectivity drawn from
/// [`CONNECTIVITIES`].
pub fn random_instance(seed: u64, index: u64, max_devices: usize, max_packets: usize) -> Instance {
    let mut rng = trial_rng(seed, index);
    let m = rng.gen_range(2..=max_devices);
    let n = rng.gen_range(1..=max_packets);
    let c = CONNECTIVITIES[rng.gen_range(0..CONNECTIVITIES.len())];
    let topology = generate_topology(m, c, &mut rng).expect("small networks connect quickly");
    let erasure = random_erasure(m, &mut rng);
    let state = initial_phase(n, &erasure, &mut rng).expect("base-station erasures are below 1");
    Instance {
        state,
        topology,
        erasure,
    }
}

fn delay_of(inst: &Instance, s: &Schedule) -> f64 {
    expected_delay(&inst.state, &inst.topology, &inst.erasure, s).expect("policies emit valid schedules")
}

/// The optimal policy reaches the exhaustive minimum of the expected delay.
pub fn oracle_optimality(seed: u64, count: u64) -> Check {
    let mut misses = Vec::new();
    for k in 0..count {
        let inst = random_instance(seed, k, 8, 4);
        let optimal = delay_of(&inst, &schedule_pc_optimal(&inst.state, &inst.topology, &inst.erasure));
        let oracle = schedule_oracle(&inst.state, &inst.topology, &inst.erasure).expect("within the oracle guard");
        let best = delay_of(&inst, &oracle);
        if (optimal - best).abs() > WEIGHT_TOLERANCE {
            misses.push(format!("#{k}: {optimal:.6} vs {best:.6}"));
        }
    }
    report("optimal policy vs exhaustive oracle", count, misses)
}

/// Layered merging keeps the maximum clique weight of the full graph.
pub fn pruned_equivalence(seed: u64, count: u64) -> Check {
    let mut misses = Vec::new();
    for k in 0..count {
        let inst = random_instance(seed, k, 10, 5);
        let full = build_full_graph(&inst.state, &inst.topology, &inst.erasure)
            .expect("within the full-graph guard")
            .best_clique();
        let pruned = build_pruned_graph(&inst.state, &inst.topology, &inst.erasure).best_clique();
        if (full.weight - pruned.weight).abs() > WEIGHT_TOLERANCE {
            misses.push(format!("#{k}: full {:.6}, pruned {:.6}", full.weight, pruned.weight));
        }
    }
    report("pruned graph vs full graph", count, misses)
}

// Connected components of the overlap graph on `a`, as sorted member lists.
fn overlap_components(topology: &Topology, a: DeviceSet) -> Vec<DeviceSet> {
    let mut left = a;
    let mut parts = Vec::new();
    while let Some(seed) = left.first() {
        let mut part = DeviceSet::singleton(seed);
        let mut frontier = vec![seed];
        while let Some(x) = frontier.pop() {
            for y in left - part {
                if topology.coverage(x).intersects(topology.coverage(y)) {
                    part.insert(y);
                    frontier.push(y);
                }
            }
        }
        left = left - part;
        parts.push(part);
    }
    parts.sort_by(|x, y| x.lex_cmp(*y));
    parts
}

/// Clustering every transmitter set under every seed order gives the same
/// partition, which equals the components of the coverage-overlap graph.
pub fn clustering_uniqueness(seed: u64, topologies: u64, max_devices: usize) -> Check {
    let mut misses = Vec::new();
    let mut orders = 0u64;
    for k in 0..topologies {
        let mut rng = trial_rng(seed, k);
        let m = rng.gen_range(2..=max_devices);
        let c = CONNECTIVITIES[rng.gen_range(0..CONNECTIVITIES.len())];
        let topology = generate_topology(m, c, &mut rng).expect("small networks connect quickly");
        for a in DeviceSet::full(m).subsets_lex() {
            let expected = overlap_components(&topology, a);
            let members = a.to_vec();
            for order in members.iter().copied().permutations(members.len()) {
                orders += 1;
                let clustering = build_clustering_seeded(&topology, a, &order);
                let mut got: Vec<DeviceSet> = clustering.clusters().iter().map(|c| c.members()).collect();
                got.sort_by(|x, y| x.lex_cmp(*y));
                if got != expected || !clustering.is_valid(&topology) {
                    misses.push(format!("topology #{k}, A = {a:?}, order {order:?}"));
                    break;
                }
            }
        }
    }
    let mut check = report("clustering independent of seed order", topologies, misses);
    check.detail = format!("{} ({orders} orders)", check.detail);
    check
}

/// Direct classification of every device by the number of transmitters
/// covering it agrees with the interference, shadow and opportunity sets,
/// and those sets partition the network. When the transmitters' coverage
/// zones are pairwise disjoint the opportunity zone of `i` is `C_i \ {i}`.
pub fn partition_identities(seed: u64, count: u64) -> Check {
    let mut misses = Vec::new();
    for k in 0..count {
        let mut rng = trial_rng(seed, k);
        let m = rng.gen_range(1..=12);
        let c = rng.gen_range(0.15..=1.0);
        let topology = generate_topology(m, c, &mut rng).expect("small networks connect quickly");
        let a: DeviceSet = if rng.gen_bool(0.5) {
            (0..m).filter(|_| rng.gen_bool(0.4)).collect()
        } else {
            // Greedy set with pairwise disjoint coverage.
            let mut a = DeviceSet::empty();
            for i in rand::seq::index::sample(&mut rng, m, m) {
                if !topology.coverage(i).intersects(topology.total_coverage(a)) {
                    a.insert(i);
                }
            }
            a
        };
        let disjoint = a.iter().map(|i| topology.coverage(i).len()).sum::<usize>() == topology.total_coverage(a).len();
        let erasure = random_erasure(m, &mut rng);
        let state = initial_phase(rng.gen_range(1..=6), &erasure, &mut rng).expect("q < 1");

        let t = interference_set(&topology, a);
        let s = shadow_set(&topology, a);
        let mut ok = true;
        let mut zones = vec![DeviceSet::empty(); m];
        for j in 0..m {
            let hearing: Vec<usize> = a.iter().filter(|&i| topology.connected(i, j)).collect();
            let in_a = a.contains(j);
            ok &= t.contains(j) == (!in_a && hearing.len() >= 2);
            ok &= s.contains(j) == hearing.is_empty();
            if !in_a && hearing.len() == 1 {
                zones[hearing[0]].insert(j);
            }
        }
        let wanting = state.wanting();
        let mut seen = DeviceSet::empty();
        let mut parts = vec![a & wanting, t & wanting, s & wanting, topology.devices() - wanting];
        for i in a {
            let zone = opportunity_zone(&topology, a, i).expect("i transmits");
            ok &= zone == zones[i];
            if disjoint {
                ok &= zone == topology.coverage(i) - DeviceSet::singleton(i);
            }
            parts.push(zone & wanting);
        }
        for p in parts {
            ok &= !seen.intersects(p);
            seen |= p;
        }
        ok &= seen == topology.devices();
        ok &= crate::model::device_partition_check(&state, &topology, a);
        if !ok {
            misses.push(format!("#{k}: A = {a:?}"));
        }
    }
    report("partition and interference-free opportunity zones", count, misses)
}

/// Every clique of the full cooperation graph: its weight equals `|M_w|`
/// minus the expected delay of its schedule, and there is one clique per
/// transmitter set.
pub fn objective_bridge(seed: u64, count: u64) -> Check {
    let mut misses = Vec::new();
    let mut cliques = 0u64;
    for k in 0..count {
        let inst = random_instance(seed, k, 8, 4);
        let m = inst.state.num_devices();
        let wanting = inst.state.wanting().len() as f64;
        let graph = build_full_graph(&inst.state, &inst.topology, &inst.erasure).expect("within the full-graph guard");
        let mut sets = Vec::new();
        let mut bad = 0;
        graph.graph().for_each_clique(|members| {
            let weight: f64 = members.iter().map(|&v| graph.graph().weight(v)).sum();
            let clique = Clique {
                members: members.to_vec(),
                weight,
            };
            let s = schedule_from_clique(&graph, &clique);
            if (weight - (wanting - delay_of(&inst, &s))).abs() > WEIGHT_TOLERANCE {
                bad += 1;
            }
            sets.push(s.transmitters());
        });
        cliques += sets.len() as u64;
        sets.sort_by_key(|s| s.bits());
        sets.dedup();
        if bad > 0 || sets.len() != 1 << m {
            misses.push(format!("#{k}: {bad} weight mismatches, {} transmitter sets", sets.len()));
        }
    }
    let mut check = report("clique weight equals delay reduction", count, misses);
    check.detail = format!("{} ({cliques} cliques)", check.detail);
    check
}

/// The best combination of each transmitter matches a scan over every
/// subset of its Has set, and every clique of its local graph decodes at
/// each member device.
pub fn combination_soundness(seed: u64, count: u64) -> Check {
    let mut misses = Vec::new();
    for k in 0..count {
        let inst = random_instance(seed, k, 8, 5);
        let state = &inst.state;
        for i in 0..state.num_devices() {
            let zone = (inst.topology.coverage(i) - DeviceSet::singleton(i)) & state.wanting();
            let local = build_local_graph(state, &inst.topology, &inst.erasure, i, zone).expect("zone is in range");
            let mut sound = true;
            local.graph().for_each_clique(|members| {
                let packets = members.iter().map(|&v| local.graph().label(v).packet).collect();
                for &v in members {
                    let device = local.graph().label(v).device;
                    sound &= matches!(classify_packet(state, device, packets), Ok(Reception::InstantlyDecodable(_)));
                }
            });
            let scan = state
                .has(i)
                .subsets_lex()
                .into_iter()
                .filter(|kappa| !kappa.is_empty())
                .map(|kappa| {
                    zone.iter()
                        .filter(|&j| matches!(classify_packet(state, j, kappa), Ok(Reception::InstantlyDecodable(_))))
                        .map(|j| 1.0 - inst.erasure.d2d(i, j))
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            let gain = best_combination(&local).gain;
            if !sound || (gain - scan).abs() > WEIGHT_TOLERANCE {
                misses.push(format!("#{k} device {i}: gain {gain:.6}, scan {scan:.6}, sound {sound}"));
            }
        }
    }
    report("combination gain and decodability", count, misses)
}

/// Replays fixed schedules with fresh erasures; the mean realized delay of
/// one slot stays within three standard errors of the expected delay.
pub fn realized_vs_expected(seed: u64, replays: u64) -> Check {
    let mut misses = Vec::new();
    let mut notes = Vec::new();
    let fixtures = replay_fixtures(seed);
    for (label, inst, s) in &fixtures {
        let expected = delay_of(inst, s);
        let mut rng = trial_rng(seed, u64::MAX - 1);
        let samples: Vec<f64> = (0..replays)
            .map(|_| {
                let mut state = inst.state.clone();
                let mut tally = DelayTally::new(state.num_devices());
                realize_round(&mut state, &inst.topology, &inst.erasure, s, &mut rng, false, &mut tally)
                    .expect("valid schedule") as f64
            })
            .collect();
        let stats = crate::simulator::Moments::of(&samples);
        let se = stats.std / (replays as f64).sqrt();
        let z = if se > 0.0 { (stats.mean - expected) / se } else { 0.0 };
        notes.push(format!("{label} z={z:+.2}"));
        if (stats.mean - expected).abs() > 3.0 * se + WEIGHT_TOLERANCE {
            misses.push(format!("{label}: mean {:.4}, expected {expected:.4}, se {se:.4}", stats.mean));
        }
    }
    let mut check = report("realized delay matches expected delay", fixtures.len() as u64, misses);
    check.detail = format!("{} [{}]", check.detail, notes.join(", "));
    check
}

// Whether some reachable wanting device is left untargeted, so the realized
// delay of the slot is random.
fn has_untargeted(inst: &Instance, s: &Schedule) -> bool {
    let wanting = inst.state.wanting();
    let a = s.transmitters();
    s.transmissions().iter().any(|t| {
        let reach = match t.sender {
            Sender::BaseStation => wanting,
            Sender::Device(i) => opportunity_zone(&inst.topology, a, i).expect("i transmits") & wanting,
        };
        !(reach - t.targets).is_empty()
    })
}

// First instance of `seed` with at least six devices on which the optimal
// schedule uses two or more transmitters and every compared schedule leaves
// a reachable device untargeted.
fn replay_fixtures(seed: u64) -> Vec<(&'static str, Instance, Schedule)> {
    for k in 0.. {
        let inst = random_instance(seed, k, 8, 4);
        if inst.state.num_devices() < 6 {
            continue;
        }
        let fixtures: Vec<_> = [PolicyId::PcD2dOptimal, PolicyId::Pmp, PolicyId::FcD2d]
            .into_iter()
            .map(|p| {
                let s = schedule(p, &inst.state, &inst.topology, &inst.erasure).expect("no guard");
                (p.name(), inst.clone(), s)
            })
            .collect();
        if fixtures[0].2.transmitters().len() >= 2 && fixtures.iter().all(|(_, i, s)| has_untargeted(i, s)) {
            return fixtures;
        }
    }
    unreachable!()
}

/// Random vertex-weighted graph with up to `max_vertices` vertices. Half of
/// the graphs use quarter-integer weights in `[-1, 3]` to force ties.
pub fn random_graph(rng: &mut ChaCha8Rng, max_vertices: usize) -> WeightedGraph<()> {
    let n = rng.gen_range(0..=max_vertices);
    let density = rng.gen_range(0.0..=1.0);
    let ties = rng.gen_bool(0.5);
    let mut g = WeightedGraph::new();
    for _ in 0..n {
        let w = if ties {
            rng.gen_range(-4..=12) as f64 / 4.0
        } else {
            rng.gen_range(-1.0..3.0)
        };
        g.add_vertex(w, ());
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.gen_bool(density) {
                g.add_edge(a, b).expect("distinct vertices");
            }
        }
    }
    g
}

/// Branch and bound agrees with brute force, members and weight.
pub fn clique_solver(seed: u64, count: u64) -> Check {
    let mut misses = Vec::new();
    for k in 0..count {
        let mut rng = trial_rng(seed, k);
        let g = random_graph(&mut rng, 12);
        let fast = max_weight_clique(&g);
        let slow = brute_force_clique(&g).expect("within the brute-force guard");
        if fast.members != slow.members || (fast.weight - slow.weight).abs() > WEIGHT_TOLERANCE {
            misses.push(format!("#{k}: {:?} vs {:?}", fast.members, slow.members));
        }
    }
    report("clique solver vs brute force", count, misses)
}

fn report(name: &'static str, count: u64, misses: Vec<String>) -> Check {
    let detail = if misses.is_empty() {
        format!("{count} cases, no mismatches")
    } else {
        let shown = misses.iter().take(3).join("; ");
        format!("{} of {count} cases failed: {shown}", misses.len())
    };
    Check {
        name,
        passed: misses.is_empty(),
        detail,
    }
}

/// How much work [`run_all`] does.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Quick,
    Full,
}

/// Every check at the given scale.
pub fn run_all(seed: u64, scale: Scale) -> Vec<Check> {
    let f = match scale {
        Scale::Quick => 1,
        Scale::Full => 5,
    };
    vec![
        oracle_optimality(seed, 80 * f),
        pruned_equivalence(seed, 40 * f),
        clustering_uniqueness(seed, 4 * f, if scale == Scale::Full { 10 } else { 8 }),
        partition_identities(seed, 200 * f),
        objective_bridge(seed, 20 * f),
        combination_soundness(seed, 40 * f),
        realized_vs_expected(seed, 2_000 * f),
        clique_solver(seed, 100 * f),
    ]
}
