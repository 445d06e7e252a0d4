//! Transmitter clusters and cooperation graphs.
//!
//! A cluster is a set of transmitters whose coverage zones form one
//! overlapping blob; clusters with disjoint total coverage never interfere
//! with each other, so a transmitter set decomposes uniquely into clusters
//! and its expected delay splits into one term per cluster. A cooperation
//! graph has one vertex per candidate cluster and an edge between clusters
//! with disjoint coverage, so its cliques are exactly the transmitter sets
//! and the clique weight is `|M_w|` minus the expected delay.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::clique::{max_weight_clique, Clique, WeightedGraph, WEIGHT_TOLERANCE};
use crate::idnc::{best_combination, build_local_graph, Combination};
use crate::model::{
    interference_set, ErasureModel, ModelError, Schedule, Sender, SideInformation, Topology,
    Transmission,
};
use crate::sets::DeviceSet;

/// Device-count guard for [`build_full_graph`].
pub const FULL_GRAPH_LIMIT: usize = 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CooperationError {
    #[error("device set {0:?} is not a cohesive cluster")]
    NotCohesive(DeviceSet),
    #[error("the full cooperation graph is limited to {FULL_GRAPH_LIMIT} devices, got {0}")]
    TooLarge(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A nonempty, cohesive set of transmitters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    members: DeviceSet,
    coverage: DeviceSet,
    interference: DeviceSet,
}

impl Cluster {
    pub fn new(topology: &Topology, members: DeviceSet) -> Result<Self, CooperationError> {
        if !is_cohesive(topology, members) {
            return Err(CooperationError::NotCohesive(members));
        }
        Ok(Self {
            members,
            coverage: topology.total_coverage(members),
            interference: interference_set(topology, members),
        })
    }

    pub fn members(&self) -> DeviceSet {
        self.members
    }

    /// `C^T(Z)`.
    pub fn coverage(&self) -> DeviceSet {
        self.coverage
    }

    /// `T(Z)`.
    pub fn interference(&self) -> DeviceSet {
        self.interference
    }
}

/// True when `members` is nonempty and its overlap graph (edge when two
/// coverage zones intersect) is connected. This is equivalent to every
/// proper split of the set having overlapping total coverage.
pub fn is_cohesive(topology: &Topology, members: DeviceSet) -> bool {
    let Some(seed) = members.first() else {
        return false;
    };
    grow(topology, DeviceSet::singleton(seed), members) == members
}

/// Literal form of the cohesion condition, checked over every proper
/// nonempty subset. Exponential; meant for tests.
pub fn is_cohesive_by_subsets(topology: &Topology, members: DeviceSet) -> bool {
    if members.is_empty() {
        return false;
    }
    members
        .subsets_lex()
        .into_iter()
        .filter(|z| !z.is_empty() && *z != members)
        .all(|z| {
            topology
                .total_coverage(z)
                .intersects(topology.total_coverage(members - z))
        })
}

// Adds every device of `pool` whose coverage overlaps the cluster, until stable.
fn grow(topology: &Topology, mut cluster: DeviceSet, pool: DeviceSet) -> DeviceSet {
    loop {
        let coverage = topology.total_coverage(cluster);
        let joining: DeviceSet = (pool - cluster)
            .iter()
            .filter(|&b| topology.coverage(b).intersects(coverage))
            .collect();
        if joining.is_empty() {
            return cluster;
        }
        cluster |= joining;
    }
}

/// Partition of a transmitter set into mutually non-interfering clusters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering {
    clusters: Vec<Cluster>,
}

impl Clustering {
    /// Clusters ordered by their smallest member.
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn transmitters(&self) -> DeviceSet {
        self.clusters
            .iter()
            .fold(DeviceSet::empty(), |acc, c| acc | c.members)
    }

    /// Checks disjoint members, pairwise disjoint coverage, and cohesion of
    /// every cluster.
    pub fn is_valid(&self, topology: &Topology) -> bool {
        let mut seen = DeviceSet::empty();
        for (k, c) in self.clusters.iter().enumerate() {
            if seen.intersects(c.members) || !is_cohesive(topology, c.members) {
                return false;
            }
            seen |= c.members;
            if self.clusters[k + 1..]
                .iter()
                .any(|o| o.coverage.intersects(c.coverage))
            {
                return false;
            }
        }
        true
    }
}

/// Clusters `transmitters`, seeding each new cluster with the smallest
/// unassigned device.
pub fn build_clustering(topology: &Topology, transmitters: DeviceSet) -> Clustering {
    let order = transmitters.to_vec();
    build_clustering_seeded(topology, transmitters, &order)
}

/// Sequential cluster construction that takes seeds and candidate devices
/// in `order`, which must list every transmitter exactly once.
pub fn build_clustering_seeded(topology: &Topology, transmitters: DeviceSet, order: &[usize]) -> Clustering {
    debug_assert_eq!(order.iter().copied().collect::<DeviceSet>(), transmitters);
    let mut remaining: Vec<usize> = order.to_vec();
    let mut clusters = Vec::new();
    while !remaining.is_empty() {
        let seed = remaining.remove(0);
        let mut members = DeviceSet::singleton(seed);
        let mut coverage = topology.coverage(seed);
        let mut grew = true;
        while grew {
            grew = false;
            let mut k = 0;
            while k < remaining.len() {
                let b = remaining[k];
                if topology.coverage(b).intersects(coverage) {
                    members.insert(b);
                    coverage |= topology.coverage(b);
                    remaining.remove(k);
                    grew = true;
                } else {
                    k += 1;
                }
            }
        }
        clusters.push(Cluster {
            members,
            coverage,
            interference: interference_set(topology, members),
        });
    }
    clusters.sort_by_key(|c| c.members.first());
    Clustering { clusters }
}

/// A cluster with its weight and the combinations its members transmit.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterPlan {
    pub cluster: Cluster,
    pub weight: f64,
    pub transmissions: Vec<Transmission>,
}

/// Evaluates cluster weights, memoising the inner combination problem per
/// (transmitter, opportunity zone).
pub struct ClusterEvaluator<'a> {
    state: &'a SideInformation,
    topology: &'a Topology,
    erasure: &'a ErasureModel,
    wanting: DeviceSet,
    combinations: HashMap<(usize, DeviceSet), Combination>,
}

impl<'a> ClusterEvaluator<'a> {
    pub fn new(state: &'a SideInformation, topology: &'a Topology, erasure: &'a ErasureModel) -> Self {
        Self {
            state,
            topology,
            erasure,
            wanting: state.wanting(),
            combinations: HashMap::new(),
        }
    }

    pub fn topology(&self) -> &'a Topology {
        self.topology
    }

    fn combination(&mut self, device: usize, opportunity: DeviceSet) -> Combination {
        if let Some(c) = self.combinations.get(&(device, opportunity)) {
            return c.clone();
        }
        let local = build_local_graph(self.state, self.topology, self.erasure, device, opportunity)
            .expect("opportunity zones lie inside the sender's coverage");
        let c = best_combination(&local);
        self.combinations.insert((device, opportunity), c.clone());
        c
    }

    /// Weight of a cluster `Z`:
    ///
    /// `|C^T(Z) ∩ M_w| - |Z ∩ M_w| - |T(Z) ∩ M_w|
    ///   - Σ_{i ∈ Z} Σ_{j ∈ O_i(Z) ∩ M_w} (1 - p_ij) + y(Z)`
    ///
    /// where `O_i(Z) = C_i \ (Z ∪ T(Z))` and `y(Z)` sums the best
    /// combination gain of every member. Summed over the clusters of a
    /// transmitter set this equals `|M_w|` minus its expected delay.
    pub fn evaluate(&mut self, cluster: Cluster) -> ClusterPlan {
        let w = self.wanting;
        let mut weight = (cluster.coverage & w).len() as f64
            - (cluster.members & w).len() as f64
            - (cluster.interference & w).len() as f64;
        let blocked = cluster.members | cluster.interference;
        let mut transmissions = Vec::with_capacity(cluster.members.len());
        for i in cluster.members {
            let zone = self.topology.coverage(i) - blocked;
            let reachable: f64 = (zone & w).iter().map(|j| 1.0 - self.erasure.d2d(i, j)).sum();
            let c = self.combination(i, zone);
            weight += c.gain - reachable;
            transmissions.push(Transmission {
                sender: Sender::Device(i),
                combination: c.packets,
                targets: c.targets,
            });
        }
        ClusterPlan {
            cluster,
            weight,
            transmissions,
        }
    }
}

pub fn cluster_weight(
    state: &SideInformation,
    topology: &Topology,
    erasure: &ErasureModel,
    members: DeviceSet,
) -> Result<f64, CooperationError> {
    let cluster = Cluster::new(topology, members)?;
    Ok(ClusterEvaluator::new(state, topology, erasure).evaluate(cluster).weight)
}

/// Graph over candidate clusters; edges join clusters with disjoint coverage.
#[derive(Clone, Debug)]
pub struct CooperationGraph {
    graph: WeightedGraph<ClusterPlan>,
}

impl CooperationGraph {
    // Vertices are ordered by sorted member list so tie-breaking among
    // equally good transmitter sets is deterministic.
    fn assemble(mut plans: Vec<ClusterPlan>) -> Self {
        plans.sort_by(|a, b| a.cluster.members.lex_cmp(b.cluster.members));
        let vertices = plans.into_iter().map(|p| (p.weight, p)).collect();
        let graph = WeightedGraph::from_fn(vertices, |a, b| {
            a.cluster.coverage.is_disjoint(b.cluster.coverage)
        });
        Self { graph }
    }

    pub fn graph(&self) -> &WeightedGraph<ClusterPlan> {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn plans(&self) -> &[ClusterPlan] {
        self.graph.labels()
    }

    pub fn best_clique(&self) -> Clique {
        max_weight_clique(&self.graph)
    }

    pub fn best_schedule(&self) -> Schedule {
        schedule_from_clique(self, &self.best_clique())
    }
}

/// Reference graph over every cohesive cluster of the network.
pub fn build_full_graph(
    state: &SideInformation,
    topology: &Topology,
    erasure: &ErasureModel,
) -> Result<CooperationGraph, CooperationError> {
    let m = state.num_devices();
    if m > FULL_GRAPH_LIMIT {
        return Err(CooperationError::TooLarge(m));
    }
    let mut eval = ClusterEvaluator::new(state, topology, erasure);
    let plans = (1u64..(1u64 << m))
        .map(DeviceSet::from_bits)
        .filter_map(|members| Cluster::new(topology, members).ok())
        .map(|c| eval.evaluate(c))
        .collect();
    Ok(CooperationGraph::assemble(plans))
}

/// Layered generation: start from single devices and repeatedly merge a
/// generated cluster with one overlapping device, keeping the merge only when
/// it weighs at least as much as both parts.
pub fn build_pruned_graph(state: &SideInformation, topology: &Topology, erasure: &ErasureModel) -> CooperationGraph {
    let mut eval = ClusterEvaluator::new(state, topology, erasure);
    let plans = layered_merge(&mut eval, DeviceSet::full(state.num_devices()), f64::NEG_INFINITY);
    CooperationGraph::assemble(plans)
}

/// The layered merge restricted to what can matter for the maximum clique.
///
/// Devices whose coverage holds no wanting device are left out: they never
/// change any cluster weight. A clique holding cluster `Z` weighs at most
/// `|M_w| - |(Z ∪ T(Z)) ∩ M_w|`, and that bound only shrinks as `Z` grows,
/// so clusters whose bound falls below the best singleton clique are dropped
/// together with everything merged from them. Finally a cluster is dropped
/// when another one covers a subset of its coverage with at least its
/// weight.
pub fn build_reduced_graph(state: &SideInformation, topology: &Topology, erasure: &ErasureModel) -> CooperationGraph {
    let wanting = state.wanting();
    let candidates: DeviceSet = (0..state.num_devices())
        .filter(|&i| topology.coverage(i).intersects(wanting))
        .collect();
    let mut eval = ClusterEvaluator::new(state, topology, erasure);
    let singles: Vec<ClusterPlan> = candidates
        .iter()
        .map(|i| eval.evaluate(Cluster::new(topology, DeviceSet::singleton(i)).expect("singletons are cohesive")))
        .collect();
    let floor = CooperationGraph::assemble(singles).best_clique().weight;
    let plans = layered_merge(&mut eval, candidates, floor);
    CooperationGraph::assemble(drop_dominated(plans))
}

/// Grows clusters one overlapping device at a time from the singletons in
/// `candidates`, keeping a merge when its weight is at least that of both
/// parts. Clusters whose clique bound is below `floor` are not kept or grown.
fn layered_merge(eval: &mut ClusterEvaluator<'_>, candidates: DeviceSet, floor: f64) -> Vec<ClusterPlan> {
    let topology = eval.topology();
    let wanting = eval.wanting;
    let bound = |c: &Cluster| (wanting.len() - ((c.members | c.interference) & wanting).len()) as f64;
    let hopeless = |c: &Cluster| bound(c) + WEIGHT_TOLERANCE < floor;

    let mut singles: HashMap<usize, f64> = HashMap::new();
    let mut created: BTreeMap<u64, ClusterPlan> = BTreeMap::new();
    let mut layer = Vec::new();
    for i in candidates.iter() {
        let plan = eval.evaluate(Cluster::new(topology, DeviceSet::singleton(i)).expect("singletons are cohesive"));
        singles.insert(i, plan.weight);
        if !hopeless(&plan.cluster) {
            layer.push(plan.cluster.members);
            created.insert(plan.cluster.members.bits(), plan);
        }
    }
    // Merges that failed against one parent may pass against another.
    let mut evaluated: HashMap<DeviceSet, ClusterPlan> = HashMap::new();
    let mut discarded: HashSet<DeviceSet> = HashSet::new();

    while !layer.is_empty() {
        let mut next = Vec::new();
        for v in layer {
            let (v_weight, v_coverage) = {
                let p = &created[&v.bits()];
                (p.weight, p.cluster.coverage)
            };
            for z in candidates.iter() {
                if v.contains(z) || !topology.coverage(z).intersects(v_coverage) {
                    continue;
                }
                let merged = v | DeviceSet::singleton(z);
                if created.contains_key(&merged.bits()) || discarded.contains(&merged) {
                    continue;
                }
                let cluster = Cluster::new(topology, merged).expect("overlapping merge is cohesive");
                if hopeless(&cluster) {
                    discarded.insert(merged);
                    continue;
                }
                let plan = evaluated.entry(merged).or_insert_with(|| eval.evaluate(cluster));
                if plan.weight + WEIGHT_TOLERANCE >= v_weight.max(singles[&z]) {
                    created.insert(merged.bits(), plan.clone());
                    next.push(merged);
                }
            }
        }
        next.sort_by(|a, b| a.lex_cmp(*b));
        layer = next;
    }
    created.into_values().collect()
}

/// Removes every cluster for which another cluster covers no more devices
/// and weighs at least as much. Among equals the lexicographically first
/// survives.
fn drop_dominated(mut plans: Vec<ClusterPlan>) -> Vec<ClusterPlan> {
    plans.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then_with(|| a.cluster.coverage.len().cmp(&b.cluster.coverage.len()))
            .then_with(|| a.cluster.members.lex_cmp(b.cluster.members))
    });
    let mut kept: Vec<ClusterPlan> = Vec::new();
    for plan in plans {
        let dominated = kept.iter().any(|k| {
            k.cluster.coverage.is_subset(plan.cluster.coverage) && k.weight + WEIGHT_TOLERANCE >= plan.weight
        });
        if !dominated {
            kept.push(plan);
        }
    }
    kept
}

/// One vertex per device, edges between devices with disjoint coverage.
/// Cliques are exactly the interference-free transmitter sets.
pub fn singleton_graph(state: &SideInformation, topology: &Topology, erasure: &ErasureModel) -> CooperationGraph {
    let mut eval = ClusterEvaluator::new(state, topology, erasure);
    let plans = (0..state.num_devices())
        .map(|i| eval.evaluate(Cluster::new(topology, DeviceSet::singleton(i)).expect("singletons are cohesive")))
        .collect();
    CooperationGraph::assemble(plans)
}

pub fn schedule_from_clique(graph: &CooperationGraph, clique: &Clique) -> Schedule {
    Schedule::new(
        clique
            .members
            .iter()
            .flat_map(|&v| graph.graph.label(v).transmissions.iter().cloned())
            .collect(),
    )
}
