//! Scheduling policies for one recovery transmission.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clique::WEIGHT_TOLERANCE;
use crate::cooperation::{build_reduced_graph, singleton_graph, Cluster, ClusterEvaluator};
use crate::idnc::{best_combination, build_base_station_graph};
use crate::model::{
    classify_packet, expected_delay, interference_set, shadow_set, ErasureModel, Reception, Schedule,
    Sender, SideInformation, Topology, Transmission,
};
use crate::sets::{DeviceSet, PacketSet};

/// Device-count guard for [`schedule_oracle`].
pub const ORACLE_MAX_DEVICES: usize = 8;
/// Packet-count guard for [`schedule_oracle`].
pub const ORACLE_MAX_PACKETS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyId {
    /// Base station performs every recovery transmission.
    #[serde(rename = "PMP")]
    Pmp,
    /// One device transmits per slot.
    #[serde(rename = "FC_D2D")]
    FcD2d,
    /// Simultaneous transmitters only when nobody is interfered.
    #[serde(rename = "PC_D2D_HEURISTIC")]
    PcD2dHeuristic,
    /// Optimal over all transmitter sets via the pruned cooperation graph.
    #[serde(rename = "PC_D2D_OPTIMAL")]
    PcD2dOptimal,
    /// Exhaustive search; small instances only.
    #[serde(rename = "ORACLE")]
    Oracle,
}

impl PolicyId {
    pub const ALL: [PolicyId; 5] = [
        PolicyId::Pmp,
        PolicyId::FcD2d,
        PolicyId::PcD2dHeuristic,
        PolicyId::PcD2dOptimal,
        PolicyId::Oracle,
    ];

    /// The four policies compared in the delay sweeps.
    pub const COMPARED: [PolicyId; 4] = [
        PolicyId::Pmp,
        PolicyId::FcD2d,
        PolicyId::PcD2dHeuristic,
        PolicyId::PcD2dOptimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyId::Pmp => "PMP",
            PolicyId::FcD2d => "FC_D2D",
            PolicyId::PcD2dHeuristic => "PC_D2D_HEURISTIC",
            PolicyId::PcD2dOptimal => "PC_D2D_OPTIMAL",
            PolicyId::Oracle => "ORACLE",
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown policy `{0}` (expected one of PMP, FC_D2D, PC_D2D_HEURISTIC, PC_D2D_OPTIMAL, ORACLE)")]
pub struct UnknownPolicy(pub String);

impl FromStr for PolicyId {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyId::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownPolicy(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("the oracle is limited to {ORACLE_MAX_DEVICES} devices and {ORACLE_MAX_PACKETS} packets, got {devices} and {packets}")]
    OracleTooLarge { devices: usize, packets: usize },
}

/// Optimal schedule: maximum-weight clique of the layered cooperation graph,
/// restricted to the clusters that can take part in it.
pub fn schedule_pc_optimal(state: &SideInformation, topology: &Topology, erasure: &ErasureModel) -> Schedule {
    if state.wanting().is_empty() {
        return Schedule::empty();
    }
    build_reduced_graph(state, topology, erasure).best_schedule()
}

/// Interference-free schedule: maximum-weight clique of the singleton
/// cooperation graph.
pub fn schedule_pc_heuristic(state: &SideInformation, topology: &Topology, erasure: &ErasureModel) -> Schedule {
    if state.wanting().is_empty() {
        return Schedule::empty();
    }
    singleton_graph(state, topology, erasure).best_schedule()
}

/// Best single transmitter with its best combination; ties go to the
/// smallest device id.
pub fn schedule_fc(state: &SideInformation, topology: &Topology, erasure: &ErasureModel) -> Schedule {
    if state.wanting().is_empty() {
        return Schedule::empty();
    }
    let mut eval = ClusterEvaluator::new(state, topology, erasure);
    let mut best: Option<(f64, Schedule)> = None;
    for i in 0..state.num_devices() {
        let cluster = Cluster::new(topology, DeviceSet::singleton(i)).expect("singletons are cohesive");
        let schedule = Schedule::new(eval.evaluate(cluster).transmissions);
        let delay = expected_delay(state, topology, erasure, &schedule).expect("single-device schedules are valid");
        if best.as_ref().is_none_or(|(d, _)| delay < d - WEIGHT_TOLERANCE) {
            best = Some((delay, schedule));
        }
    }
    best.map(|(_, s)| s).unwrap_or_default()
}

/// Base-station recovery: the best combination over all wanting devices,
/// weighted by base-station reception probability.
pub fn schedule_pmp(state: &SideInformation, erasure: &ErasureModel) -> Schedule {
    let wanting = state.wanting();
    if wanting.is_empty() {
        return Schedule::empty();
    }
    let c = best_combination(&build_base_station_graph(state, erasure, wanting));
    Schedule::new(vec![Transmission {
        sender: Sender::BaseStation,
        combination: c.packets,
        targets: c.targets,
    }])
}

/// Exhaustive minimisation of the expected delay over every transmitter set
/// and, per transmitter, every subset of its Has set. Once the transmitter
/// set is fixed the delay is a sum of independent per-transmitter terms, so
/// each transmitter's combination is minimised on its own.
pub fn schedule_oracle(
    state: &SideInformation,
    topology: &Topology,
    erasure: &ErasureModel,
) -> Result<Schedule, ScheduleError> {
    let (m, n) = (state.num_devices(), state.num_packets());
    if m > ORACLE_MAX_DEVICES || n > ORACLE_MAX_PACKETS {
        return Err(ScheduleError::OracleTooLarge { devices: m, packets: n });
    }
    let wanting = state.wanting();
    if wanting.is_empty() {
        return Ok(Schedule::empty());
    }

    let mut best: Option<(f64, Vec<Transmission>)> = None;
    for a in DeviceSet::full(m).subsets_lex() {
        let t = interference_set(topology, a);
        let s = shadow_set(topology, a);
        let mut delay = ((a & wanting).len() + (t & wanting).len() + (s & wanting).len()) as f64;
        let mut transmissions = Vec::with_capacity(a.len());
        for i in a {
            let zone = (topology.coverage(i) - (a | t)) & wanting;
            let (cost, combination, targets) = best_subset_for(state, erasure, i, zone);
            delay += cost;
            transmissions.push(Transmission {
                sender: Sender::Device(i),
                combination,
                targets,
            });
        }
        if best.as_ref().is_none_or(|(d, _)| delay < d - WEIGHT_TOLERANCE) {
            best = Some((delay, transmissions));
        }
    }
    Ok(Schedule::new(best.map(|(_, t)| t).unwrap_or_default()))
}

// Minimum over κ ⊆ H_i of Σ (1 - p_ij) over devices of `zone` that cannot
// instantly decode κ. Subsets are scanned in lexicographic order.
fn best_subset_for(
    state: &SideInformation,
    erasure: &ErasureModel,
    sender: usize,
    zone: DeviceSet,
) -> (f64, PacketSet, DeviceSet) {
    let mut best = (f64::INFINITY, PacketSet::empty(), DeviceSet::empty());
    for kappa in state.has(sender).subsets_lex() {
        let targets: DeviceSet = if kappa.is_empty() {
            DeviceSet::empty()
        } else {
            zone.iter()
                .filter(|&j| matches!(classify_packet(state, j, kappa), Ok(Reception::InstantlyDecodable(_))))
                .collect()
        };
        let cost: f64 = (zone - targets).iter().map(|j| 1.0 - erasure.d2d(sender, j)).sum();
        if cost < best.0 - WEIGHT_TOLERANCE {
            best = (cost, kappa, targets);
        }
    }
    best
}

/// Dispatches on `policy`.
pub fn schedule(
    policy: PolicyId,
    state: &SideInformation,
    topology: &Topology,
    erasure: &ErasureModel,
) -> Result<Schedule, ScheduleError> {
    Ok(match policy {
        PolicyId::Pmp => schedule_pmp(state, erasure),
        PolicyId::FcD2d => schedule_fc(state, topology, erasure),
        PolicyId::PcD2dHeuristic => schedule_pc_heuristic(state, topology, erasure),
        PolicyId::PcD2dOptimal => schedule_pc_optimal(state, topology, erasure),
        PolicyId::Oracle => schedule_oracle(state, topology, erasure)?,
    })
}
