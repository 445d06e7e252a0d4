//! Local IDNC graphs and packet-combination selection for one transmitter.

use crate::clique::{max_weight_clique, WeightedGraph};
use crate::model::{
    classify_packet, ErasureModel, ModelError, Reception, Sender, SideInformation, Topology,
};
use crate::sets::{DeviceSet, PacketSet};

/// Vertex `v_kl`: device `k` could recover packet `l` from this sender.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IdncVertex {
    pub device: usize,
    pub packet: usize,
}

/// Per-transmitter IDNC graph. Cliques are XOR combinations that every
/// member device can instantly decode.
#[derive(Clone, Debug)]
pub struct LocalIdncGraph {
    owner: Sender,
    graph: WeightedGraph<IdncVertex>,
}

impl LocalIdncGraph {
    pub fn owner(&self) -> Sender {
        self.owner
    }

    pub fn graph(&self) -> &WeightedGraph<IdncVertex> {
        &self.graph
    }

    pub fn vertices(&self) -> &[IdncVertex] {
        self.graph.labels()
    }
}

fn build(
    state: &SideInformation,
    owner: Sender,
    held: PacketSet,
    opportunity: DeviceSet,
    weight_of: impl Fn(usize) -> f64,
) -> LocalIdncGraph {
    // (device, packet) order keeps clique tie-breaking deterministic.
    let vertices = opportunity
        .iter()
        .flat_map(|k| {
            let w = weight_of(k);
            (state.wants(k) & held)
                .iter()
                .map(move |l| (w, IdncVertex { device: k, packet: l }))
        })
        .collect();
    let graph = WeightedGraph::from_fn(vertices, |a, b| {
        a.packet == b.packet
            || (state.has(b.device).contains(a.packet) && state.has(a.device).contains(b.packet))
    });
    LocalIdncGraph { owner, graph }
}

/// Local IDNC graph of device `owner` over the devices in `opportunity`,
/// with vertex weight `1 - p(owner, k)`.
pub fn build_local_graph(
    state: &SideInformation,
    topology: &Topology,
    erasure: &ErasureModel,
    owner: usize,
    opportunity: DeviceSet,
) -> Result<LocalIdncGraph, ModelError> {
    if owner >= state.num_devices() {
        return Err(ModelError::DeviceOutOfRange(owner));
    }
    let reach = topology.coverage(owner) - DeviceSet::singleton(owner);
    if !opportunity.is_subset(reach) {
        return Err(ModelError::InvalidSchedule(format!(
            "devices {:?} are outside the coverage of device {owner}",
            opportunity - reach
        )));
    }
    Ok(build(state, Sender::Device(owner), state.has(owner), opportunity, |k| {
        1.0 - erasure.d2d(owner, k)
    }))
}

/// IDNC graph of the base station: it holds the whole frame and reaches
/// every device in `opportunity` with weight `1 - q_k`.
pub fn build_base_station_graph(
    state: &SideInformation,
    erasure: &ErasureModel,
    opportunity: DeviceSet,
) -> LocalIdncGraph {
    build(state, Sender::BaseStation, state.frame(), opportunity, |k| 1.0 - erasure.bs(k))
}

/// A chosen XOR combination, the devices it targets, and the expected
/// number of targeted devices that receive it.
#[derive(Clone, Debug, PartialEq)]
pub struct Combination {
    pub packets: PacketSet,
    pub targets: DeviceSet,
    pub gain: f64,
}

impl Combination {
    pub fn none() -> Self {
        Self {
            packets: PacketSet::empty(),
            targets: DeviceSet::empty(),
            gain: 0.0,
        }
    }
}

/// Maximum-weight clique of the local graph, read back as a combination.
pub fn best_combination(local: &LocalIdncGraph) -> Combination {
    let clique = max_weight_clique(&local.graph);
    let mut combination = Combination::none();
    for &v in &clique.members {
        let vertex = local.graph.label(v);
        combination.packets.insert(vertex.packet);
        combination.targets.insert(vertex.device);
    }
    combination.gain = clique.weight;
    combination
}

/// Delivers `combination` to `device`: an instantly decodable packet moves
/// from the Wants set to the Has set, anything else is dropped.
pub fn decode(
    state: &mut SideInformation,
    device: usize,
    combination: PacketSet,
) -> Result<Reception, ModelError> {
    let reception = classify_packet(state, device, combination)?;
    if let Reception::InstantlyDecodable(packet) = reception {
        state.receive(device, packet);
    }
    Ok(reception)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(items: &[usize]) -> PacketSet {
        items.iter().copied().collect()
    }

    fn d(items: &[usize]) -> DeviceSet {
        items.iter().copied().collect()
    }

    #[test]
    fn single_neighbour_without_side_information() {
        // Device 0 holds {0, 1}; device 1 holds nothing.
        let state = SideInformation::new(2, vec![p(&[0, 1]), p(&[])]).unwrap();
        let topo = Topology::line(2);
        let erasure = ErasureModel::uniform(2, 0.2, 0.2).unwrap();
        let g = build_local_graph(&state, &topo, &erasure, 0, d(&[1])).unwrap();
        assert_eq!(g.vertices().len(), 2);
        assert_eq!(g.graph().edge_count(), 0);
        assert!((g.graph().weight(0) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn shared_want_is_adjacent() {
        // Devices 1 and 2 both want packet 5; device 0 holds everything.
        let mut has = vec![PacketSet::full(6), PacketSet::full(6), PacketSet::full(6)];
        has[1].remove(5);
        has[2].remove(5);
        let state = SideInformation::new(6, has).unwrap();
        let topo = Topology::complete(3);
        let erasure = ErasureModel::uniform(3, 0.1, 0.1).unwrap();
        let g = build_local_graph(&state, &topo, &erasure, 0, d(&[1, 2])).unwrap();
        assert_eq!(
            g.vertices(),
            &[IdncVertex { device: 1, packet: 5 }, IdncVertex { device: 2, packet: 5 }]
        );
        assert!(g.graph().has_edge(0, 1));
    }

    #[test]
    fn empty_wants_give_empty_graph() {
        let state = SideInformation::new(3, vec![PacketSet::full(3); 3]).unwrap();
        let topo = Topology::complete(3);
        let erasure = ErasureModel::uniform(3, 0.1, 0.1).unwrap();
        let g = build_local_graph(&state, &topo, &erasure, 0, d(&[1, 2])).unwrap();
        assert!(g.graph().is_empty());
        assert_eq!(best_combination(&g), Combination::none());
    }

    #[test]
    fn opportunity_outside_coverage_is_rejected() {
        let state = SideInformation::new(1, vec![p(&[0]), p(&[]), p(&[])]).unwrap();
        let topo = Topology::line(3);
        let erasure = ErasureModel::uniform(3, 0.1, 0.1).unwrap();
        assert!(build_local_graph(&state, &topo, &erasure, 0, d(&[2])).is_err());
        assert!(build_local_graph(&state, &topo, &erasure, 0, d(&[0])).is_err());
    }

    #[test]
    fn xor_serves_two_complementary_neighbours() {
        // Sender 0 holds {0, 1, 2}; device 1 misses 0 but holds 2, device 2
        // misses 2 but holds 0. 0 xor 2 serves both.
        let state = SideInformation::new(3, vec![p(&[0, 1, 2]), p(&[1, 2]), p(&[0, 1])]).unwrap();
        let topo = Topology::complete(3);
        let erasure = ErasureModel::uniform(3, 0.1, 0.1).unwrap();
        let g = build_local_graph(&state, &topo, &erasure, 0, d(&[1, 2])).unwrap();
        let c = best_combination(&g);
        assert_eq!(c.packets, p(&[0, 2]));
        assert_eq!(c.targets, d(&[1, 2]));
        assert!((c.gain - 1.8).abs() < 1e-12);
    }

    #[test]
    fn instance_i1_device_1() {
        let state = SideInformation::new(2, vec![p(&[0, 1]), p(&[0]), p(&[1])]).unwrap();
        let topo = Topology::line(3);
        let erasure = ErasureModel::uniform(3, 0.1, 0.2).unwrap();
        let g = build_local_graph(&state, &topo, &erasure, 1, d(&[0, 2])).unwrap();
        assert_eq!(g.vertices(), &[IdncVertex { device: 2, packet: 0 }]);
        let c = best_combination(&g);
        assert_eq!((c.packets, c.targets), (p(&[0]), d(&[2])));
        assert!((c.gain - 0.9).abs() < 1e-12);
    }

    #[test]
    fn decode_outcomes() {
        let mut state = SideInformation::new(5, vec![p(&[0, 1, 2, 3]), p(&[4])]).unwrap();
        assert_eq!(decode(&mut state, 0, p(&[4])).unwrap(), Reception::InstantlyDecodable(4));
        assert!(state.has(0).contains(4));

        let before = state.clone();
        assert_eq!(decode(&mut state, 0, p(&[1, 2])).unwrap(), Reception::NonInnovative);
        assert_eq!(state, before);
        assert_eq!(decode(&mut state, 1, p(&[0, 1])).unwrap(), Reception::NonInstantlyDecodable);
        assert_eq!(state, before);
    }
}
