//! Network state, topology and erasure parameters, the device-set algebra
//! used by every scheduler (interference, shadow and opportunity zones), and
//! the expected decoding delay of one recovery transmission.

use thiserror::Error;

use crate::sets::{DeviceSet, PacketSet, MAX_INDEX};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("frame must hold between 1 and {MAX_INDEX} packets, got {0}")]
    PacketCount(usize),
    #[error("network must hold between 1 and {MAX_INDEX} devices, got {0}")]
    DeviceCount(usize),
    #[error("device {0} lists packets outside the frame")]
    OutsideFrame(usize),
    #[error("packet {0} is held by no device")]
    OrphanPacket(usize),
    #[error("connectivity matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("connectivity is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("device {0} is missing from its own coverage zone")]
    MissingSelfCoverage(usize),
    #[error("connectivity graph is not connected")]
    Disconnected,
    #[error("{what} probability {value} at {index} lies outside [0, 1]")]
    Probability {
        what: &'static str,
        index: String,
        value: f64,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("device {0} is out of range")]
    DeviceOutOfRange(usize),
    #[error("device {0} is not in the transmitter set")]
    NotTransmitter(usize),
    #[error("packet combination is empty")]
    EmptyCombination,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Has/Wants sets of every device after the initial base-station phase.
///
/// Only the Has sets are stored; `wants(i)` is the complement within the
/// frame, so the two are disjoint and cover the frame by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideInformation {
    num_packets: usize,
    has: Vec<PacketSet>,
}

impl SideInformation {
    /// Builds the state from per-device Has sets. Every packet must be held by
    /// at least one device.
    pub fn new(num_packets: usize, has: Vec<PacketSet>) -> Result<Self> {
        if num_packets == 0 || num_packets > MAX_INDEX {
            return Err(ModelError::PacketCount(num_packets));
        }
        if has.is_empty() || has.len() > MAX_INDEX {
            return Err(ModelError::DeviceCount(has.len()));
        }
        let frame = PacketSet::full(num_packets);
        let mut held = PacketSet::empty();
        for (i, h) in has.iter().enumerate() {
            if !h.is_subset(frame) {
                return Err(ModelError::OutsideFrame(i));
            }
            held |= *h;
        }
        if let Some(orphan) = (frame - held).first() {
            return Err(ModelError::OrphanPacket(orphan));
        }
        Ok(Self { num_packets, has })
    }

    pub fn from_wants(num_packets: usize, wants: Vec<PacketSet>) -> Result<Self> {
        if num_packets == 0 || num_packets > MAX_INDEX {
            return Err(ModelError::PacketCount(num_packets));
        }
        let frame = PacketSet::full(num_packets);
        if let Some(i) = wants.iter().position(|w| !w.is_subset(frame)) {
            return Err(ModelError::OutsideFrame(i));
        }
        Self::new(num_packets, wants.into_iter().map(|w| frame - w).collect())
    }

    pub fn num_devices(&self) -> usize {
        self.has.len()
    }

    pub fn num_packets(&self) -> usize {
        self.num_packets
    }

    pub fn frame(&self) -> PacketSet {
        PacketSet::full(self.num_packets)
    }

    pub fn has(&self, device: usize) -> PacketSet {
        self.has[device]
    }

    pub fn wants(&self, device: usize) -> PacketSet {
        self.frame() - self.has[device]
    }

    /// Devices with a nonempty Wants set.
    pub fn wanting(&self) -> DeviceSet {
        let frame = self.frame();
        self.has
            .iter()
            .enumerate()
            .filter(|(_, h)| **h != frame)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        let frame = self.frame();
        self.has.iter().all(|h| *h == frame)
    }

    /// Total number of missing (device, packet) pairs.
    pub fn missing(&self) -> usize {
        (0..self.num_devices()).map(|i| self.wants(i).len()).sum()
    }

    pub(crate) fn receive(&mut self, device: usize, packet: usize) {
        self.has[device].insert(packet);
    }
}

/// Symmetric connectivity with coverage zones. Every device covers itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    coverage: Vec<DeviceSet>,
}

impl Topology {
    /// Validates symmetry, a true diagonal, and connectedness.
    pub fn new(matrix: &[Vec<bool>]) -> Result<Self> {
        let topology = Self::new_relaxed(matrix)?;
        if !topology.is_connected() {
            return Err(ModelError::Disconnected);
        }
        Ok(topology)
    }

    /// Like [`Topology::new`] but accepts a disconnected graph.
    pub fn new_relaxed(matrix: &[Vec<bool>]) -> Result<Self> {
        let m = matrix.len();
        if m == 0 || m > MAX_INDEX {
            return Err(ModelError::DeviceCount(m));
        }
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != m {
                return Err(ModelError::NotSquare {
                    row,
                    len: r.len(),
                    expected: m,
                });
            }
        }
        for i in 0..m {
            if !matrix[i][i] {
                return Err(ModelError::MissingSelfCoverage(i));
            }
            for j in (i + 1)..m {
                if matrix[i][j] != matrix[j][i] {
                    return Err(ModelError::Asymmetric(i, j));
                }
            }
        }
        let coverage = matrix
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, &c)| c).map(|(j, _)| j).collect())
            .collect();
        Ok(Self { coverage })
    }

    /// Builds a connected topology from an undirected edge list.
    pub fn from_edges(num_devices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(&Self::edge_matrix(num_devices, edges)?)
    }

    pub fn from_edges_relaxed(num_devices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new_relaxed(&Self::edge_matrix(num_devices, edges)?)
    }

    fn edge_matrix(num_devices: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<bool>>> {
        let mut matrix = vec![vec![false; num_devices]; num_devices];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in edges {
            if a >= num_devices {
                return Err(ModelError::DeviceOutOfRange(a));
            }
            if b >= num_devices {
                return Err(ModelError::DeviceOutOfRange(b));
            }
            matrix[a][b] = true;
            matrix[b][a] = true;
        }
        Ok(matrix)
    }

    pub fn complete(num_devices: usize) -> Self {
        assert!((1..=MAX_INDEX).contains(&num_devices));
        let all = DeviceSet::full(num_devices);
        Self {
            coverage: vec![all; num_devices],
        }
    }

    /// Path `0 - 1 - .. - (m-1)`.
    pub fn line(num_devices: usize) -> Self {
        let edges: Vec<_> = (1..num_devices).map(|i| (i - 1, i)).collect();
        Self::from_edges(num_devices, &edges).expect("a path is connected")
    }

    pub fn num_devices(&self) -> usize {
        self.coverage.len()
    }

    pub fn devices(&self) -> DeviceSet {
        DeviceSet::full(self.num_devices())
    }

    /// `C_i`, including `i` itself.
    pub fn coverage(&self, device: usize) -> DeviceSet {
        self.coverage[device]
    }

    pub fn connected(&self, i: usize, j: usize) -> bool {
        self.coverage[i].contains(j)
    }

    /// Union of the coverage zones of `devices`.
    pub fn total_coverage(&self, devices: DeviceSet) -> DeviceSet {
        devices
            .iter()
            .fold(DeviceSet::empty(), |acc, d| acc | self.coverage[d])
    }

    pub fn is_connected(&self) -> bool {
        let all = self.devices();
        let mut reached = DeviceSet::singleton(0);
        loop {
            let next = self.total_coverage(reached);
            if next == reached {
                return reached == all;
            }
            reached = next;
        }
    }

    pub fn matrix(&self) -> Vec<Vec<bool>> {
        let m = self.num_devices();
        (0..m)
            .map(|i| (0..m).map(|j| self.connected(i, j)).collect())
            .collect()
    }

    /// Fraction of connected off-diagonal pairs.
    pub fn density(&self) -> f64 {
        let m = self.num_devices();
        if m < 2 {
            return 1.0;
        }
        let links: usize = self.coverage.iter().map(|c| c.len() - 1).sum();
        links as f64 / (m * (m - 1)) as f64
    }
}

/// Erasure probabilities: `d2d[i][j]` from device `i` to device `j`, and
/// `bs[j]` from the base station to device `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasureModel {
    d2d: Vec<Vec<f64>>,
    bs: Vec<f64>,
}

impl ErasureModel {
    pub fn new(d2d: Vec<Vec<f64>>, bs: Vec<f64>) -> Result<Self> {
        let m = bs.len();
        if d2d.len() != m {
            return Err(ModelError::Dimension(format!(
                "{} rows of device erasures for {m} devices",
                d2d.len()
            )));
        }
        for (i, row) in d2d.iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::Dimension(format!(
                    "device erasure row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            for (j, &p) in row.iter().enumerate() {
                check_probability("device", format!("({i}, {j})"), p)?;
            }
        }
        for (i, &q) in bs.iter().enumerate() {
            check_probability("base-station", i.to_string(), q)?;
        }
        Ok(Self { d2d, bs })
    }

    /// Same probability `p` on every device link and `q` on every
    /// base-station link.
    pub fn uniform(num_devices: usize, p: f64, q: f64) -> Result<Self> {
        let d2d = (0..num_devices)
            .map(|i| (0..num_devices).map(|j| if i == j { 0.0 } else { p }).collect())
            .collect();
        Self::new(d2d, vec![q; num_devices])
    }

    pub fn num_devices(&self) -> usize {
        self.bs.len()
    }

    pub fn d2d(&self, from: usize, to: usize) -> f64 {
        self.d2d[from][to]
    }

    pub fn bs(&self, to: usize) -> f64 {
        self.bs[to]
    }

    pub fn d2d_matrix(&self) -> &[Vec<f64>] {
        &self.d2d
    }

    pub fn bs_vector(&self) -> &[f64] {
        &self.bs
    }
}

fn check_probability(what: &'static str, index: String, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::Probability { what, index, value })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sender {
    Device(usize),
    /// Virtual transmitter holding the whole frame and covering every device.
    BaseStation,
}

/// One XOR-coded transmission and the devices it targets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub sender: Sender,
    pub combination: PacketSet,
    pub targets: DeviceSet,
}

/// Transmitters of one recovery slot, each with its combination and targets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    transmissions: Vec<Transmission>,
}

impl Schedule {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Transmissions are kept sorted by sender.
    pub fn new(mut transmissions: Vec<Transmission>) -> Self {
        transmissions.sort_by_key(|t| t.sender);
        Self { transmissions }
    }

    pub fn transmissions(&self) -> &[Transmission] {
        &self.transmissions
    }

    pub fn is_empty(&self) -> bool {
        self.transmissions.is_empty()
    }

    pub fn is_base_station(&self) -> bool {
        self.transmissions
            .iter()
            .any(|t| t.sender == Sender::BaseStation)
    }

    /// The device transmitter set `A`.
    pub fn transmitters(&self) -> DeviceSet {
        self.transmissions
            .iter()
            .filter_map(|t| match t.sender {
                Sender::Device(i) => Some(i),
                Sender::BaseStation => None,
            })
            .collect()
    }

    pub fn transmission_of(&self, device: usize) -> Option<&Transmission> {
        self.transmissions
            .iter()
            .find(|t| t.sender == Sender::Device(device))
    }

    /// Checks that combinations come from the sender's Has set and that
    /// every target sits in the sender's opportunity zone and can instantly
    /// decode the combination.
    pub fn validate(&self, state: &SideInformation, topology: &Topology) -> Result<()> {
        let m = state.num_devices();
        if topology.num_devices() != m {
            return Err(ModelError::Dimension(format!(
                "topology has {} devices, state has {m}",
                topology.num_devices()
            )));
        }
        if self.is_base_station() {
            if self.transmissions.len() != 1 {
                return Err(ModelError::InvalidSchedule(
                    "the base station cannot share a slot with devices".into(),
                ));
            }
            let t = &self.transmissions[0];
            return check_targets(state, t, state.wanting());
        }
        let transmitters = self.transmitters();
        if transmitters.len() != self.transmissions.len() {
            return Err(ModelError::InvalidSchedule("duplicate transmitter".into()));
        }
        if let Some(d) = transmitters.iter().find(|&d| d >= m) {
            return Err(ModelError::DeviceOutOfRange(d));
        }
        for t in &self.transmissions {
            let Sender::Device(i) = t.sender else { unreachable!() };
            if !t.combination.is_subset(state.has(i)) {
                return Err(ModelError::InvalidSchedule(format!(
                    "device {i} sends packets it does not hold"
                )));
            }
            check_targets(state, t, opportunity_zone(topology, transmitters, i)?)?;
        }
        Ok(())
    }
}

fn check_targets(state: &SideInformation, t: &Transmission, reachable: DeviceSet) -> Result<()> {
    if !t.targets.is_subset(reachable) {
        return Err(ModelError::InvalidSchedule(format!(
            "{:?} targets {:?} outside its reachable set {:?}",
            t.sender,
            t.targets - reachable,
            reachable
        )));
    }
    for j in t.targets {
        if !matches!(
            classify_packet(state, j, t.combination),
            Ok(Reception::InstantlyDecodable(_))
        ) {
            return Err(ModelError::InvalidSchedule(format!(
                "{:?} targets device {j}, which cannot instantly decode {:?}",
                t.sender, t.combination
            )));
        }
    }
    Ok(())
}

/// Cumulative decoding delay per device.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelayTally {
    per_device: Vec<u64>,
}

impl DelayTally {
    pub fn new(num_devices: usize) -> Self {
        Self {
            per_device: vec![0; num_devices],
        }
    }

    pub fn charge(&mut self, device: usize) {
        self.per_device[device] += 1;
    }

    pub fn per_device(&self) -> &[u64] {
        &self.per_device
    }

    pub fn total(&self) -> u64 {
        self.per_device.iter().sum()
    }
}

/// Non-transmitting devices covered by two or more transmitters.
pub fn interference_set(topology: &Topology, transmitters: DeviceSet) -> DeviceSet {
    let mut once = DeviceSet::empty();
    let mut twice = DeviceSet::empty();
    for i in transmitters {
        let c = topology.coverage(i);
        twice |= once & c;
        once |= c;
    }
    twice - transmitters
}

/// Devices covered by no transmitter.
pub fn shadow_set(topology: &Topology, transmitters: DeviceSet) -> DeviceSet {
    topology.devices() - topology.total_coverage(transmitters)
}

/// `C_i \ (A ∪ T(A))`: the devices transmitter `i` can usefully reach.
pub fn opportunity_zone(topology: &Topology, transmitters: DeviceSet, device: usize) -> Result<DeviceSet> {
    if !transmitters.contains(device) {
        return Err(ModelError::NotTransmitter(device));
    }
    let blocked = transmitters | interference_set(topology, transmitters);
    Ok(topology.coverage(device) - blocked)
}

/// What a combination is worth to one receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reception {
    NonInnovative,
    InstantlyDecodable(usize),
    NonInstantlyDecodable,
}

pub fn classify_packet(state: &SideInformation, device: usize, combination: PacketSet) -> Result<Reception> {
    if combination.is_empty() {
        return Err(ModelError::EmptyCombination);
    }
    if device >= state.num_devices() {
        return Err(ModelError::DeviceOutOfRange(device));
    }
    let missing = combination & state.wants(device);
    Ok(match missing.len() {
        0 => Reception::NonInnovative,
        1 => Reception::InstantlyDecodable(missing.first().unwrap()),
        _ => Reception::NonInstantlyDecodable,
    })
}

/// Checks that the opportunity zones, `A`, `T(A)` and `S(A)` (each restricted
/// to wanting devices) together with the non-wanting devices partition the
/// network.
pub fn device_partition_check(state: &SideInformation, topology: &Topology, transmitters: DeviceSet) -> bool {
    let wanting = state.wanting();
    let mut parts = Vec::with_capacity(transmitters.len() + 4);
    for i in transmitters {
        match opportunity_zone(topology, transmitters, i) {
            Ok(o) => parts.push(o & wanting),
            Err(_) => return false,
        }
    }
    parts.push(transmitters & wanting);
    parts.push(interference_set(topology, transmitters) & wanting);
    parts.push(shadow_set(topology, transmitters) & wanting);
    parts.push(topology.devices() - wanting);

    let mut seen = DeviceSet::empty();
    for p in parts {
        if seen.intersects(p) {
            return false;
        }
        seen |= p;
    }
    seen == topology.devices()
}

/// Expected total decoding delay of one recovery slot.
///
/// Wanting devices that transmit, sit in the interference set or fall in the
/// shadow cost one unit each. A wanting device in the opportunity zone of
/// transmitter `i` costs `1 - p_ij` unless it is targeted, in which case it
/// costs nothing. A base-station schedule costs `1 - q_j` for each
/// untargeted wanting device.
pub fn expected_delay(
    state: &SideInformation,
    topology: &Topology,
    erasure: &ErasureModel,
    schedule: &Schedule,
) -> Result<f64> {
    if erasure.num_devices() != state.num_devices() {
        return Err(ModelError::Dimension(format!(
            "erasure model has {} devices, state has {}",
            erasure.num_devices(),
            state.num_devices()
        )));
    }
    schedule.validate(state, topology)?;
    let wanting = state.wanting();

    if schedule.is_base_station() {
        let t = &schedule.transmissions()[0];
        return Ok((wanting - t.targets).iter().map(|j| 1.0 - erasure.bs(j)).sum());
    }

    let a = schedule.transmitters();
    let t = interference_set(topology, a);
    let s = shadow_set(topology, a);
    let mut delay = ((a & wanting).len() + (t & wanting).len() + (s & wanting).len()) as f64;
    for tx in schedule.transmissions() {
        let Sender::Device(i) = tx.sender else { unreachable!() };
        let zone = opportunity_zone(topology, a, i)?;
        delay += ((zone & wanting) - tx.targets)
            .iter()
            .map(|j| 1.0 - erasure.d2d(i, j))
            .sum::<f64>();
    }
    Ok(delay)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> DeviceSet {
        items.iter().copied().collect()
    }

    fn packets(items: &[usize]) -> PacketSet {
        items.iter().copied().collect()
    }

    /// Three devices on a line, two packets. Device 0 holds both, device 1
    /// holds packet 0, device 2 holds packet 1 (zero-based I1).
    fn instance_i1() -> (SideInformation, Topology, ErasureModel) {
        let state = SideInformation::new(2, vec![packets(&[0, 1]), packets(&[0]), packets(&[1])]).unwrap();
        (state, Topology::line(3), ErasureModel::uniform(3, 0.1, 0.2).unwrap())
    }

    #[test]
    fn interference_examples() {
        let line = Topology::line(3);
        assert_eq!(interference_set(&line, DeviceSet::empty()), DeviceSet::empty());
        assert_eq!(interference_set(&line, set(&[0, 2])), set(&[1]));
        assert_eq!(interference_set(&line, set(&[1])), DeviceSet::empty());
    }

    #[test]
    fn shadow_examples() {
        let line = Topology::line(3);
        assert_eq!(shadow_set(&line, DeviceSet::empty()), set(&[0, 1, 2]));
        assert_eq!(shadow_set(&line, set(&[0])), set(&[2]));
        let full = Topology::complete(5);
        assert_eq!(shadow_set(&full, set(&[3])), DeviceSet::empty());
        assert_eq!(shadow_set(&full, set(&[0, 4])), DeviceSet::empty());
    }

    #[test]
    fn opportunity_examples() {
        let line = Topology::line(3);
        assert_eq!(opportunity_zone(&line, set(&[1]), 1).unwrap(), set(&[0, 2]));
        assert_eq!(opportunity_zone(&line, set(&[0, 2]), 0).unwrap(), DeviceSet::empty());
        assert_eq!(
            opportunity_zone(&line, set(&[0]), 1),
            Err(ModelError::NotTransmitter(1))
        );
        let lonely = Topology::complete(1);
        assert_eq!(opportunity_zone(&lonely, set(&[0]), 0).unwrap(), DeviceSet::empty());
    }

    #[test]
    fn classify_examples() {
        // W = {1}: combination {0, 2} is useless.
        let s = SideInformation::from_wants(3, vec![packets(&[1]), PacketSet::empty()]).unwrap();
        assert_eq!(classify_packet(&s, 0, packets(&[0, 2])).unwrap(), Reception::NonInnovative);
        // W = {0, 2}: 0 xor 2 carries two unknowns.
        let s = SideInformation::from_wants(3, vec![packets(&[0, 2]), PacketSet::empty()]).unwrap();
        assert_eq!(
            classify_packet(&s, 0, packets(&[0, 2])).unwrap(),
            Reception::NonInstantlyDecodable
        );
        // W = {0}, holds 2: decodes 0.
        let s = SideInformation::from_wants(3, vec![packets(&[0]), PacketSet::empty()]).unwrap();
        assert_eq!(
            classify_packet(&s, 0, packets(&[0, 2])).unwrap(),
            Reception::InstantlyDecodable(0)
        );
        assert_eq!(
            classify_packet(&s, 0, PacketSet::empty()),
            Err(ModelError::EmptyCombination)
        );
    }

    #[test]
    fn expected_delay_examples() {
        let (state, topo, erasure) = instance_i1();
        let sched = Schedule::new(vec![Transmission {
            sender: Sender::Device(1),
            combination: packets(&[0]),
            targets: set(&[2]),
        }]);
        assert!((expected_delay(&state, &topo, &erasure, &sched).unwrap() - 1.0).abs() < 1e-12);

        for (k0, k2) in [(packets(&[0]), packets(&[1])), (packets(&[1]), PacketSet::empty())] {
            let sched = Schedule::new(vec![
                Transmission {
                    sender: Sender::Device(0),
                    combination: k0,
                    targets: DeviceSet::empty(),
                },
                Transmission {
                    sender: Sender::Device(2),
                    combination: k2,
                    targets: DeviceSet::empty(),
                },
            ]);
            assert!((expected_delay(&state, &topo, &erasure, &sched).unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_delay_is_zero_without_wants() {
        let state = SideInformation::new(2, vec![PacketSet::full(2); 4]).unwrap();
        let topo = Topology::line(4);
        let erasure = ErasureModel::uniform(4, 0.3, 0.3).unwrap();
        for a in DeviceSet::full(4).subsets_lex() {
            let sched = Schedule::new(
                a.iter()
                    .map(|i| Transmission {
                        sender: Sender::Device(i),
                        combination: packets(&[0]),
                        targets: DeviceSet::empty(),
                    })
                    .collect(),
            );
            assert_eq!(expected_delay(&state, &topo, &erasure, &sched).unwrap(), 0.0);
        }
    }

    #[test]
    fn expected_delay_rejects_bad_schedules() {
        let (state, topo, erasure) = instance_i1();
        // Device 1 does not hold packet 1.
        let bad = Schedule::new(vec![Transmission {
            sender: Sender::Device(1),
            combination: packets(&[1]),
            targets: DeviceSet::empty(),
        }]);
        assert!(matches!(
            expected_delay(&state, &topo, &erasure, &bad),
            Err(ModelError::InvalidSchedule(_))
        ));
        // Device 0 holds packet 0 already; it is not a valid target.
        let bad = Schedule::new(vec![Transmission {
            sender: Sender::Device(1),
            combination: packets(&[0]),
            targets: set(&[0, 2]),
        }]);
        assert!(expected_delay(&state, &topo, &erasure, &bad).is_err());
    }

    #[test]
    fn partition_examples() {
        let (state, topo, _) = instance_i1();
        assert!(device_partition_check(&state, &topo, DeviceSet::empty()));
        assert!(device_partition_check(&state, &topo, set(&[0, 2])));
    }

    #[test]
    fn topology_validation() {
        assert_eq!(
            Topology::new(&[vec![true, true], vec![false, true]]),
            Err(ModelError::Asymmetric(0, 1))
        );
        assert_eq!(
            Topology::new(&[vec![false]]),
            Err(ModelError::MissingSelfCoverage(0))
        );
        assert_eq!(Topology::from_edges(3, &[(0, 1)]), Err(ModelError::Disconnected));
        assert!(Topology::from_edges_relaxed(3, &[(0, 1)]).is_ok());
    }

    #[test]
    fn side_information_validation() {
        assert_eq!(
            SideInformation::new(2, vec![packets(&[0]), packets(&[0])]),
            Err(ModelError::OrphanPacket(1))
        );
        assert_eq!(SideInformation::new(0, vec![]), Err(ModelError::PacketCount(0)));
        let (state, _, _) = instance_i1();
        assert_eq!(state.wanting(), set(&[1, 2]));
        assert_eq!(state.wants(1), packets(&[1]));
    }

    #[test]
    fn erasure_validation() {
        assert!(matches!(
            ErasureModel::uniform(3, 1.5, 0.1),
            Err(ModelError::Probability { .. })
        ));
        assert!(ErasureModel::new(vec![vec![0.0]], vec![0.1, 0.2]).is_err());
    }
}
