//! Random topologies, the initial base-station phase, the recovery loop with
//! realized erasures, and Monte Carlo aggregation over independent trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    classify_packet, interference_set, opportunity_zone, shadow_set, DelayTally, ErasureModel, ModelError,
    Reception, Schedule, Sender, SideInformation, Topology,
};
use crate::schedulers::{schedule, PolicyId, ScheduleError};
use crate::sets::{PacketSet, MAX_INDEX};

/// Resampling budget of [`generate_topology`].
pub const MAX_TOPOLOGY_ATTEMPTS: usize = 10_000;

/// Stream id reserved for a pinned topology; trials use streams `0..trials`.
const PINNED_TOPOLOGY_STREAM: u64 = u64::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{field}: {message}")]
    Config { field: &'static str, message: String },
    #[error("no connected topology with {devices} devices at connectivity {connectivity} after {MAX_TOPOLOGY_ATTEMPTS} attempts")]
    TopologyAbort { devices: usize, connectivity: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

fn config_error(field: &'static str, message: impl Into<String>) -> SimError {
    SimError::Config {
        field,
        message: message.into(),
    }
}

/// One Monte Carlo scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "M")]
    pub devices: usize,
    #[serde(rename = "N")]
    pub packets: usize,
    /// Probability that a pair of devices is within range.
    #[serde(rename = "C")]
    pub connectivity: f64,
    #[serde(rename = "P")]
    pub d2d_erasure: f64,
    #[serde(rename = "Q")]
    pub bs_erasure: f64,
    pub trials: usize,
    pub seed: u64,
    pub policy: PolicyId,
    /// Defaults to `10 * N * M`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u64>,
    /// Charge a unit of delay for erased receptions too.
    #[serde(default)]
    pub strict_definition1: bool,
    /// Draw one topology for all trials instead of one per trial.
    #[serde(default)]
    pub pin_topology: bool,
}

impl ScenarioConfig {
    /// Fig. 2 style defaults: `M = 60`, `N = 30`, `P = 0.1`, `Q = 0.2`.
    pub fn new(devices: usize, packets: usize, connectivity: f64, policy: PolicyId) -> Self {
        Self {
            devices,
            packets,
            connectivity,
            d2d_erasure: 0.1,
            bs_erasure: 0.2,
            trials: 1,
            seed: 0,
            policy,
            max_rounds: None,
            strict_definition1: false,
            pin_topology: false,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(1..=MAX_INDEX).contains(&self.devices) {
            return Err(config_error("M", format!("must lie in 1..={MAX_INDEX}, got {}", self.devices)));
        }
        if !(1..=MAX_INDEX).contains(&self.packets) {
            return Err(config_error("N", format!("must lie in 1..={MAX_INDEX}, got {}", self.packets)));
        }
        if !(self.connectivity > 0.0 && self.connectivity <= 1.0) {
            return Err(config_error("C", format!("must lie in (0, 1], got {}", self.connectivity)));
        }
        if !(0.0..=1.0).contains(&self.d2d_erasure) {
            return Err(config_error("P", format!("must lie in [0, 1], got {}", self.d2d_erasure)));
        }
        if !(0.0..1.0).contains(&self.bs_erasure) {
            return Err(config_error("Q", format!("must lie in [0, 1), got {}", self.bs_erasure)));
        }
        if self.trials == 0 {
            return Err(config_error("trials", "must be at least 1"));
        }
        if self.max_rounds == Some(0) {
            return Err(config_error("max_rounds", "must be at least 1"));
        }
        Ok(())
    }

    pub fn max_rounds(&self) -> u64 {
        self.max_rounds
            .unwrap_or(10 * self.devices as u64 * self.packets as u64)
    }

    pub fn erasure(&self) -> Result<ErasureModel, SimError> {
        Ok(ErasureModel::uniform(self.devices, self.d2d_erasure, self.bs_erasure)?)
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub total_delay: u64,
    pub per_device_delay: Vec<u64>,
    pub rounds_used: u64,
    pub completed: bool,
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

/// Aggregate over all trials of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub trials: usize,
    pub completed: usize,
    /// Total decoding delay per trial.
    pub total_delay: Moments,
    /// Total decoding delay divided by `M`.
    pub mean_delay: Moments,
    pub rounds: Moments,
}

impl ExperimentSummary {
    pub fn from_trials(devices: usize, results: &[TrialResult]) -> Self {
        let totals: Vec<f64> = results.iter().map(|r| r.total_delay as f64).collect();
        let means: Vec<f64> = totals.iter().map(|t| t / devices as f64).collect();
        let rounds: Vec<f64> = results.iter().map(|r| r.rounds_used as f64).collect();
        Self {
            trials: results.len(),
            completed: results.iter().filter(|r| r.completed).count(),
            total_delay: Moments::of(&totals),
            mean_delay: Moments::of(&means),
            rounds: Moments::of(&rounds),
        }
    }
}

/// Random stream of trial `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Each off-diagonal pair is linked with probability `connectivity`;
/// disconnected draws are rejected.
pub fn generate_topology<R: Rng + ?Sized>(devices: usize, connectivity: f64, rng: &mut R) -> Result<Topology, SimError> {
    if !(1..=MAX_INDEX).contains(&devices) {
        return Err(config_error("M", format!("must lie in 1..={MAX_INDEX}, got {devices}")));
    }
    if !(connectivity > 0.0 && connectivity <= 1.0) {
        return Err(config_error("C", format!("must lie in (0, 1], got {connectivity}")));
    }
    if connectivity >= 1.0 {
        return Ok(Topology::complete(devices));
    }
    let mut edges = Vec::new();
    for _ in 0..MAX_TOPOLOGY_ATTEMPTS {
        edges.clear();
        for i in 0..devices {
            for j in (i + 1)..devices {
                if rng.gen_bool(connectivity) {
                    edges.push((i, j));
                }
            }
        }
        let topology = Topology::from_edges_relaxed(devices, &edges)?;
        if topology.is_connected() {
            return Ok(topology);
        }
    }
    Err(SimError::TopologyAbort { devices, connectivity })
}

/// The base station broadcasts every packet once, then repeats any packet
/// that no device received until somebody holds it.
pub fn initial_phase<R: Rng + ?Sized>(
    packets: usize,
    erasure: &ErasureModel,
    rng: &mut R,
) -> Result<SideInformation, SimError> {
    let m = erasure.num_devices();
    if (0..m).all(|j| erasure.bs(j) >= 1.0) {
        return Err(config_error("Q", "every device erases every base-station packet"));
    }
    let mut has = vec![PacketSet::empty(); m];
    for l in 0..packets {
        loop {
            let mut received = false;
            for (j, h) in has.iter_mut().enumerate() {
                if !rng.gen_bool(erasure.bs(j)) {
                    h.insert(l);
                    received = true;
                }
            }
            if received {
                break;
            }
        }
    }
    Ok(SideInformation::new(packets, has)?)
}

/// Plays one recovery slot: draws erasures, decodes what is instantly
/// decodable and charges decoding delay to `tally`. Returns the delay of
/// this slot.
///
/// Wanting devices that transmit, are interfered with, or hear nobody pay
/// one unit. A wanting device reached by exactly one transmitter pays one
/// unit if it receives a packet it cannot use; an erased reception is free
/// unless `strict` is set.
pub fn realize_round<R: Rng + ?Sized>(
    state: &mut SideInformation,
    topology: &Topology,
    erasure: &ErasureModel,
    schedule: &Schedule,
    rng: &mut R,
    strict: bool,
    tally: &mut DelayTally,
) -> Result<u64, SimError> {
    let before = tally.total();
    let wanting = state.wanting();

    // Every device's reception is classified against the pre-slot state.
    let mut deliveries: Vec<(usize, PacketSet)> = Vec::new();
    let mut hear = |j: usize, erased: bool, combination: PacketSet, tally: &mut DelayTally| -> Result<(), SimError> {
        if erased {
            if strict {
                tally.charge(j);
            }
            return Ok(());
        }
        if combination.is_empty() {
            tally.charge(j);
            return Ok(());
        }
        match classify_packet(state, j, combination)? {
            Reception::InstantlyDecodable(_) => deliveries.push((j, combination)),
            _ => tally.charge(j),
        }
        Ok(())
    };

    if schedule.is_base_station() {
        let combination = schedule.transmissions()[0].combination;
        for j in wanting {
            let erased = rng.gen_bool(erasure.bs(j));
            hear(j, erased, combination, tally)?;
        }
    } else {
        let a = schedule.transmitters();
        let silent = (a | interference_set(topology, a) | shadow_set(topology, a)) & wanting;
        for j in silent {
            tally.charge(j);
        }
        for tx in schedule.transmissions() {
            let Sender::Device(i) = tx.sender else { unreachable!() };
            for j in opportunity_zone(topology, a, i)? & wanting {
                let erased = rng.gen_bool(erasure.d2d(i, j));
                hear(j, erased, tx.combination, tally)?;
            }
        }
    }

    for (j, combination) in deliveries {
        crate::idnc::decode(state, j, combination)?;
    }
    Ok(tally.total() - before)
}

/// Recovery loop until every Wants set is empty or `max_rounds` slots have
/// been played.
pub fn run_recovery<R: Rng + ?Sized>(
    state: &mut SideInformation,
    topology: &Topology,
    erasure: &ErasureModel,
    policy: PolicyId,
    rng: &mut R,
    max_rounds: u64,
    strict: bool,
) -> Result<TrialResult, SimError> {
    let mut tally = DelayTally::new(state.num_devices());
    let mut rounds = 0;
    while !state.is_complete() && rounds < max_rounds {
        let s = schedule(policy, state, topology, erasure)?;
        realize_round(state, topology, erasure, &s, rng, strict, &mut tally)?;
        rounds += 1;
    }
    Ok(TrialResult {
        total_delay: tally.total(),
        per_device_delay: tally.per_device().to_vec(),
        rounds_used: rounds,
        completed: state.is_complete(),
    })
}

/// Topology shared by every trial when the scenario pins it.
pub fn pinned_topology(config: &ScenarioConfig) -> Result<Topology, SimError> {
    let mut rng = trial_rng(config.seed, PINNED_TOPOLOGY_STREAM);
    generate_topology(config.devices, config.connectivity, &mut rng)
}

fn run_trial_with(config: &ScenarioConfig, pinned: Option<&Topology>, trial: u64) -> Result<TrialResult, SimError> {
    let mut rng = trial_rng(config.seed, trial);
    let drawn;
    let topology = match pinned {
        Some(t) => t,
        None => {
            drawn = generate_topology(config.devices, config.connectivity, &mut rng)?;
            &drawn
        }
    };
    let erasure = config.erasure()?;
    let mut state = initial_phase(config.packets, &erasure, &mut rng)?;
    run_recovery(
        &mut state,
        topology,
        &erasure,
        config.policy,
        &mut rng,
        config.max_rounds(),
        config.strict_definition1,
    )
}

/// Runs trial number `trial` of the scenario on its own random stream.
pub fn run_trial(config: &ScenarioConfig, trial: u64) -> Result<TrialResult, SimError> {
    config.validate()?;
    let pinned = config.pin_topology.then(|| pinned_topology(config)).transpose()?;
    run_trial_with(config, pinned.as_ref(), trial)
}

/// Every trial of the scenario, in trial order. Trials run in parallel.
pub fn run_trials(config: &ScenarioConfig) -> Result<Vec<TrialResult>, SimError> {
    config.validate()?;
    let pinned = config.pin_topology.then(|| pinned_topology(config)).transpose()?;
    (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial_with(config, pinned.as_ref(), t))
        .collect()
}

pub fn run_experiment(config: &ScenarioConfig) -> Result<ExperimentSummary, SimError> {
    let results = run_trials(config)?;
    Ok(ExperimentSummary::from_trials(config.devices, &results))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(items: &[usize]) -> PacketSet {
        items.iter().copied().collect()
    }

    #[test]
    fn full_connectivity_is_complete() {
        let mut rng = trial_rng(1, 0);
        assert_eq!(generate_topology(7, 1.0, &mut rng).unwrap(), Topology::complete(7));
    }

    #[test]
    fn two_devices_are_always_linked() {
        let mut rng = trial_rng(3, 0);
        for _ in 0..20 {
            let t = generate_topology(2, 0.3, &mut rng).unwrap();
            assert!(t.connected(0, 1));
        }
    }

    #[test]
    fn impossible_connectivity_aborts() {
        let mut rng = trial_rng(3, 0);
        assert_eq!(
            generate_topology(64, 1e-6, &mut rng),
            Err(SimError::TopologyAbort { devices: 64, connectivity: 1e-6 })
        );
    }

    #[test]
    fn lossless_base_station_leaves_nothing_missing() {
        let erasure = ErasureModel::uniform(5, 0.1, 0.0).unwrap();
        let state = initial_phase(8, &erasure, &mut trial_rng(0, 0)).unwrap();
        assert!(state.is_complete());
    }

    #[test]
    fn validation() {
        let base = ScenarioConfig::new(10, 5, 0.5, PolicyId::FcD2d);
        assert!(base.validate().is_ok());
        for (cfg, field) in [
            (ScenarioConfig { connectivity: 0.0, ..base.clone() }, "C"),
            (ScenarioConfig { connectivity: 1.5, ..base.clone() }, "C"),
            (ScenarioConfig { bs_erasure: 1.0, ..base.clone() }, "Q"),
            (ScenarioConfig { d2d_erasure: -0.1, ..base.clone() }, "P"),
            (ScenarioConfig { trials: 0, ..base.clone() }, "trials"),
            (ScenarioConfig { devices: 65, ..base.clone() }, "M"),
        ] {
            match cfg.validate() {
                Err(SimError::Config { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{field}: {other:?}"),
            }
        }
    }

    #[test]
    fn nothing_to_recover() {
        let mut state = SideInformation::new(2, vec![p(&[0, 1]); 3]).unwrap();
        let topo = Topology::line(3);
        let erasure = ErasureModel::uniform(3, 0.1, 0.2).unwrap();
        let r = run_recovery(&mut state, &topo, &erasure, PolicyId::PcD2dOptimal, &mut trial_rng(0, 0), 100, false)
            .unwrap();
        assert_eq!((r.total_delay, r.rounds_used, r.completed), (0, 0, true));
    }

    #[test]
    fn lossless_i1_replay() {
        // Device 0 sends packet 1 to device 1 (device 2 sits in the shadow),
        // then device 1 or 0 serves device 2.
        let mut state = SideInformation::new(2, vec![p(&[0, 1]), p(&[0]), p(&[1])]).unwrap();
        let topo = Topology::line(3);
        let erasure = ErasureModel::uniform(3, 0.0, 0.2).unwrap();
        let r = run_recovery(&mut state, &topo, &erasure, PolicyId::PcD2dOptimal, &mut trial_rng(0, 0), 100, false)
            .unwrap();
        assert!(r.completed);
        assert_eq!(r.rounds_used, 2);
        assert_eq!(r.total_delay, 1);
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = ScenarioConfig {
            trials: 6,
            seed: 42,
            ..ScenarioConfig::new(8, 4, 0.4, PolicyId::PcD2dOptimal)
        };
        assert_eq!(run_trials(&cfg).unwrap(), run_trials(&cfg).unwrap());
        assert_eq!(run_trials(&cfg).unwrap()[3], run_trial(&cfg, 3).unwrap());
    }

    #[test]
    fn moments() {
        let m = Moments::of(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.std - 1.0).abs() < 1e-12);
        assert_eq!(Moments::of(&[4.0]).std, 0.0);
    }
}
