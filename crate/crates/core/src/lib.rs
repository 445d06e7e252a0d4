//! Instantly decodable network coding for cooperative device-to-device
//! packet recovery: models, schedulers and a Monte Carlo simulator.

pub mod clique;
pub mod cooperation;
pub mod idnc;
pub mod model;
pub mod schedulers;
pub mod sets;
pub mod simulator;
pub mod verify;

pub use model::{ErasureModel, ModelError, Schedule, Sender, SideInformation, Topology, Transmission};
pub use schedulers::{schedule, PolicyId};
pub use sets::{DeviceSet, PacketSet};
