//! Energy efficiency of dense multi-antenna uplink cellular networks.
//!
//! BSs form a Poisson point process, each serving `K` UEs with `M` antennas,
//! MMSE channel estimation and maximum-ratio combining. The crate provides:
//!
//! * [`model`]: closed-form SINR, spectral efficiency, area spectral efficiency,
//!   area energy consumption and EE;
//! * [`optimizer`]: optimal pilot reuse, dense-limit antenna/UE dimensioning,
//!   and finite-density searches;
//! * [`simulator`]: a seeded Monte Carlo engine that checks the closed forms;
//! * [`config`], [`report`] and [`cli`]: the command-line front end.

pub mod cli;
pub mod config;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod report;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{EEReport, HardwareModel, OperatingPoint, PropagationModel};
