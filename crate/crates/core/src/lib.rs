// SPDX-License-Identifier: Apache-2.0

//! Simulation of memristive-crossbar linear detectors for massive MIMO
//! uplinks: channel and modem models, digital reference detectors, device
//! mapping, circuit solvers, hardware metrics and an experiment harness.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod circuit;
pub mod detector;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mapping;
pub mod metrics;
pub mod modem;
pub mod rng;

pub use channel::{ChannelRealization, ScenarioParams};
pub use circuit::{ConductanceProgram, MappingConfig, OaModel, Topology};
pub use detector::{DetectorKind, FlopReport};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ResultRow};
pub use linalg::Mat;
pub use mapping::{DeviceRange, MappingScheme, ScaleLedger};
pub use metrics::{EfficiencyReport, PowerParams};
pub use rng::RngStream;
