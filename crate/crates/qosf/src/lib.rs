//! Quasi-orthogonal space-frequency (QOSF) block coding for MIMO-OFDM links
//! whose transmit antennas switch between several radiation states.
//!
//! The crate is organised along the signal path:
//!
//! - [`primitives`]: complex matrices, Sylvester Hadamard matrices and the
//!   BPSK/QPSK mappers shared by everything else.
//! - [`config`]: the scenario description ([`SystemConfig`]) and its
//!   key-value file format.
//! - [`codec`]: rotated Hadamard combining, Alamouti stacking and the
//!   per-state space-frequency codewords.
//! - [`channel`]: per-state frequency-selective Rayleigh channels and the
//!   frequency-domain received-signal model.
//! - [`decoder`]: exhaustive and decoupled maximum-likelihood detection.
//! - [`angleopt`]: coding-gain metrics for rotation angles and a grid search
//!   over them.
//! - [`harness`]: the seeded, parallel Monte Carlo BER engine and its result
//!   and plot-data files.
//!
//! Runnable walkthroughs for each part live in the crate's `examples/`
//! directory.

pub mod angleopt;
pub mod channel;
pub mod codec;
pub mod config;
pub mod decoder;
mod error;
pub mod harness;
pub mod primitives;

pub use error::{Error, Result};

pub use angleopt::{coding_gain_metric, optimize_angles, AngleSearchReport, GainMetric};
pub use channel::{ChannelFrequencyGrid, ChannelRealization, ReceivedBlock};
pub use codec::{QosfCode, RotationAngles, SfCodeword};
pub use config::{Constellation, SystemConfig};
pub use decoder::{DecoderMode, GroupObservation};
pub use harness::{BerPoint, Scheme, SweepResult, SweepSpec};
pub use primitives::{Complex, ComplexMatrix};
