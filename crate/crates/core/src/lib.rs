//! Certified lower bounds on the asymptotic secret-key rate of decoy-state
//! BB84 when the transmitter leaks information about every preparation
//! setting (intensity, bit/basis and global phase).
//!
//! The crate is organised bottom-up:
//!
//! * [`source`] – phase distributions, photon-number statistics and the ideal
//!   overlaps of the emitted n-photon states.
//! * [`perturb`] – matrix-perturbation bounds turning a leakage parameter
//!   into bounds on statistics and eigenvector fidelities.
//! * [`csbounds`] – Cauchy–Schwarz yield envelopes and their tangent lines.
//! * [`gramsdp`] – the 4×4 Gram-matrix SDP bounding overlaps of leaky states.
//! * [`lp`] – a small dense simplex solver with rigorous dual bounds.
//! * [`decoylp`] – the decoy-state yield and error linear programs.
//! * [`phase_error`] – quantum-coin phase-error machinery.
//! * [`tha`] – characterized Trojan-horse models and the extra phase
//!   modulator countermeasure.
//! * [`channel`] – the fiber/threshold-detector channel model.
//! * [`engine`] – scenario orchestration, key rate and intensity optimisation.

pub mod channel;
pub mod csbounds;
pub mod decoylp;
pub mod engine;
pub mod error;
pub mod gramsdp;
pub mod lp;
pub mod perturb;
pub mod phase_error;
pub mod source;
pub mod states;
pub mod tha;

pub use channel::ChannelParams;
pub use engine::{
    binary_entropy, optimize_intensities, sweep, Engine, EngineConfig, KeyRatePoint, LeakageModel,
    OptimizerGrid, PointStatus, SourceScenario,
};
pub use error::{Error, Result};
pub use source::{Encoding, Intensity, IntensitySet, PhaseDistribution, PhotonStatistics};
pub use tha::{PmScenario, ThaScenario};
