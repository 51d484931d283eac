//! Multi-cell downlink simulator for human EMF exposure.
//!
//! The crate models three cellular generations (5G at 28 GHz, 4G and 3.9G
//! below 6 GHz), evaluates power density (PD) and specific absorption rate
//! (SAR) at user positions, and implements a cell-selection protocol that
//! only admits base-station sectors whose PD at the user is below a
//! threshold.
//!
//! Module map:
//!
//! * [`profiles`]: per-generation system parameters and exposure limits.
//! * [`layout`]: hexagonal site grid, sector regions, UE sampling.
//! * [`antenna`]: sectorized element pattern and gain.
//! * [`channel`]: path loss, received power, noise and Shannon rate.
//! * [`exposure`]: PD, SAR and sector-averaged SAR.
//! * [`protocol`]: baseline and PD-constrained attachment, plus the
//!   handover state machine.
//! * [`simulation`]: Monte Carlo drop engine and distance sweeps.
//! * [`stats`]: empirical distributions and deterministic reductions.
//! * [`report`]: CSV, JSON and SVG output.

pub mod antenna;
pub mod channel;
mod error;
pub mod exposure;
pub mod layout;
pub mod profiles;
pub mod protocol;
pub mod report;
pub mod simulation;
pub mod stats;
pub mod units;

pub use error::{Error, Result};

pub use antenna::PatternParams;
pub use channel::LinkSample;
pub use exposure::{FreeSpaceParams, TissueParams};
pub use layout::{Layout, LinkGeometry, SectorGeometry, SectorId, UeDrop};
pub use profiles::{ExposureLimits, Generation, PathLossModel, SystemProfile};
pub use protocol::{AttachmentOutcome, CandidateReport, Phase, ProtocolState, Serving};
pub use simulation::{Policy, RunConfig, RunResults, SweepConfig};
pub use stats::{EmpiricalDistribution, MeanEstimate};
