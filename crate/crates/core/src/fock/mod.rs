//! Exact state engine over a few polarization-resolved optical and memory modes.
//!
//! States are sparse maps from occupation vectors to amplitudes. Linear optics
//! acts through the creation-operator substitution `a†_i → Σ_j U_ji a†_j`.

pub mod detect;
pub mod mixed;
pub mod mode;
pub mod optics;
pub mod project;
pub mod state;

pub use detect::{
    measure_threshold, measure_threshold_where, ClickPattern, Detector, Outcome, ThresholdDetectorSpec,
    ThresholdDistribution,
};
pub use mixed::MixedFockState;
pub use mode::{ModeId, ModeKind, OccupationVector, Polarization, Truncation};
pub use optics::OpticalElement;
pub use project::{project_and_trace, PostSelection};
pub use state::PureFockState;
