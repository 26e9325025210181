pub mod analysis;
pub mod bsm;
pub mod config;
pub mod error;
pub mod fock;
pub mod jones;
pub mod linksim;
pub mod memory;
pub mod scalar;
pub mod sources;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type Complex64 = C<f64>;
pub type FockState = fock::PureFockState<f64>;
pub type MixedState = fock::MixedFockState<f64>;
pub type DensityMatrix = analysis::TwoQubitDensityMatrix<f64>;
pub type Detector = fock::ThresholdDetectorSpec<f64>;
pub type Source = sources::SpdcSourceSpec<f64>;
pub type Memory = memory::MemorySpec<f64>;
pub type Scenario = config::ScenarioConfig<f64>;
pub type Budget = linksim::RateBudget<f64>;
pub type Timing = linksim::LinkTimingSpec<f64>;
pub type Model = linksim::LinkModel<f64>;
