//! Absorptive atomic-frequency-comb memories.

mod fit;
mod register;
mod spec;

pub use fit::fit_double_exponential;
pub use register::{MemorySlot, RecallEfficiency, TemporalModeRegister};
pub use spec::{multimode_capacity, DecayModel, MemorySpec, ModeCapacity};
