//! Link-level timing, rate budget and Monte Carlo.

mod budget;
mod events;
mod montecarlo;
mod timing;

pub use budget::{
    accidental_probability_per_herald, accidental_rate, budget_table, edr_analytic, edr_multiplexed,
    fidelity_vs_efficiency, heralding_probability, log_grid, stored_entanglement_rate, BudgetLine,
    FidelityNoiseModel, RateBudget,
};
pub use events::{is_time_ordered, Event, EventKind, EventLog};
pub use montecarlo::{simulate, Estimate, LinkModel, LinkReport, RunSpec};
pub use timing::{heralding_margin, DutyCycleSpec, LinkTimingSpec};
