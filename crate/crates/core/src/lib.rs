//! Household demand-response scheduling.
//!
//! Appliances are classified as necessary (fixed), consistent (one
//! contiguous run) or inconsistent (interruptible). A genetic algorithm
//! searches binary appliance-by-hour schedules that minimize the grid bill
//! under a real-time price, optionally after serving load from a local PV
//! source first. An exhaustive solver checks the GA on small instances.

pub mod domain;
pub mod error;
pub mod feasibility;
pub mod ga;
pub mod metrics;
pub mod oracle;
pub mod pv;
pub mod reference;
pub mod runner;

pub use domain::{
    validate_scenario, Appliance, ApplianceCategory, ConfigViolation, GaParams, PriceSignal,
    PvProfile, Scenario, ScenarioConfig, Schedule, SLOTS,
};
pub use error::{Error, Result};
pub use feasibility::{check_feasibility, repair, Violation, ViolationKind};
pub use ga::{evolve, Chromosome, GaRun, Termination};
pub use metrics::{hourly_load, par, total_cost, total_energy, LoadProfile};
pub use oracle::{brute_force_optimum, search_space_size, OracleResult};
pub use pv::{dispatch, grid_cost_after_pv, pv_generation, DispatchResult};
pub use runner::{run_scenario, verify_against_oracle, ScenarioComparison};
