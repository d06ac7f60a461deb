//! Bundled six-appliance household used by the CLI and the acceptance suite.
//!
//! The fleet ratings and duty cycles are the published ones. The real-time
//! price vector is synthetic: only its shape is known (highest between slots
//! 11 and 14), so the magnitudes below are illustrative data.

use crate::domain::{
    Appliance, ApplianceCategory, GaParams, PriceSignal, PvProfile, ScenarioConfig, Scenario, SLOTS,
};

/// `(id, category, on_calls, rating_kwh)` for the reference fleet.
pub const REFERENCE_FLEET: [(&str, ApplianceCategory, usize, f64); 6] = [
    ("load-1", ApplianceCategory::Necessary, 22, 1.5),
    ("load-2", ApplianceCategory::Necessary, 23, 0.5),
    ("load-3", ApplianceCategory::Consistent, 5, 6.0),
    ("load-4", ApplianceCategory::Consistent, 5, 1.5),
    ("load-5", ApplianceCategory::Inconsistent, 7, 3.5),
    ("load-6", ApplianceCategory::Inconsistent, 8, 1.4),
];

/// Synthetic real-time price, currency units per kWh: off-peak 5, mid-peak
/// 10, on-peak 20.
pub const REFERENCE_PRICE: [f64; SLOTS] = [
    10.0, 10.0, 10.0, 10.0, 10.0, 10.0, // night mid-peak
    5.0, 5.0, 5.0, 5.0, 5.0, // morning off-peak
    20.0, 20.0, 20.0, 20.0, // on-peak
    5.0, 5.0, 5.0, 5.0, // afternoon off-peak
    10.0, 10.0, 10.0, 10.0, 10.0, // evening mid-peak
];

/// Household demand limit per slot, kWh.
pub const REFERENCE_DEMAND_LIMIT: f64 = 10.0;

pub fn reference_fleet() -> Vec<Appliance> {
    REFERENCE_FLEET
        .iter()
        .map(|&(id, category, on_calls, rating)| Appliance {
            id: id.to_string(),
            name: id.to_string(),
            category,
            rating,
            on_calls,
            earliest_start: 0,
            latest_end: SLOTS - 1,
        })
        .collect()
}

/// GA settings for the reference household. The 144-bit genome with a
/// binding demand limit needs more mutation pressure and patience than the
/// generic defaults.
pub fn reference_ga() -> GaParams {
    let genome_len = (REFERENCE_FLEET.len() * SLOTS) as f64;
    GaParams {
        population_size: 100,
        max_generations: 2000,
        stagnation_window: 300,
        mutation_rate: 3.0 / genome_len,
        ..GaParams::defaults_for(REFERENCE_FLEET.len())
    }
}

/// Reference household with PV enabled.
pub fn reference_config() -> ScenarioConfig {
    let appliances = reference_fleet();
    let ga = reference_ga();
    ScenarioConfig {
        appliances,
        price: PriceSignal(REFERENCE_PRICE.to_vec()),
        demand_limit: Some(vec![REFERENCE_DEMAND_LIMIT; SLOTS]),
        pv: Some(PvProfile::default()),
        ga,
    }
}

pub fn reference_scenario() -> Scenario {
    Scenario::new(reference_config()).expect("reference scenario is valid")
}
