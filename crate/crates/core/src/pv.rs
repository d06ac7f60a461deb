//! Local PV generation and the PV-first dispatch rule.
//!
//! Generation follows a Gaussian bell centred on the peak hour and is zero
//! outside the daylight window. Each slot's load is served from PV first and
//! the remainder is drawn from the grid; surplus PV is discarded.

use std::f64::consts::PI;

use serde::Serialize;

use crate::domain::{Appliance, PriceSignal, PvProfile, Schedule, SLOTS};
use crate::error::Result;
use crate::metrics::{self, LoadProfile};

/// PV energy produced in `slot`, kWh.
pub fn pv_generation(slot: usize, profile: &PvProfile) -> f64 {
    if slot < profile.day_start || slot > profile.day_end {
        return 0.0;
    }
    let offset = slot as f64 - profile.delta;
    let sigma = profile.sigma;
    profile.scale / ((2.0 * PI).sqrt() * sigma) * (-(offset * offset) / (2.0 * sigma * sigma)).exp()
}

pub fn generation_profile(profile: &PvProfile) -> [f64; SLOTS] {
    std::array::from_fn(|t| pv_generation(t, profile))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchResult {
    pub pv_generated: [f64; SLOTS],
    /// Load met by PV.
    pub pv_served: [f64; SLOTS],
    pub grid_draw: [f64; SLOTS],
    pub surplus: [f64; SLOTS],
}

impl DispatchResult {
    pub fn grid_profile(&self) -> LoadProfile {
        LoadProfile(self.grid_draw)
    }

    /// Daylight slots where generation does not strictly exceed the load it
    /// serves, i.e. where PV is saturated and the grid must cover the rest
    /// (or exactly nothing is left over).
    pub fn saturated_slots(&self, profile: &PvProfile) -> Vec<usize> {
        (profile.day_start..=profile.day_end)
            .filter(|&t| self.pv_generated[t] - self.pv_served[t] <= 0.0)
            .collect()
    }
}

pub fn dispatch(load: &LoadProfile, pv: &PvProfile) -> DispatchResult {
    dispatch_generation(load, &generation_profile(pv))
}

pub(crate) fn dispatch_generation(load: &LoadProfile, generated: &[f64; SLOTS]) -> DispatchResult {
    let mut out = DispatchResult {
        pv_generated: *generated,
        pv_served: [0.0; SLOTS],
        grid_draw: [0.0; SLOTS],
        surplus: [0.0; SLOTS],
    };
    for t in 0..SLOTS {
        let served = load.0[t].min(generated[t]);
        out.pv_served[t] = served;
        out.grid_draw[t] = load.0[t] - served;
        out.surplus[t] = generated[t] - served;
    }
    out
}

/// Bill for the grid share of the load after PV has served what it can.
/// Without PV this is exactly [`metrics::total_cost`].
pub fn grid_cost_after_pv(
    schedule: &Schedule,
    appliances: &[Appliance],
    price: &PriceSignal,
    pv: Option<&PvProfile>,
) -> Result<f64> {
    match pv {
        None => metrics::total_cost(schedule, appliances, price),
        Some(pv) => {
            let load = metrics::hourly_load(schedule, appliances)?;
            Ok(dispatch(&load, pv).grid_profile().cost(price))
        }
    }
}
