//! Evaluation of a schedule: hourly load, total energy, billing cost and
//! peak-to-average ratio.

use serde::Serialize;

use crate::domain::{Appliance, PriceSignal, Schedule, SLOTS};
use crate::error::{Error, Result};

/// Aggregate kWh consumed in each slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadProfile(pub [f64; SLOTS]);

impl LoadProfile {
    pub fn zeros() -> Self {
        Self([0.0; SLOTS])
    }

    pub fn at(&self, slot: usize) -> f64 {
        self.0[slot]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn peak(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    /// `Σ load[t] · price[t]`.
    pub fn cost(&self, price: &PriceSignal) -> f64 {
        self.0
            .iter()
            .zip(price.as_slice())
            .map(|(load, rho)| load * rho)
            .sum()
    }
}

fn check_rows(schedule: &Schedule, appliances: &[Appliance]) -> Result<()> {
    if schedule.rows() != appliances.len() {
        return Err(Error::Dimension {
            expected: appliances.len(),
            actual: schedule.rows(),
        });
    }
    Ok(())
}

/// Per-slot load, summed over appliances in row order.
pub fn hourly_load(schedule: &Schedule, appliances: &[Appliance]) -> Result<LoadProfile> {
    check_rows(schedule, appliances)?;
    Ok(load_of_bits(schedule.bits(), appliances))
}

/// Hot-path variant of [`hourly_load`] for an already-checked flat genome.
pub(crate) fn load_of_bits(bits: &[bool], appliances: &[Appliance]) -> LoadProfile {
    debug_assert_eq!(bits.len(), appliances.len() * SLOTS);
    let mut load = [0.0; SLOTS];
    for (row, appliance) in bits.chunks_exact(SLOTS).zip(appliances) {
        for (slot, on) in load.iter_mut().zip(row) {
            if *on {
                *slot += appliance.rating;
            }
        }
    }
    LoadProfile(load)
}

/// Total energy consumed over the day, kWh.
pub fn total_energy(schedule: &Schedule, appliances: &[Appliance]) -> Result<f64> {
    Ok(hourly_load(schedule, appliances)?.total())
}

/// Grid bill with no local generation.
pub fn total_cost(schedule: &Schedule, appliances: &[Appliance], price: &PriceSignal) -> Result<f64> {
    if price.as_slice().len() != SLOTS {
        return Err(Error::Dimension {
            expected: SLOTS,
            actual: price.as_slice().len(),
        });
    }
    Ok(hourly_load(schedule, appliances)?.cost(price))
}

/// Peak-to-average ratio: peak slot load over mean slot load.
pub fn par(profile: &LoadProfile) -> Result<f64> {
    let total = profile.total();
    if total <= 0.0 {
        return Err(Error::UndefinedPar);
    }
    Ok(profile.peak() / (total / SLOTS as f64))
}
