//! Exhaustive reference solver over the structurally feasible schedules.

use serde::Serialize;

use crate::domain::{Appliance, ApplianceCategory, Scenario, Schedule, SLOTS};
use crate::error::{Error, Result};
use crate::feasibility::fixed_pattern;
use crate::ga::FitnessFn;

/// Default enumeration budget.
pub const DEFAULT_CAP: u128 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub best_schedule: Schedule,
    pub best_cost: f64,
    pub enumerated_count: u128,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of feasible placements for one appliance.
pub fn placement_count(a: &Appliance) -> u128 {
    match a.category {
        ApplianceCategory::Necessary => 1,
        ApplianceCategory::Consistent => (a.window_len() - a.on_calls + 1) as u128,
        ApplianceCategory::Inconsistent => binomial(a.window_len(), a.on_calls),
    }
}

/// Size of the structurally feasible search space. Saturates at
/// `u128::MAX` for fleets too large to count.
pub fn search_space_size(scenario: &Scenario) -> u128 {
    scenario
        .appliances
        .iter()
        .map(placement_count)
        .fold(1u128, |acc, n| acc.saturating_mul(n))
}

fn row_of(slots: impl IntoIterator<Item = usize>) -> [bool; SLOTS] {
    let mut row = [false; SLOTS];
    for t in slots {
        row[t] = true;
    }
    row
}

/// Every feasible row for `a`, in lexicographically increasing bit order.
pub fn placements(a: &Appliance) -> Vec<[bool; SLOTS]> {
    let mut rows = match a.category {
        ApplianceCategory::Necessary => vec![row_of(fixed_pattern(a))],
        ApplianceCategory::Consistent => (a.earliest_start..=a.latest_end + 1 - a.on_calls)
            .map(|s| row_of(s..s + a.on_calls))
            .collect(),
        ApplianceCategory::Inconsistent => {
            let window: Vec<usize> = (a.earliest_start..=a.latest_end).collect();
            let mut rows = Vec::new();
            let mut pick: Vec<usize> = (0..a.on_calls).collect();
            loop {
                rows.push(row_of(pick.iter().map(|&i| window[i])));
                // next k-combination of window indices
                let k = pick.len();
                let n = window.len();
                let Some(i) = (0..k).rev().find(|&i| pick[i] < n - k + i) else {
                    break;
                };
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[j - 1] + 1;
                }
            }
            rows
        }
    };
    rows.sort();
    rows
}

/// Enumerates every structurally feasible schedule and returns the one with
/// the lowest GA fitness, the lexicographically smallest genome on ties.
pub fn brute_force_optimum(scenario: &Scenario, cap: u128) -> Result<OracleResult> {
    let size = search_space_size(scenario);
    if size > cap {
        return Err(Error::SearchSpaceTooLarge { size, cap });
    }
    let fitness = FitnessFn::new(scenario);
    let options: Vec<Vec<[bool; SLOTS]>> = scenario.appliances.iter().map(placements).collect();
    let n = options.len();

    let mut choice = vec![0usize; n];
    let mut genome: Vec<bool> = options.iter().flat_map(|o| o[0]).collect();
    let mut best_genome = genome.clone();
    let mut best_cost = f64::INFINITY;
    let mut enumerated = 0u128;

    loop {
        let cost = fitness.evaluate(&genome)?;
        enumerated += 1;
        // odometer runs in lexicographic genome order, so the first minimum wins ties
        if cost < best_cost {
            best_cost = cost;
            best_genome.copy_from_slice(&genome);
        }
        let Some(r) = (0..n).rev().find(|&r| choice[r] + 1 < options[r].len()) else {
            break;
        };
        choice[r] += 1;
        genome[r * SLOTS..(r + 1) * SLOTS].copy_from_slice(&options[r][choice[r]]);
        for later in r + 1..n {
            choice[later] = 0;
            genome[later * SLOTS..(later + 1) * SLOTS].copy_from_slice(&options[later][0]);
        }
    }

    Ok(OracleResult {
        best_schedule: Schedule::from_bits(n, best_genome)?,
        best_cost,
        enumerated_count: enumerated,
    })
}
