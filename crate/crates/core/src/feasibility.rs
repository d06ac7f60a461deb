//! Structural and demand-limit constraints: checks, the repair operator that
//! maps any bit matrix onto the structurally feasible set, and the penalty
//! used for the demand limit.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::domain::{Appliance, ApplianceCategory, PriceSignal, Scenario, Schedule, SLOTS};
use crate::error::{Error, Result};
use crate::metrics::{self, LoadProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ViolationKind {
    DemandLimit,
    OnCallCount,
    WindowBound,
    #[serde(rename = "ContiguityCL")]
    ContiguityCl,
    #[serde(rename = "FixedNL")]
    FixedNl,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub appliance_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(id) = &self.appliance_id {
            write!(f, " [{id}]")?;
        }
        if let Some(slot) = self.slot {
            write!(f, " [slot {slot}]")?;
        }
        write!(f, ": {}", self.detail)
    }
}

impl Violation {
    fn appliance(kind: ViolationKind, a: &Appliance, detail: String) -> Self {
        Self {
            kind,
            appliance_id: Some(a.id.clone()),
            slot: None,
            detail,
        }
    }
}

/// ON slots of the fixed NL pattern.
pub fn fixed_pattern(a: &Appliance) -> std::ops::Range<usize> {
    a.earliest_start..a.earliest_start + a.on_calls
}

/// Number of contiguous ON runs in a row.
fn block_count(row: &[bool]) -> usize {
    row.iter()
        .enumerate()
        .filter(|&(t, &on)| on && (t == 0 || !row[t - 1]))
        .count()
}

/// `Σ_t max(0, load[t] − limit[t])`.
pub fn demand_excess(load: &LoadProfile, limit: &[f64]) -> f64 {
    load.0
        .iter()
        .zip(limit)
        .map(|(l, d)| (l - d).max(0.0))
        .sum()
}

/// Penalty weight per kWh of demand-limit excess.
pub fn penalty_weight(price: &PriceSignal) -> f64 {
    1000.0 * price.max()
}

/// Lists every constraint `schedule` breaks; an empty list means feasible.
pub fn check_feasibility(schedule: &Schedule, scenario: &Scenario) -> Result<Vec<Violation>> {
    let load = metrics::hourly_load(schedule, &scenario.appliances)?;
    let mut out = Vec::new();

    if let Some(limit) = &scenario.demand_limit {
        for (t, (&l, &d)) in load.0.iter().zip(limit).enumerate() {
            if l > d {
                out.push(Violation {
                    kind: ViolationKind::DemandLimit,
                    appliance_id: None,
                    slot: Some(t),
                    detail: format!("load {l} exceeds limit {d}"),
                });
            }
        }
    }

    for (r, a) in scenario.appliances.iter().enumerate() {
        let row = schedule.row(r);
        let on = schedule.on_count(r);
        if on != a.on_calls {
            out.push(Violation::appliance(
                ViolationKind::OnCallCount,
                a,
                format!("{on} ON slots, {} required", a.on_calls),
            ));
        }
        let outside: Vec<usize> = (0..SLOTS).filter(|&t| row[t] && !a.in_window(t)).collect();
        if !outside.is_empty() {
            out.push(Violation::appliance(
                ViolationKind::WindowBound,
                a,
                format!(
                    "ON at {outside:?} outside window {}..={}",
                    a.earliest_start, a.latest_end
                ),
            ));
        }
        match a.category {
            ApplianceCategory::Consistent if block_count(row) > 1 => {
                out.push(Violation::appliance(
                    ViolationKind::ContiguityCl,
                    a,
                    format!("{} separate ON blocks", block_count(row)),
                ));
            }
            ApplianceCategory::Necessary => {
                let pattern = fixed_pattern(a);
                if (0..SLOTS).any(|t| row[t] != pattern.contains(&t)) {
                    out.push(Violation::appliance(
                        ViolationKind::FixedNl,
                        a,
                        format!("must be ON exactly at {}..{}", pattern.start, pattern.end),
                    ));
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Maps `schedule` to one with no count, window, contiguity or NL-pattern
/// violations. Already-feasible rows come back unchanged.
///
/// The random source is consumed only for CL rows with no ON bit, which get
/// a uniformly drawn start.
pub fn repair<R: Rng + ?Sized>(schedule: &Schedule, scenario: &Scenario, rng: &mut R) -> Result<Schedule> {
    if schedule.rows() != scenario.appliance_count() {
        return Err(Error::Dimension {
            expected: scenario.appliance_count(),
            actual: schedule.rows(),
        });
    }
    let mut out = schedule.clone();
    for (r, a) in scenario.appliances.iter().enumerate() {
        repair_row(out.row_mut(r), a, &scenario.price, rng);
    }
    Ok(out)
}

pub(crate) fn repair_genome<R: Rng + ?Sized>(genome: &mut [bool], scenario: &Scenario, rng: &mut R) {
    for (row, a) in genome.chunks_exact_mut(SLOTS).zip(&scenario.appliances) {
        repair_row(row, a, &scenario.price, rng);
    }
}

fn repair_row<R: Rng + ?Sized>(row: &mut [bool], a: &Appliance, price: &PriceSignal, rng: &mut R) {
    match a.category {
        ApplianceCategory::Necessary => {
            let pattern = fixed_pattern(a);
            for (t, bit) in row.iter_mut().enumerate() {
                *bit = pattern.contains(&t);
            }
        }
        ApplianceCategory::Consistent => {
            let start = cl_start(row, a).unwrap_or_else(|| {
                rng.random_range(a.earliest_start..=a.latest_end + 1 - a.on_calls)
            });
            for (t, bit) in row.iter_mut().enumerate() {
                *bit = (start..start + a.on_calls).contains(&t);
            }
        }
        ApplianceCategory::Inconsistent => repair_icl(row, a, price),
    }
}

/// Feasible block start whose centre is nearest the row's ON-bit centre of
/// mass, earlier start on ties. `None` for an empty row.
fn cl_start(row: &[bool], a: &Appliance) -> Option<usize> {
    let (count, sum) = row
        .iter()
        .enumerate()
        .filter(|(_, on)| **on)
        .fold((0i64, 0i64), |(c, s), (t, _)| (c + 1, s + t as i64));
    if count == 0 {
        return None;
    }
    let span = a.on_calls as i64 - 1;
    // |block centre − centre of mass| scaled by 2·count stays integral
    (a.earliest_start..=a.latest_end + 1 - a.on_calls)
        .min_by_key(|&s| (count * (2 * s as i64 + span) - 2 * sum).abs())
}

fn repair_icl(row: &mut [bool], a: &Appliance, price: &PriceSignal) {
    for (t, bit) in row.iter_mut().enumerate() {
        if !a.in_window(t) {
            *bit = false;
        }
    }
    let mut on = row.iter().filter(|b| **b).count();
    if on == a.on_calls {
        return;
    }
    let mut by_price: Vec<usize> = (a.earliest_start..=a.latest_end).collect();
    by_price.sort_by(|&x, &y| price.at(x).total_cmp(&price.at(y)).then(x.cmp(&y)));
    if on > a.on_calls {
        for &t in by_price.iter().rev() {
            if on == a.on_calls {
                break;
            }
            if row[t] {
                row[t] = false;
                on -= 1;
            }
        }
    } else {
        for &t in &by_price {
            if on == a.on_calls {
                break;
            }
            if !row[t] {
                row[t] = true;
                on += 1;
            }
        }
    }
}

/// Every appliance at its earliest feasible placement: NL on its fixed
/// pattern, CL and ICL starting at `earliest_start`.
pub fn baseline_schedule(scenario: &Scenario) -> Schedule {
    let mut s = Schedule::zeros(scenario.appliance_count());
    for (r, a) in scenario.appliances.iter().enumerate() {
        for t in fixed_pattern(a) {
            s.set(r, t, true);
        }
    }
    s
}
