//! Shared value types: appliances, schedules, price and PV parameters, GA
//! settings, and the scenario that bundles them.
//!
//! A day is discretized into [`SLOTS`] one-hour slots indexed `0..=23`.
//! Every per-slot vector in the crate has exactly that many entries, and the
//! appliance order of a scenario is the row order of every [`Schedule`].

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of scheduling slots in a day.
pub const SLOTS: usize = 24;

/// Load taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ApplianceCategory {
    /// Necessary load: fixed pattern, never shifted.
    #[serde(rename = "NL")]
    Necessary,
    /// Consistent load: shiftable, runs its duty cycle as one contiguous block.
    #[serde(rename = "CL")]
    Consistent,
    /// Inconsistent load: interruptible, ON slots may be scattered.
    #[serde(rename = "ICL")]
    Inconsistent,
}

impl fmt::Display for ApplianceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Necessary => "NL",
            Self::Consistent => "CL",
            Self::Inconsistent => "ICL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Appliance {
    pub id: String,
    pub name: String,
    pub category: ApplianceCategory,
    /// Energy drawn per ON slot, kWh.
    #[serde(rename = "rating_kwh")]
    pub rating: f64,
    /// Required number of ON slots per day.
    pub on_calls: usize,
    pub earliest_start: usize,
    /// Inclusive upper bound of the operating window.
    pub latest_end: usize,
}

impl Appliance {
    /// Length of the operating window in slots.
    pub fn window_len(&self) -> usize {
        self.latest_end + 1 - self.earliest_start
    }

    pub fn in_window(&self, slot: usize) -> bool {
        (self.earliest_start..=self.latest_end).contains(&slot)
    }
}

/// Real-time price per kWh for each slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceSignal(pub Vec<f64>);

impl PriceSignal {
    pub fn at(&self, slot: usize) -> f64 {
        self.0[slot]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Gaussian PV generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvProfile {
    /// Spread of the bell, hours.
    pub sigma: f64,
    /// Peak hour.
    pub delta: f64,
    pub scale: f64,
    pub day_start: usize,
    pub day_end: usize,
}

impl Default for PvProfile {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            delta: 13.0,
            scale: 10.0,
            day_start: 6,
            day_end: 18,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaParams {
    pub population_size: usize,
    pub max_generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Generations without improvement before the run stops.
    pub stagnation_window: usize,
    pub seed: u64,
}

impl GaParams {
    /// Canonical settings for a fleet of `appliances` rows: mutation rate is
    /// one expected flip per genome.
    pub fn defaults_for(appliances: usize) -> Self {
        let genome_len = (appliances * SLOTS).max(1);
        Self {
            population_size: 50,
            max_generations: 500,
            tournament_size: 3,
            crossover_rate: 0.9,
            mutation_rate: 1.0 / genome_len as f64,
            stagnation_window: 30,
            seed: 0,
        }
    }
}

/// A complete scheduling problem as read from a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub appliances: Vec<Appliance>,
    pub price: PriceSignal,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demand_limit: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pv: Option<PvProfile>,
    pub ga: GaParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    appliances: Vec<Appliance>,
    price: PriceSignal,
    #[serde(default)]
    demand_limit: Option<Vec<f64>>,
    #[serde(default)]
    pv: Option<PvProfile>,
    #[serde(default)]
    ga: Option<GaParams>,
}

impl<'de> Deserialize<'de> for ScenarioConfig {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawScenario::deserialize(de)?;
        let ga = raw
            .ga
            .unwrap_or_else(|| GaParams::defaults_for(raw.appliances.len()));
        Ok(Self {
            appliances: raw.appliances,
            price: raw.price,
            demand_limit: raw.demand_limit,
            pv: raw.pv,
            ga,
        })
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// One violated invariant found while validating a [`ScenarioConfig`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigViolation {
    /// Path of the offending field, e.g. `appliances[2].on_calls`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn push(out: &mut Vec<ConfigViolation>, field: impl Into<String>, message: impl Into<String>) {
    out.push(ConfigViolation {
        field: field.into(),
        message: message.into(),
    });
}

fn check_slot_vector(out: &mut Vec<ConfigViolation>, field: &str, values: &[f64]) -> bool {
    if values.len() != SLOTS {
        push(
            out,
            field,
            format!("length {SLOTS} required, got {}", values.len()),
        );
        return false;
    }
    true
}

/// Checks every invariant of `config` and returns all violations found.
///
/// Each defect is reported once: derived checks (window capacity, NL load
/// against the demand limit) only run when the fields they depend on are
/// themselves valid.
pub fn validate_scenario(config: &ScenarioConfig) -> Vec<ConfigViolation> {
    let mut out = Vec::new();

    let mut seen = HashSet::new();
    let mut nl_load = [0.0; SLOTS];
    let mut nl_load_known = true;
    for (i, a) in config.appliances.iter().enumerate() {
        let at = |f: &str| format!("appliances[{i}].{f}");
        if !seen.insert(a.id.as_str()) {
            push(&mut out, at("id"), format!("duplicate appliance id '{}'", a.id));
        }
        let rating_ok = a.rating.is_finite() && a.rating > 0.0;
        if !rating_ok {
            push(&mut out, at("rating_kwh"), "rating must be > 0");
        }
        let calls_ok = (1..=SLOTS).contains(&a.on_calls);
        if !calls_ok {
            push(&mut out, at("on_calls"), "on_calls must be within 1..=24");
        }
        let mut bounds_ok = true;
        if a.latest_end >= SLOTS {
            push(&mut out, at("latest_end"), "latest_end must be <= 23");
            bounds_ok = false;
        } else if a.earliest_start > a.latest_end {
            push(
                &mut out,
                at("earliest_start"),
                "earliest_start must be <= latest_end",
            );
            bounds_ok = false;
        }
        if calls_ok && bounds_ok && a.window_len() < a.on_calls {
            push(
                &mut out,
                at("on_calls"),
                format!(
                    "window can hold duty cycle: window {}..={} has {} slots, fewer than on_calls {}",
                    a.earliest_start,
                    a.latest_end,
                    a.window_len(),
                    a.on_calls
                ),
            );
        } else if a.category == ApplianceCategory::Necessary {
            if calls_ok && bounds_ok && rating_ok {
                for slot in a.earliest_start..a.earliest_start + a.on_calls {
                    nl_load[slot] += a.rating;
                }
            } else {
                nl_load_known = false;
            }
        }
    }

    let price = config.price.as_slice();
    if check_slot_vector(&mut out, "price", price) {
        if price.iter().any(|p| !p.is_finite() || *p < 0.0) {
            push(&mut out, "price", "every price must be >= 0");
        } else if !price.iter().any(|p| *p > 0.0) {
            push(&mut out, "price", "at least one price must be > 0");
        }
    }

    if let Some(limit) = &config.demand_limit {
        if check_slot_vector(&mut out, "demand_limit", limit) {
            if limit.iter().any(|d| !d.is_finite() || *d <= 0.0) {
                push(&mut out, "demand_limit", "every entry must be > 0");
            } else if nl_load_known {
                for (slot, (&nl, &d)) in nl_load.iter().zip(limit).enumerate() {
                    if nl > d {
                        push(
                            &mut out,
                            format!("demand_limit[{slot}]"),
                            format!("infeasible: mandatory NL load {nl} exceeds limit {d}"),
                        );
                    }
                }
            }
        }
    }

    if let Some(pv) = &config.pv {
        if !(pv.sigma.is_finite() && pv.sigma > 0.0) {
            push(&mut out, "pv.sigma", "sigma must be > 0");
        }
        if !pv.scale.is_finite() || pv.scale < 0.0 {
            push(&mut out, "pv.scale", "scale must be >= 0");
        }
        let window_ok = pv.day_end < SLOTS && pv.day_start <= pv.day_end;
        if !window_ok {
            push(
                &mut out,
                "pv.day_end",
                "daylight window must satisfy 0 <= day_start <= day_end <= 23",
            );
        }
        if !(pv.delta.is_finite() && (0.0..SLOTS as f64).contains(&pv.delta)) {
            push(&mut out, "pv.delta", "delta must lie in [0, 24)");
        } else if window_ok
            && !(pv.day_start as f64 <= pv.delta && pv.delta <= pv.day_end as f64)
        {
            push(&mut out, "pv.delta", "delta must lie within the daylight window");
        }
    }

    let ga = &config.ga;
    if ga.population_size < 2 {
        push(&mut out, "ga.population_size", "population_size must be >= 2");
    }
    if ga.max_generations == 0 {
        push(&mut out, "ga.max_generations", "max_generations must be >= 1");
    }
    if ga.tournament_size == 0 {
        push(&mut out, "ga.tournament_size", "tournament_size must be >= 1");
    } else if ga.population_size >= 2 && ga.tournament_size > ga.population_size {
        push(
            &mut out,
            "ga.tournament_size",
            "tournament_size must be <= population_size",
        );
    }
    if !(0.0..=1.0).contains(&ga.crossover_rate) {
        push(&mut out, "ga.crossover_rate", "crossover_rate must lie in [0, 1]");
    }
    if !(0.0..=1.0).contains(&ga.mutation_rate) {
        push(&mut out, "ga.mutation_rate", "mutation_rate must lie in [0, 1]");
    }
    if ga.stagnation_window == 0 {
        push(&mut out, "ga.stagnation_window", "stagnation_window must be >= 1");
    }

    out
}

/// A [`ScenarioConfig`] that passed [`validate_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario(ScenarioConfig);

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let violations = validate_scenario(&config);
        if violations.is_empty() {
            Ok(Self(config))
        } else {
            Err(Error::InvalidScenario(violations))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(ScenarioConfig::from_path(path)?)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.0
    }

    pub fn into_config(self) -> ScenarioConfig {
        self.0
    }

    pub fn appliance_count(&self) -> usize {
        self.0.appliances.len()
    }

    pub fn genome_len(&self) -> usize {
        self.appliance_count() * SLOTS
    }

    /// Same scenario with the PV source removed.
    pub fn without_pv(&self) -> Self {
        let mut config = self.0.clone();
        config.pv = None;
        Self(config)
    }

    /// Same scenario with different GA settings. The settings must be valid.
    pub fn with_ga(&self, ga: GaParams) -> Result<Self> {
        let mut config = self.0.clone();
        config.ga = ga;
        Self::new(config)
    }
}

impl Deref for Scenario {
    type Target = ScenarioConfig;

    fn deref(&self) -> &ScenarioConfig {
        &self.0
    }
}

/// Binary appliance-by-slot ON/OFF matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    rows: usize,
    bits: Vec<bool>,
}

impl Schedule {
    pub fn zeros(rows: usize) -> Self {
        Self {
            rows,
            bits: vec![false; rows * SLOTS],
        }
    }

    /// Builds a schedule from a flat row-major bit vector.
    pub fn from_bits(rows: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != rows * SLOTS {
            return Err(Error::Dimension {
                expected: rows * SLOTS,
                actual: bits.len(),
            });
        }
        Ok(Self { rows, bits })
    }

    pub fn from_rows(rows: &[[bool; SLOTS]]) -> Self {
        Self {
            rows: rows.len(),
            bits: rows.iter().flatten().copied().collect(),
        }
    }

    /// Schedule with the given ON slots per row.
    pub fn from_on_slots(rows: &[&[usize]]) -> Self {
        let mut s = Self::zeros(rows.len());
        for (r, slots) in rows.iter().enumerate() {
            for &t in *slots {
                s.set(r, t, true);
            }
        }
        s
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn get(&self, row: usize, slot: usize) -> bool {
        self.bits[row * SLOTS + slot]
    }

    pub fn set(&mut self, row: usize, slot: usize, on: bool) {
        self.bits[row * SLOTS + slot] = on;
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.bits[row * SLOTS..(row + 1) * SLOTS]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [bool] {
        &mut self.bits[row * SLOTS..(row + 1) * SLOTS]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn on_count(&self, row: usize) -> usize {
        self.row(row).iter().filter(|b| **b).count()
    }

    /// Rows rendered as `0`/`1` strings, one per appliance.
    pub fn to_strings(&self) -> Vec<String> {
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .map(|b| if *b { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }
}
