//! Scenario runs: unscheduled baseline against the GA schedule, with and
//! without PV, plus the files a run leaves on disk.
//!
//! A run directory holds
//!
//! | file              | content                                              |
//! |-------------------|------------------------------------------------------|
//! | `scenario.json`   | the effective scenario (seed override applied)       |
//! | `schedules.json`  | baseline and best GA schedules with run statistics   |
//! | `summary.json`    | one [`ScenarioComparison`] per case                  |
//! | `oracle.json`     | optional [`OracleReport`]                            |
//! | `fig3_price.csv` … `fig7_par.csv` | plot data, see [`emit_plot_data`]    |

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{GaParams, Scenario, ScenarioConfig, Schedule, SLOTS};
use crate::error::{Error, Result};
use crate::feasibility::baseline_schedule;
use crate::ga::{self, Termination};
use crate::metrics::{self, LoadProfile};
use crate::oracle::{self, DEFAULT_CAP};
use crate::pv;

/// Required share of seeds that must hit the oracle optimum.
pub const ORACLE_MATCH_THRESHOLD: f64 = 0.95;

pub const FIGURE_FILES: [&str; 5] = [
    "fig3_price.csv",
    "fig4_pv.csv",
    "fig5_load.csv",
    "fig6_cost.csv",
    "fig7_par.csv",
];

/// Unscheduled (`us`) against scheduled (`s`) totals for one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioComparison {
    #[serde(rename = "E_us_total")]
    pub e_us_total: f64,
    #[serde(rename = "E_s_total")]
    pub e_s_total: f64,
    /// Peak grid load, kWh per slot.
    pub u_us: f64,
    pub u_s: f64,
    pub cost_us: f64,
    pub cost_s: f64,
    pub par_us: f64,
    pub par_s: f64,
    pub bill_reduction_pct: f64,
    pub par_reduction_pct: f64,
    pub eq11_holds: bool,
    pub eq12_holds: bool,
}

/// Grid-side view of a schedule: load, what the grid supplies, and the bill.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseProfile {
    pub load: LoadProfile,
    pub grid: LoadProfile,
    pub pv_served: [f64; SLOTS],
    pub hourly_cost: [f64; SLOTS],
}

impl CaseProfile {
    pub fn evaluate(schedule: &Schedule, scenario: &Scenario) -> Result<Self> {
        let load = metrics::hourly_load(schedule, &scenario.appliances)?;
        let (grid, pv_served) = match &scenario.pv {
            Some(p) => {
                let d = pv::dispatch(&load, p);
                (d.grid_profile(), d.pv_served)
            }
            None => (load, [0.0; SLOTS]),
        };
        let hourly_cost = std::array::from_fn(|t| grid.at(t) * scenario.price.at(t));
        Ok(Self {
            load,
            grid,
            pv_served,
            hourly_cost,
        })
    }

    pub fn cost(&self) -> f64 {
        self.hourly_cost.iter().sum()
    }

    /// PAR of the grid draw; 0 when the grid supplies nothing.
    pub fn par(&self) -> f64 {
        metrics::par(&self.grid).unwrap_or(0.0)
    }
}

fn reduction_pct(before: f64, after: f64) -> f64 {
    if before > 0.0 {
        100.0 * (before - after) / before
    } else {
        0.0
    }
}

/// Compares two schedules of the same scenario on the grid side.
pub fn compare(unscheduled: &Schedule, scheduled: &Schedule, scenario: &Scenario) -> Result<ScenarioComparison> {
    let us = CaseProfile::evaluate(unscheduled, scenario)?;
    let s = CaseProfile::evaluate(scheduled, scenario)?;
    let e_us_total = us.load.total();
    let e_s_total = s.load.total();
    let (cost_us, cost_s) = (us.cost(), s.cost());
    let (par_us, par_s) = (us.par(), s.par());
    let (u_us, u_s) = (us.grid.peak(), s.grid.peak());
    Ok(ScenarioComparison {
        e_us_total,
        e_s_total,
        u_us,
        u_s,
        cost_us,
        cost_s,
        par_us,
        par_s,
        bill_reduction_pct: reduction_pct(cost_us, cost_s),
        par_reduction_pct: reduction_pct(par_us, par_s),
        eq11_holds: u_s < u_us,
        eq12_holds: (e_s_total - e_us_total).abs() <= 1e-9 * e_us_total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub without_pv: ScenarioComparison,
    pub with_pv: Option<ScenarioComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub schedule: Vec<String>,
    pub best_fitness: f64,
    pub generations_executed: usize,
    pub terminated_by: Termination,
    pub fitness_history: Vec<f64>,
}

impl GaOutcome {
    fn from_run(run: &ga::GaRun) -> Self {
        Self {
            schedule: run.best_schedule.to_strings(),
            best_fitness: run.best_fitness,
            generations_executed: run.generations_executed,
            terminated_by: run.terminated_by,
            fitness_history: run.fitness_history.clone(),
        }
    }
}

/// Contents of `schedules.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSchedules {
    pub unscheduled: Vec<String>,
    pub scheduled: GaOutcome,
    pub scheduled_pv: Option<GaOutcome>,
}

fn parse_rows(rows: &[String], scenario: &Scenario) -> Result<Schedule> {
    let bits: Vec<bool> = rows
        .iter()
        .flat_map(|r| r.chars().map(|c| c == '1'))
        .collect();
    if rows.iter().any(|r| r.len() != SLOTS || r.chars().any(|c| c != '0' && c != '1')) {
        return Err(Error::MissingArtifact(
            "schedules.json rows must be 24-character 0/1 strings".into(),
        ));
    }
    Schedule::from_bits(scenario.appliance_count(), bits)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub no_pv: bool,
    /// Run the oracle comparison with this enumeration cap.
    pub oracle_cap: Option<u128>,
    pub oracle_seeds: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub schedules: RunSchedules,
    pub oracle: Option<OracleReport>,
}

/// In-memory part of a run; no files touched.
pub fn execute(scenario: &Scenario, no_pv: bool) -> Result<(Summary, RunSchedules)> {
    let grid_only = scenario.without_pv();
    let baseline = baseline_schedule(scenario);
    let plain = ga::evolve(&grid_only);
    let without_pv = compare(&baseline, &plain.best_schedule, &grid_only)?;

    let pv_case = match (&scenario.pv, no_pv) {
        (Some(_), false) => {
            let run = ga::evolve(scenario);
            let cmp = compare(&baseline, &run.best_schedule, scenario)?;
            Some((run, cmp))
        }
        _ => None,
    };

    let summary = Summary {
        seed: scenario.ga.seed,
        without_pv,
        with_pv: pv_case.as_ref().map(|(_, c)| c.clone()),
    };
    let schedules = RunSchedules {
        unscheduled: baseline.to_strings(),
        scheduled: GaOutcome::from_run(&plain),
        scheduled_pv: pv_case.as_ref().map(|(r, _)| GaOutcome::from_run(r)),
    };
    Ok((summary, schedules))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|_| Error::MissingArtifact(path.display().to_string()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Loads `path`, runs both cases and writes every artifact into
/// `options.out_dir`.
pub fn run_scenario(path: &Path, options: &RunOptions) -> Result<RunOutcome> {
    let mut config = ScenarioConfig::from_path(path)?;
    if let Some(seed) = options.seed {
        config.ga.seed = seed;
    }
    if options.no_pv {
        config.pv = None;
    }
    let scenario = Scenario::new(config)?;

    // refuse before spending time on the GA
    let oracle = match options.oracle_cap {
        Some(cap) => {
            let size = oracle::search_space_size(&scenario);
            if size > cap {
                return Err(Error::SearchSpaceTooLarge { size, cap });
            }
            let seeds = options.oracle_seeds.unwrap_or(100);
            Some(verify_against_oracle(&scenario, cap, scenario.ga.seed, seeds)?)
        }
        None => None,
    };

    let (summary, schedules) = execute(&scenario, options.no_pv)?;

    let dir = &options.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    write(&dir.join("scenario.json"), &to_json(scenario.config()))?;
    write(&dir.join("schedules.json"), &to_json(&schedules))?;
    write(&dir.join("summary.json"), &to_json(&summary))?;
    if let Some(report) = &oracle {
        write(&dir.join("oracle.json"), &to_json(report))?;
    }
    emit_plot_data(dir)?;

    Ok(RunOutcome {
        summary,
        schedules,
        oracle,
    })
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Regenerates the five figure CSVs of a completed run directory from its
/// `scenario.json` and `schedules.json`.
///
/// * `fig3_price.csv`: `slot,price`
/// * `fig4_pv.csv`: `slot,pv_generation_kwh`
/// * `fig5_load.csv`: `slot,unscheduled_kwh,scheduled_kwh,scheduled_pv_kwh,pv_served_kwh,grid_draw_kwh`
///   where the last three describe the PV-aware schedule
/// * `fig6_cost.csv`: `slot,unscheduled_cost,scheduled_cost,unscheduled_pv_cost,scheduled_pv_cost`
/// * `fig7_par.csv`: `case,par`, one row per evaluated case
///
/// PV columns are left empty when the run had no PV case.
pub fn emit_plot_data(dir: &Path) -> Result<Vec<PathBuf>> {
    let config = ScenarioConfig::from_json(&read(&dir.join("scenario.json"))?)?;
    let scenario = Scenario::new(config)?;
    let schedules: RunSchedules = serde_json::from_str(&read(&dir.join("schedules.json"))?)
        .map_err(|e| Error::MissingArtifact(format!("schedules.json: {e}")))?;

    let grid_only = scenario.without_pv();
    let unscheduled = parse_rows(&schedules.unscheduled, &scenario)?;
    let scheduled = parse_rows(&schedules.scheduled.schedule, &scenario)?;
    let us = CaseProfile::evaluate(&unscheduled, &grid_only)?;
    let s = CaseProfile::evaluate(&scheduled, &grid_only)?;
    let pv_cases = match (&schedules.scheduled_pv, &scenario.pv) {
        (Some(out), Some(_)) => {
            let schedule = parse_rows(&out.schedule, &scenario)?;
            Some((
                CaseProfile::evaluate(&unscheduled, &scenario)?,
                CaseProfile::evaluate(&schedule, &scenario)?,
            ))
        }
        _ => None,
    };
    let generation = scenario
        .pv
        .as_ref()
        .map(pv::generation_profile)
        .unwrap_or([0.0; SLOTS]);

    let paths: Vec<PathBuf> = FIGURE_FILES.iter().map(|f| dir.join(f)).collect();
    let slots = 0..SLOTS;

    write_csv(
        &paths[0],
        &["slot", "price"],
        slots
            .clone()
            .map(|t| vec![t.to_string(), scenario.price.at(t).to_string()])
            .collect(),
    )?;
    write_csv(
        &paths[1],
        &["slot", "pv_generation_kwh"],
        slots
            .clone()
            .map(|t| vec![t.to_string(), generation[t].to_string()])
            .collect(),
    )?;
    write_csv(
        &paths[2],
        &[
            "slot",
            "unscheduled_kwh",
            "scheduled_kwh",
            "scheduled_pv_kwh",
            "pv_served_kwh",
            "grid_draw_kwh",
        ],
        slots
            .clone()
            .map(|t| {
                let pv_s = pv_cases.as_ref().map(|(_, c)| c);
                vec![
                    t.to_string(),
                    us.load.at(t).to_string(),
                    s.load.at(t).to_string(),
                    opt(pv_s.map(|c| c.load.at(t))),
                    opt(pv_s.map(|c| c.pv_served[t])),
                    opt(pv_s.map(|c| c.grid.at(t))),
                ]
            })
            .collect(),
    )?;
    write_csv(
        &paths[3],
        &[
            "slot",
            "unscheduled_cost",
            "scheduled_cost",
            "unscheduled_pv_cost",
            "scheduled_pv_cost",
        ],
        slots
            .map(|t| {
                vec![
                    t.to_string(),
                    us.hourly_cost[t].to_string(),
                    s.hourly_cost[t].to_string(),
                    opt(pv_cases.as_ref().map(|(u, _)| u.hourly_cost[t])),
                    opt(pv_cases.as_ref().map(|(_, c)| c.hourly_cost[t])),
                ]
            })
            .collect(),
    )?;
    let mut par_rows = vec![
        vec!["unscheduled".to_string(), us.par().to_string()],
        vec!["scheduled".to_string(), s.par().to_string()],
    ];
    if let Some((u, c)) = &pv_cases {
        par_rows.push(vec!["unscheduled_pv".to_string(), u.par().to_string()]);
        par_rows.push(vec!["scheduled_pv".to_string(), c.par().to_string()]);
    }
    write_csv(&paths[4], &["case", "par"], par_rows)?;
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub ga_cost: f64,
    pub gap: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub search_space_size: u128,
    pub oracle_cost: f64,
    pub oracle_schedule: Vec<String>,
    pub runs: Vec<SeedResult>,
    pub match_fraction: f64,
}

impl OracleReport {
    pub fn passes(&self) -> bool {
        self.match_fraction >= ORACLE_MATCH_THRESHOLD
    }
}

/// `true` when `cost` equals `optimum` to relative 1e-9.
pub fn matches_optimum(cost: f64, optimum: f64) -> bool {
    (cost - optimum).abs() <= 1e-9 * optimum.abs().max(1.0)
}

/// Runs the oracle once and the GA for seeds `first_seed..first_seed + seeds`.
pub fn verify_against_oracle(scenario: &Scenario, cap: u128, first_seed: u64, seeds: usize) -> Result<OracleReport> {
    let exact = oracle::brute_force_optimum(scenario, cap)?;
    let runs: Vec<SeedResult> = (0..seeds as u64)
        .into_par_iter()
        .map(|i| {
            let seed = first_seed.wrapping_add(i);
            let sc = scenario
                .with_ga(GaParams {
                    seed,
                    ..scenario.ga.clone()
                })
                .expect("only the seed changed");
            let run = ga::evolve(&sc);
            SeedResult {
                seed,
                ga_cost: run.best_fitness,
                gap: run.best_fitness - exact.best_cost,
                matched: matches_optimum(run.best_fitness, exact.best_cost),
            }
        })
        .collect();
    let matched = runs.iter().filter(|r| r.matched).count();
    Ok(OracleReport {
        search_space_size: exact.enumerated_count,
        oracle_cost: exact.best_cost,
        oracle_schedule: exact.best_schedule.to_strings(),
        match_fraction: if runs.is_empty() {
            1.0
        } else {
            matched as f64 / runs.len() as f64
        },
        runs,
    })
}

/// [`verify_against_oracle`] for a scenario file with its own seed as the
/// first seed.
pub fn verify_file(path: &Path, cap: Option<u128>, seeds: usize) -> Result<OracleReport> {
    let scenario = Scenario::load(path)?;
    verify_against_oracle(&scenario, cap.unwrap_or(DEFAULT_CAP), scenario.ga.seed, seeds)
}
