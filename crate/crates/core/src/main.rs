use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use loadshift::oracle::DEFAULT_CAP;
use loadshift::reference;
use loadshift::runner::{self, OracleReport, RunOptions, ScenarioComparison};

#[derive(Parser)]
#[command(name = "loadshift", version, about = "Household demand-response scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the unscheduled baseline with the GA schedule and write a run directory.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Override the GA seed from the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the PV case.
        #[arg(long)]
        no_pv: bool,
        /// Also check the GA against the exhaustive solver.
        #[arg(long)]
        oracle: bool,
        /// Enumeration cap for --oracle.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u128,
        /// Number of GA seeds compared against the oracle.
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        /// Exit nonzero when an energy-conservation or oracle check fails.
        #[arg(long)]
        strict: bool,
    },
    /// Compare GA runs over many seeds with the exhaustive optimum.
    Verify {
        scenario: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u128,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        /// Write the report as JSON to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Exit nonzero when fewer than 95% of seeds reach the optimum.
        #[arg(long)]
        strict: bool,
    },
    /// Rewrite the figure CSVs of an existing run directory.
    Plot { dir: PathBuf },
    /// Print the bundled reference scenario as JSON.
    Reference,
}

const STRICT_FAILURE: u8 = 3;

fn print_comparison(label: &str, c: &ScenarioComparison) {
    println!("{label}:");
    println!("  energy        unscheduled {:.4} kWh, scheduled {:.4} kWh", c.e_us_total, c.e_s_total);
    println!("  peak load     unscheduled {:.4} kWh, scheduled {:.4} kWh", c.u_us, c.u_s);
    println!(
        "  bill          unscheduled {:.4}, scheduled {:.4} ({:.2}% reduction)",
        c.cost_us, c.cost_s, c.bill_reduction_pct
    );
    println!(
        "  PAR           unscheduled {:.4}, scheduled {:.4} ({:.2}% reduction)",
        c.par_us, c.par_s, c.par_reduction_pct
    );
    println!("  peak lowered  {}   energy conserved  {}", c.eq11_holds, c.eq12_holds);
}

fn print_oracle(report: &OracleReport) {
    println!(
        "oracle: optimum {:.6} over {} schedules",
        report.oracle_cost, report.search_space_size
    );
    for r in report.runs.iter().filter(|r| !r.matched) {
        println!("  seed {:>6}: GA {:.6}, gap {:.6}", r.seed, r.ga_cost, r.gap);
    }
    let matched = report.runs.iter().filter(|r| r.matched).count();
    println!(
        "  {matched}/{} seeds reached the optimum ({:.1}%)",
        report.runs.len(),
        100.0 * report.match_fraction
    );
}

fn run(cli: Cli) -> Result<ExitCode, loadshift::Error> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            no_pv,
            oracle,
            cap,
            seeds,
            strict,
        } => {
            let options = RunOptions {
                out_dir: out.clone(),
                seed,
                no_pv,
                oracle_cap: oracle.then_some(cap),
                oracle_seeds: Some(seeds),
            };
            let outcome = runner::run_scenario(&scenario, &options)?;
            print_comparison("without PV", &outcome.summary.without_pv);
            if let Some(c) = &outcome.summary.with_pv {
                print_comparison("with PV", c);
            }
            if let Some(report) = &outcome.oracle {
                print_oracle(report);
            }
            println!("artifacts written to {}", out.display());

            let conserved = outcome.summary.without_pv.eq12_holds
                && outcome.summary.with_pv.as_ref().is_none_or(|c| c.eq12_holds);
            let oracle_ok = outcome.oracle.as_ref().is_none_or(OracleReport::passes);
            if strict && !(conserved && oracle_ok) {
                eprintln!("strict check failed");
                return Ok(ExitCode::from(STRICT_FAILURE));
            }
        }
        Command::Verify {
            scenario,
            cap,
            seeds,
            report,
            strict,
        } => {
            let result = runner::verify_file(&scenario, Some(cap), seeds)?;
            print_oracle(&result);
            if let Some(path) = report {
                let json = serde_json::to_string_pretty(&result).expect("serializable");
                std::fs::write(&path, json + "\n").map_err(|e| loadshift::Error::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
            }
            if strict && !result.passes() {
                eprintln!("strict check failed");
                return Ok(ExitCode::from(STRICT_FAILURE));
            }
        }
        Command::Plot { dir } => {
            for path in runner::emit_plot_data(&dir)? {
                println!("{}", path.display());
            }
        }
        Command::Reference => {
            println!("{}", reference::reference_config().to_json_pretty());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
