//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use loadshift::feasibility::baseline_schedule;
use loadshift::ga::{self, binary_mutation_raw, random_genome, tournament_select, Chromosome};
use loadshift::metrics::{par, LoadProfile};
use loadshift::pv::pv_generation;
use loadshift::reference::{reference_config, reference_scenario};
use loadshift::runner::{execute, verify_against_oracle, ScenarioComparison};
use loadshift::{
    check_feasibility, evolve, repair, total_energy, GaParams, PvProfile, Scenario, ViolationKind, SLOTS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!("[{}] {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

#[test]
fn c1_oracle_equivalence() {
    const INSTANCES: usize = 20;
    const SEEDS: usize = 100;
    let limit = Duration::from_secs(10);
    let mut failures = Vec::new();
    for (i, sc) in common::oracle_instances(INSTANCES, 2024, &common::oracle_ga())
        .iter()
        .enumerate()
    {
        let start = Instant::now();
        let r = verify_against_oracle(sc, common::ORACLE_SPACE_LIMIT, 0, SEEDS).unwrap();
        let elapsed = start.elapsed();
        let worst_gap = r.runs.iter().map(|s| s.gap).fold(0.0, f64::max);
        println!(
            "  instance {i:2}: space {:7} pv {:5} limit {:5} match {:.2} worst gap {worst_gap:.4} in {elapsed:.2?}",
            r.search_space_size,
            sc.pv.is_some(),
            sc.demand_limit.is_some(),
            r.match_fraction,
        );
        for s in &r.runs {
            assert!(s.gap >= -1e-9 * r.oracle_cost.abs().max(1.0), "GA beat the oracle on instance {i}");
        }
        if !r.passes() || elapsed >= limit {
            failures.push(i);
        }
    }
    let pass = failures.is_empty();
    report(
        1,
        "oracle equivalence",
        pass,
        &format!("{} of {INSTANCES} instances below threshold or too slow: {failures:?}", failures.len()),
    );
    assert!(pass, "instances {failures:?} missed the optimum in more than 5% of seeds");
}

fn show(label: &str, c: &ScenarioComparison) -> String {
    format!(
        "{label}: cost {:.2} -> {:.2} ({:.2}%), PAR {:.4} -> {:.4} ({:.2}%)",
        c.cost_us, c.cost_s, c.bill_reduction_pct, c.par_us, c.par_s, c.par_reduction_pct
    )
}

#[test]
fn c2_reference_savings_direction() {
    let start = Instant::now();
    let (summary, _) = execute(&reference_scenario(), false).unwrap();
    let elapsed = start.elapsed();
    let plain = &summary.without_pv;
    let with_pv = summary.with_pv.as_ref().unwrap();
    let checks = [
        ("scheduled cheaper without PV", plain.cost_s < plain.cost_us),
        ("bill reduction larger with PV", with_pv.bill_reduction_pct > plain.bill_reduction_pct),
        ("PAR reduced without PV", plain.par_reduction_pct > 0.0),
        ("PAR reduced with PV", with_pv.par_reduction_pct > 0.0),
        ("PAR reduction larger with PV", with_pv.par_reduction_pct > plain.par_reduction_pct),
        ("under 30 s", elapsed < Duration::from_secs(30)),
    ];
    let failed: Vec<_> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    let pass = failed.is_empty();
    report(
        2,
        "reference savings direction",
        pass,
        &format!("{}; {}; {elapsed:.2?}; failed {failed:?}", show("no PV", plain), show("PV", with_pv)),
    );
    assert!(pass, "failed: {failed:?}");
}

#[test]
fn c3_energy_conservation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let small = GaParams {
        population_size: 20,
        max_generations: 40,
        stagnation_window: 20,
        ..GaParams::defaults_for(4)
    };
    let mut scenarios = vec![reference_scenario()];
    while scenarios.len() < 30 {
        if let Ok(sc) = Scenario::new(common::random_config(&mut rng, &small)) {
            scenarios.push(sc);
        }
    }
    let mut comparisons = 0;
    let mut worst: f64 = 0.0;
    for sc in &scenarios {
        let (summary, _) = execute(sc, false).unwrap();
        let duty: f64 = sc.appliances.iter().map(|a| a.on_calls as f64 * a.rating).sum();
        for c in std::iter::once(&summary.without_pv).chain(summary.with_pv.as_ref()) {
            comparisons += 1;
            assert!(c.eq12_holds);
            worst = worst.max((c.e_s_total - c.e_us_total).abs() / c.e_us_total);
            worst = worst.max((c.e_s_total - duty).abs() / duty);
        }
    }
    let pass = worst <= 1e-9;
    report(
        3,
        "energy conservation",
        pass,
        &format!("{comparisons} comparisons over {} scenarios, worst relative gap {worst:e}", scenarios.len()),
    );
    assert!(pass);
}

#[test]
fn c4_pv_point_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut profiles = vec![PvProfile::default()];
    for _ in 0..200 {
        let sigma = rng.random_range(1..=5) as f64;
        let delta = rng.random_range(9..=15) as f64;
        profiles.push(PvProfile {
            sigma,
            delta,
            scale: rng.random_range(1.0..50.0),
            day_start: 0,
            day_end: SLOTS - 1,
        });
    }
    let mut failures = 0;
    for p in &profiles {
        let d = p.delta as usize;
        let peak = pv_generation(d, p);
        let expected = p.scale / ((2.0 * std::f64::consts::PI).sqrt() * p.sigma);
        failures += usize::from(!rel_close(peak, expected, 1e-12));
        let s = p.sigma as usize;
        for t in [d - s, d + s] {
            failures += usize::from(!rel_close(pv_generation(t, p) / peak, (-0.5f64).exp(), 1e-12));
        }
    }
    let day = PvProfile::default();
    let night: Vec<usize> = (0..SLOTS).filter(|t| *t < day.day_start || *t > day.day_end).collect();
    failures += night.iter().filter(|t| pv_generation(**t, &day) != 0.0).count();
    let pass = failures == 0;
    report(
        4,
        "PV point checks",
        pass,
        &format!("{} profiles, {} night slots, {failures} failures", profiles.len(), night.len()),
    );
    assert!(pass);
}

#[test]
fn c5_par_properties() {
    let flat = par(&LoadProfile([2.5; SLOTS])).unwrap();
    let mut spike = [0.0; SLOTS];
    spike[11] = 7.0;
    let single = par(&LoadProfile(spike)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let load: [f64; SLOTS] = std::array::from_fn(|_| rng.random_range(0.0..20.0));
        let k = 10f64.powf(rng.random_range(-3.0..3.0));
        let p = par(&LoadProfile(load)).unwrap();
        let q = par(&LoadProfile(load.map(|x| x * k))).unwrap();
        worst = worst.max((p - q).abs() / p);
    }
    let pass = flat == 1.0 && single == 24.0 && worst <= 1e-12;
    report(
        5,
        "PAR properties",
        pass,
        &format!("flat {flat}, spike {single}, worst scale deviation {worst:e} over 1000 profiles"),
    );
    assert!(pass);
}

#[test]
fn c6_repair_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ga = GaParams::defaults_for(4);
    let mut genomes = 0;
    let mut bad = 0;
    let mut configs = 0;
    while genomes < 10_000 {
        let Ok(sc) = Scenario::new(common::random_config(&mut rng, &ga)) else {
            continue;
        };
        configs += 1;
        let duty: f64 = sc.appliances.iter().map(|a| a.on_calls as f64 * a.rating).sum();
        for _ in 0..100 {
            let density = rng.random_range(0.0..1.0);
            let bits = (0..sc.genome_len()).map(|_| rng.random_bool(density)).collect();
            let raw = loadshift::Schedule::from_bits(sc.appliance_count(), bits).unwrap();
            let fixed = repair(&raw, &sc, &mut rng).unwrap();
            let again = repair(&fixed, &sc, &mut rng).unwrap();
            let structural = check_feasibility(&fixed, &sc)
                .unwrap()
                .iter()
                .any(|v| v.kind != ViolationKind::DemandLimit);
            let energy = total_energy(&fixed, &sc.appliances).unwrap();
            if structural || again != fixed || !rel_close(energy, duty, 1e-12) {
                bad += 1;
            }
            genomes += 1;
        }
    }
    let pass = bad == 0;
    report(
        6,
        "repair contract",
        pass,
        &format!("{genomes} genomes over {configs} configs, {bad} violating or not idempotent"),
    );
    assert!(pass);
}

#[test]
fn c7_operator_statistics() {
    const TRIALS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let (len, rate) = (240usize, 0.05);
    let mut flipped = 0usize;
    for _ in 0..TRIALS {
        let mut g = vec![false; len];
        binary_mutation_raw(&mut g, rate, &mut rng);
        flipped += g.iter().filter(|b| **b).count();
    }
    let mean = flipped as f64 / TRIALS as f64;
    let expected = len as f64 * rate;
    let sigma_mean = (len as f64 * rate * (1.0 - rate) / TRIALS as f64).sqrt();
    let mutation_ok = (mean - expected).abs() <= 3.0 * sigma_mean;

    let m = 8usize;
    let population: Vec<Chromosome> = (0..m)
        .map(|i| Chromosome {
            genome: vec![i % 2 == 0; 4],
            fitness: Some(i as f64),
        })
        .collect();
    let mut counts = vec![0usize; m];
    for _ in 0..TRIALS {
        let pick = tournament_select(&population, 1, &mut rng).unwrap();
        counts[pick.fitness.unwrap() as usize] += 1;
    }
    let p = 1.0 / m as f64;
    let band = 3.0 * (TRIALS as f64 * p * (1.0 - p)).sqrt();
    let tournament_ok = counts.iter().all(|c| (*c as f64 - TRIALS as f64 * p).abs() <= band);

    let mut ones = [0usize; SLOTS];
    for _ in 0..TRIALS {
        for (t, b) in random_genome(SLOTS, &mut rng).iter().enumerate() {
            ones[t] += usize::from(*b);
        }
    }
    let init_ok = ones.iter().all(|c| (*c as f64 / TRIALS as f64 - 0.5).abs() <= 0.02);

    let pass = mutation_ok && tournament_ok && init_ok;
    report(
        7,
        "operator statistics",
        pass,
        &format!(
            "mutation mean {mean:.4} (12 ± {:.4}); k=1 counts {counts:?} (1250 ± {band:.1}); init ON-frequency ok {init_ok}",
            3.0 * sigma_mean
        ),
    );
    assert!(pass);
}

#[test]
fn c8_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    std::fs::write(&scenario, reference_config().to_json_pretty()).unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_loadshift"))
            .arg("run")
            .arg(&scenario)
            .arg("--out")
            .arg(&out)
            .args(["--seed", "11"])
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out.join("summary.json")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    let pass = !a.is_empty() && a == b;
    report(
        8,
        "CLI determinism",
        pass,
        &format!("summary.json {} and {} bytes, identical {}", a.len(), b.len(), a == b),
    );
    assert!(pass);
}

#[test]
fn c9_elitism_monotonicity() {
    let base = reference_scenario();
    let offenders: Vec<u64> = (0..100u64)
        .into_par_iter()
        .filter(|seed| {
            let sc = base
                .with_ga(GaParams {
                    seed: 1000 + seed,
                    ..base.ga.clone()
                })
                .unwrap();
            let run = evolve(&sc);
            let baseline = ga::fitness(&Chromosome::from_schedule(baseline_schedule(&sc)), &sc).unwrap();
            let monotone = run.fitness_history.windows(2).all(|w| w[1] <= w[0]);
            let consistent = run.fitness_history.last() == Some(&run.best_fitness)
                && run.fitness_history.len() == run.generations_executed + 1
                && run.best_fitness <= baseline;
            !(monotone && consistent)
        })
        .collect();
    let pass = offenders.is_empty();
    report(
        9,
        "elitism monotonicity",
        pass,
        &format!("100 seeds, non-monotone histories: {offenders:?}"),
    );
    assert!(pass);
}
