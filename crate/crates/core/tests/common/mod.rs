#![allow(dead_code)]

use loadshift::oracle::search_space_size;
use loadshift::{Appliance, ApplianceCategory, GaParams, PriceSignal, PvProfile, Scenario, ScenarioConfig, SLOTS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ORACLE_SPACE_LIMIT: u128 = 1 << 20;

fn rating<R: Rng>(rng: &mut R) -> f64 {
    (rng.random_range(5..=40) as f64) / 10.0
}

/// Random small household: one or two NL rows plus two to four shiftable
/// rows with random windows, a random integer price curve, and optionally
/// PV and a demand limit.
pub fn random_config<R: Rng>(rng: &mut R, ga: &GaParams) -> ScenarioConfig {
    let nl = rng.random_range(1..=2);
    let flexible = rng.random_range(2..=4);
    let mut appliances = Vec::new();
    for i in 0..nl + flexible {
        let category = if i < nl {
            ApplianceCategory::Necessary
        } else if rng.random_bool(0.5) {
            ApplianceCategory::Consistent
        } else {
            ApplianceCategory::Inconsistent
        };
        let start = rng.random_range(0..=12);
        let end = rng.random_range(start + 5..SLOTS);
        let window = end - start + 1;
        let max_calls = match category {
            ApplianceCategory::Inconsistent => 3,
            _ => 8,
        };
        appliances.push(Appliance {
            id: format!("a{i}"),
            name: format!("{category} {i}"),
            category,
            rating: rating(rng),
            on_calls: rng.random_range(1..=max_calls.min(window)),
            earliest_start: start,
            latest_end: end,
        });
    }
    let price = PriceSignal((0..SLOTS).map(|_| rng.random_range(1..=20) as f64).collect());
    let pv = rng.random_bool(0.5).then(|| PvProfile {
        scale: rng.random_range(5..=30) as f64,
        ..PvProfile::default()
    });
    let demand_limit = rng.random_bool(0.5).then(|| {
        let d = rng.random_range(40..=90) as f64 / 10.0;
        vec![d; SLOTS]
    });
    ScenarioConfig {
        appliances,
        price,
        demand_limit,
        pv,
        ga: GaParams {
            seed: 0,
            ..ga.clone()
        },
    }
}

/// Mutation pressure for the oracle instances, in expected flips per genome.
pub const ORACLE_FLIPS_PER_GENOME: f64 = 8.0;

/// `count` valid instances whose structurally feasible space lies between
/// 1,000 and 2^20 schedules.
pub fn oracle_instances(count: usize, seed: u64, ga: &GaParams) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let mut config = random_config(&mut rng, ga);
        config.ga.mutation_rate = ORACLE_FLIPS_PER_GENOME / (config.appliances.len() * SLOTS) as f64;
        let Ok(sc) = Scenario::new(config) else {
            continue;
        };
        let size = search_space_size(&sc);
        if (1_000..=ORACLE_SPACE_LIMIT).contains(&size) {
            out.push(sc);
        }
    }
    out
}

pub fn oracle_ga() -> GaParams {
    GaParams {
        population_size: 50,
        max_generations: 200,
        stagnation_window: 200,
        ..GaParams::defaults_for(4)
    }
}
