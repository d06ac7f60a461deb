//! Genetic algorithm over binary appliance-by-slot schedules.
//!
//! A chromosome is the schedule flattened row-major (appliance-major,
//! slot-minor). Every genome that reaches fitness evaluation has been passed
//! through [`feasibility::repair`], so only the demand limit can be violated,
//! and that is priced into the fitness as a penalty.
//!
//! # Random stream
//!
//! All stochastic choices come from one [`ChaCha8Rng`] seeded with
//! `GaParams::seed` via `seed_from_u64`, consumed in this fixed order:
//!
//! 1. initial population: for members `1..M`, 24·N fair bits row-major, then
//!    the repair draws for that member (member 0 is the deterministic
//!    baseline and draws nothing);
//! 2. per offspring pair of each generation: tournament draws for parent A,
//!    then parent B; one uniform `f64` against the crossover rate and, when
//!    crossing, one cut point; repair of child A, then child B; one uniform
//!    `f64` per bit for the mutation mask of child A, repair of A, then the
//!    same for child B.
//!
//! Fitness evaluation draws nothing, so evaluating serially or in parallel
//! yields the same trajectory.

use std::collections::HashMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Scenario, Schedule};
use crate::error::{Error, Result};
use crate::feasibility::{self, demand_excess, penalty_weight};
use crate::metrics::load_of_bits;
use crate::pv::{dispatch_generation, generation_profile};

/// The generator behind every stochastic choice.
pub type GaRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> GaRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genome: Vec<bool>,
    pub fitness: Option<f64>,
}

impl Chromosome {
    pub fn new(genome: Vec<bool>) -> Self {
        Self {
            genome,
            fitness: None,
        }
    }

    pub fn from_schedule(schedule: Schedule) -> Self {
        Self::new(schedule.into_bits())
    }

    pub fn to_schedule(&self, scenario: &Scenario) -> Result<Schedule> {
        Schedule::from_bits(scenario.appliance_count(), self.genome.clone())
    }

    fn fitness_or_inf(&self) -> f64 {
        self.fitness.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    MaxGenerations,
    Stagnation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaRun {
    pub best_schedule: Schedule,
    pub best_fitness: f64,
    /// Best fitness so far after the initial population and after each
    /// generation.
    pub fitness_history: Vec<f64>,
    pub generations_executed: usize,
    pub terminated_by: Termination,
}

/// Fitness evaluator with the scenario-derived constants precomputed.
#[derive(Debug, Clone)]
pub struct FitnessFn<'a> {
    scenario: &'a Scenario,
    generation: Option<[f64; crate::domain::SLOTS]>,
    penalty: f64,
}

impl<'a> FitnessFn<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self {
            scenario,
            generation: scenario.pv.as_ref().map(generation_profile),
            penalty: penalty_weight(&scenario.price),
        }
    }

    /// Grid bill after PV plus the demand-limit penalty. Lower is better.
    pub fn evaluate(&self, genome: &[bool]) -> Result<f64> {
        if genome.len() != self.scenario.genome_len() {
            return Err(Error::Dimension {
                expected: self.scenario.genome_len(),
                actual: genome.len(),
            });
        }
        let load = load_of_bits(genome, &self.scenario.appliances);
        let cost = match &self.generation {
            Some(generated) => dispatch_generation(&load, generated)
                .grid_profile()
                .cost(&self.scenario.price),
            None => load.cost(&self.scenario.price),
        };
        Ok(match &self.scenario.demand_limit {
            Some(limit) => cost + self.penalty * demand_excess(&load, limit),
            None => cost,
        })
    }
}

pub fn fitness(chromosome: &Chromosome, scenario: &Scenario) -> Result<f64> {
    FitnessFn::new(scenario).evaluate(&chromosome.genome)
}

/// `population_size` repaired chromosomes: the baseline schedule first, then
/// uniform random genomes.
pub fn init_population<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Vec<Chromosome> {
    let size = scenario.ga.population_size;
    let mut population = Vec::with_capacity(size);
    population.push(Chromosome::from_schedule(feasibility::baseline_schedule(
        scenario,
    )));
    while population.len() < size {
        let mut genome = random_genome(scenario.genome_len(), rng);
        feasibility::repair_genome(&mut genome, scenario, rng);
        population.push(Chromosome::new(genome));
    }
    population
}

/// Uniform random bit vector, before repair.
pub fn random_genome<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<bool> {
    (0..len).map(|_| rng.random_bool(0.5)).collect()
}

/// Draws `k` distinct members and returns the fittest, the earliest drawn on
/// ties. Unevaluated members count as infinitely bad.
pub fn tournament_select<'p, R: Rng + ?Sized>(
    population: &'p [Chromosome],
    k: usize,
    rng: &mut R,
) -> Result<&'p Chromosome> {
    if k == 0 || k > population.len() {
        return Err(Error::TournamentSize {
            k,
            population: population.len(),
        });
    }
    let mut best: Option<&Chromosome> = None;
    for i in index::sample(rng, population.len(), k) {
        let candidate = &population[i];
        if best.is_none_or(|b| candidate.fitness_or_inf() < b.fitness_or_inf()) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("k >= 1"))
}

/// Splice at `cut`: `a[..cut] + b[cut..]` and `b[..cut] + a[cut..]`.
pub fn splice(a: &[bool], b: &[bool], cut: usize) -> (Vec<bool>, Vec<bool>) {
    let mut first = a[..cut].to_vec();
    first.extend_from_slice(&b[cut..]);
    let mut second = b[..cut].to_vec();
    second.extend_from_slice(&a[cut..]);
    (first, second)
}

/// One-point crossover without repair. With probability `rate` the cut is
/// drawn uniformly from `1..len`; otherwise the parents are copied.
pub fn one_point_crossover_raw<R: Rng + ?Sized>(
    a: &[bool],
    b: &[bool],
    rate: f64,
    rng: &mut R,
) -> Result<(Vec<bool>, Vec<bool>)> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() >= 2 && rng.random::<f64>() < rate {
        let cut = rng.random_range(1..a.len());
        Ok(splice(a, b, cut))
    } else {
        Ok((a.to_vec(), b.to_vec()))
    }
}

/// One-point crossover followed by repair of both children.
pub fn one_point_crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    rate: f64,
    scenario: &Scenario,
    rng: &mut R,
) -> Result<(Chromosome, Chromosome)> {
    let (mut x, mut y) = one_point_crossover_raw(&a.genome, &b.genome, rate, rng)?;
    check_len(&x, scenario)?;
    feasibility::repair_genome(&mut x, scenario, rng);
    feasibility::repair_genome(&mut y, scenario, rng);
    Ok((Chromosome::new(x), Chromosome::new(y)))
}

/// Flips each bit independently with probability `rate`, without repair.
/// Always draws one uniform per bit.
pub fn binary_mutation_raw<R: Rng + ?Sized>(genome: &mut [bool], rate: f64, rng: &mut R) {
    for bit in genome.iter_mut() {
        if rng.random::<f64>() < rate {
            *bit = !*bit;
        }
    }
}

/// Bit-flip mutation followed by repair.
pub fn binary_mutation<R: Rng + ?Sized>(
    c: &Chromosome,
    rate: f64,
    scenario: &Scenario,
    rng: &mut R,
) -> Result<Chromosome> {
    check_len(&c.genome, scenario)?;
    let mut genome = c.genome.clone();
    binary_mutation_raw(&mut genome, rate, rng);
    feasibility::repair_genome(&mut genome, scenario, rng);
    Ok(Chromosome::new(genome))
}

fn check_len(genome: &[bool], scenario: &Scenario) -> Result<()> {
    if genome.len() != scenario.genome_len() {
        return Err(Error::Dimension {
            expected: scenario.genome_len(),
            actual: genome.len(),
        });
    }
    Ok(())
}

struct Evaluator<'a> {
    fitness: FitnessFn<'a>,
    cache: HashMap<Vec<bool>, f64>,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, population: &mut [Chromosome]) {
        for c in population.iter_mut().filter(|c| c.fitness.is_none()) {
            let f = match self.cache.get(&c.genome) {
                Some(&f) => f,
                None => {
                    let f = self
                        .fitness
                        .evaluate(&c.genome)
                        .expect("genome length fixed by construction");
                    self.cache.insert(c.genome.clone(), f);
                    f
                }
            };
            c.fitness = Some(f);
        }
    }
}

fn fittest(population: &[Chromosome]) -> &Chromosome {
    population
        .iter()
        .reduce(|best, c| {
            if c.fitness_or_inf() < best.fitness_or_inf() {
                c
            } else {
                best
            }
        })
        .expect("population is non-empty")
}

/// Runs the generational loop with elitism until `max_generations` or until
/// the best fitness has not improved for `stagnation_window` generations.
pub fn evolve(scenario: &Scenario) -> GaRun {
    let ga = &scenario.ga;
    let mut rng = rng_from_seed(ga.seed);
    let mut eval = Evaluator {
        fitness: FitnessFn::new(scenario),
        cache: HashMap::new(),
    };

    let mut population = init_population(scenario, &mut rng);
    eval.evaluate(&mut population);
    let mut best = fittest(&population).clone();
    let mut history = vec![best.fitness_or_inf()];
    let mut stagnant = 0;
    let mut generation = 0;
    let mut terminated_by = Termination::MaxGenerations;

    while generation < ga.max_generations {
        generation += 1;
        let mut next = Vec::with_capacity(population.len());
        next.push(best.clone());
        while next.len() < population.len() {
            let a = tournament_select(&population, ga.tournament_size, &mut rng)
                .expect("tournament size validated");
            let b = tournament_select(&population, ga.tournament_size, &mut rng)
                .expect("tournament size validated");
            let (x, y) = one_point_crossover(a, b, ga.crossover_rate, scenario, &mut rng)
                .expect("genome length fixed");
            let x = binary_mutation(&x, ga.mutation_rate, scenario, &mut rng).expect("genome length fixed");
            let y = binary_mutation(&y, ga.mutation_rate, scenario, &mut rng).expect("genome length fixed");
            next.push(x);
            if next.len() < population.len() {
                next.push(y);
            }
        }
        eval.evaluate(&mut next);
        population = next;

        let candidate = fittest(&population);
        let (old, new) = (best.fitness_or_inf(), candidate.fitness_or_inf());
        if new < old {
            if old - new > 1e-12 * old.abs() {
                stagnant = 0;
            } else {
                stagnant += 1;
            }
            best = candidate.clone();
        } else {
            stagnant += 1;
        }
        history.push(best.fitness_or_inf());
        if stagnant >= ga.stagnation_window {
            terminated_by = Termination::Stagnation;
            break;
        }
    }

    GaRun {
        best_fitness: best.fitness_or_inf(),
        best_schedule: best
            .to_schedule(scenario)
            .expect("genome length fixed"),
        fitness_history: history,
        generations_executed: generation,
        terminated_by,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Appliance, ApplianceCategory, GaParams, PriceSignal, ScenarioConfig, SLOTS};
    use crate::feasibility::{check_feasibility, ViolationKind};
    use crate::reference::reference_scenario;

    fn one_appliance(category: ApplianceCategory, calls: usize, rating: f64, price: Vec<f64>) -> ScenarioConfig {
        ScenarioConfig {
            appliances: vec![Appliance {
                id: "a".into(),
                name: "a".into(),
                category,
                rating,
                on_calls: calls,
                earliest_start: 0,
                latest_end: 23,
            }],
            price: PriceSignal(price),
            demand_limit: None,
            pv: None,
            ga: GaParams {
                population_size: 2,
                tournament_size: 2,
                ..GaParams::defaults_for(1)
            },
        }
    }

    fn price_1_3() -> Vec<f64> {
        let mut p = vec![9.0; SLOTS];
        p[..4].copy_from_slice(&[5.0, 1.0, 3.0, 2.0]);
        p
    }

    fn with_fitness(values: &[f64]) -> Vec<Chromosome> {
        values
            .iter()
            .enumerate()
            .map(|(i, &f)| Chromosome {
                genome: vec![i % 2 == 0; 4],
                fitness: Some(f),
            })
            .collect()
    }

    #[test]
    fn initial_population_shape_and_determinism() {
        let sc = Scenario::new(one_appliance(ApplianceCategory::Inconsistent, 5, 1.0, price_1_3())).unwrap();
        let pop = init_population(&sc, &mut rng_from_seed(9));
        assert_eq!(pop.len(), 2);
        for c in &pop {
            assert_eq!(c.genome.len(), 24);
            assert!(check_feasibility(&c.to_schedule(&sc).unwrap(), &sc).unwrap().is_empty());
        }
        assert_eq!(pop, init_population(&sc, &mut rng_from_seed(9)));
    }

    #[test]
    fn fitness_examples() {
        let mut p = vec![0.0; SLOTS];
        p[1] = 5.0;
        p[3] = 2.0;
        let config = one_appliance(ApplianceCategory::Inconsistent, 2, 2.0, p);
        let sc = Scenario::new(config.clone()).unwrap();
        let c = Chromosome::from_schedule(Schedule::from_on_slots(&[&[1, 3]]));
        assert_eq!(fitness(&c, &sc).unwrap(), 14.0);
        assert_eq!(fitness(&Chromosome::new(vec![false; 24]), &sc).unwrap(), 0.0);

        let mut limited = config;
        limited.demand_limit = Some(vec![1.0; SLOTS]);
        let sc = Scenario::new(limited).unwrap();
        let lambda = 1000.0 * 5.0;
        assert_eq!(fitness(&c, &sc).unwrap(), 14.0 + lambda * 2.0);

        assert!(fitness(&Chromosome::new(vec![false; 23]), &sc).is_err());
    }

    #[test]
    fn fitness_is_bit_identical() {
        let sc = reference_scenario();
        let pop = init_population(&sc, &mut rng_from_seed(4));
        for c in &pop {
            assert_eq!(
                fitness(c, &sc).unwrap().to_bits(),
                fitness(c, &sc).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn tournament_edge_cases() {
        let pop = with_fitness(&[7.0, 3.0, 9.0, 3.0, 4.0]);
        let mut rng = rng_from_seed(1);
        for _ in 0..50 {
            assert_eq!(tournament_select(&pop, 5, &mut rng).unwrap().fitness, Some(3.0));
        }
        let pair = with_fitness(&[5.0, 9.0]);
        for _ in 0..50 {
            assert_eq!(tournament_select(&pair, 2, &mut rng).unwrap().fitness, Some(5.0));
        }
        assert!(tournament_select(&pop, 0, &mut rng).is_err());
        assert!(tournament_select(&pop, 6, &mut rng).is_err());
    }

    #[test]
    fn splice_definition() {
        let a = [false; 6];
        let b = [true; 6];
        let (x, y) = splice(&a, &b, 2);
        assert_eq!(x, [false, false, true, true, true, true]);
        assert_eq!(y, [true, true, false, false, false, false]);
    }

    #[test]
    fn crossover_fixed_points() {
        let mut rng = rng_from_seed(5);
        let a: Vec<bool> = (0..24).map(|i| i % 3 == 0).collect();
        let b: Vec<bool> = (0..24).map(|i| i % 2 == 0).collect();
        for _ in 0..20 {
            let (x, y) = one_point_crossover_raw(&a, &a, 1.0, &mut rng).unwrap();
            assert_eq!((x.as_slice(), y.as_slice()), (a.as_slice(), a.as_slice()));
            let (x, y) = one_point_crossover_raw(&a, &b, 0.0, &mut rng).unwrap();
            assert_eq!((x, y), (a.clone(), b.clone()));
        }
        assert!(one_point_crossover_raw(&a, &b[..23], 1.0, &mut rng).is_err());
    }

    #[test]
    fn crossover_children_are_complementary_splices() {
        let mut rng = rng_from_seed(6);
        let a = vec![false; 24];
        let b = vec![true; 24];
        for _ in 0..50 {
            let (x, y) = one_point_crossover_raw(&a, &b, 1.0, &mut rng).unwrap();
            let cut = x.iter().position(|bit| *bit).unwrap();
            assert!((1..24).contains(&cut));
            assert_eq!((x.clone(), y.clone()), splice(&a, &b, cut));
        }
    }

    #[test]
    fn mutation_extremes() {
        let mut rng = rng_from_seed(2);
        let g: Vec<bool> = (0..48).map(|i| i % 5 == 0).collect();
        let mut same = g.clone();
        binary_mutation_raw(&mut same, 0.0, &mut rng);
        assert_eq!(same, g);
        let mut flipped = g.clone();
        binary_mutation_raw(&mut flipped, 1.0, &mut rng);
        assert!(flipped.iter().zip(&g).all(|(x, y)| x != y));
    }

    #[test]
    fn operators_preserve_length_and_feasibility() {
        let sc = reference_scenario();
        let mut rng = rng_from_seed(11);
        let pop = init_population(&sc, &mut rng);
        for pair in pop.chunks(2) {
            let (x, y) = one_point_crossover(&pair[0], &pair[1], 1.0, &sc, &mut rng).unwrap();
            for c in [x, y] {
                let m = binary_mutation(&c, 0.2, &sc, &mut rng).unwrap();
                assert_eq!(m.genome.len(), sc.genome_len());
                let v = check_feasibility(&m.to_schedule(&sc).unwrap(), &sc).unwrap();
                assert!(v.iter().all(|v| v.kind == ViolationKind::DemandLimit));
            }
        }
    }

    #[test]
    fn nl_only_fleet_stagnates_on_fixed_pattern() {
        let mut config = one_appliance(ApplianceCategory::Necessary, 22, 1.5, price_1_3());
        config.ga = GaParams {
            population_size: 10,
            stagnation_window: 5,
            ..GaParams::defaults_for(1)
        };
        let sc = Scenario::new(config).unwrap();
        let run = evolve(&sc);
        assert_eq!(run.terminated_by, Termination::Stagnation);
        assert_eq!(run.generations_executed, 5);
        let fixed = feasibility::baseline_schedule(&sc);
        assert_eq!(run.best_schedule, fixed);
        let cost = crate::metrics::total_cost(&fixed, &sc.appliances, &sc.price).unwrap();
        assert_eq!(run.best_fitness, cost);
    }

    #[test]
    fn single_icl_reaches_brute_force_optimum() {
        let mut config = one_appliance(ApplianceCategory::Inconsistent, 2, 2.0, price_1_3());
        config.ga = GaParams {
            population_size: 20,
            ..GaParams::defaults_for(1)
        };
        let sc = Scenario::new(config).unwrap();
        // oracle: all C(24,2) placements
        let mut best = f64::INFINITY;
        for i in 0..24 {
            for j in i + 1..24 {
                best = best.min(2.0 * (sc.price.at(i) + sc.price.at(j)));
            }
        }
        assert_eq!(best, 6.0);
        let run = evolve(&sc);
        assert_eq!(run.best_fitness, 6.0);
        assert_eq!(run.best_schedule, Schedule::from_on_slots(&[&[1, 3]]));
    }

    #[test]
    fn evolve_is_deterministic_and_monotone() {
        let sc = reference_scenario();
        let sc = sc
            .with_ga(GaParams {
                max_generations: 60,
                seed: 17,
                ..sc.ga.clone()
            })
            .unwrap();
        let a = evolve(&sc);
        let b = evolve(&sc);
        assert_eq!(a, b);
        assert!(a.fitness_history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(a.fitness_history.len(), a.generations_executed + 1);
        assert_eq!(*a.fitness_history.last().unwrap(), a.best_fitness);
    }
}
