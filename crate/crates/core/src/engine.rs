//! Generational evolution loop with truncation and tournament selection.
//!
//! An *evolution* starts from a random population and proceeds until some
//! individual's fitness reaches the termination value (or a generation cap
//! trips). A *run* is a batch of independent evolutions summarized by the
//! median number of generations over the successful ones.
//!
//! Generation counting: generation 0 is the initial random population; if
//! it already contains a working genome the evolution took 0 generations.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, split_seed, EvoRng};
use crate::system::System;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionScheme {
    /// Keep the `parent_count` most fit individuals; breed random distinct
    /// pairs from that elite set until the population is refilled.
    Truncation,
    /// Each parent is the most fit of `tournament_size` individuals drawn
    /// uniformly with replacement.
    Tournament,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub population_size: usize,
    /// Elite size under truncation selection.
    pub parent_count: usize,
    pub tournament_size: usize,
    /// Truncation: probability, per bred pair, that the system's breeding
    /// step mutates a child. Tournament: probability that a child
    /// undergoes the system's whole-genome mutation step.
    pub mutation_prob: f64,
    /// Tournament only: probability that a child comes from crossover of
    /// two winners rather than a copy of one winner.
    pub crossover_rate: f64,
    pub selection_scheme: SelectionScheme,
    /// Evolutions that have not produced a working genome after this many
    /// generations are reported as failed.
    pub generation_cap: u64,
    /// A genome is working when its fitness is >= this value.
    pub termination_value: f64,
    /// Truncation only: also copy the elite unchanged into the next
    /// generation (they are re-evaluated there like everyone else).
    pub carry_parents: bool,
}

pub const DEFAULT_GENERATION_CAP: u64 = 100_000_000;

impl EvolutionParams {
    /// Truncation-selection parameter set (the sorting system's scheme):
    /// elite parents survive into the next generation alongside their
    /// children.
    pub fn truncation(
        population_size: usize,
        parent_count: usize,
        mutation_prob: f64,
        termination_value: f64,
    ) -> Self {
        Self {
            population_size,
            parent_count,
            tournament_size: 7,
            mutation_prob,
            crossover_rate: 0.9,
            selection_scheme: SelectionScheme::Truncation,
            generation_cap: DEFAULT_GENERATION_CAP,
            termination_value,
            carry_parents: true,
        }
    }

    /// Tournament-selection parameter set (every other system's scheme).
    pub fn tournament(
        population_size: usize,
        mutation_prob: f64,
        termination_value: f64,
    ) -> Self {
        Self {
            population_size,
            parent_count: 4,
            tournament_size: 7,
            mutation_prob,
            crossover_rate: 0.9,
            selection_scheme: SelectionScheme::Tournament,
            generation_cap: DEFAULT_GENERATION_CAP,
            termination_value,
            carry_parents: false,
        }
    }

    pub fn with_generation_cap(mut self, cap: u64) -> Self {
        self.generation_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::InvalidArgument("population_size must be >= 1".into()));
        }
        if self.parent_count == 0 || self.parent_count > self.population_size {
            return Err(Error::InvalidArgument(format!(
                "parent_count {} must be in [1, population_size {}]",
                self.parent_count, self.population_size
            )));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(Error::InvalidArgument(format!(
                "tournament_size {} must be in [1, population_size {}]",
                self.tournament_size, self.population_size
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::InvalidArgument("mutation_prob must be in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::InvalidArgument("crossover_rate must be in [0, 1]".into()));
        }
        if self.generation_cap == 0 {
            return Err(Error::InvalidArgument("generation_cap must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of one evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionOutcome<G> {
    /// Index of the first generation that contained a working genome, or
    /// the generation cap if none did.
    pub generations: u64,
    pub succeeded: bool,
    /// Best fitness ever observed (on that generation's context).
    pub best_fitness: f64,
    pub best_genome: G,
    /// Best-so-far changepoints as (generation, fitness) pairs.
    pub improvements: Vec<(u64, f64)>,
}

/// Result of a run: a batch of independent evolutions.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary<G> {
    pub evolutions: usize,
    /// Median generations over the successful evolutions; absent when every
    /// evolution hit the cap.
    pub median_generations: Option<f64>,
    /// Number of evolutions that hit the generation cap.
    pub failures: usize,
    pub per_evolution: Vec<EvolutionOutcome<G>>,
}

/// Indices of the `k` most fit individuals; ties at the k-th place are
/// resolved uniformly at random.
pub fn truncation_select_indices(
    fitnesses: &[f64],
    k: usize,
    rng: &mut EvoRng,
) -> Result<Vec<usize>> {
    if fitnesses.is_empty() {
        return Err(Error::InvalidArgument("empty population".into()));
    }
    if k == 0 || k > fitnesses.len() {
        return Err(Error::InvalidArgument(format!(
            "k {} must be in [1, population size {}]",
            k,
            fitnesses.len()
        )));
    }
    let mut order: Vec<usize> = (0..fitnesses.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]));
    let threshold = fitnesses[order[k - 1]];
    let mut chosen: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| fitnesses[i] > threshold)
        .collect();
    let mut tied: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| fitnesses[i] == threshold)
        .collect();
    // Partial Fisher-Yates over the tied genomes for the remaining slots.
    let need = k - chosen.len();
    for slot in 0..need {
        let pick = rng.gen_range(slot..tied.len());
        tied.swap(slot, pick);
        chosen.push(tied[slot]);
    }
    Ok(chosen)
}

/// The `k` most fit genomes of `population`; see
/// [`truncation_select_indices`] for the tie rule.
pub fn truncation_select<G: Clone>(
    population: &[(G, f64)],
    k: usize,
    rng: &mut EvoRng,
) -> Result<Vec<G>> {
    let fits: Vec<f64> = population.iter().map(|(_, f)| *f).collect();
    let idx = truncation_select_indices(&fits, k, rng)?;
    Ok(idx.into_iter().map(|i| population[i].0.clone()).collect())
}

/// Index of the winner of one tournament: `tournament_size` draws uniformly
/// with replacement, most fit wins, ties among the drawn tickets broken
/// uniformly at random.
pub fn tournament_select_index(
    fitnesses: &[f64],
    tournament_size: usize,
    rng: &mut EvoRng,
) -> usize {
    debug_assert!(!fitnesses.is_empty() && tournament_size >= 1);
    let mut best = rng.gen_range(0..fitnesses.len());
    let mut tie_count = 1u32;
    for _ in 1..tournament_size {
        let i = rng.gen_range(0..fitnesses.len());
        if fitnesses[i] > fitnesses[best] {
            best = i;
            tie_count = 1;
        } else if fitnesses[i] == fitnesses[best] {
            // Reservoir step keeps the winner uniform over tied draws.
            tie_count += 1;
            if rng.gen_range(0..tie_count) == 0 {
                best = i;
            }
        }
    }
    best
}

/// Winner of one tournament over `population`.
pub fn tournament_select<'a, G>(
    population: &'a [(G, f64)],
    tournament_size: usize,
    rng: &mut EvoRng,
) -> &'a G {
    let fits: Vec<f64> = population.iter().map(|(_, f)| *f).collect();
    &population[tournament_select_index(&fits, tournament_size, rng)].0
}

/// Breed the next generation. Population size is preserved; there is no
/// elitism unless `carry_parents` is set.
pub fn next_generation<S: System>(
    system: &S,
    population: &[S::Genome],
    fitnesses: &[f64],
    params: &EvolutionParams,
    rng: &mut EvoRng,
) -> Result<Vec<S::Genome>> {
    let target = params.population_size;
    let mut next: Vec<S::Genome> = Vec::with_capacity(target);
    match params.selection_scheme {
        SelectionScheme::Truncation => {
            let elite = truncation_select_indices(fitnesses, params.parent_count, rng)?;
            if params.carry_parents {
                for &i in elite.iter().take(target) {
                    next.push(population[i].clone());
                }
            }
            while next.len() < target {
                let (ai, bi) = if elite.len() == 1 {
                    (0, 0)
                } else {
                    let a = rng.gen_range(0..elite.len());
                    let mut b = rng.gen_range(0..elite.len() - 1);
                    if b >= a {
                        b += 1;
                    }
                    (a, b)
                };
                let (c1, c2) = system.crossover_with_mutation(
                    &population[elite[ai]],
                    &population[elite[bi]],
                    params.mutation_prob,
                    rng,
                );
                next.push(system.post_variation(c1, rng));
                if next.len() < target {
                    next.push(system.post_variation(c2, rng));
                }
                // An overflow child from the final pair is discarded.
            }
        }
        SelectionScheme::Tournament => {
            for _ in 0..target {
                let child = if rng.gen::<f64>() < params.crossover_rate {
                    let a = tournament_select_index(fitnesses, params.tournament_size, rng);
                    let b = tournament_select_index(fitnesses, params.tournament_size, rng);
                    system.crossover(&population[a], &population[b], rng).0
                } else {
                    let w = tournament_select_index(fitnesses, params.tournament_size, rng);
                    population[w].clone()
                };
                let child = if rng.gen::<f64>() < params.mutation_prob {
                    system.mutate(&child, rng)
                } else {
                    child
                };
                next.push(system.post_variation(child, rng));
            }
        }
    }
    Ok(next)
}

/// One evolution. `seed` fully determines the outcome.
pub fn evolve<S: System>(
    system: &S,
    params: &EvolutionParams,
    seed: u64,
) -> Result<EvolutionOutcome<S::Genome>> {
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut population: Vec<S::Genome> = (0..params.population_size)
        .map(|_| system.random_genome(&mut rng))
        .collect();
    let mut best: Option<(f64, S::Genome)> = None;
    let mut improvements: Vec<(u64, f64)> = Vec::new();

    for generation in 0..params.generation_cap {
        let ctx = system.generation_context(&mut rng);
        let fitnesses: Vec<f64> = population
            .iter()
            .map(|g| system.fitness(g, &ctx))
            .collect();
        let mut gen_best = 0;
        for i in 1..fitnesses.len() {
            if fitnesses[i] > fitnesses[gen_best] {
                gen_best = i;
            }
        }
        let gen_best_fit = fitnesses[gen_best];
        if best.as_ref().map_or(true, |(f, _)| gen_best_fit > *f) {
            best = Some((gen_best_fit, population[gen_best].clone()));
            improvements.push((generation, gen_best_fit));
        }
        if gen_best_fit >= params.termination_value {
            return Ok(EvolutionOutcome {
                generations: generation,
                succeeded: true,
                best_fitness: gen_best_fit,
                best_genome: population[gen_best].clone(),
                improvements,
            });
        }
        population = next_generation(system, &population, &fitnesses, params, &mut rng)?;
    }

    let (best_fitness, best_genome) =
        best.expect("generation_cap >= 1 guarantees at least one evaluation");
    Ok(EvolutionOutcome {
        generations: params.generation_cap,
        succeeded: false,
        best_fitness,
        best_genome,
        improvements,
    })
}

/// A run of `n_evolutions` independent evolutions. Evolution `i` is seeded
/// with `split_seed(master_seed, i)`, so the summary is identical no matter
/// how many worker threads execute it.
pub fn run<S: System>(
    system: &S,
    params: &EvolutionParams,
    n_evolutions: usize,
    master_seed: u64,
) -> Result<RunSummary<S::Genome>> {
    if n_evolutions == 0 {
        return Err(Error::InvalidArgument("n_evolutions must be >= 1".into()));
    }
    params.validate()?;
    let per_evolution: Vec<EvolutionOutcome<S::Genome>> = (0..n_evolutions)
        .into_par_iter()
        .map(|i| evolve(system, params, split_seed(master_seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;

    let successes: Vec<f64> = per_evolution
        .iter()
        .filter(|o| o.succeeded)
        .map(|o| o.generations as f64)
        .collect();
    let failures = n_evolutions - successes.len();
    let median_generations = if successes.is_empty() {
        None
    } else {
        Some(analysis::median(&successes)?)
    };
    Ok(RunSummary {
        evolutions: n_evolutions,
        median_generations,
        failures,
        per_evolution,
    })
}
