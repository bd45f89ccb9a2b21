//! Genetic algorithm for the correlated team orienteering problem.
//!
//! The population is seeded either with random genes or with NN-RASP genes
//! (neighbour-to-neighbour walks biased towards unexplored, well-connected
//! vertices). Each generation performs elitist tournament selection,
//! gene-sorting crossover on random pairs and add/swap/remove mutation. The
//! search ranks chromosomes by `sum(reward^3 / cost)` but reports the best
//! correlated utility seen in any generation.

mod crossover;
mod evaluate;
mod generate;
mod mutate;
mod params;
mod select;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::{BudgetSpec, ProblemInstance};
use crate::solution::{Chromosome, TeamSolution};

pub use crossover::crossover;
pub use evaluate::{evaluate_chromosome, gene_fitness, gene_reward};
pub use generate::{generate_chromosome, nnrasp_gene, random_gene, FreeSet};
pub use mutate::mutate;
pub use params::{
    GaParams, GenerationMethod, DEFAULT_ADD_PROBABILITY, DEFAULT_NUM_MUTATIONS,
    DEFAULT_STALL_GENERATIONS,
};
pub use select::{rank_by_fitness, select_population};

/// Utility gains at or below this do not reset the stall counter.
const STALL_EPS: f64 = 1e-9;

/// Result of one GA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(flatten)]
    pub solution: TeamSolution,
    pub generations_run: usize,
    pub wall_time_s: f64,
    pub seed: u64,
    pub method: GenerationMethod,
    /// Chromosome evaluations performed; a machine-independent work measure.
    pub evaluations: u64,
    /// Set when some robot cannot even travel from start to finish.
    pub infeasible_input: bool,
}

/// Runs the genetic algorithm once.
///
/// All randomness comes from one generator seeded with `params.seed`, so a
/// fixed seed reproduces the same solution.
pub fn solve(
    instance: &ProblemInstance,
    budgets: &BudgetSpec,
    params: &GaParams,
) -> Result<SolveReport> {
    params.validate()?;
    let timer = Instant::now();
    let (s, f) = (instance.start_id(), instance.finish_id());
    if budgets.budgets().iter().any(|&b| b < instance.leg_cost(s, f)) {
        return Ok(SolveReport {
            solution: TeamSolution::empty(instance, budgets),
            generations_run: 0,
            wall_time_s: timer.elapsed().as_secs_f64(),
            seed: params.seed,
            method: params.generation_method,
            evaluations: 0,
            infeasible_input: true,
        });
    }

    let mut run = Run::new(instance, budgets, params);
    run.initialise();
    let mut stall = 0;
    while run.generation < params.max_generations {
        let improved = run.step();
        stall = if improved { 0 } else { stall + 1 };
        if params.stall_generations > 0 && stall >= params.stall_generations {
            break;
        }
    }

    let solution = TeamSolution::evaluate(run.best.paths(), instance, budgets);
    debug_assert!(solution.feasible, "{:?}", solution.violations);
    Ok(SolveReport {
        solution,
        generations_run: run.generation,
        wall_time_s: timer.elapsed().as_secs_f64(),
        seed: params.seed,
        method: params.generation_method,
        evaluations: run.evaluations,
        infeasible_input: false,
    })
}

/// State of one solver run.
struct Run<'a> {
    instance: &'a ProblemInstance,
    budgets: &'a BudgetSpec,
    params: &'a GaParams,
    rng: ChaCha8Rng,
    population: Vec<Chromosome>,
    best: Chromosome,
    generation: usize,
    evaluations: u64,
}

impl<'a> Run<'a> {
    fn new(instance: &'a ProblemInstance, budgets: &'a BudgetSpec, params: &'a GaParams) -> Self {
        Self {
            instance,
            budgets,
            params,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            population: Vec::with_capacity(params.population_size),
            best: Chromosome::empty(budgets.num_robots(), instance),
            generation: 0,
            evaluations: 0,
        }
    }

    fn initialise(&mut self) {
        for _ in 0..self.params.population_size {
            let mut ch = generate_chromosome(
                self.instance,
                self.budgets.budgets(),
                self.params.generation_method,
                &mut self.rng,
            );
            evaluate_chromosome(&mut ch, self.instance, self.budgets);
            self.population.push(ch);
        }
        self.evaluations += self.params.population_size as u64;
        self.record_best();
    }

    /// One generation; returns whether the best utility improved.
    fn step(&mut self) -> bool {
        self.generation += 1;
        let (inst, budgets, params) = (self.instance, self.budgets, self.params);
        self.population = select_population(&self.population, params, &mut self.rng);
        let elites = params.elite_count().min(self.population.len());

        let mut order: Vec<usize> = (elites..self.population.len()).collect();
        order.shuffle(&mut self.rng);
        for pair in order.chunks_exact(2) {
            if self.rng.gen::<f64>() < params.cx_probability {
                let (a, b) = (pair[0], pair[1]);
                let (c1, c2) =
                    crossover(&self.population[a], &self.population[b], inst, budgets, &mut self.rng);
                self.population[a] = c1;
                self.population[b] = c2;
                self.evaluations += 2;
            }
        }

        for i in elites..self.population.len() {
            if self.rng.gen::<f64>() < params.mutation_probability {
                mutate(&mut self.population[i], inst, budgets, params, &mut self.rng);
                self.evaluations += 1;
            }
        }
        self.record_best()
    }

    fn record_best(&mut self) -> bool {
        let leader = self
            .population
            .iter()
            .reduce(|a, b| if b.utility > a.utility { b } else { a })
            .expect("population is non-empty");
        let gain = leader.utility - self.best.utility;
        if gain > 0.0 {
            self.best = leader.clone();
        }
        gain > STALL_EPS
    }
}
