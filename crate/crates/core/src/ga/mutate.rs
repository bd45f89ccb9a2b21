use rand::Rng;

use crate::instance::{BudgetSpec, ProblemInstance};
use crate::solution::{marginal_utility, Chromosome, Gene};

use super::evaluate::{evaluate_chromosome, gene_fitness, gene_reward, min_loss_position};
use super::GaParams;

/// A gene at or above this share of its budget swaps instead of growing.
const NEAR_FULL: f64 = 0.95;

/// Applies `num_mutations` add/swap/remove moves to every gene, then
/// re-evaluates the chromosome. Moves that would exceed a budget are skipped.
pub fn mutate<R: Rng + ?Sized>(
    chromosome: &mut Chromosome,
    instance: &ProblemInstance,
    budgets: &BudgetSpec,
    params: &GaParams,
    rng: &mut R,
) {
    let mut visited = chromosome.visited(instance);
    for (k, gene) in chromosome.genes.iter_mut().enumerate() {
        let budget = budgets.budget(k);
        for _ in 0..params.num_mutations {
            if rng.gen::<f64>() < params.add_probability {
                if gene.cost >= NEAR_FULL * budget {
                    swap_with_free_neighbour(gene, budget, &mut visited, instance, rng);
                } else {
                    insert_free_vertex(gene, budget, &mut visited, instance, rng);
                }
            } else {
                remove_min_loss(gene, &mut visited, instance);
            }
        }
    }
    evaluate_chromosome(chromosome, instance, budgets);
}

/// Replaces a random path vertex with whichever free neighbour gives the
/// best gene fitness, provided that is no worse than the current fitness.
fn swap_with_free_neighbour<R: Rng + ?Sized>(
    gene: &mut Gene,
    budget: f64,
    visited: &mut [bool],
    instance: &ProblemInstance,
    rng: &mut R,
) {
    if gene.is_empty() {
        return;
    }
    let pos = rng.gen_range(1..gene.path.len() - 1);
    let (prev, v, next) = (gene.path[pos - 1], gene.path[pos], gene.path[pos + 1]);
    let current = gene_fitness(gene_reward(gene, visited, instance), gene.cost);
    let base = gene.cost
        - instance.travel_cost(prev, v)
        - instance.leg_cost(v, next);

    let mut best: Option<(usize, f64, f64)> = None;
    visited[v] = false;
    for &n in instance.correlation().neighbours(v) {
        if visited[n] {
            continue;
        }
        let cost = base + instance.travel_cost(prev, n) + instance.leg_cost(n, next);
        if cost > budget {
            continue;
        }
        visited[n] = true;
        gene.path[pos] = n;
        let fitness = gene_fitness(gene_reward(gene, visited, instance), cost);
        visited[n] = false;
        if best.map_or(true, |(_, f, _)| fitness > f) {
            best = Some((n, fitness, cost));
        }
    }
    match best {
        Some((n, fitness, _)) if fitness >= current => {
            gene.path[pos] = n;
            visited[n] = true;
            gene.refresh_cost(instance);
        }
        _ => {
            gene.path[pos] = v;
            visited[v] = true;
        }
    }
}

/// Inserts a uniformly drawn free vertex at the position with the best
/// `gain^2 / added cost` ratio among those that fit the budget.
fn insert_free_vertex<R: Rng + ?Sized>(
    gene: &mut Gene,
    budget: f64,
    visited: &mut [bool],
    instance: &ProblemInstance,
    rng: &mut R,
) {
    let free: Vec<usize> = instance
        .sampling_ids()
        .iter()
        .copied()
        .filter(|&v| !visited[v])
        .collect();
    if free.is_empty() {
        return;
    }
    let v = free[rng.gen_range(0..free.len())];
    let gain = marginal_utility(v, visited, instance);
    let path = &gene.path;
    let best = (1..path.len())
        .filter_map(|pos| {
            let (prev, next) = (path[pos - 1], path[pos]);
            let added = instance.travel_cost(prev, v) + instance.leg_cost(v, next)
                - instance.travel_cost(prev, next);
            (gene.cost + added <= budget).then(|| (pos, gain * gain / added.max(1e-9)))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
    if let Some((pos, _)) = best {
        gene.path.insert(pos, v);
        visited[v] = true;
        gene.refresh_cost(instance);
    }
}

fn remove_min_loss(gene: &mut Gene, visited: &mut [bool], instance: &ProblemInstance) {
    if let Some(pos) = min_loss_position(gene, visited, instance) {
        let v = gene.path.remove(pos);
        visited[v] = false;
        gene.refresh_cost(instance);
    }
}
