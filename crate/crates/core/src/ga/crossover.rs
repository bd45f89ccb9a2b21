use rand::Rng;

use crate::instance::{BudgetSpec, ProblemInstance};
use crate::solution::{Chromosome, Gene};

use super::evaluate::{evaluate_chromosome, gene_fitness, gene_reward};

/// Gene-sorting crossover.
///
/// Both parents' genes are ranked by fitness. Each child is assembled by
/// repeatedly taking the best remaining gene of a randomly chosen parent,
/// then deleting that gene's vertices from every other gene of both working
/// copies and re-ranking them. A parent with no genes left defers to the
/// other one.
pub fn crossover<R: Rng + ?Sized>(
    parent1: &Chromosome,
    parent2: &Chromosome,
    instance: &ProblemInstance,
    budgets: &BudgetSpec,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    let sorted = [sorted_genes(parent1), sorted_genes(parent2)];
    let make_child = |rng: &mut R| {
        let mut pool = sorted.clone();
        let mut visited = vec![false; instance.num_vertices()];
        let mut genes = Vec::with_capacity(budgets.num_robots());
        while genes.len() < budgets.num_robots() {
            let mut side = usize::from(rng.gen_bool(0.5));
            if pool[side].is_empty() {
                side = 1 - side;
            }
            if pool[side].is_empty() {
                break;
            }
            let mut gene = pool[side].remove(0);
            gene.robot = genes.len();
            for &v in gene.interior() {
                visited[v] = true;
            }
            genes.push(gene);
            for genes in pool.iter_mut() {
                strip_and_rank(genes, &mut visited, instance);
            }
        }
        while genes.len() < budgets.num_robots() {
            genes.push(Gene::empty(genes.len(), instance));
        }
        let mut child = Chromosome::new(genes);
        evaluate_chromosome(&mut child, instance, budgets);
        child
    };
    let child1 = make_child(rng);
    let child2 = make_child(rng);
    (child1, child2)
}

fn sorted_genes(parent: &Chromosome) -> Vec<Gene> {
    let mut genes = parent.genes.clone();
    genes.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
    genes
}

/// Removes vertices already in the child, then re-scores each remaining gene
/// as if it joined the child next and sorts by that fitness.
fn strip_and_rank(genes: &mut [Gene], visited: &mut [bool], instance: &ProblemInstance) {
    for gene in genes.iter_mut() {
        let last = gene.path.len() - 1;
        let mut idx = 0;
        gene.path.retain(|&v| {
            let keep = idx == 0 || idx == last || !visited[v];
            idx += 1;
            keep
        });
        gene.refresh_cost(instance);
        for &v in gene.interior() {
            visited[v] = true;
        }
        gene.fitness = gene_fitness(gene_reward(gene, visited, instance), gene.cost);
        for &v in gene.interior() {
            visited[v] = false;
        }
    }
    genes.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
}
