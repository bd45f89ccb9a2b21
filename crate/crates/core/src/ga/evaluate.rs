use crate::instance::{BudgetSpec, ProblemInstance};
use crate::solution::{
    marginal_utility, two_opt_in_place, utility_of_visited, vertex_contribution, Chromosome, Gene,
};

/// `reward^3 / cost`, or zero for a gene that costs nothing.
#[inline]
pub fn gene_fitness(reward: f64, cost: f64) -> f64 {
    if cost > 0.0 {
        reward * reward * reward / cost
    } else {
        0.0
    }
}

/// Utility contributed by the gene's vertices given team-wide visits.
pub fn gene_reward(gene: &Gene, visited: &[bool], instance: &ProblemInstance) -> f64 {
    gene.interior()
        .iter()
        .fold(0.0, |acc, &v| acc + vertex_contribution(v, visited, instance))
}

/// Position of the cheapest-to-drop interior vertex: smallest utility loss
/// per unit of cost saved.
pub fn min_loss_position(gene: &Gene, visited: &[bool], instance: &ProblemInstance) -> Option<usize> {
    let path = &gene.path;
    (1..path.len() - 1)
        .map(|pos| {
            let (prev, v, next) = (path[pos - 1], path[pos], path[pos + 1]);
            let saved = instance.travel_cost(prev, v) + instance.leg_cost(v, next)
                - instance.travel_cost(prev, next);
            let loss = marginal_utility(v, visited, instance);
            (pos, loss / saved.max(1e-9))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(pos, _)| pos)
}

/// Evaluates a chromosome in gene order: 2-opt each path, drop vertices an
/// earlier gene already covers, then score every gene against the team's
/// visited set. Returns the chromosome fitness.
///
/// On non-metric instances dropping a vertex can lengthen a path; such
/// genes shed their least valuable vertices until they fit the budget again.
pub fn evaluate_chromosome(
    chromosome: &mut Chromosome,
    instance: &ProblemInstance,
    budgets: &BudgetSpec,
) -> f64 {
    let mut visited = vec![false; instance.num_vertices()];
    for (k, gene) in chromosome.genes.iter_mut().enumerate() {
        gene.robot = k;
        two_opt_in_place(&mut gene.path, instance);
        let last = gene.path.len() - 1;
        let mut idx = 0;
        gene.path.retain(|&v| {
            let keep = idx == 0 || idx == last || !visited[v];
            idx += 1;
            keep
        });
        for &v in gene.interior() {
            visited[v] = true;
        }
        gene.refresh_cost(instance);
        let budget = budgets.budget(k);
        while gene.cost > budget && !gene.is_empty() {
            let pos = min_loss_position(gene, &visited, instance).expect("gene has interior");
            let v = gene.path.remove(pos);
            visited[v] = false;
            gene.refresh_cost(instance);
        }
    }

    let mut fitness = 0.0;
    for gene in &mut chromosome.genes {
        gene.fitness = gene_fitness(gene_reward(gene, &visited, instance), gene.cost);
        fitness += gene.fitness;
    }
    chromosome.fitness = fitness;
    chromosome.utility = utility_of_visited(&visited, instance);
    fitness
}
