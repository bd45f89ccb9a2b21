use rand::seq::index;
use rand::Rng;

use crate::solution::Chromosome;

use super::GaParams;

/// Indices of `population` sorted by descending fitness; ties keep order.
pub fn rank_by_fitness(population: &[Chromosome]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| population[b].fitness.total_cmp(&population[a].fitness));
    order
}

/// Elitism followed by tournament selection.
///
/// The first [`GaParams::elite_count`] slots hold the best chromosomes in
/// fitness order; each remaining slot is the fittest of `tournament_size`
/// distinct individuals drawn uniformly.
pub fn select_population<R: Rng + ?Sized>(
    population: &[Chromosome],
    params: &GaParams,
    rng: &mut R,
) -> Vec<Chromosome> {
    let n = population.len();
    let elites = params.elite_count().min(n);
    let order = rank_by_fitness(population);
    let mut next: Vec<Chromosome> = order[..elites].iter().map(|&i| population[i].clone()).collect();
    while next.len() < n {
        let size = params.tournament_size.clamp(1, n);
        let best = index::sample(rng, n, size)
            .into_iter()
            .reduce(|best, c| if population[c].fitness > population[best].fitness { c } else { best })
            .expect("tournament is non-empty");
        next.push(population[best].clone());
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn population(fitness: &[f64]) -> Vec<Chromosome> {
        fitness
            .iter()
            .map(|&f| Chromosome { genes: Vec::new(), fitness: f, utility: f })
            .collect()
    }

    #[test]
    fn full_elitism_sorts() {
        let pop = population(&[3.0, 9.0, 1.0, 4.0]);
        let mut params = GaParams::default();
        params.population_size = 4;
        params.tournament_size = 2;
        params.elite_fraction = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next = select_population(&pop, &params, &mut rng);
        let got: Vec<f64> = next.iter().map(|c| c.fitness).collect();
        assert_eq!(got, vec![9.0, 4.0, 3.0, 1.0]);
    }

    #[test]
    fn whole_population_tournament_returns_best() {
        let pop = population(&[3.0, 9.0, 1.0, 4.0, 2.0]);
        let mut params = GaParams::default();
        params.population_size = 5;
        params.tournament_size = 5;
        params.elite_fraction = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let next = select_population(&pop, &params, &mut rng);
        assert!(next.iter().all(|c| c.fitness == 9.0));
    }

    #[test]
    fn elite_and_tournament_split() {
        let fitness: Vec<f64> = (0..300).map(|i| i as f64).collect();
        let pop = population(&fitness);
        let params = GaParams::tuned(crate::ga::GenerationMethod::Random);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let next = select_population(&pop, &params, &mut rng);
        assert_eq!(next.len(), 300);
        let elites: Vec<f64> = next[..57].iter().map(|c| c.fitness).collect();
        let expected: Vec<f64> = (243..300).rev().map(|i| i as f64).collect();
        assert_eq!(elites, expected);
    }
}
