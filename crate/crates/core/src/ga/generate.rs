use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::instance::ProblemInstance;
use crate::solution::{Chromosome, Gene};

use super::GenerationMethod;

/// Sampling vertices not yet assigned to any robot, with O(1) removal.
#[derive(Debug, Clone)]
pub struct FreeSet {
    members: Vec<usize>,
    slot: Vec<usize>,
}

const ABSENT: usize = usize::MAX;

impl FreeSet {
    /// Every sampling vertex of `instance`, in ascending id order.
    pub fn all(instance: &ProblemInstance) -> Self {
        let mut slot = vec![ABSENT; instance.num_vertices()];
        let members = instance.sampling_ids().to_vec();
        for (k, &v) in members.iter().enumerate() {
            slot[v] = k;
        }
        Self { members, slot }
    }

    pub fn from_ids(instance: &ProblemInstance, ids: &[usize]) -> Self {
        let mut slot = vec![ABSENT; instance.num_vertices()];
        let mut members = Vec::with_capacity(ids.len());
        for &v in ids {
            if slot[v] == ABSENT {
                slot[v] = members.len();
                members.push(v);
            }
        }
        Self { members, slot }
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.slot[v] != ABSENT
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn remove(&mut self, v: usize) -> bool {
        let k = self.slot[v];
        if k == ABSENT {
            return false;
        }
        self.members.swap_remove(k);
        if let Some(&moved) = self.members.get(k) {
            self.slot[moved] = k;
        }
        self.slot[v] = ABSENT;
        true
    }
}

/// Tracks the open cost of a path under construction so insertions at the
/// end can be priced including the final leg to the finish.
struct PathBuilder<'a> {
    instance: &'a ProblemInstance,
    path: Vec<usize>,
    open_cost: f64,
    budget: f64,
}

impl<'a> PathBuilder<'a> {
    fn new(instance: &'a ProblemInstance, budget: f64) -> Self {
        Self { instance, path: vec![instance.start_id()], open_cost: 0.0, budget }
    }

    fn last(&self) -> usize {
        *self.path.last().expect("path holds the start")
    }

    fn try_push(&mut self, v: usize) -> bool {
        let inst = self.instance;
        let step = inst.leg_cost(self.last(), v);
        let closed = self.open_cost + step + inst.leg_cost(v, inst.finish_id());
        if closed <= self.budget {
            self.open_cost += step;
            self.path.push(v);
            true
        } else {
            false
        }
    }

    fn finish(mut self, robot: usize) -> Gene {
        self.path.push(self.instance.finish_id());
        Gene::from_path(robot, self.path, self.instance)
    }
}

/// Appends uniformly drawn free vertices until the first draw that would
/// break the budget.
pub fn random_gene<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    robot: usize,
    budget: f64,
    available: &mut FreeSet,
    rng: &mut R,
) -> Gene {
    let mut builder = PathBuilder::new(instance, budget);
    while !available.is_empty() {
        let v = available.as_slice()[rng.gen_range(0..available.len())];
        if !builder.try_push(v) {
            break;
        }
        available.remove(v);
    }
    builder.finish(robot)
}

/// Grows a path by repeatedly stepping to a free neighbour of its end,
/// drawn with probability proportional to a distance weight times a
/// free-neighbour weight.
///
/// Correlation neighbourhoods only cover sampling vertices, so when the path
/// is still at the start the candidates are the free vertices within the
/// neighbour radius of it, or failing that, those within the radius of the
/// nearest free vertex's distance.
pub fn nnrasp_gene<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    robot: usize,
    budget: f64,
    available: &mut FreeSet,
    rng: &mut R,
) -> Gene {
    let mut builder = PathBuilder::new(instance, budget);
    let mut candidates = Vec::new();
    let mut weights = Vec::new();
    loop {
        let last = builder.last();
        candidates.clear();
        if instance.is_depot(last) {
            depot_candidates(instance, last, available, &mut candidates);
        } else {
            candidates.extend(
                instance
                    .correlation()
                    .neighbours(last)
                    .iter()
                    .copied()
                    .filter(|&n| available.contains(n)),
            );
        }
        if candidates.is_empty() {
            break;
        }
        combined_weights(instance, &builder.path, available, &candidates, &mut weights);
        let pick = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(rng),
            Err(_) => rng.gen_range(0..candidates.len()),
        };
        let next = candidates[pick];
        if !builder.try_push(next) {
            break;
        }
        available.remove(next);
    }
    builder.finish(robot)
}

fn depot_candidates(
    instance: &ProblemInstance,
    depot: usize,
    available: &FreeSet,
    out: &mut Vec<usize>,
) {
    let origin = instance.vertex(depot);
    let radius = instance.neighbour_radius();
    let dist = |v: usize| origin.distance_to(instance.vertex(v));
    let nearest = available
        .as_slice()
        .iter()
        .map(|&v| dist(v))
        .fold(f64::INFINITY, f64::min);
    if !nearest.is_finite() {
        return;
    }
    let reach = if nearest <= radius { radius } else { nearest + radius };
    out.extend(available.as_slice().iter().copied().filter(|&v| dist(v) <= reach));
    // the free list is unordered; keep the draw independent of removal history
    out.sort_unstable();
}

/// distance weight: distance to the closest already placed vertex (team-wide
/// assignments plus this path, excluding its end), scaled by the maximum;
/// neighbour weight: one plus the number of free neighbours, scaled by the
/// maximum. The combined weight is their product.
fn combined_weights(
    instance: &ProblemInstance,
    path: &[usize],
    available: &FreeSet,
    candidates: &[usize],
    out: &mut Vec<f64>,
) {
    let end = *path.last().expect("non-empty path");
    let placed: Vec<usize> = instance
        .sampling_ids()
        .iter()
        .copied()
        .filter(|&v| !available.contains(v))
        .chain(path.iter().copied().filter(|&v| instance.is_depot(v)))
        .filter(|&v| v != end)
        .collect();

    let mut dist_w: Vec<f64> = candidates
        .iter()
        .map(|&c| {
            placed
                .iter()
                .map(|&p| instance.travel_cost(c, p))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    normalize(&mut dist_w);

    let mut nb_w: Vec<f64> = candidates
        .iter()
        .map(|&c| {
            let free = instance
                .correlation()
                .neighbours(c)
                .iter()
                .filter(|&&n| available.contains(n))
                .count();
            1.0 + free as f64
        })
        .collect();
    normalize(&mut nb_w);

    out.clear();
    out.extend(dist_w.iter().zip(&nb_w).map(|(d, n)| d * n));
}

/// Scales by the maximum. Non-finite entries (nothing placed yet) and an
/// all-zero vector both become uniform ones.
fn normalize(values: &mut [f64]) {
    if values.iter().any(|v| !v.is_finite()) {
        values.iter_mut().for_each(|v| *v = 1.0);
        return;
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter_mut().for_each(|v| *v /= max);
    } else {
        values.iter_mut().for_each(|v| *v = 1.0);
    }
}

/// One gene per robot, built in robot order from a shared pool of free
/// vertices.
pub fn generate_chromosome<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    budgets: &[f64],
    method: GenerationMethod,
    rng: &mut R,
) -> Chromosome {
    let mut available = FreeSet::all(instance);
    let genes = budgets
        .iter()
        .enumerate()
        .map(|(k, &b)| match method {
            GenerationMethod::Random => random_gene(instance, k, b, &mut available, rng),
            GenerationMethod::NnRasp => nnrasp_gene(instance, k, b, &mut available, rng),
        })
        .collect();
    Chromosome::new(genes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{build_grid_instance, GridSpec, BudgetSpec};
    use crate::solution::check_feasibility;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> ProblemInstance {
        build_grid_instance(&GridSpec::new(n, n)).unwrap()
    }

    #[test]
    fn free_set_removal() {
        let inst = grid(3);
        let mut free = FreeSet::all(&inst);
        assert_eq!(free.len(), 9);
        assert!(free.remove(4));
        assert!(!free.remove(4));
        assert!(!free.contains(4));
        assert!(free.contains(8));
        for v in 0..9 {
            free.remove(v);
        }
        assert!(free.is_empty());
    }

    #[test]
    fn empty_pool_gives_empty_gene() {
        let inst = grid(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut none = FreeSet::from_ids(&inst, &[]);
        let g = random_gene(&inst, 0, 100.0, &mut none, &mut rng);
        assert_eq!(g.path, vec![inst.start_id(), inst.finish_id()]);
        let g = nnrasp_gene(&inst, 0, 100.0, &mut none, &mut rng);
        assert_eq!(g.path, vec![inst.start_id(), inst.finish_id()]);
    }

    #[test]
    fn tiny_budget_gives_empty_gene() {
        let inst = grid(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let mut free = FreeSet::all(&inst);
            let g = random_gene(&inst, 0, 1.9, &mut free, &mut rng);
            assert!(g.is_empty());
            assert_eq!(free.len(), 9);
            let g = nnrasp_gene(&inst, 0, 1.9, &mut free, &mut rng);
            assert!(g.is_empty());
        }
    }

    #[test]
    fn singleton_neighbourhood_is_forced() {
        let inst = grid(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // from the start only vertex 3 at (0, 1) is free; from 3 only 4 is free
        for _ in 0..20 {
            let mut free = FreeSet::from_ids(&inst, &[3, 4]);
            let g = nnrasp_gene(&inst, 0, 100.0, &mut free, &mut rng);
            assert_eq!(g.interior(), &[3, 4]);
        }
    }

    #[test]
    fn generated_genes_are_feasible() {
        let inst = grid(5);
        let budgets = BudgetSpec::uniform(1, 12.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for method in [GenerationMethod::Random, GenerationMethod::NnRasp] {
            for _ in 0..1000 {
                let ch = generate_chromosome(&inst, budgets.budgets(), method, &mut rng);
                let report = check_feasibility(&ch.paths(), &inst, &budgets);
                assert!(report.feasible, "{method}: {:?}", report.violations);
                assert!(ch.genes[0].cost <= 12.0);
            }
        }
    }

    #[test]
    fn shared_pool_prevents_overlap() {
        let inst = grid(5);
        let budgets = BudgetSpec::uniform(3, 15.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for method in [GenerationMethod::Random, GenerationMethod::NnRasp] {
            for _ in 0..200 {
                let ch = generate_chromosome(&inst, budgets.budgets(), method, &mut rng);
                assert!(check_feasibility(&ch.paths(), &inst, &budgets).feasible);
            }
        }
    }
}
