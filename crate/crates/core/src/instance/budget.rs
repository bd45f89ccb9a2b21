use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::solution::{path_cost_unchecked, two_opt};

use super::ProblemInstance;

/// Per-robot resource limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetSpec {
    budgets: Vec<f64>,
}

impl BudgetSpec {
    pub fn new(budgets: Vec<f64>) -> Result<Self> {
        if budgets.is_empty() {
            return Err(invalid_param("at least one robot is required"));
        }
        if let Some(b) = budgets.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(invalid_param(format!("budgets must be positive, got {b}")));
        }
        Ok(Self { budgets })
    }

    pub fn uniform(num_robots: usize, budget: f64) -> Result<Self> {
        Self::new(vec![budget; num_robots])
    }

    pub fn num_robots(&self) -> usize {
        self.budgets.len()
    }

    pub fn budget(&self, robot: usize) -> f64 {
        self.budgets[robot]
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }
}

/// Cost of one robot covering every sampling vertex: a nearest-neighbour
/// tour from start to finish, polished by 2-opt.
pub fn max_single_robot_budget(instance: &ProblemInstance) -> f64 {
    let mut path = Vec::with_capacity(instance.num_vertices());
    path.push(instance.start_id());
    let mut free: Vec<usize> = instance.sampling_ids().to_vec();
    let mut last = instance.start_id();
    while !free.is_empty() {
        let (pos, _) = free
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| {
                instance
                    .travel_cost(last, a)
                    .total_cmp(&instance.travel_cost(last, b))
            })
            .expect("free is non-empty");
        // `free` stays sorted, so ties resolve to the lowest id
        last = free.remove(pos);
        path.push(last);
    }
    path.push(instance.finish_id());
    path_cost_unchecked(&two_opt(&path, instance), instance)
}

/// Splits `fraction` of the single-robot budget evenly across the team.
pub fn budget_for_team(
    instance: &ProblemInstance,
    num_robots: usize,
    fraction: f64,
) -> Result<BudgetSpec> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid_param(format!(
            "budget fraction must lie in (0, 1], got {fraction}"
        )));
    }
    if num_robots == 0 {
        return Err(invalid_param("at least one robot is required"));
    }
    let total = max_single_robot_budget(instance);
    BudgetSpec::uniform(num_robots, fraction * total / num_robots as f64)
}
