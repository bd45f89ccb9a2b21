//! Paths, team solutions, the correlated utility and constraint checking.

mod feasibility;
mod two_opt;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Result};
use crate::instance::{BudgetSpec, ProblemInstance};

pub use feasibility::{check_feasibility, FeasibilityReport, Violation};
pub use two_opt::{two_opt, two_opt_in_place, IMPROVEMENT_EPS};

/// One robot's path together with cached evaluation results.
#[derive(Debug, Clone, PartialEq)]
pub struct Gene {
    pub robot: usize,
    /// Starts with the start id and ends with the finish id.
    pub path: Vec<usize>,
    pub cost: f64,
    pub fitness: f64,
}

impl Gene {
    /// A path straight from start to finish.
    pub fn empty(robot: usize, instance: &ProblemInstance) -> Self {
        Self::from_path(robot, vec![instance.start_id(), instance.finish_id()], instance)
    }

    pub fn from_path(robot: usize, path: Vec<usize>, instance: &ProblemInstance) -> Self {
        let cost = path_cost_unchecked(&path, instance);
        Self { robot, path, cost, fitness: 0.0 }
    }

    /// Sampling vertices on the path, in visiting order.
    pub fn interior(&self) -> &[usize] {
        &self.path[1..self.path.len() - 1]
    }

    pub fn is_empty(&self) -> bool {
        self.path.len() <= 2
    }

    pub fn refresh_cost(&mut self, instance: &ProblemInstance) {
        self.cost = path_cost_unchecked(&self.path, instance);
    }
}

/// A full team plan in the GA encoding: one gene per robot.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<Gene>,
    pub fitness: f64,
    pub utility: f64,
}

impl Chromosome {
    pub fn new(genes: Vec<Gene>) -> Self {
        Self { genes, fitness: 0.0, utility: 0.0 }
    }

    pub fn empty(num_robots: usize, instance: &ProblemInstance) -> Self {
        Self::new((0..num_robots).map(|k| Gene::empty(k, instance)).collect())
    }

    pub fn paths(&self) -> Vec<Vec<usize>> {
        self.genes.iter().map(|g| g.path.clone()).collect()
    }

    /// Team-wide visitation flags indexed by vertex id.
    pub fn visited(&self, instance: &ProblemInstance) -> Vec<bool> {
        let mut visited = vec![false; instance.num_vertices()];
        for g in &self.genes {
            for &v in g.interior() {
                visited[v] = true;
            }
        }
        visited
    }
}

/// Validated output of a planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSolution {
    pub paths: Vec<Vec<usize>>,
    pub utility: f64,
    pub per_robot_cost: Vec<f64>,
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl TeamSolution {
    /// Scores and checks `paths`. Vertices repeated across robots are counted
    /// once in the utility; the duplication shows up as a violation.
    pub fn evaluate(paths: Vec<Vec<usize>>, instance: &ProblemInstance, budgets: &BudgetSpec) -> Self {
        let report = check_feasibility(&paths, instance, budgets);
        let n = instance.num_vertices();
        let mut visited = vec![false; n];
        for p in &paths {
            for &v in p.iter().filter(|&&v| v < n && !instance.is_depot(v)) {
                visited[v] = true;
            }
        }
        let per_robot_cost = paths
            .iter()
            .map(|p| {
                if p.len() >= 2 && p.iter().all(|&v| v < n) {
                    path_cost_unchecked(p, instance)
                } else {
                    f64::NAN
                }
            })
            .collect();
        Self {
            utility: utility_of_visited(&visited, instance),
            paths,
            per_robot_cost,
            feasible: report.feasible,
            violations: report.violations,
        }
    }

    /// Every robot goes straight from start to finish.
    pub fn empty(instance: &ProblemInstance, budgets: &BudgetSpec) -> Self {
        let path = vec![instance.start_id(), instance.finish_id()];
        Self::evaluate(vec![path; budgets.num_robots()], instance, budgets)
    }

    pub fn visited_count(&self) -> usize {
        self.paths.iter().map(|p| p.len().saturating_sub(2)).sum()
    }
}

impl fmt::Display for TeamSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "utility {:.6} ({})", self.utility, if self.feasible { "feasible" } else { "INFEASIBLE" })?;
        for (k, (p, c)) in self.paths.iter().zip(&self.per_robot_cost).enumerate() {
            writeln!(f, "  robot {k}: cost {c:.4} path {p:?}")?;
        }
        Ok(())
    }
}

/// Resource usage of a path: travel plus sensing cost at each departure.
pub fn path_cost(path: &[usize], instance: &ProblemInstance) -> Result<f64> {
    if path.len() < 2 {
        return Err(invalid_input(format!(
            "a path needs at least two vertices, got {}",
            path.len()
        )));
    }
    if let Some(&v) = path.iter().find(|&&v| v >= instance.num_vertices()) {
        return Err(invalid_input(format!("unknown vertex id {v}")));
    }
    Ok(path_cost_unchecked(path, instance))
}

pub(crate) fn path_cost_unchecked(path: &[usize], instance: &ProblemInstance) -> f64 {
    path.windows(2).map(|w| instance.leg_cost(w[0], w[1])).sum()
}

/// Correlated utility of the vertices visited by the whole team.
pub fn team_utility(paths: &[Vec<usize>], instance: &ProblemInstance) -> Result<f64> {
    let n = instance.num_vertices();
    let mut visited = vec![false; n];
    for p in paths {
        for &v in p {
            if v >= n {
                return Err(invalid_input(format!("unknown vertex id {v}")));
            }
            if instance.is_depot(v) {
                continue;
            }
            if visited[v] {
                return Err(invalid_input(format!("vertex {v} is visited more than once")));
            }
            visited[v] = true;
        }
    }
    Ok(utility_of_visited(&visited, instance))
}

/// Sum over visited `i` of `r_i` plus the weighted rewards of unvisited
/// neighbours of `i`.
pub fn utility_of_visited(visited: &[bool], instance: &ProblemInstance) -> f64 {
    instance
        .sampling_ids()
        .iter()
        .filter(|&&i| visited[i])
        .fold(0.0, |acc, &i| acc + vertex_contribution(i, visited, instance))
}

/// What visited vertex `i` adds to the utility given the team's visits.
#[inline]
pub fn vertex_contribution(i: usize, visited: &[bool], instance: &ProblemInstance) -> f64 {
    let bonus: f64 = instance
        .correlation()
        .edges(i)
        .filter(|&(j, _)| !visited[j])
        .map(|(j, w)| instance.reward(j) * w)
        .sum();
    instance.reward(i) + bonus
}

/// Change in utility from flipping `v` between visited and unvisited.
///
/// The result does not depend on the current flag of `v`: it is the gain of
/// adding `v` to the other visited vertices, or equally the loss of dropping it.
/// Always nonnegative because incoming weights into `v` sum to at most one.
#[inline]
pub fn marginal_utility(v: usize, visited: &[bool], instance: &ProblemInstance) -> f64 {
    let corr = instance.correlation();
    let r_v = instance.reward(v);
    let mut delta = r_v;
    for (j, w) in corr.edges(v) {
        if !visited[j] {
            delta += instance.reward(j) * w;
        }
    }
    for (i, w) in corr.incoming(v) {
        if visited[i] {
            delta -= r_v * w;
        }
    }
    delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{build_grid_instance, CorrelationSettings, GridSpec, KernelForm, Vertex};

    fn line_instance() -> ProblemInstance {
        // s=0 at origin, v=1, f=2; costs s-v 1, v-f 2, s-f 5
        let vs = vec![
            Vertex { id: 0, x: 0.0, y: 0.0, reward: 0.0, sensing_cost: 0.0 },
            Vertex { id: 1, x: 1.0, y: 0.0, reward: 1.0, sensing_cost: 0.5 },
            Vertex { id: 2, x: 3.0, y: 0.0, reward: 0.0, sensing_cost: 0.0 },
        ];
        let m = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 2.0],
            vec![5.0, 2.0, 0.0],
        ];
        let settings = CorrelationSettings {
            kernel_length: 1.0,
            neighbour_radius: 1.5,
            kernel_form: KernelForm::Printed,
        };
        ProblemInstance::with_travel_costs(vs, &m, 0, 2, settings).unwrap()
    }

    #[test]
    fn path_cost_examples() {
        let inst = line_instance();
        assert_eq!(path_cost(&[0, 2], &inst).unwrap(), 5.0);
        assert_eq!(path_cost(&[0, 1, 2], &inst).unwrap(), 3.5);
        assert!(path_cost(&[0], &inst).is_err());
        assert!(path_cost(&[0, 7, 2], &inst).is_err());
    }

    #[test]
    fn utility_of_nothing_and_everything() {
        let inst = build_grid_instance(&GridSpec::new(3, 3)).unwrap();
        let (s, f) = (inst.start_id(), inst.finish_id());
        assert_eq!(team_utility(&[vec![s, f], vec![s, f]], &inst).unwrap(), 0.0);
        let all: Vec<usize> = std::iter::once(s)
            .chain(inst.sampling_ids().iter().copied())
            .chain(std::iter::once(f))
            .collect();
        assert_eq!(team_utility(&[all], &inst).unwrap(), 9.0);
    }

    #[test]
    fn utility_of_centre_only() {
        let inst = build_grid_instance(&GridSpec::new(3, 3)).unwrap();
        let (s, f) = (inst.start_id(), inst.finish_id());
        let u = team_utility(&[vec![s, 4, f]], &inst).unwrap();
        // hand evaluation with l = 0.5: columns sum below one, so
        // w = exp(-d / 0.5) for 4 edge neighbours (d = 1) and 4 diagonals
        let expected = 1.0 + 4.0 * (-2.0f64).exp() + 4.0 * (-2.0 * 2f64.sqrt()).exp();
        assert!((u - expected).abs() < 1e-12, "{u} vs {expected}");
    }

    #[test]
    fn duplicate_visits_are_rejected() {
        let inst = build_grid_instance(&GridSpec::new(3, 3)).unwrap();
        let (s, f) = (inst.start_id(), inst.finish_id());
        assert!(team_utility(&[vec![s, 4, f], vec![s, 4, f]], &inst).is_err());
        assert!(team_utility(&[vec![s, 4, 4, f]], &inst).is_err());
    }

    #[test]
    fn marginal_matches_utility_difference() {
        let inst = build_grid_instance(&GridSpec::new(4, 4)).unwrap();
        let mut visited = vec![false; inst.num_vertices()];
        for v in [0, 5, 6, 10] {
            visited[v] = true;
        }
        let base = utility_of_visited(&visited, &inst);
        for v in [1, 2, 9, 15] {
            let gain = marginal_utility(v, &visited, &inst);
            visited[v] = true;
            let after = utility_of_visited(&visited, &inst);
            visited[v] = false;
            assert!((after - base - gain).abs() < 1e-12);
            assert!(gain >= 0.0);
        }
    }
}
