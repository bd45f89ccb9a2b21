//! Exact solver for small instances.
//!
//! Depth-first enumeration of team plans, one robot after another, each path
//! grown one vertex at a time. Three rules cut the tree:
//!
//! * budget: on metric instances a vertex is only appended if the path can
//!   still close at the finish directly from it, which by the triangle
//!   inequality is the cheapest way to close;
//! * bound: the utility of the partial plan plus, for every free vertex some
//!   robot could still reach, its reward and the full weighted reward of its
//!   currently free neighbours. Adding a set of vertices never gains more
//!   than the sum of those terms, since each gain only shrinks as the visited
//!   set grows;
//! * dominance: two partial plans with the same visited set, the same robot
//!   at the same vertex and the same symmetry anchor have identical futures,
//!   so only the cheaper one is expanded.
//!
//! Robots with equal budgets are interchangeable; consecutive equal-budget
//! robots must start with non-decreasing vertex ids, an empty path counting
//! as the largest id.
//!
//! With `gap > 0` a node is pruned once `(1 - gap) * bound` no longer beats
//! the incumbent. The largest bound of any pruned or abandoned subtree, and
//! the incumbent itself, bound the optimum from above.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, invalid_param, Result};
use crate::instance::{BudgetSpec, ProblemInstance};
use crate::solution::{marginal_utility, utility_of_visited, TeamSolution};

const NO_ANCHOR: u16 = u16::MAX;
const BOUND_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Stop once the incumbent is within this fraction of the upper bound.
    pub gap: f64,
    #[serde(default)]
    pub node_limit: Option<u64>,
    /// Seconds.
    #[serde(default)]
    pub time_limit: Option<f64>,
}

impl OracleConfig {
    /// Prove optimality, without limits.
    pub fn exact() -> Self {
        Self { gap: 0.0, node_limit: None, time_limit: None }
    }

    pub fn with_gap(gap: f64) -> Self {
        Self { gap, ..Self::exact() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gap) {
            return Err(invalid_param(format!("gap must lie in [0, 1), got {}", self.gap)));
        }
        if let Some(t) = self.time_limit {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid_param(format!("time limit must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self::exact()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    #[serde(flatten)]
    pub solution: TeamSolution,
    /// Upper bound on the optimal utility.
    pub bound: f64,
    /// `(bound - utility) / bound`, zero when the bound is zero.
    pub proven_gap: f64,
    pub nodes_expanded: u64,
    pub wall_time_s: f64,
    /// A node or time limit stopped the search before the gap was proven.
    pub limit_reached: bool,
}

/// Solves the instance exactly (or to within `config.gap`).
///
/// Supports up to 64 sampling vertices, but the search is exponential and
/// meant for a dozen or so.
pub fn solve_exact(
    instance: &ProblemInstance,
    budgets: &BudgetSpec,
    config: &OracleConfig,
) -> Result<OracleOutcome> {
    config.validate()?;
    let sampling = instance.sampling_ids();
    if sampling.len() > 64 {
        return Err(invalid_input(format!(
            "the exact solver handles at most 64 sampling vertices, got {}",
            sampling.len()
        )));
    }
    let timer = Instant::now();
    let (s, f) = (instance.start_id(), instance.finish_id());
    if budgets.budgets().iter().any(|&b| b < instance.leg_cost(s, f)) {
        let solution = TeamSolution::empty(instance, budgets);
        return Ok(OracleOutcome {
            solution,
            bound: 0.0,
            proven_gap: 0.0,
            nodes_expanded: 0,
            wall_time_s: timer.elapsed().as_secs_f64(),
            limit_reached: false,
        });
    }

    let mut search = Search::new(instance, budgets, config, timer);
    search.expand(0, 0.0, 0.0);

    let solution = TeamSolution::evaluate(search.best_paths.clone(), instance, budgets);
    let utility = solution.utility;
    let mut bound = search.open_bound.max(utility);
    if bound - utility <= 1e-9 * bound.max(1.0) && !search.aborted {
        bound = utility;
    }
    let proven_gap = if bound > 0.0 { (bound - utility) / bound } else { 0.0 };
    Ok(OracleOutcome {
        solution,
        bound,
        proven_gap,
        nodes_expanded: search.nodes,
        wall_time_s: search.timer.elapsed().as_secs_f64(),
        limit_reached: search.aborted,
    })
}

type StateKey = (u64, u8, u16, u16);

struct Search<'a> {
    instance: &'a ProblemInstance,
    budgets: &'a [f64],
    gap: f64,
    node_limit: Option<u64>,
    time_limit: Option<f64>,
    timer: Instant,
    metric: bool,
    bit: Vec<u64>,
    /// `solo[k][v]`: some robot `k' >= k` can visit `v` alone.
    solo: Vec<Vec<bool>>,
    visited: Vec<bool>,
    mask: u64,
    paths: Vec<Vec<usize>>,
    best_paths: Vec<Vec<usize>>,
    best_utility: f64,
    open_bound: f64,
    seen: HashMap<StateKey, f64>,
    nodes: u64,
    aborted: bool,
}

impl<'a> Search<'a> {
    fn new(
        instance: &'a ProblemInstance,
        budgets: &'a BudgetSpec,
        config: &OracleConfig,
        timer: Instant,
    ) -> Self {
        let n = instance.num_vertices();
        let m = budgets.num_robots();
        let (s, f) = (instance.start_id(), instance.finish_id());
        let mut bit = vec![0u64; n];
        for (k, &v) in instance.sampling_ids().iter().enumerate() {
            bit[v] = 1u64 << k;
        }
        let mut solo = vec![vec![false; n]; m + 1];
        for k in (0..m).rev() {
            for &v in instance.sampling_ids() {
                let alone = instance.leg_cost(s, v) + instance.leg_cost(v, f);
                solo[k][v] = solo[k + 1][v] || alone <= budgets.budget(k);
            }
        }
        let empty = vec![vec![s, f]; m];
        Self {
            instance,
            budgets: budgets.budgets(),
            gap: config.gap,
            node_limit: config.node_limit,
            time_limit: config.time_limit,
            timer,
            metric: instance.is_metric(),
            bit,
            solo,
            visited: vec![false; n],
            mask: 0,
            paths: vec![vec![s]],
            best_paths: empty,
            best_utility: 0.0,
            open_bound: 0.0,
            seen: HashMap::new(),
            nodes: 0,
            aborted: false,
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.node_limit.is_some_and(|limit| self.nodes >= limit) {
            return true;
        }
        if let Some(t) = self.time_limit {
            if self.nodes % 1024 == 0 && self.timer.elapsed().as_secs_f64() >= t {
                return true;
            }
        }
        false
    }

    fn close_cost(&self, robot: usize, open_cost: f64) -> f64 {
        let last = *self.paths[robot].last().expect("path has the start");
        open_cost + self.instance.leg_cost(last, self.instance.finish_id())
    }

    /// Optimistic utility of every completion of the current partial plan.
    fn optimistic(&self, robot: usize, open_cost: f64, utility: f64) -> f64 {
        let inst = self.instance;
        let last = *self.paths[robot].last().expect("path has the start");
        let f = inst.finish_id();
        let budget = self.budgets[robot];
        let later = &self.solo[robot + 1];
        let mut bound = utility;
        for &v in inst.sampling_ids() {
            if self.visited[v] {
                continue;
            }
            let reachable = !self.metric
                || later[v]
                || open_cost + inst.leg_cost(last, v) + inst.leg_cost(v, f) <= budget;
            if reachable {
                bound += inst.reward(v);
                for (j, w) in inst.correlation().edges(v) {
                    if !self.visited[j] {
                        bound += inst.reward(j) * w;
                    }
                }
            }
        }
        bound
    }

    /// First vertex id that constrains the current robot's first stop, or
    /// that the next robot will be constrained by.
    fn anchor(&self, robot: usize) -> u16 {
        let path = &self.paths[robot];
        if path.len() > 1 {
            return path[1] as u16;
        }
        if robot > 0 && self.budgets[robot] == self.budgets[robot - 1] {
            return self.paths[robot - 1].get(1).map_or(NO_ANCHOR - 1, |&v| v as u16);
        }
        NO_ANCHOR
    }

    fn expand(&mut self, robot: usize, open_cost: f64, utility: f64) {
        let bound = self.optimistic(robot, open_cost, utility);
        if bound * (1.0 - self.gap) <= self.best_utility + BOUND_EPS {
            self.open_bound = self.open_bound.max(bound);
            return;
        }
        let last = *self.paths[robot].last().expect("path has the start");
        let key = (self.mask, robot as u8, self.anchor(robot), last as u16);
        match self.seen.get(&key) {
            Some(&cost) if cost <= open_cost => return,
            _ => {
                self.seen.insert(key, open_cost);
            }
        }
        if self.out_of_budget() {
            self.aborted = true;
            self.open_bound = self.open_bound.max(bound);
            return;
        }
        self.nodes += 1;

        let inst = self.instance;
        let f = inst.finish_id();
        let budget = self.budgets[robot];
        let closable = self.close_cost(robot, open_cost) <= budget;
        if closable && utility > self.best_utility {
            self.record_incumbent(robot, utility);
        }

        let must_follow = if self.paths[robot].len() == 1
            && robot > 0
            && self.budgets[robot] == self.budgets[robot - 1]
        {
            Some(self.paths[robot - 1].get(1).copied().unwrap_or(usize::MAX))
        } else {
            None
        };

        let mut candidates: Vec<usize> = inst
            .sampling_ids()
            .iter()
            .copied()
            .filter(|&v| !self.visited[v] && must_follow.map_or(true, |first| v >= first))
            .filter(|&v| {
                let step = open_cost + inst.leg_cost(last, v);
                if self.metric {
                    step + inst.leg_cost(v, f) <= budget
                } else {
                    step <= budget
                }
            })
            .collect();
        candidates.sort_by(|&a, &b| inst.leg_cost(last, a).total_cmp(&inst.leg_cost(last, b)));

        for v in candidates {
            if self.aborted {
                self.open_bound = self.open_bound.max(bound);
                return;
            }
            let gain = marginal_utility(v, &self.visited, inst);
            self.visited[v] = true;
            self.mask |= self.bit[v];
            self.paths[robot].push(v);
            self.expand(robot, open_cost + inst.leg_cost(last, v), utility + gain);
            self.paths[robot].pop();
            self.mask &= !self.bit[v];
            self.visited[v] = false;
        }

        if closable && robot + 1 < self.budgets.len() && !self.aborted {
            self.paths.push(vec![inst.start_id()]);
            self.expand(robot + 1, 0.0, utility);
            self.paths.pop();
        }
        if self.aborted {
            self.open_bound = self.open_bound.max(bound);
        }
    }

    fn record_incumbent(&mut self, robot: usize, utility: f64) {
        let (s, f) = (self.instance.start_id(), self.instance.finish_id());
        self.best_utility = utility;
        self.best_paths = (0..self.budgets.len())
            .map(|k| {
                if k <= robot {
                    let mut p = self.paths[k].clone();
                    p.push(f);
                    p
                } else {
                    vec![s, f]
                }
            })
            .collect();
    }
}

/// Largest instance [`brute_force`] accepts.
pub const BRUTE_FORCE_MAX_VERTICES: usize = 12;

/// Optimal plan by plain enumeration, for cross-checking [`solve_exact`].
///
/// Every robot may take any subset of the vertices not yet given to an
/// earlier robot; the cheapest ordering of each subset comes from a
/// Held-Karp table over all subsets. No bounds, no symmetry breaking.
/// Returns the best utility and one plan attaining it.
pub fn brute_force(
    instance: &ProblemInstance,
    budgets: &BudgetSpec,
) -> Result<(f64, Vec<Vec<usize>>)> {
    let ids = instance.sampling_ids();
    let n = ids.len();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(invalid_input(format!(
            "brute force handles at most {BRUTE_FORCE_MAX_VERTICES} sampling vertices, got {n}"
        )));
    }
    let (s, f) = (instance.start_id(), instance.finish_id());
    let m = budgets.num_robots();
    let empty = vec![vec![s, f]; m];
    if budgets.budgets().iter().any(|&b| b < instance.leg_cost(s, f)) {
        return Ok((0.0, empty));
    }

    let full = 1usize << n;
    // open[mask * n + j]: cheapest walk from the start through `mask`, ending at ids[j]
    let mut open = vec![f64::INFINITY; full * n];
    let mut parent = vec![usize::MAX; full * n];
    for j in 0..n {
        open[(1 << j) * n + j] = instance.leg_cost(s, ids[j]);
    }
    for mask in 1..full {
        for j in 0..n {
            let here = open[mask * n + j];
            if mask & (1 << j) == 0 || !here.is_finite() {
                continue;
            }
            for k in 0..n {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let cost = here + instance.leg_cost(ids[j], ids[k]);
                if cost < open[next * n + k] {
                    open[next * n + k] = cost;
                    parent[next * n + k] = j;
                }
            }
        }
    }
    let mut closed = vec![(f64::INFINITY, usize::MAX); full];
    closed[0] = (instance.leg_cost(s, f), usize::MAX);
    for mask in 1..full {
        for j in 0..n {
            let cost = open[mask * n + j] + instance.leg_cost(ids[j], f);
            if cost < closed[mask].0 {
                closed[mask] = (cost, j);
            }
        }
    }

    let mut best = (0.0, vec![0usize; m]);
    let mut chosen = vec![0usize; m];
    let mut visited = vec![false; instance.num_vertices()];
    assign(0, full - 1, budgets.budgets(), &closed, &mut chosen, &mut |chosen: &[usize]| {
        let union = chosen.iter().fold(0, |acc, &c| acc | c);
        for (b, &v) in ids.iter().enumerate() {
            visited[v] = union & (1 << b) != 0;
        }
        let utility = utility_of_visited(&visited, instance);
        if utility > best.0 {
            best = (utility, chosen.to_vec());
        }
    });

    let paths = best
        .1
        .iter()
        .map(|&mask| {
            let mut rev = vec![f];
            let (mut mask, mut j) = (mask, closed[mask].1);
            while mask != 0 {
                rev.push(ids[j]);
                let prev = parent[mask * n + j];
                mask &= !(1 << j);
                j = prev;
            }
            rev.push(s);
            rev.reverse();
            rev
        })
        .collect();
    Ok((best.0, paths))
}

fn assign(
    robot: usize,
    remaining: usize,
    budgets: &[f64],
    closed: &[(f64, usize)],
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if robot == budgets.len() {
        visit(chosen);
        return;
    }
    let mut sub = remaining;
    loop {
        if closed[sub].0 <= budgets[robot] {
            chosen[robot] = sub;
            assign(robot + 1, remaining & !sub, budgets, closed, chosen, visit);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & remaining;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{budget_for_team, build_grid_instance, CorrelationSettings, GridSpec, KernelForm, Vertex};
    use crate::solution::check_feasibility;

    #[test]
    fn single_vertex_is_taken_when_affordable() {
        let vs = vec![
            Vertex { id: 0, x: 2.0, y: 0.0, reward: 3.0, sensing_cost: 0.5 },
            Vertex { id: 1, x: 0.0, y: 0.0, reward: 0.0, sensing_cost: 0.0 },
        ];
        let settings = CorrelationSettings { kernel_length: 1.0, neighbour_radius: 1.5, kernel_form: KernelForm::Printed };
        let inst = ProblemInstance::euclidean(vs, 1, 1, settings).unwrap();
        let out = solve_exact(&inst, &BudgetSpec::uniform(1, 4.5).unwrap(), &OracleConfig::exact()).unwrap();
        assert_eq!(out.solution.paths, vec![vec![1, 0, 1]]);
        assert_eq!(out.solution.utility, 3.0);
        assert_eq!(out.proven_gap, 0.0);
        let out = solve_exact(&inst, &BudgetSpec::uniform(1, 4.4).unwrap(), &OracleConfig::exact()).unwrap();
        assert_eq!(out.solution.utility, 0.0);
    }

    #[test]
    fn two_by_two_full_budget_visits_everything() {
        let inst = build_grid_instance(&GridSpec::new(2, 2)).unwrap();
        let budgets = budget_for_team(&inst, 1, 1.0).unwrap();
        let out = solve_exact(&inst, &budgets, &OracleConfig::exact()).unwrap();
        assert_eq!(out.solution.utility, 4.0);
        assert!(out.solution.feasible);
        assert_eq!(out.proven_gap, 0.0);
        assert_eq!(out.bound, 4.0);
    }

    #[test]
    fn gap_run_respects_its_gap() {
        let inst = build_grid_instance(&GridSpec::new(3, 3)).unwrap();
        let budgets = budget_for_team(&inst, 2, 0.75).unwrap();
        let exact = solve_exact(&inst, &budgets, &OracleConfig::exact()).unwrap();
        let loose = solve_exact(&inst, &budgets, &OracleConfig::with_gap(0.05)).unwrap();
        assert!(loose.proven_gap <= 0.05 + 1e-12);
        assert!(loose.solution.utility >= 0.95 * exact.solution.utility - 1e-9);
        assert!(loose.bound >= exact.solution.utility - 1e-9);
        assert!(loose.nodes_expanded <= exact.nodes_expanded);
    }

    #[test]
    fn node_limit_is_flagged() {
        let inst = build_grid_instance(&GridSpec::new(3, 3)).unwrap();
        let budgets = budget_for_team(&inst, 2, 1.0).unwrap();
        let config = OracleConfig { node_limit: Some(5), ..OracleConfig::exact() };
        let out = solve_exact(&inst, &budgets, &config).unwrap();
        assert!(out.limit_reached);
        assert!(out.nodes_expanded <= 5);
        assert!(out.bound >= out.solution.utility);
        assert!(check_feasibility(&out.solution.paths, &inst, &budgets).feasible);
        let exact = solve_exact(&inst, &budgets, &OracleConfig::exact()).unwrap();
        assert!(out.bound >= exact.solution.utility - 1e-9);
    }

    #[test]
    fn rejects_bad_gap() {
        let inst = build_grid_instance(&GridSpec::new(2, 2)).unwrap();
        let budgets = budget_for_team(&inst, 1, 1.0).unwrap();
        assert!(solve_exact(&inst, &budgets, &OracleConfig::with_gap(1.0)).is_err());
        assert!(solve_exact(&inst, &budgets, &OracleConfig::with_gap(-0.1)).is_err());
    }

    #[test]
    fn outcome_json_has_reporting_fields() {
        let inst = build_grid_instance(&GridSpec::new(2, 2)).unwrap();
        let budgets = budget_for_team(&inst, 2, 1.0).unwrap();
        let out = solve_exact(&inst, &budgets, &OracleConfig::exact()).unwrap();
        let v = serde_json::to_value(&out).unwrap();
        for key in ["paths", "utility", "bound", "proven_gap", "nodes_expanded", "wall_time_s"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn three_by_three_half_budget_matches_enumeration() {
        let inst = build_grid_instance(&GridSpec::new(3, 3)).unwrap();
        let budgets = budget_for_team(&inst, 2, 0.5).unwrap();
        let (optimum, plan) = brute_force(&inst, &budgets).unwrap();
        assert!(check_feasibility(&plan, &inst, &budgets).feasible);
        assert!((TeamSolution::evaluate(plan, &inst, &budgets).utility - optimum).abs() < 1e-12);
        let out = solve_exact(&inst, &budgets, &OracleConfig::exact()).unwrap();
        assert!((out.solution.utility - optimum).abs() < 1e-9, "{} vs {optimum}", out.solution.utility);
        assert!(out.solution.feasible);
        assert_eq!(out.proven_gap, 0.0);
    }

    #[test]
    fn unequal_budgets_and_noise_match_enumeration() {
        for seed in 0..6 {
            let inst = build_grid_instance(&GridSpec::new(2, 4).noisy(seed)).unwrap();
            let base = budget_for_team(&inst, 1, 1.0).unwrap().budget(0);
            let budgets = BudgetSpec::new(vec![0.3 * base, 0.45 * base, 0.3 * base]).unwrap();
            let (optimum, _) = brute_force(&inst, &budgets).unwrap();
            let out = solve_exact(&inst, &budgets, &OracleConfig::exact()).unwrap();
            assert!((out.solution.utility - optimum).abs() < 1e-9, "seed {seed}");
            assert!(out.solution.feasible);
        }
    }

    #[test]
    fn non_metric_costs_match_enumeration() {
        let vs: Vec<Vertex> = (0..6)
            .map(|i| Vertex {
                id: i,
                x: (i % 3) as f64,
                y: (i / 3) as f64,
                reward: if i < 4 { 1.0 + i as f64 } else { 0.0 },
                sensing_cost: if i < 4 { 0.2 } else { 0.0 },
            })
            .collect();
        let mut m = vec![vec![0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    m[i][j] = 1.0 + ((i * 7 + j * 7) % 5) as f64;
                }
            }
        }
        let settings = CorrelationSettings { kernel_length: 1.0, neighbour_radius: 1.5, kernel_form: KernelForm::Printed };
        let inst = ProblemInstance::with_travel_costs(vs, &m, 4, 5, settings).unwrap();
        assert!(!inst.is_metric());
        for budget in [4.0, 7.0, 9.5, 14.0] {
            let budgets = BudgetSpec::uniform(2, budget).unwrap();
            let (optimum, _) = brute_force(&inst, &budgets).unwrap();
            let out = solve_exact(&inst, &budgets, &OracleConfig::exact()).unwrap();
            assert!((out.solution.utility - optimum).abs() < 1e-9, "budget {budget}");
            assert!(out.solution.feasible);
        }
    }
}
