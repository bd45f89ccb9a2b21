use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::instance::{BudgetSpec, ProblemInstance};

use super::path_cost_unchecked;

/// Slack allowed when comparing a path cost with its budget.
const BUDGET_TOLERANCE: f64 = 1e-9;

/// A broken constraint, serialized as a short identifier such as
/// `budget(1)` or `duplicate-visit(17)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    /// Number of paths differs from the number of budgets.
    RobotCount { expected: usize, found: usize },
    /// Path of robot `k` is shorter than two vertices or does not begin at the start.
    Start(usize),
    /// Path of robot `k` does not end at the finish.
    Finish(usize),
    UnknownVertex { robot: usize, vertex: usize },
    /// Start or finish used as an intermediate stop.
    DepotInterior { robot: usize, vertex: usize },
    /// A sampling vertex occurs twice within one path.
    Repeat { robot: usize, vertex: usize },
    /// A sampling vertex is visited by more than one robot.
    DuplicateVisit(usize),
    /// Path cost exceeds the robot's budget.
    Budget(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::RobotCount { expected, found } => write!(f, "robot-count({expected},{found})"),
            Violation::Start(k) => write!(f, "start({k})"),
            Violation::Finish(k) => write!(f, "finish({k})"),
            Violation::UnknownVertex { robot, vertex } => write!(f, "unknown-vertex({robot},{vertex})"),
            Violation::DepotInterior { robot, vertex } => write!(f, "depot-interior({robot},{vertex})"),
            Violation::Repeat { robot, vertex } => write!(f, "repeat({robot},{vertex})"),
            Violation::DuplicateVisit(v) => write!(f, "duplicate-visit({v})"),
            Violation::Budget(k) => write!(f, "budget({k})"),
        }
    }
}

impl FromStr for Violation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("unrecognised violation `{s}`");
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let nums: Vec<usize> = args
            .split(',')
            .map(|a| a.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let v = match (name, nums.as_slice()) {
            ("robot-count", &[expected, found]) => Violation::RobotCount { expected, found },
            ("start", &[k]) => Violation::Start(k),
            ("finish", &[k]) => Violation::Finish(k),
            ("unknown-vertex", &[robot, vertex]) => Violation::UnknownVertex { robot, vertex },
            ("depot-interior", &[robot, vertex]) => Violation::DepotInterior { robot, vertex },
            ("repeat", &[robot, vertex]) => Violation::Repeat { robot, vertex },
            ("duplicate-visit", &[v]) => Violation::DuplicateVisit(v),
            ("budget", &[k]) => Violation::Budget(k),
            _ => return Err(bad()),
        };
        Ok(v)
    }
}

impl Serialize for Violation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Violation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Checks every routing constraint of a team plan.
///
/// Subtour-freedom and flow conservation hold by construction for a path
/// encoding, so what remains is: endpoints, single visits within a path and
/// across the team, and each robot's budget.
pub fn check_feasibility(
    paths: &[Vec<usize>],
    instance: &ProblemInstance,
    budgets: &BudgetSpec,
) -> FeasibilityReport {
    let n = instance.num_vertices();
    let mut violations = Vec::new();
    if paths.len() != budgets.num_robots() {
        violations.push(Violation::RobotCount {
            expected: budgets.num_robots(),
            found: paths.len(),
        });
    }

    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut reported = vec![false; n];
    // stamp[v] = k + 1 once robot k has passed through v
    let mut stamp = vec![0usize; n];
    for (k, path) in paths.iter().enumerate() {
        if path.len() < 2 || path[0] != instance.start_id() {
            violations.push(Violation::Start(k));
        }
        if path.len() < 2 || path[path.len() - 1] != instance.finish_id() {
            violations.push(Violation::Finish(k));
        }
        if let Some(&vertex) = path.iter().find(|&&v| v >= n) {
            violations.push(Violation::UnknownVertex { robot: k, vertex });
            continue;
        }
        if path.len() < 2 {
            continue;
        }
        for &v in &path[1..path.len() - 1] {
            if instance.is_depot(v) {
                violations.push(Violation::DepotInterior { robot: k, vertex: v });
                continue;
            }
            if stamp[v] == k + 1 {
                violations.push(Violation::Repeat { robot: k, vertex: v });
                continue;
            }
            stamp[v] = k + 1;
            match owner[v] {
                None => owner[v] = Some(k),
                Some(_) => {
                    if !reported[v] {
                        reported[v] = true;
                        violations.push(Violation::DuplicateVisit(v));
                    }
                }
            }
        }
        if k < budgets.num_robots() {
            let cost = path_cost_unchecked(path, instance);
            let limit = budgets.budget(k);
            if cost > limit + BUDGET_TOLERANCE * limit.max(1.0) {
                violations.push(Violation::Budget(k));
            }
        }
    }
    FeasibilityReport { feasible: violations.is_empty(), violations }
}
