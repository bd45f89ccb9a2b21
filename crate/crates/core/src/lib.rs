//! Planning budget-constrained sampling routes for robot teams over a
//! correlated sensing grid.
//!
//! A mission is a [`ProblemInstance`]: sampling vertices with rewards and
//! sensing costs, a symmetric travel-cost matrix, and a correlation graph
//! through which an unvisited vertex leaks part of its reward to visited
//! neighbours. Each robot flies one start-to-finish path under its own
//! budget, and the team maximises the correlated utility.
//!
//! * [`ga`] is the genetic-algorithm planner (random or NN-RASP seeding,
//!   2-opt evaluation, gene-sorting crossover, add/swap/remove mutation).
//! * [`oracle`] is an exact depth-first solver for small instances.
//! * [`tuner`] evolves GA parameter sets rated by Glicko-2.

pub mod error;
pub mod ga;
pub mod instance;
pub mod oracle;
pub mod solution;
pub mod tuner;

pub use error::{CtopError, Result};
pub use ga::{solve, GaParams, GenerationMethod, SolveReport};
pub use instance::{
    budget_for_team, build_correlation, build_grid_instance, kernel_weight,
    max_single_robot_budget, BudgetSpec, CorrelationGraph, GridSpec, KernelForm,
    ProblemInstance, Vertex,
};
pub use oracle::{brute_force, solve_exact, OracleConfig, OracleOutcome};
pub use tuner::{tune, ParamChromosome, TuneReport, TunerConfig};
pub use solution::{
    check_feasibility, path_cost, team_utility, two_opt, Chromosome, FeasibilityReport, Gene,
    TeamSolution, Violation,
};
