//! Robot-count and budget sweeps written as CSV.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use ctop::{
    budget_for_team, solve, solve_exact, GaParams, GenerationMethod, OracleConfig,
    ProblemInstance,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{usage, CliResult};

pub const ROBOT_SWEEP: [usize; 4] = [2, 3, 4, 5];
pub const BUDGET_SWEEP: [f64; 4] = [1.0, 0.75, 0.5, 0.25];
/// Robots used by the budget sweep.
pub const BUDGET_SWEEP_ROBOTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Sweep {
    Robots,
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    GaNnrasp,
    GaRandom,
    Oracle,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::GaNnrasp => "ga-nnrasp",
            Method::GaRandom => "ga-random",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ga-nnrasp" | "nnrasp" => Ok(Method::GaNnrasp),
            "ga-random" | "random" => Ok(Method::GaRandom),
            "oracle" => Ok(Method::Oracle),
            _ => Err(format!("unknown method `{s}` (expected ga-random, ga-nnrasp or oracle)")),
        }
    }
}

/// One CSV line. Aggregate rows put `mean` or `stddev` in the seed column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub scenario: String,
    pub method: String,
    pub robots: usize,
    pub budget_fraction: f64,
    pub seed: String,
    pub utility: f64,
    pub wall_time_s: f64,
    pub feasible: bool,
}

pub struct BenchOptions {
    pub sweep: Sweep,
    pub runs: usize,
    pub methods: Vec<Method>,
    pub base_seed: u64,
    pub oracle: OracleConfig,
    pub params: Option<GaParams>,
}

struct Job {
    method: Method,
    robots: usize,
    fraction: f64,
    seed: u64,
}

/// Runs the sweep and returns per-run rows followed by aggregate rows, both
/// ordered by method name, sweep value and seed.
pub fn run(instance: &ProblemInstance, opts: &BenchOptions) -> CliResult<Vec<BenchmarkRow>> {
    if opts.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let mut methods = opts.methods.clone();
    methods.sort();
    methods.dedup();
    let cells: Vec<(usize, f64)> = match opts.sweep {
        Sweep::Robots => ROBOT_SWEEP.iter().map(|&m| (m, 1.0)).collect(),
        Sweep::Budget => BUDGET_SWEEP.iter().map(|&f| (BUDGET_SWEEP_ROBOTS, f)).collect(),
    };
    let mut jobs = Vec::new();
    for &method in &methods {
        for &(robots, fraction) in &cells {
            for r in 0..opts.runs {
                jobs.push(Job { method, robots, fraction, seed: opts.base_seed + r as u64 });
            }
        }
    }

    let rows: Vec<BenchmarkRow> = jobs
        .par_iter()
        .map(|job| run_job(instance, opts, job))
        .collect::<CliResult<_>>()?;

    let mut out = rows.clone();
    for chunk in rows.chunks(opts.runs) {
        out.extend(aggregate(chunk));
    }
    Ok(out)
}

fn scenario(sweep: Sweep, robots: usize, fraction: f64) -> String {
    match sweep {
        Sweep::Robots => format!("robots-{robots}"),
        Sweep::Budget => format!("budget-{fraction}"),
    }
}

fn run_job(instance: &ProblemInstance, opts: &BenchOptions, job: &Job) -> CliResult<BenchmarkRow> {
    let budgets = budget_for_team(instance, job.robots, job.fraction)?;
    let (utility, wall_time_s, feasible) = match job.method {
        Method::Oracle => {
            let out = solve_exact(instance, &budgets, &opts.oracle)?;
            (out.solution.utility, out.wall_time_s, out.solution.feasible)
        }
        Method::GaNnrasp | Method::GaRandom => {
            let method = if job.method == Method::GaNnrasp {
                GenerationMethod::NnRasp
            } else {
                GenerationMethod::Random
            };
            let mut params = match &opts.params {
                Some(p) => p.clone(),
                None => GaParams::tuned(method),
            };
            params.generation_method = method;
            params.seed = job.seed;
            let report = solve(instance, &budgets, &params)?;
            (report.solution.utility, report.wall_time_s, report.solution.feasible)
        }
    };
    Ok(BenchmarkRow {
        scenario: scenario(opts.sweep, job.robots, job.fraction),
        method: job.method.to_string(),
        robots: job.robots,
        budget_fraction: job.fraction,
        seed: job.seed.to_string(),
        utility,
        wall_time_s,
        feasible,
    })
}

/// Mean and sample standard deviation rows for one cell.
fn aggregate(rows: &[BenchmarkRow]) -> [BenchmarkRow; 2] {
    let n = rows.len() as f64;
    let mean = |f: fn(&BenchmarkRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let std = |f: fn(&BenchmarkRow) -> f64, mu: f64| {
        if rows.len() < 2 {
            0.0
        } else {
            (rows.iter().map(|r| (f(r) - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        }
    };
    let (mu_u, mu_t) = (mean(|r| r.utility), mean(|r| r.wall_time_s));
    let feasible = rows.iter().all(|r| r.feasible);
    let first = &rows[0];
    let template = |seed: &str, utility: f64, wall_time_s: f64| BenchmarkRow {
        seed: seed.to_string(),
        utility,
        wall_time_s,
        feasible,
        ..first.clone()
    };
    [
        template("mean", mu_u, mu_t),
        template("stddev", std(|r| r.utility, mu_u), std(|r| r.wall_time_s, mu_t)),
    ]
}

pub fn write_csv<W: Write>(rows: &[BenchmarkRow], out: W) -> CliResult<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}
