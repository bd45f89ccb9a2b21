mod bench;
mod error;
mod plot;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ctop::tuner::{paper_suite, SpeedMeasure};
use ctop::{
    budget_for_team, build_grid_instance, solve, solve_exact, tune, BudgetSpec, GaParams,
    GenerationMethod, GridSpec, KernelForm, OracleConfig, ProblemInstance, TunerConfig,
};
use serde::Serialize;

use bench::{BenchOptions, Method, Sweep};
use error::{usage, CliError, CliResult};

/// Instances larger than this need `--force` for the exact solver.
const ORACLE_SAFE_VERTICES: usize = 20;

#[derive(Parser)]
#[command(name = "ctop", version, about = "Multi-robot sampling route planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a lattice instance.
    Gen(GenArgs),
    /// Plan routes with the genetic algorithm.
    Solve(SolveArgs),
    /// Solve a small instance exactly or to a proven gap.
    Oracle(OracleArgs),
    /// Run a robot-count or budget sweep and write CSV.
    Bench(BenchArgs),
    /// Tune GA parameters by rated self-play.
    Tune(TuneArgs),
    /// Draw a solution as SVG.
    Plot(PlotArgs),
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, default_value_t = 9)]
    rows: usize,
    #[arg(long, default_value_t = 9)]
    cols: usize,
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    /// Half-width of the uniform position noise, in distance units.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = ctop::instance::DEFAULT_KERNEL_LENGTH)]
    kernel_length: f64,
    /// Correlation radius; defaults to 1.5 x spacing.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_enum, default_value_t = KernelArg::Printed)]
    kernel_form: KernelArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Printed,
    Squared,
}

#[derive(clap::Args)]
struct TeamArgs {
    #[arg(short, long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 3)]
    robots: usize,
    /// Share of the single-robot tour cost split evenly across the team.
    #[arg(long, default_value_t = 1.0)]
    budget_frac: f64,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[command(flatten)]
    team: TeamArgs,
    #[arg(long, default_value = "nnrasp")]
    method: GenerationMethod,
    /// GA parameters as JSON, or a tuning report whose best parameters are used.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write zero wall time so that repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct OracleArgs {
    #[command(flatten)]
    team: TeamArgs,
    /// Stop once the incumbent is within this relative gap of the bound.
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Allow instances with more than 20 sampling vertices.
    #[arg(long)]
    force: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Instance file; a 9x9 lattice when omitted.
    #[arg(short, long)]
    instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Sweep::Robots)]
    sweep: Sweep,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, value_delimiter = ',', default_value = "ga-random,ga-nnrasp")]
    methods: Vec<Method>,
    /// First seed; run `r` uses `seed + r`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// GA parameters as JSON or a tuning report (method is set per row).
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    oracle_gap: f64,
    #[arg(long)]
    oracle_time_limit: Option<f64>,
    #[arg(long)]
    force: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    /// Two 5x5 problems, population 8, 3 trials, 2 games.
    Desk,
    /// Twelve problems, population 100, 10 trials, 10 games.
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpeedArg {
    Evaluations,
    WallTime,
}

#[derive(clap::Args)]
struct TuneArgs {
    #[arg(long, value_enum, default_value_t = Scale::Desk)]
    scale: Scale,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    games: Option<usize>,
    #[arg(long, default_value = "nnrasp")]
    method: GenerationMethod,
    /// How the speed bonus decides which run was faster.
    #[arg(long, value_enum, default_value_t = SpeedArg::Evaluations)]
    speed: SpeedArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long, default_value = "tuning_report.json")]
    output: PathBuf,
}

#[derive(clap::Args)]
struct PlotArgs {
    #[arg(short, long)]
    instance: PathBuf,
    /// Output of `solve` or `oracle`.
    #[arg(short, long)]
    solution: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Tune(args) => cmd_tune(args),
        Command::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|source| CliError::Parse { path: path.to_owned(), source })
}

fn load_instance(path: &Path) -> CliResult<ProblemInstance> {
    Ok(ProblemInstance::from_json(&read_text(path)?)?)
}

fn emit(text: &str, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn emit_json<T: Serialize>(value: &T, output: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(&text, output)
}

/// Accepts a `GaParams` document or a tuning report carrying `best_params`.
fn load_params(path: &Path) -> CliResult<GaParams> {
    let mut value: serde_json::Value = read_json(path)?;
    if let Some(best) = value.get_mut("best_params") {
        value = best.take();
    }
    serde_json::from_value(value).map_err(|source| CliError::Parse { path: path.to_owned(), source })
}

fn team_budgets(instance: &ProblemInstance, team: &TeamArgs) -> CliResult<BudgetSpec> {
    Ok(budget_for_team(instance, team.robots, team.budget_frac)?)
}

fn report_unreachable_finish(instance: &ProblemInstance, budgets: &BudgetSpec) {
    let direct = instance.leg_cost(instance.start_id(), instance.finish_id());
    eprintln!(
        "infeasible input: the start-to-finish leg costs {direct:.6} but the smallest budget is {:.6}",
        budgets.budgets().iter().copied().fold(f64::INFINITY, f64::min)
    );
}

fn cmd_gen(args: GenArgs) -> CliResult<ExitCode> {
    let spec = GridSpec {
        spacing: args.spacing,
        noise_amplitude: args.noise,
        kernel_length: args.kernel_length,
        neighbour_radius: args.radius,
        kernel_form: match args.kernel_form {
            KernelArg::Printed => KernelForm::Printed,
            KernelArg::Squared => KernelForm::Squared,
        },
        seed: args.seed,
        ..GridSpec::new(args.rows, args.cols)
    };
    let instance = build_grid_instance(&spec)?;
    let mut text = instance.to_json();
    text.push('\n');
    emit(&text, args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: SolveArgs) -> CliResult<ExitCode> {
    let instance = load_instance(&args.team.instance)?;
    let budgets = team_budgets(&instance, &args.team)?;
    let mut params = match &args.params {
        Some(path) => load_params(path)?,
        None => GaParams::tuned(args.method),
    };
    params.generation_method = args.method;
    params.seed = args.seed;
    let mut report = solve(&instance, &budgets, &params)?;
    if args.no_timing {
        report.wall_time_s = 0.0;
    }
    emit_json(&report, args.output.as_deref())?;
    if report.infeasible_input {
        report_unreachable_finish(&instance, &budgets);
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_guard(instance: &ProblemInstance, force: bool) -> CliResult<()> {
    let n = instance.sampling_ids().len();
    if n > ORACLE_SAFE_VERTICES && !force {
        return Err(usage(format!(
            "the exact solver is exponential and this instance has {n} sampling vertices; \
             use at most {ORACLE_SAFE_VERTICES}, set --gap/--time-limit and pass --force, \
             or use `solve` instead"
        )));
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> CliResult<ExitCode> {
    let instance = load_instance(&args.team.instance)?;
    oracle_guard(&instance, args.force)?;
    let budgets = team_budgets(&instance, &args.team)?;
    let config = OracleConfig {
        gap: args.gap,
        node_limit: args.node_limit,
        time_limit: args.time_limit,
    };
    let outcome = solve_exact(&instance, &budgets, &config)?;
    emit_json(&outcome, args.output.as_deref())?;
    if outcome.limit_reached {
        eprintln!(
            "limit reached: proven gap {:.4} exceeds the requested {:.4}",
            outcome.proven_gap, args.gap
        );
    }
    let direct = instance.leg_cost(instance.start_id(), instance.finish_id());
    if budgets.budgets().iter().any(|&b| b < direct) {
        report_unreachable_finish(&instance, &budgets);
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> CliResult<ExitCode> {
    let instance = match &args.instance {
        Some(path) => load_instance(path)?,
        None => build_grid_instance(&GridSpec::new(9, 9))?,
    };
    if args.methods.contains(&Method::Oracle) {
        oracle_guard(&instance, args.force)?;
    }
    let params = args.params.as_deref().map(load_params).transpose()?;
    let opts = BenchOptions {
        sweep: args.sweep,
        runs: args.runs,
        methods: args.methods,
        base_seed: args.seed,
        oracle: OracleConfig {
            gap: args.oracle_gap,
            node_limit: None,
            time_limit: args.oracle_time_limit,
        },
        params,
    };
    let threads = std::env::var("CTOP_THREADS")
        .ok()
        .map(|v| v.parse::<usize>().map_err(|_| usage(format!("CTOP_THREADS must be a number, got `{v}`"))))
        .transpose()?
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let rows = pool.install(|| bench::run(&instance, &opts))?;

    let mut buffer = Vec::new();
    bench::write_csv(&rows, &mut buffer)?;
    emit(&String::from_utf8_lossy(&buffer), args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_tune(args: TuneArgs) -> CliResult<ExitCode> {
    let mut config = match args.scale {
        Scale::Desk => TunerConfig::desk_scale(args.seed),
        Scale::Full => TunerConfig { seed: args.seed, suite: paper_suite(args.seed), ..TunerConfig::default() },
    };
    config.population = args.population.unwrap_or(config.population);
    config.max_trials = args.trials.unwrap_or(config.max_trials);
    config.num_games = args.games.unwrap_or(config.num_games);
    config.method = args.method;
    config.speed_measure = match args.speed {
        SpeedArg::Evaluations => SpeedMeasure::Evaluations,
        SpeedArg::WallTime => SpeedMeasure::WallTime,
    };
    let report = tune(&config)?;
    emit_json(&report, Some(&args.output))?;
    eprintln!(
        "best configuration (rating {:.1} +/- {:.1}): {}",
        report.best_rating.rating,
        2.0 * report.best_rating.deviation,
        serde_json::to_string(&report.best)?
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_plot(args: PlotArgs) -> CliResult<ExitCode> {
    let instance = load_instance(&args.instance)?;
    let value: serde_json::Value = read_json(&args.solution)?;
    let paths: Vec<Vec<usize>> = match value.get("paths") {
        Some(p) => serde_json::from_value(p.clone())
            .map_err(|source| CliError::Parse { path: args.solution.clone(), source })?,
        None => return Err(usage(format!("{} has no `paths` field", args.solution.display()))),
    };
    if let Some(&bad) = paths.iter().flatten().find(|&&v| v >= instance.num_vertices()) {
        return Err(usage(format!("vertex {bad} is not in the instance")));
    }
    let utility = value.get("utility").and_then(|u| u.as_f64()).unwrap_or(0.0);
    let wall_time_s = value.get("wall_time_s").and_then(|t| t.as_f64()).unwrap_or(0.0);
    let svg = plot::render_svg(&instance, &paths, utility, wall_time_s);
    emit(&svg, args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
