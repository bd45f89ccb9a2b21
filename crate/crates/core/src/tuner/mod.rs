//! Parameter tuning by rated self-play.
//!
//! A population of GA configurations plays a suite of problems. Every pair
//! of configurations is compared on each (problem, game) cell: the higher
//! utility wins, equal utilities draw, and the faster run gets a bonus taken
//! from the slower one. Each trial is one Glicko-2 rating period. The best
//! rated configurations, plus those whose rating interval overlaps the tenth
//! best, become parents of the next population.
//!
//! "Faster" is measured either by wall time or by the number of chromosome
//! evaluations. Only the latter makes a tuning run reproducible.

mod glicko;
mod space;

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};
use crate::ga::{solve, GaParams, GenerationMethod};
use crate::instance::{budget_for_team, build_grid_instance, BudgetSpec, GridSpec, ProblemInstance};

pub use glicko::{
    GameResult, Glicko2State, INITIAL_DEVIATION, INITIAL_RATING, INITIAL_VOLATILITY,
    VOLATILITY_TOLERANCE,
};
pub use space::{Knob, ParamChromosome};

/// Number of top-rated configurations always kept as parents.
pub const TOP_PARENTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedMeasure {
    WallTime,
    Evaluations,
}

/// One entry of the tuning suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteProblem {
    pub name: String,
    pub grid: GridSpec,
    pub robots: usize,
    pub budget_fraction: f64,
}

impl SuiteProblem {
    pub fn prepare(&self) -> Result<PreparedProblem> {
        let instance = build_grid_instance(&self.grid)?;
        let budgets = budget_for_team(&instance, self.robots, self.budget_fraction)?;
        Ok(PreparedProblem { name: self.name.clone(), instance, budgets })
    }
}

#[derive(Debug, Clone)]
pub struct PreparedProblem {
    pub name: String,
    pub instance: ProblemInstance,
    pub budgets: BudgetSpec,
}

/// Twelve problems: 5x5, 7x7 and 9x9 lattices, plain and noisy, with 3 and
/// 5 robots sharing 75% of the single-robot budget.
pub fn paper_suite(seed: u64) -> Vec<SuiteProblem> {
    let mut suite = Vec::new();
    for size in [5, 7, 9] {
        for noisy in [false, true] {
            for robots in [3, 5] {
                let grid = GridSpec::new(size, size);
                let grid = if noisy { grid.noisy(seed + size as u64) } else { grid };
                let kind = if noisy { "noisy" } else { "grid" };
                suite.push(SuiteProblem {
                    name: format!("{kind}-{size}x{size}-m{robots}"),
                    grid,
                    robots,
                    budget_fraction: 0.75,
                });
            }
        }
    }
    suite
}

/// Two 5x5 problems, plain and noisy, 3 robots at 75% budget.
pub fn desk_suite(seed: u64) -> Vec<SuiteProblem> {
    vec![
        SuiteProblem {
            name: "grid-5x5-m3".into(),
            grid: GridSpec::new(5, 5),
            robots: 3,
            budget_fraction: 0.75,
        },
        SuiteProblem {
            name: "noisy-5x5-m3".into(),
            grid: GridSpec::new(5, 5).noisy(seed),
            robots: 3,
            budget_fraction: 0.75,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunerConfig {
    pub population: usize,
    pub max_trials: usize,
    pub num_games: usize,
    pub speed_bonus: f64,
    pub parent_uniform_cx_prob: f64,
    pub parent_mutation_prob: f64,
    /// Glicko-2 system constant.
    pub tau: f64,
    pub suite: Vec<SuiteProblem>,
    pub method: GenerationMethod,
    pub speed_measure: SpeedMeasure,
    pub seed: u64,
}

impl Default for TunerConfig {
    fn default() -> Self {
        Self {
            population: 100,
            max_trials: 10,
            num_games: 10,
            speed_bonus: 0.1,
            parent_uniform_cx_prob: 0.5,
            parent_mutation_prob: 0.8,
            tau: 0.5,
            suite: paper_suite(0),
            method: GenerationMethod::NnRasp,
            speed_measure: SpeedMeasure::Evaluations,
            seed: 0,
        }
    }
}

impl TunerConfig {
    /// Small settings that finish in minutes on a desktop.
    pub fn desk_scale(seed: u64) -> Self {
        Self {
            population: 8,
            max_trials: 3,
            num_games: 2,
            suite: desk_suite(seed),
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(invalid_param(format!("population must be at least 2, got {}", self.population)));
        }
        if self.max_trials == 0 || self.num_games == 0 {
            return Err(invalid_param("max_trials and num_games must be positive"));
        }
        if self.suite.is_empty() {
            return Err(invalid_param("the problem suite is empty"));
        }
        for (name, p) in [
            ("parent_uniform_cx_prob", self.parent_uniform_cx_prob),
            ("parent_mutation_prob", self.parent_mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid_param(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.speed_bonus >= 0.0 && self.tau > 0.0) {
            return Err(invalid_param("speed_bonus must be nonnegative and tau positive"));
        }
        Ok(())
    }
}

/// Outcome of one GA run inside the tuner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub utility: f64,
    pub wall_time_s: f64,
    pub evaluations: u64,
}

impl GameRecord {
    fn failed() -> Self {
        Self { utility: 0.0, wall_time_s: f64::INFINITY, evaluations: u64::MAX }
    }

    fn speed(&self, measure: SpeedMeasure) -> f64 {
        match measure {
            SpeedMeasure::WallTime => self.wall_time_s,
            SpeedMeasure::Evaluations => self.evaluations as f64,
        }
    }
}

/// `records[config][problem][game]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub records: Vec<Vec<Vec<GameRecord>>>,
}

/// Runs every configuration on every problem `num_games` times.
///
/// Each run gets its own seed, drawn from `rng` in (config, problem, game)
/// order. A run that errors scores zero utility and the worst speed.
pub fn play_games<R: Rng + ?Sized>(
    configs: &[ParamChromosome],
    problems: &[PreparedProblem],
    num_games: usize,
    method: GenerationMethod,
    rng: &mut R,
) -> ScoreTable {
    let base = GaParams::tuned(method);
    let records = configs
        .iter()
        .map(|config| {
            problems
                .iter()
                .map(|problem| {
                    (0..num_games)
                        .map(|_| {
                            let params = config.apply(&base).with_seed(rng.gen());
                            match solve(&problem.instance, &problem.budgets, &params) {
                                Ok(report) => GameRecord {
                                    utility: report.solution.utility,
                                    wall_time_s: report.wall_time_s,
                                    evaluations: report.evaluations,
                                },
                                Err(_) => GameRecord::failed(),
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    ScoreTable { records }
}

/// Score of `a` against `b` in one cell: 1, 0.5 or 0 by utility, moved by
/// `bonus` towards the faster run, clamped to `[0, 1]`.
pub fn game_score(a: &GameRecord, b: &GameRecord, measure: SpeedMeasure, bonus: f64) -> f64 {
    let base = match a.utility.partial_cmp(&b.utility) {
        Some(Ordering::Greater) => 1.0,
        Some(Ordering::Less) => 0.0,
        _ => 0.5,
    };
    let adjust = match a.speed(measure).partial_cmp(&b.speed(measure)) {
        Some(Ordering::Less) => bonus,
        Some(Ordering::Greater) => -bonus,
        _ => 0.0,
    };
    (base + adjust).clamp(0.0, 1.0)
}

/// One Glicko-2 rating period over all pairwise games in `table`.
pub fn rate_configurations(
    table: &ScoreTable,
    states: &[Glicko2State],
    measure: SpeedMeasure,
    speed_bonus: f64,
    tau: f64,
) -> Vec<Glicko2State> {
    let n = table.records.len();
    assert_eq!(n, states.len(), "one rating state per configuration");
    (0..n)
        .map(|i| {
            let mut games = Vec::new();
            for j in (0..n).filter(|&j| j != i) {
                for (cells_i, cells_j) in table.records[i].iter().zip(&table.records[j]) {
                    for (a, b) in cells_i.iter().zip(cells_j) {
                        games.push(GameResult {
                            opponent_rating: states[j].rating,
                            opponent_deviation: states[j].deviation,
                            score: game_score(a, b, measure, speed_bonus),
                        });
                    }
                }
            }
            states[i].updated(&games, tau)
        })
        .collect()
}

/// Whether two rating intervals share a point.
pub fn intervals_overlap(a: &Glicko2State, b: &Glicko2State) -> bool {
    let (a_lo, a_hi) = a.interval();
    let (b_lo, b_hi) = b.interval();
    a_lo <= b_hi && b_lo <= a_hi
}

/// Indices sorted by rating, best first; ties keep index order.
pub fn ranking(states: &[Glicko2State]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by(|&a, &b| states[b].rating.total_cmp(&states[a].rating).then(a.cmp(&b)));
    order
}

/// The ten best configurations plus any whose interval overlaps the tenth
/// best's, at most half the population (and at least one), best first.
pub fn select_parents(states: &[Glicko2State]) -> Vec<usize> {
    let order = ranking(states);
    let cap = (states.len() / 2).max(1);
    let top = TOP_PARENTS.min(order.len());
    let mut parents: Vec<usize> = order[..top].to_vec();
    if let Some(&tenth) = parents.last() {
        parents.extend(
            order[top..]
                .iter()
                .copied()
                .filter(|&i| intervals_overlap(&states[i], &states[tenth])),
        );
    }
    parents.truncate(cap);
    parents
}

/// Parents followed by children bred from them, `size` configurations total.
pub fn next_generation<R: Rng + ?Sized>(
    parents: &[ParamChromosome],
    size: usize,
    uniform_cx_prob: f64,
    mutation_prob: f64,
    rng: &mut R,
) -> Vec<ParamChromosome> {
    assert!(!parents.is_empty(), "at least one parent is needed");
    let mut population: Vec<ParamChromosome> = parents.iter().take(size).cloned().collect();
    while population.len() < size {
        let a = parents.choose(rng).expect("non-empty");
        let b = parents.choose(rng).expect("non-empty");
        let mut child = a.clone();
        if rng.gen_bool(uniform_cx_prob) {
            let (la, lb) = (a.levels().expect("on grid"), b.levels().expect("on grid"));
            for (k, knob) in Knob::ALL.into_iter().enumerate() {
                child.set_level(knob, if rng.gen_bool(0.5) { la[k] } else { lb[k] });
            }
        }
        if rng.gen_bool(mutation_prob) {
            let knob = *Knob::ALL.choose(rng).expect("non-empty");
            child.set_level(knob, rng.gen_range(0..knob.levels()));
        }
        population.push(child);
    }
    population
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatedConfig {
    pub config: ParamChromosome,
    pub rating: Glicko2State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    /// The trial's population, best rated first.
    pub ratings: Vec<RatedConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub config: TunerConfig,
    pub trials: Vec<TrialSummary>,
    pub best: ParamChromosome,
    pub best_rating: Glicko2State,
    /// `best` applied to the shipped defaults of the tuned method.
    pub best_params: GaParams,
}

/// Runs the whole tuning loop and returns the best configuration of the
/// final trial.
pub fn tune(config: &TunerConfig) -> Result<TuneReport> {
    config.validate()?;
    let problems = config
        .suite
        .iter()
        .map(SuiteProblem::prepare)
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut population: Vec<ParamChromosome> =
        (0..config.population).map(|_| ParamChromosome::random(&mut rng)).collect();
    let mut states = vec![Glicko2State::default(); config.population];
    let mut trials = Vec::with_capacity(config.max_trials);

    for trial in 0..config.max_trials {
        let table = play_games(&population, &problems, config.num_games, config.method, &mut rng);
        states = rate_configurations(&table, &states, config.speed_measure, config.speed_bonus, config.tau);
        let order = ranking(&states);
        trials.push(TrialSummary {
            trial,
            ratings: order
                .iter()
                .map(|&i| RatedConfig { config: population[i].clone(), rating: states[i] })
                .collect(),
        });
        if trial + 1 == config.max_trials {
            break;
        }
        let parent_ids = select_parents(&states);
        let parents: Vec<ParamChromosome> = parent_ids.iter().map(|&i| population[i].clone()).collect();
        let parent_states: Vec<Glicko2State> = parent_ids.iter().map(|&i| states[i]).collect();
        population = next_generation(
            &parents,
            config.population,
            config.parent_uniform_cx_prob,
            config.parent_mutation_prob,
            &mut rng,
        );
        states = parent_states;
        states.resize(config.population, Glicko2State::default());
    }

    let winner = trials.last().expect("at least one trial").ratings[0].clone();
    Ok(TuneReport {
        config: config.clone(),
        best_params: winner.config.to_params(config.method),
        best: winner.config,
        best_rating: winner.rating,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(utility: f64, evaluations: u64) -> GameRecord {
        GameRecord { utility, wall_time_s: evaluations as f64, evaluations }
    }

    fn state(rating: f64, deviation: f64) -> Glicko2State {
        Glicko2State::new(rating, deviation, 0.06)
    }

    #[test]
    fn score_clamps_and_bonus() {
        let m = SpeedMeasure::Evaluations;
        assert_eq!(game_score(&record(5.0, 10), &record(4.0, 20), m, 0.1), 1.0);
        assert_eq!(game_score(&record(4.0, 20), &record(5.0, 10), m, 0.1), 0.0);
        assert!((game_score(&record(5.0, 10), &record(5.0, 20), m, 0.1) - 0.6).abs() < 1e-12);
        assert!((game_score(&record(5.0, 20), &record(5.0, 10), m, 0.1) - 0.4).abs() < 1e-12);
        assert_eq!(game_score(&record(5.0, 10), &record(5.0, 10), m, 0.1), 0.5);
        assert!((game_score(&record(4.0, 10), &record(5.0, 20), m, 0.1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn equal_ratings_cap_parents_at_half() {
        let states = vec![Glicko2State::default(); 100];
        assert_eq!(select_parents(&states).len(), 50);
        assert_eq!(select_parents(&states[..8]).len(), 4);
        assert_eq!(select_parents(&states[..1]).len(), 1);
    }

    #[test]
    fn separated_leaders_are_exactly_ten() {
        let states: Vec<Glicko2State> = (0..40)
            .map(|i| if i < 10 { state(2000.0 + i as f64, 30.0) } else { state(1000.0 + i as f64, 30.0) })
            .collect();
        let parents = select_parents(&states);
        assert_eq!(parents.len(), 10);
        assert!(parents.iter().all(|&i| i < 10));
        assert_eq!(parents[0], 9);
    }

    #[test]
    fn overlap_cluster_joins_the_leaders() {
        // leaders 2000, 1990, ..., 1910; then a cluster 1850..1815 and a tail far below
        let mut states: Vec<Glicko2State> = (0..10).map(|i| state(2000.0 - 10.0 * i as f64, 50.0)).collect();
        states.extend((0..8).map(|i| state(1850.0 - 5.0 * i as f64, 50.0)));
        states.extend((0..82).map(|i| state(1000.0 - i as f64, 50.0)));
        // tenth best 1910 spans [1810, 2010]; cluster members span up to 1950
        let parents = select_parents(&states);
        assert_eq!(parents.len(), 18);
        assert!((0..18).all(|i| parents.contains(&i)));
        assert!(!intervals_overlap(&states[18], &states[9]));
    }

    #[test]
    fn no_variation_means_clones() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let parents: Vec<ParamChromosome> = (0..3).map(|_| ParamChromosome::random(&mut rng)).collect();
        let next = next_generation(&parents, 20, 0.0, 0.0, &mut rng);
        assert_eq!(next.len(), 20);
        assert_eq!(&next[..3], &parents[..]);
        assert!(next.iter().all(|c| parents.contains(c)));
    }

    #[test]
    fn children_stay_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let parents: Vec<ParamChromosome> = (0..5).map(|_| ParamChromosome::random(&mut rng)).collect();
        let next = next_generation(&parents, 1005, 0.5, 0.8, &mut rng);
        assert!(next.iter().all(ParamChromosome::is_on_grid));
        let single = next_generation(&parents[..1], 200, 1.0, 0.0, &mut rng);
        assert!(single.iter().all(|c| c == &parents[0]));
    }

    fn tiny_problem() -> PreparedProblem {
        SuiteProblem { name: "g3".into(), grid: GridSpec::new(3, 3), robots: 2, budget_fraction: 0.75 }
            .prepare()
            .unwrap()
    }

    #[test]
    fn play_records_every_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let config = ParamChromosome::from_levels([0, 0, 0, 5, 5, 2]);
        let table = play_games(&[config], &[tiny_problem()], 10, GenerationMethod::NnRasp, &mut rng);
        assert_eq!(table.records.len(), 1);
        assert_eq!(table.records[0][0].len(), 10);
        assert!(table.records[0][0].iter().all(|r| r.utility > 0.0 && r.evaluations > 0));
    }

    #[test]
    fn dominant_configuration_rises() {
        let table = ScoreTable {
            records: vec![
                vec![vec![record(9.0, 10); 4]],
                vec![vec![record(5.0, 20); 4]],
            ],
        };
        let states = vec![Glicko2State::default(); 2];
        let next = rate_configurations(&table, &states, SpeedMeasure::Evaluations, 0.1, 0.5);
        assert!(next[0].rating > 1500.0 && next[1].rating < 1500.0);
        assert!((next[0].rating - 1500.0 + next[1].rating - 1500.0).abs() < 1e-6);
    }

    #[test]
    fn single_round_robin_returns_its_winner() {
        let config = TunerConfig {
            population: 2,
            max_trials: 1,
            num_games: 2,
            suite: vec![SuiteProblem { name: "g3".into(), grid: GridSpec::new(3, 3), robots: 2, budget_fraction: 0.75 }],
            seed: 3,
            ..TunerConfig::default()
        };
        let report = tune(&config).unwrap();
        assert_eq!(report.trials.len(), 1);
        let ratings = &report.trials[0].ratings;
        assert!(ratings[0].rating.rating >= ratings[1].rating.rating);
        assert_eq!(report.best, ratings[0].config);
        assert!(report.best.is_on_grid());
    }

    #[test]
    fn suites_have_expected_shape() {
        let suite = paper_suite(0);
        assert_eq!(suite.len(), 12);
        assert!(suite.iter().all(|p| p.budget_fraction == 0.75));
        assert_eq!(desk_suite(0).len(), 2);
        TunerConfig::default().validate().unwrap();
        TunerConfig::desk_scale(0).validate().unwrap();
    }
}
