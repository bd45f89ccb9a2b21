use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ga::{GaParams, GenerationMethod};

/// The GA parameters the tuner searches over, each on a fixed grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Knob {
    PopulationSize,
    MaxGenerations,
    TournamentSize,
    CxProbability,
    MutationProbability,
    EliteFraction,
}

impl Knob {
    pub const ALL: [Knob; 6] = [
        Knob::PopulationSize,
        Knob::MaxGenerations,
        Knob::TournamentSize,
        Knob::CxProbability,
        Knob::MutationProbability,
        Knob::EliteFraction,
    ];

    /// Number of grid points.
    pub fn levels(self) -> usize {
        match self {
            Knob::PopulationSize => 20,
            Knob::MaxGenerations => 10,
            Knob::TournamentSize => 8,
            Knob::CxProbability | Knob::MutationProbability => 10,
            Knob::EliteFraction => 20,
        }
    }

    /// Value of grid point `level`.
    pub fn value(self, level: usize) -> f64 {
        assert!(level < self.levels(), "{self:?} has no level {level}");
        let i = level as f64;
        match self {
            Knob::PopulationSize => 25.0 * (i + 1.0),
            Knob::MaxGenerations => 5.0 * (i + 1.0),
            Knob::TournamentSize => 3.0 + i,
            Knob::CxProbability | Knob::MutationProbability => i / 10.0,
            Knob::EliteFraction => (i + 1.0) / 100.0,
        }
    }

    /// Grid point holding `value`, if any.
    pub fn level_of(self, value: f64) -> Option<usize> {
        (0..self.levels()).find(|&l| (self.value(l) - value).abs() < 1e-9)
    }
}

/// A GA configuration on the tuning grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamChromosome {
    pub population_size: usize,
    pub max_generations: usize,
    pub tournament_size: usize,
    pub cx_probability: f64,
    pub mutation_probability: f64,
    pub elite_fraction: f64,
}

impl ParamChromosome {
    pub fn from_levels(levels: [usize; 6]) -> Self {
        let v = |k: usize| Knob::ALL[k].value(levels[k]);
        Self {
            population_size: v(0) as usize,
            max_generations: v(1) as usize,
            tournament_size: v(2) as usize,
            cx_probability: v(3),
            mutation_probability: v(4),
            elite_fraction: v(5),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut levels = [0; 6];
        for (slot, knob) in levels.iter_mut().zip(Knob::ALL) {
            *slot = rng.gen_range(0..knob.levels());
        }
        Self::from_levels(levels)
    }

    pub fn get(&self, knob: Knob) -> f64 {
        match knob {
            Knob::PopulationSize => self.population_size as f64,
            Knob::MaxGenerations => self.max_generations as f64,
            Knob::TournamentSize => self.tournament_size as f64,
            Knob::CxProbability => self.cx_probability,
            Knob::MutationProbability => self.mutation_probability,
            Knob::EliteFraction => self.elite_fraction,
        }
    }

    pub fn set_level(&mut self, knob: Knob, level: usize) {
        let value = knob.value(level);
        match knob {
            Knob::PopulationSize => self.population_size = value as usize,
            Knob::MaxGenerations => self.max_generations = value as usize,
            Knob::TournamentSize => self.tournament_size = value as usize,
            Knob::CxProbability => self.cx_probability = value,
            Knob::MutationProbability => self.mutation_probability = value,
            Knob::EliteFraction => self.elite_fraction = value,
        }
    }

    /// Grid levels, or `None` when some value is off the grid.
    pub fn levels(&self) -> Option<[usize; 6]> {
        let mut levels = [0; 6];
        for (slot, knob) in levels.iter_mut().zip(Knob::ALL) {
            *slot = knob.level_of(self.get(knob))?;
        }
        Some(levels)
    }

    pub fn is_on_grid(&self) -> bool {
        self.levels().is_some()
    }

    /// Copies the tuned knobs over `base`, keeping its other settings.
    pub fn apply(&self, base: &GaParams) -> GaParams {
        GaParams {
            population_size: self.population_size,
            max_generations: self.max_generations,
            tournament_size: self.tournament_size,
            cx_probability: self.cx_probability,
            mutation_probability: self.mutation_probability,
            elite_fraction: self.elite_fraction,
            ..base.clone()
        }
    }

    pub fn to_params(&self, method: GenerationMethod) -> GaParams {
        self.apply(&GaParams::tuned(method))
    }
}

impl From<&GaParams> for ParamChromosome {
    fn from(p: &GaParams) -> Self {
        Self {
            population_size: p.population_size,
            max_generations: p.max_generations,
            tournament_size: p.tournament_size,
            cx_probability: p.cx_probability,
            mutation_probability: p.mutation_probability,
            elite_fraction: p.elite_fraction,
        }
    }
}
