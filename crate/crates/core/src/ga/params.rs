use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};

/// How initial genes are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GenerationMethod {
    #[serde(rename = "random", alias = "Random")]
    Random,
    #[serde(rename = "nnrasp", alias = "NNRASP", alias = "NnRasp")]
    NnRasp,
}

impl GenerationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            GenerationMethod::Random => "random",
            GenerationMethod::NnRasp => "nnrasp",
        }
    }
}

impl fmt::Display for GenerationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenerationMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "random" | "ga-random" => Ok(Self::Random),
            "nnrasp" | "nn-rasp" | "ga-nnrasp" => Ok(Self::NnRasp),
            other => Err(format!("unknown generation method `{other}` (expected random or nnrasp)")),
        }
    }
}

/// Knobs of the genetic algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population_size: usize,
    pub max_generations: usize,
    pub tournament_size: usize,
    pub cx_probability: f64,
    pub mutation_probability: f64,
    pub elite_fraction: f64,
    pub num_mutations: usize,
    pub add_probability: f64,
    /// Stop after this many generations without a utility improvement;
    /// zero disables early stopping.
    pub stall_generations: usize,
    pub generation_method: GenerationMethod,
    #[serde(default)]
    pub seed: u64,
}

pub const DEFAULT_NUM_MUTATIONS: usize = 10;
pub const DEFAULT_ADD_PROBABILITY: f64 = 0.9;
pub const DEFAULT_STALL_GENERATIONS: usize = 10;

impl GaParams {
    /// Tuned configuration for the given seeding method.
    pub fn tuned(method: GenerationMethod) -> Self {
        let (population_size, max_generations, tournament_size, cx, mutation, elite) = match method {
            GenerationMethod::Random => (300, 40, 6, 0.7, 0.6, 0.19),
            GenerationMethod::NnRasp => (250, 50, 5, 0.9, 0.7, 0.03),
        };
        Self {
            population_size,
            max_generations,
            tournament_size,
            cx_probability: cx,
            mutation_probability: mutation,
            elite_fraction: elite,
            num_mutations: DEFAULT_NUM_MUTATIONS,
            add_probability: DEFAULT_ADD_PROBABILITY,
            stall_generations: DEFAULT_STALL_GENERATIONS,
            generation_method: method,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(invalid_param(format!(
                "population_size must be at least 2, got {}",
                self.population_size
            )));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(invalid_param(format!(
                "tournament_size must lie in 1..={}, got {}",
                self.population_size, self.tournament_size
            )));
        }
        for (name, p) in [
            ("cx_probability", self.cx_probability),
            ("mutation_probability", self.mutation_probability),
            ("elite_fraction", self.elite_fraction),
            ("add_probability", self.add_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid_param(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    /// Number of chromosomes copied unchanged into each new generation.
    pub fn elite_count(&self) -> usize {
        let exact = self.elite_fraction * self.population_size as f64;
        ((exact - 1e-9).ceil().max(0.0) as usize).min(self.population_size)
    }
}

impl Default for GaParams {
    fn default() -> Self {
        Self::tuned(GenerationMethod::NnRasp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuned_defaults() {
        let r = GaParams::tuned(GenerationMethod::Random);
        assert_eq!((r.population_size, r.max_generations, r.tournament_size), (300, 40, 6));
        assert_eq!((r.cx_probability, r.mutation_probability, r.elite_fraction), (0.7, 0.6, 0.19));
        let n = GaParams::tuned(GenerationMethod::NnRasp);
        assert_eq!((n.population_size, n.max_generations, n.tournament_size), (250, 50, 5));
        assert_eq!((n.cx_probability, n.mutation_probability, n.elite_fraction), (0.9, 0.7, 0.03));
        for p in [r, n] {
            assert_eq!(p.num_mutations, 10);
            assert_eq!(p.add_probability, 0.9);
            assert_eq!(p.stall_generations, 10);
            p.validate().unwrap();
        }
    }

    #[test]
    fn elite_counts() {
        assert_eq!(GaParams::tuned(GenerationMethod::Random).elite_count(), 57);
        assert_eq!(GaParams::tuned(GenerationMethod::NnRasp).elite_count(), 8);
        let mut p = GaParams::default();
        p.elite_fraction = 1.0;
        assert_eq!(p.elite_count(), p.population_size);
        p.elite_fraction = 0.0;
        assert_eq!(p.elite_count(), 0);
    }

    #[test]
    fn validation_rejects_bad_knobs() {
        let mut p = GaParams::default();
        p.population_size = 1;
        assert!(p.validate().is_err());
        let mut p = GaParams::default();
        p.tournament_size = p.population_size + 1;
        assert!(p.validate().is_err());
        let mut p = GaParams::default();
        p.cx_probability = 1.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn json_uses_field_names() {
        let p = GaParams::tuned(GenerationMethod::Random).with_seed(9);
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"population_size\":300"));
        assert!(json.contains("\"generation_method\":\"random\""));
        let back: GaParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        let legacy = json.replace("\"random\"", "\"Random\"");
        assert_eq!(serde_json::from_str::<GaParams>(&legacy).unwrap(), p);
    }

    #[test]
    fn method_names_parse() {
        assert_eq!("ga-nnrasp".parse::<GenerationMethod>().unwrap(), GenerationMethod::NnRasp);
        assert_eq!("Random".parse::<GenerationMethod>().unwrap(), GenerationMethod::Random);
        assert!("greedy".parse::<GenerationMethod>().is_err());
    }
}
