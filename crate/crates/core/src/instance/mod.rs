//! Problem instances: vertices, travel costs, correlation structure and
//! per-robot budgets.

mod budget;
mod correlation;
mod grid;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, invalid_param, Result};

pub use budget::{budget_for_team, max_single_robot_budget, BudgetSpec};
pub use correlation::{build_correlation, CorrelationGraph};
pub use grid::{build_grid_instance, GridSpec, DEFAULT_KERNEL_LENGTH, DEFAULT_NOISE_FRACTION};

/// Tolerance used when checking symmetry and the triangle inequality.
const METRIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub reward: f64,
    pub sensing_cost: f64,
}

impl Vertex {
    pub fn distance_to(&self, other: &Vertex) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Which distance enters the correlation kernel.
///
/// `Printed` evaluates `exp(-d / (2 l^2))` with the plain Euclidean distance,
/// `Squared` is the textbook squared-exponential `exp(-d^2 / (2 l^2))`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelForm {
    #[default]
    Printed,
    Squared,
}

impl KernelForm {
    pub fn weight(self, distance: f64, length: f64) -> Result<f64> {
        if !length.is_finite() || length <= 0.0 {
            return Err(invalid_param(format!(
                "kernel length must be positive and finite, got {length}"
            )));
        }
        if !distance.is_finite() || distance < 0.0 {
            return Err(invalid_param(format!(
                "kernel distance must be nonnegative and finite, got {distance}"
            )));
        }
        let d = match self {
            KernelForm::Printed => distance,
            KernelForm::Squared => distance * distance,
        };
        Ok((-d / (2.0 * length * length)).exp())
    }
}

/// Correlation kernel between two points `distance` apart.
pub fn kernel_weight(distance: f64, length: f64) -> Result<f64> {
    KernelForm::Printed.weight(distance, length)
}

/// Parameters controlling how the correlation graph is derived from geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSettings {
    pub kernel_length: f64,
    pub neighbour_radius: f64,
    pub kernel_form: KernelForm,
}

/// A correlated team orienteering instance.
///
/// Vertex ids are their indices. Every vertex other than the start and the
/// finish is a sampling vertex.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    vertices: Vec<Vertex>,
    costs: Vec<f64>,
    explicit_costs: bool,
    correlation: CorrelationGraph,
    start_id: usize,
    finish_id: usize,
    settings: CorrelationSettings,
    sampling: Vec<usize>,
    metric: bool,
}

impl ProblemInstance {
    /// Builds an instance whose travel costs are Euclidean distances.
    pub fn euclidean(
        vertices: Vec<Vertex>,
        start_id: usize,
        finish_id: usize,
        settings: CorrelationSettings,
    ) -> Result<Self> {
        let n = vertices.len();
        let mut costs = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = vertices[i].distance_to(&vertices[j]);
                costs[i * n + j] = d;
                costs[j * n + i] = d;
            }
        }
        Self::build(vertices, costs, false, start_id, finish_id, settings)
    }

    /// Builds an instance with a caller-supplied travel-cost matrix.
    pub fn with_travel_costs(
        vertices: Vec<Vertex>,
        travel_cost: &[Vec<f64>],
        start_id: usize,
        finish_id: usize,
        settings: CorrelationSettings,
    ) -> Result<Self> {
        let n = vertices.len();
        if travel_cost.len() != n || travel_cost.iter().any(|row| row.len() != n) {
            return Err(invalid_input(format!(
                "travel_cost must be a {n}x{n} matrix"
            )));
        }
        let costs = travel_cost.iter().flatten().copied().collect();
        Self::build(vertices, costs, true, start_id, finish_id, settings)
    }

    fn build(
        vertices: Vec<Vertex>,
        costs: Vec<f64>,
        explicit_costs: bool,
        start_id: usize,
        finish_id: usize,
        settings: CorrelationSettings,
    ) -> Result<Self> {
        let n = vertices.len();
        for (idx, v) in vertices.iter().enumerate() {
            if v.id != idx {
                return Err(invalid_input(format!(
                    "vertex ids must be 0..{n} in order; found id {} at position {idx}",
                    v.id
                )));
            }
            if !(v.x.is_finite() && v.y.is_finite()) {
                return Err(invalid_input(format!("vertex {idx} has non-finite position")));
            }
            if !(v.reward.is_finite() && v.reward >= 0.0) {
                return Err(invalid_input(format!("vertex {idx} has invalid reward {}", v.reward)));
            }
            if !(v.sensing_cost.is_finite() && v.sensing_cost >= 0.0) {
                return Err(invalid_input(format!(
                    "vertex {idx} has invalid sensing cost {}",
                    v.sensing_cost
                )));
            }
        }
        for (name, id) in [("start_id", start_id), ("finish_id", finish_id)] {
            if id >= n {
                return Err(invalid_input(format!("{name} {id} is not a vertex id")));
            }
            if vertices[id].sensing_cost != 0.0 {
                return Err(invalid_input(format!(
                    "{name} {id} must have zero sensing cost"
                )));
            }
        }
        for i in 0..n {
            if costs[i * n + i] != 0.0 {
                return Err(invalid_input(format!("travel_cost[{i}][{i}] must be zero")));
            }
            for j in 0..n {
                let c = costs[i * n + j];
                if !(c.is_finite() && c >= 0.0) {
                    return Err(invalid_input(format!(
                        "travel_cost[{i}][{j}] = {c} is not a nonnegative number"
                    )));
                }
                let back = costs[j * n + i];
                if (c - back).abs() > METRIC_TOLERANCE * c.abs().max(1.0) {
                    return Err(invalid_input(format!(
                        "travel_cost is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }

        let correlation = build_correlation(
            &vertices,
            start_id,
            finish_id,
            settings.kernel_length,
            settings.neighbour_radius,
            settings.kernel_form,
        )?;
        let sampling = (0..n).filter(|&i| i != start_id && i != finish_id).collect();
        let metric = satisfies_triangle_inequality(&costs, n);
        Ok(Self {
            vertices,
            costs,
            explicit_costs,
            correlation,
            start_id,
            finish_id,
            settings,
            sampling,
            metric,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &Vertex {
        &self.vertices[id]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Ids of all vertices other than the start and the finish, ascending.
    pub fn sampling_ids(&self) -> &[usize] {
        &self.sampling
    }

    pub fn start_id(&self) -> usize {
        self.start_id
    }

    pub fn finish_id(&self) -> usize {
        self.finish_id
    }

    pub fn is_depot(&self, id: usize) -> bool {
        id == self.start_id || id == self.finish_id
    }

    #[inline]
    pub fn travel_cost(&self, from: usize, to: usize) -> f64 {
        self.costs[from * self.vertices.len() + to]
    }

    #[inline]
    pub fn reward(&self, id: usize) -> f64 {
        self.vertices[id].reward
    }

    #[inline]
    pub fn sensing_cost(&self, id: usize) -> f64 {
        self.vertices[id].sensing_cost
    }

    /// Cost of the leg `from -> to`, including the sensing cost paid at `from`.
    #[inline]
    pub fn leg_cost(&self, from: usize, to: usize) -> f64 {
        self.travel_cost(from, to) + self.vertices[from].sensing_cost
    }

    pub fn correlation(&self) -> &CorrelationGraph {
        &self.correlation
    }

    pub fn kernel_length(&self) -> f64 {
        self.settings.kernel_length
    }

    pub fn neighbour_radius(&self) -> f64 {
        self.settings.neighbour_radius
    }

    pub fn kernel_form(&self) -> KernelForm {
        self.settings.kernel_form
    }

    pub fn settings(&self) -> CorrelationSettings {
        self.settings
    }

    /// Whether the travel costs satisfy the triangle inequality. Euclidean
    /// instances always do; user matrices are checked on construction.
    pub fn is_metric(&self) -> bool {
        self.metric
    }

    pub fn total_reward(&self) -> f64 {
        self.sampling.iter().map(|&i| self.vertices[i].reward).sum()
    }

    pub fn to_file(&self) -> InstanceFile {
        let n = self.vertices.len();
        InstanceFile {
            vertices: self.vertices.clone(),
            start_id: self.start_id,
            finish_id: self.finish_id,
            kernel_length: self.settings.kernel_length,
            neighbour_radius: self.settings.neighbour_radius,
            kernel_form: self.settings.kernel_form,
            travel_cost: self
                .explicit_costs
                .then(|| self.costs.chunks(n).map(<[f64]>::to_vec).collect()),
        }
    }

    pub fn from_file(file: InstanceFile) -> Result<Self> {
        let settings = CorrelationSettings {
            kernel_length: file.kernel_length,
            neighbour_radius: file.neighbour_radius,
            kernel_form: file.kernel_form,
        };
        match file.travel_cost {
            Some(costs) => Self::with_travel_costs(
                file.vertices,
                &costs,
                file.start_id,
                file.finish_id,
                settings,
            ),
            None => Self::euclidean(file.vertices, file.start_id, file.finish_id, settings),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

/// On-disk form of a [`ProblemInstance`].
///
/// `travel_cost` is only present for instances built from an explicit
/// matrix; Euclidean costs are recomputed from the coordinates on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub vertices: Vec<Vertex>,
    pub start_id: usize,
    pub finish_id: usize,
    pub kernel_length: f64,
    pub neighbour_radius: f64,
    #[serde(default)]
    pub kernel_form: KernelForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub travel_cost: Option<Vec<Vec<f64>>>,
}

fn satisfies_triangle_inequality(costs: &[f64], n: usize) -> bool {
    for i in 0..n {
        for j in 0..n {
            let direct = costs[i * n + j];
            for k in 0..n {
                let via = costs[i * n + k] + costs[k * n + j];
                if direct > via + METRIC_TOLERANCE * direct.max(1.0) {
                    return false;
                }
            }
        }
    }
    true
}
