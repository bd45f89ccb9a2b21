use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Result};

use super::{CorrelationSettings, KernelForm, ProblemInstance, Vertex};

/// Noise amplitude of a "noisy grid", as a fraction of the lattice spacing.
pub const DEFAULT_NOISE_FRACTION: f64 = 0.3;
/// Kernel length used when none is given.
pub const DEFAULT_KERNEL_LENGTH: f64 = 0.5;
/// Neighbour radius as a multiple of the spacing (8-connected lattice).
const DEFAULT_RADIUS_FACTOR: f64 = 1.5;

/// Description of a (possibly noisy) lattice instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    /// Half-width of the uniform per-axis perturbation.
    pub noise_amplitude: f64,
    pub kernel_length: f64,
    /// Defaults to 1.5 x spacing.
    pub neighbour_radius: Option<f64>,
    pub kernel_form: KernelForm,
    pub seed: u64,
    /// Defaults to `(-spacing, (rows - 1) * spacing / 2)`.
    pub start: Option<(f64, f64)>,
    /// Defaults to the start position.
    pub finish: Option<(f64, f64)>,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            spacing: 1.0,
            noise_amplitude: 0.0,
            kernel_length: DEFAULT_KERNEL_LENGTH,
            neighbour_radius: None,
            kernel_form: KernelForm::Printed,
            seed: 0,
            start: None,
            finish: None,
        }
    }

    /// The same lattice with the default noisy-grid perturbation.
    pub fn noisy(mut self, seed: u64) -> Self {
        self.noise_amplitude = DEFAULT_NOISE_FRACTION * self.spacing;
        self.seed = seed;
        self
    }
}

/// Generates `rows * cols` unit-reward sampling vertices on a lattice, then a
/// start vertex and a finish vertex (ids `rows * cols` and `rows * cols + 1`).
pub fn build_grid_instance(spec: &GridSpec) -> Result<ProblemInstance> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(invalid_param(format!(
            "grid needs at least one row and column, got {}x{}",
            spec.rows, spec.cols
        )));
    }
    if !(spec.spacing.is_finite() && spec.spacing > 0.0) {
        return Err(invalid_param(format!("spacing must be positive, got {}", spec.spacing)));
    }
    if !(spec.noise_amplitude.is_finite() && spec.noise_amplitude >= 0.0) {
        return Err(invalid_param(format!(
            "noise amplitude must be nonnegative, got {}",
            spec.noise_amplitude
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let amp = spec.noise_amplitude;
    let mut vertices = Vec::with_capacity(spec.rows * spec.cols + 2);
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            let mut x = col as f64 * spec.spacing;
            let mut y = row as f64 * spec.spacing;
            if amp > 0.0 {
                x += rng.gen_range(-amp..=amp);
                y += rng.gen_range(-amp..=amp);
            }
            vertices.push(Vertex { id: vertices.len(), x, y, reward: 1.0, sensing_cost: 0.0 });
        }
    }

    let start = spec
        .start
        .unwrap_or((-spec.spacing, (spec.rows - 1) as f64 * spec.spacing / 2.0));
    let finish = spec.finish.unwrap_or(start);
    let start_id = vertices.len();
    let finish_id = start_id + 1;
    for (id, (x, y)) in [(start_id, start), (finish_id, finish)] {
        vertices.push(Vertex { id, x, y, reward: 0.0, sensing_cost: 0.0 });
    }

    let settings = CorrelationSettings {
        kernel_length: spec.kernel_length,
        neighbour_radius: spec
            .neighbour_radius
            .unwrap_or(DEFAULT_RADIUS_FACTOR * spec.spacing),
        kernel_form: spec.kernel_form,
    };
    ProblemInstance::euclidean(vertices, start_id, finish_id, settings)
}
