use crate::error::{invalid_param, Result};

use super::{KernelForm, Vertex};

/// Per-vertex neighbourhoods and correlation weights.
///
/// `weight(i, j)` is the share of `j`'s reward that a visit to `i` collects
/// while `j` itself stays unvisited. Weights into any single target `j` sum
/// to at most one, so an unvisited vertex never yields more than its reward.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGraph {
    neighbours: Vec<Vec<usize>>,
    weights: Vec<Vec<f64>>,
    // incoming[j][k] = w(neighbours[j][k], j)
    incoming: Vec<Vec<f64>>,
}

impl CorrelationGraph {
    /// Neighbour ids of `i`, ascending.
    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.neighbours[i]
    }

    /// Weights aligned with [`neighbours`](Self::neighbours).
    pub fn weights(&self, i: usize) -> &[f64] {
        &self.weights[i]
    }

    /// `(j, w_ij)` pairs for every neighbour `j` of `i`.
    pub fn edges(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbours[i]
            .iter()
            .copied()
            .zip(self.weights[i].iter().copied())
    }

    /// `(i, w_ij)` pairs: how much each neighbour `i` of `j` collects from `j`.
    pub fn incoming(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbours[j]
            .iter()
            .copied()
            .zip(self.incoming[j].iter().copied())
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.neighbours[i]
            .binary_search(&j)
            .ok()
            .map(|k| self.weights[i][k])
    }

    pub fn num_vertices(&self) -> usize {
        self.neighbours.len()
    }

    pub fn num_edges(&self) -> usize {
        self.neighbours.iter().map(Vec::len).sum()
    }
}

/// Builds the correlation graph over the sampling vertices.
///
/// Neighbourhoods hold every other sampling vertex within `neighbour_radius`.
/// Raw weights are kernel values; each target column `j` is then divided by
/// `max(1, sum_i raw_ij)`.
pub fn build_correlation(
    vertices: &[Vertex],
    start_id: usize,
    finish_id: usize,
    kernel_length: f64,
    neighbour_radius: f64,
    form: KernelForm,
) -> Result<CorrelationGraph> {
    if !(neighbour_radius.is_finite() && neighbour_radius > 0.0) {
        return Err(invalid_param(format!(
            "neighbour radius must be positive and finite, got {neighbour_radius}"
        )));
    }
    // validates the kernel length even when no pair falls within the radius
    form.weight(0.0, kernel_length)?;

    let n = vertices.len();
    let is_sampling = |i: usize| i != start_id && i != finish_id;
    let mut neighbours = vec![Vec::new(); n];
    let mut weights = vec![Vec::new(); n];
    for i in (0..n).filter(|&i| is_sampling(i)) {
        for j in (0..n).filter(|&j| j != i && is_sampling(j)) {
            let d = vertices[i].distance_to(&vertices[j]);
            if d <= neighbour_radius {
                neighbours[i].push(j);
                weights[i].push(form.weight(d, kernel_length)?);
            }
        }
    }

    let mut column_sum = vec![0.0; n];
    for i in 0..n {
        for (&j, &w) in neighbours[i].iter().zip(&weights[i]) {
            column_sum[j] += w;
        }
    }
    for i in 0..n {
        for (&j, w) in neighbours[i].iter().zip(weights[i].iter_mut()) {
            *w /= column_sum[j].max(1.0);
        }
    }
    let incoming = (0..n)
        .map(|j| {
            neighbours[j]
                .iter()
                .map(|&i| {
                    let k = neighbours[i].binary_search(&j).expect("membership is symmetric");
                    weights[i][k]
                })
                .collect()
        })
        .collect();
    Ok(CorrelationGraph { neighbours, weights, incoming })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: usize, cols: usize) -> Vec<Vertex> {
        let mut vs = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                vs.push(Vertex {
                    id: vs.len(),
                    x: c as f64,
                    y: r as f64,
                    reward: 1.0,
                    sensing_cost: 0.0,
                });
            }
        }
        let depot = vs.len();
        vs.push(Vertex { id: depot, x: -1.0, y: 1.0, reward: 0.0, sensing_cost: 0.0 });
        vs
    }

    #[test]
    fn lattice_neighbour_counts() {
        let vs = grid(3, 3);
        let g = build_correlation(&vs, 9, 9, 1.0, 1.5, KernelForm::Printed).unwrap();
        assert_eq!(g.neighbours(4).len(), 8);
        for corner in [0, 2, 6, 8] {
            assert_eq!(g.neighbours(corner).len(), 3);
        }
        assert!(g.neighbours(9).is_empty());
    }

    #[test]
    fn single_vertex_has_no_neighbours() {
        let vs = grid(1, 1);
        let g = build_correlation(&vs, 1, 1, 1.0, 1.5, KernelForm::Printed).unwrap();
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn two_vertex_weights_are_unnormalized() {
        let vs = vec![
            Vertex { id: 0, x: 0.0, y: 0.0, reward: 1.0, sensing_cost: 0.0 },
            Vertex { id: 1, x: 1.0, y: 0.0, reward: 1.0, sensing_cost: 0.0 },
            Vertex { id: 2, x: -5.0, y: 0.0, reward: 0.0, sensing_cost: 0.0 },
        ];
        let g = build_correlation(&vs, 2, 2, 1.0, 1.5, KernelForm::Printed).unwrap();
        // exp(-1 / 2), hand-evaluated
        let expected = 0.606_530_659_712_633_4;
        assert!((g.weight(0, 1).unwrap() - expected).abs() < 1e-15);
        assert!((g.weight(1, 0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn columns_are_capped_at_one() {
        let vs = grid(5, 5);
        let g = build_correlation(&vs, 25, 25, 2.0, 1.5, KernelForm::Printed).unwrap();
        let mut col = vec![0.0; vs.len()];
        for i in 0..vs.len() {
            for (j, w) in g.edges(i) {
                assert!((0.0..=1.0).contains(&w));
                col[j] += w;
            }
        }
        assert!(col.iter().all(|&s| s <= 1.0 + 1e-12));
        // the centre column is saturated with this long kernel
        assert!((col[12] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let vs = grid(2, 2);
        assert!(build_correlation(&vs, 4, 4, 1.0, 0.0, KernelForm::Printed).is_err());
    }
}
