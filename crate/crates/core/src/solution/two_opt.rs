use crate::instance::ProblemInstance;

/// A reversal must save more than this to count as an improvement.
pub const IMPROVEMENT_EPS: f64 = 1e-9;

/// Returns a 2-opt local optimum of `path` with the same endpoints and
/// vertex set.
pub fn two_opt(path: &[usize], instance: &ProblemInstance) -> Vec<usize> {
    let mut out = path.to_vec();
    two_opt_in_place(&mut out, instance);
    out
}

/// First-improvement 2-opt over interior segments, scanning `(a, b)` in
/// lexicographic order and restarting after every accepted reversal.
/// Returns the number of reversals applied.
///
/// Reversing `path[a..=b]` keeps the set of departure vertices, so sensing
/// costs cancel and only the two boundary legs change.
pub fn two_opt_in_place(path: &mut [usize], instance: &ProblemInstance) -> usize {
    let len = path.len();
    if len < 4 {
        return 0;
    }
    let c = |i: usize, j: usize| instance.travel_cost(i, j);
    let mut moves = 0;
    'scan: loop {
        for a in 1..len - 2 {
            let before = path[a - 1];
            let first = path[a];
            let removed_head = c(before, first);
            for b in (a + 1)..len - 1 {
                let last = path[b];
                let after = path[b + 1];
                let delta = c(before, last) + c(first, after) - removed_head - c(last, after);
                if delta < -IMPROVEMENT_EPS {
                    path[a..=b].reverse();
                    moves += 1;
                    continue 'scan;
                }
            }
        }
        return moves;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CorrelationSettings, KernelForm, Vertex};
    use crate::solution::path_cost;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(points: &[(f64, f64)]) -> ProblemInstance {
        let vs = points
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| Vertex { id, x, y, reward: 1.0, sensing_cost: 0.1 * id as f64 })
            .collect();
        let settings = CorrelationSettings {
            kernel_length: 1.0,
            neighbour_radius: 1.5,
            kernel_form: KernelForm::Printed,
        };
        // first two points are the depots
        let mut inst_vs: Vec<Vertex> = vs;
        inst_vs[0].sensing_cost = 0.0;
        inst_vs[1].sensing_cost = 0.0;
        ProblemInstance::euclidean(inst_vs, 0, 1, settings).unwrap()
    }

    fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn short_paths_are_untouched() {
        let inst = instance(&[(0.0, 0.0), (1.0, 0.0), (0.5, 3.0)]);
        assert_eq!(two_opt(&[0, 1], &inst), vec![0, 1]);
        assert_eq!(two_opt(&[0, 2, 1], &inst), vec![0, 2, 1]);
    }

    #[test]
    fn uncrosses_unit_square() {
        // depots left of the square; corners 2..=5
        let inst = instance(&[
            (-1.0, 0.5),
            (-1.0, 0.5),
            (0.0, 0.0),
            (1.0, 0.0),
            (0.0, 1.0),
            (1.0, 1.0),
        ]);
        let crossing = vec![0, 2, 5, 3, 4, 1];
        let out = two_opt(&crossing, &inst);
        let got = path_cost(&out, &inst).unwrap();
        let best = permutations(&[2, 3, 4, 5])
            .into_iter()
            .map(|p| {
                let full: Vec<usize> = [0].into_iter().chain(p).chain([1]).collect();
                path_cost(&full, &inst).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((got - best).abs() < 1e-12, "{got} vs optimum {best}");
        assert!(got < path_cost(&crossing, &inst).unwrap());
    }

    #[test]
    fn random_paths_become_reversal_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let pts: Vec<(f64, f64)> = (0..9)
                .map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
                .collect();
            let inst = instance(&pts);
            let mut interior: Vec<usize> = (2..9).collect();
            interior.shuffle(&mut rng);
            let path: Vec<usize> = [0].into_iter().chain(interior).chain([1]).collect();
            let out = two_opt(&path, &inst);
            let out_cost = path_cost(&out, &inst).unwrap();
            assert!(out_cost <= path_cost(&path, &inst).unwrap() + 1e-12);
            assert_eq!(out[0], 0);
            assert_eq!(out[out.len() - 1], 1);
            // exhaustive reversal scan, priced by full re-summation
            for a in 1..out.len() - 2 {
                for b in a + 1..out.len() - 1 {
                    let mut alt = out.clone();
                    alt[a..=b].reverse();
                    assert!(path_cost(&alt, &inst).unwrap() >= out_cost - 1e-9);
                }
            }
        }
    }
}
