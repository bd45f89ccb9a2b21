use ctop::solution::utility_of_visited;
use ctop::{
    budget_for_team, build_grid_instance, kernel_weight, max_single_robot_budget, path_cost,
    two_opt, GridSpec, KernelForm,
};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn grid(rows: usize, cols: usize, noise_seed: Option<u64>) -> ctop::ProblemInstance {
    let spec = GridSpec::new(rows, cols);
    let spec = match noise_seed {
        Some(seed) => spec.noisy(seed),
        None => spec,
    };
    build_grid_instance(&spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kernel_decreases_with_distance(d1 in 0.0f64..20.0, gap in 0.0f64..20.0, l in 0.05f64..5.0) {
        for form in [KernelForm::Printed, KernelForm::Squared] {
            let near = form.weight(d1, l).unwrap();
            let far = form.weight(d1 + gap, l).unwrap();
            prop_assert!(far <= near);
            prop_assert!(near <= 1.0 && far >= 0.0);
        }
        prop_assert_eq!(kernel_weight(0.0, l).unwrap(), 1.0);
    }

    #[test]
    fn correlation_membership_is_symmetric(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let inst = grid(rows, cols, Some(seed));
        let corr = inst.correlation();
        for &i in inst.sampling_ids() {
            prop_assert!(!corr.neighbours(i).contains(&i));
            for &j in corr.neighbours(i) {
                prop_assert!(corr.neighbours(j).contains(&i));
                prop_assert!(!inst.is_depot(j));
            }
        }
    }

    #[test]
    fn budget_scales_linearly(rows in 1usize..7, cols in 1usize..7, m in 1usize..6, f in 0.01f64..1.0) {
        let inst = grid(rows, cols, None);
        let full = max_single_robot_budget(&inst);
        let spec = budget_for_team(&inst, m, f).unwrap();
        prop_assert_eq!(spec.num_robots(), m);
        for &b in spec.budgets() {
            prop_assert!((b - f * full / m as f64).abs() <= 1e-9 * full.max(1.0));
        }
    }

    #[test]
    fn two_opt_is_idempotent_and_never_worse(
        seed in any::<u64>(),
        picks in subsequence((0usize..25).collect::<Vec<_>>(), 0..25).prop_shuffle(),
    ) {
        let inst = grid(5, 5, Some(seed));
        let mut path = vec![inst.start_id()];
        path.extend(picks);
        path.push(inst.finish_id());
        let once = two_opt(&path, &inst);
        let twice = two_opt(&once, &inst);
        prop_assert_eq!(&once, &twice);
        prop_assert!(path_cost(&once, &inst).unwrap() <= path_cost(&path, &inst).unwrap() + 1e-9);
        let mut a = once.clone();
        let mut b = path.clone();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn utility_grows_with_visits(seed in any::<u64>(), mask in any::<u64>(), extra in 0usize..16) {
        let inst = grid(4, 4, Some(seed));
        let mut visited = vec![false; inst.num_vertices()];
        for &v in inst.sampling_ids() {
            visited[v] = mask & (1 << v) != 0;
        }
        let before = utility_of_visited(&visited, &inst);
        visited[extra] = true;
        prop_assert!(utility_of_visited(&visited, &inst) >= before - 1e-12);
    }

    #[test]
    fn visiting_everything_collects_all_rewards(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let inst = grid(rows, cols, Some(seed));
        let mut visited = vec![false; inst.num_vertices()];
        for &v in inst.sampling_ids() {
            visited[v] = true;
        }
        let u = utility_of_visited(&visited, &inst);
        prop_assert!((u - inst.total_reward()).abs() <= 1e-9);
    }
}
