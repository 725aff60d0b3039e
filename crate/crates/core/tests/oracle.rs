use num_complex::Complex64;
use proptest::prelude::*;

use ris_opt_core::constrained::solve_per_element_caps;
use ris_opt_core::oracle::{brute_force_optimum, snr_ordering_check, OracleConstraint, OracleResolution};
use ris_opt_core::{solve, AmplitudeProblem, CapVector, NormalizedScenario};

fn problem(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = AmplitudeProblem> {
    n.prop_flat_map(|n| {
        (
            prop_oneof![Just(0.0), Just(0.1), Just(1.0), Just(10.0)],
            prop::collection::vec((0.05..2.0f64, 0.05..2.0f64, 0.1..3.0f64), n),
        )
    })
    .prop_map(|(h_d, c)| {
        AmplitudeProblem::new(
            h_d,
            c.iter().map(|(a, b, _)| a * b).collect(),
            c.iter().map(|(_, b, _)| b * b).collect(),
            c.iter().map(|(_, _, g)| *g).collect(),
            1.0,
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn grid_certifies_small_instances(problem in problem(1..=2)) {
        let solver = solve(&problem).unwrap().objective;
        let oracle = brute_force_optimum(&problem, &OracleConstraint::Ellipsoid, OracleResolution::Grid(2e-3)).unwrap();
        prop_assert!(problem.power_margin(&oracle.best_p).unwrap() >= -1e-12);
        prop_assert!(oracle.best_objective <= solver * (1.0 + 1e-12));
        prop_assert!(oracle.best_objective >= solver * (1.0 - 1e-2));
    }

    #[test]
    fn ascent_certifies_three_elements(problem in problem(3..=3), seed in any::<u64>()) {
        let solver = solve(&problem).unwrap().objective;
        let oracle = brute_force_optimum(
            &problem,
            &OracleConstraint::Ellipsoid,
            OracleResolution::MultiStart { starts: 64, seed },
        )
        .unwrap();
        prop_assert!(oracle.best_objective <= solver * (1.0 + 1e-12));
        prop_assert!(oracle.best_objective >= solver * (1.0 - 1e-6));
    }

    #[test]
    fn box_grid_certifies_caps(problem in problem(1..=2), caps in prop::collection::vec(0.1..2.0f64, 2)) {
        if problem.h_d() == 0.0 {
            return Ok(());
        }
        let caps = CapVector::new(caps[..problem.n()].to_vec()).unwrap();
        let solver = solve_per_element_caps(&problem, &caps).unwrap().objective;
        let oracle = brute_force_optimum(&problem, &OracleConstraint::Box(caps), OracleResolution::Grid(2e-3)).unwrap();
        prop_assert!(oracle.best_objective <= solver * (1.0 + 1e-12));
        prop_assert!(oracle.best_objective >= solver * (1.0 - 1e-2));
    }

    #[test]
    fn single_element_bisection_is_exact(problem in problem(1..=1)) {
        let solver = solve(&problem).unwrap();
        let oracle = brute_force_optimum(&problem, &OracleConstraint::Ellipsoid, OracleResolution::Bisection1D).unwrap();
        prop_assert!((oracle.best_objective - solver.objective).abs() <= 1e-12 * solver.objective);
    }
}

#[test]
fn symmetric_pair_matches_solver() {
    let p = AmplitudeProblem::new(1.0, vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0], 1.0).unwrap();
    let solver = solve(&p).unwrap();
    let oracle = brute_force_optimum(&p, &OracleConstraint::Ellipsoid, OracleResolution::Grid(1e-3)).unwrap();
    for (a, b) in oracle.best_p.iter().zip(&solver.amplitudes) {
        assert!((a - b).abs() <= 2e-3, "{a} vs {b}");
    }
}

#[test]
fn ordering_chain_on_random_draws() {
    use ris_opt_core::experiment::generate_rayleigh;
    for index in 0..200 {
        let (h1, h2) = generate_rayleigh(5, index, 4, 4.0);
        let norm = NormalizedScenario::new(Complex64::new(0.0, 0.0), h1, h2, 10.0, 10.0).unwrap();
        let v = snr_ordering_check(&norm);
        assert!(v.equal_le_optimal && v.optimal_le_relay);
        assert!(v.equal < v.optimal && v.optimal < v.relay, "draw {index} not strict");
        assert!(!v.optimal_equals_relay && !v.equal_equals_optimal);
        let solved = solve(&ris_opt_core::reduce(&norm).unwrap()).unwrap().receive_snr;
        assert!((solved - v.optimal).abs() <= 1e-10 * v.optimal);
    }
}
