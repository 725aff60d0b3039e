use num_complex::Complex64;
use proptest::prelude::*;

use ris_opt_core::baselines::{ao_solve, dinkelbach_solve, equal_amplitude, relay_optimum_snr};
use ris_opt_core::constrained::{cap_kkt_residuals, solve_per_element_caps, solve_subarrays};
use ris_opt_core::model::objective_on_ray;
use ris_opt_core::oracle::superadditivity_check;
use ris_opt_core::solver::{cauchy_schwarz_bound, classify, no_direct_optimum, solve_no_direct};
use ris_opt_core::{
    normalize, reduce, solve, AmplitudeProblem, CapVector, NormalizedScenario, Regime, RisConfiguration, Scenario,
    SubarrayPartition,
};

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn channels(n: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<Complex64>, Vec<Complex64>)> {
    n.prop_flat_map(|n| (prop::collection::vec(complex(), n), prop::collection::vec(complex(), n)))
}

fn normalized() -> impl Strategy<Value = NormalizedScenario> {
    (complex(), channels(1..7), 0.01..100.0f64, 0.01..100.0f64)
        .prop_map(|(h_d, (h1, h2), s1, s2)| NormalizedScenario::new(h_d, h1, h2, s1, s2).unwrap())
}

fn problem() -> impl Strategy<Value = AmplitudeProblem> {
    (1usize..7)
        .prop_flat_map(|n| {
            (
                prop_oneof![Just(0.0), 0.0..5.0f64],
                prop::collection::vec((0.01..3.0f64, 0.01..3.0f64, 0.05..4.0f64), n),
            )
        })
        .prop_map(|(h_d, coeffs)| {
            // α² = β·|h1|² keeps the instance reachable from real channels
            let alpha = coeffs.iter().map(|(m1, m2, _)| m1 * m2).collect();
            let beta = coeffs.iter().map(|(_, m2, _)| m2 * m2).collect();
            let gamma = coeffs.iter().map(|(_, _, g)| *g).collect();
            AmplitudeProblem::new(h_d, alpha, beta, gamma, 1.0).unwrap()
        })
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn aligned_phases_beat_any_others(
        norm in normalized(),
        amps in prop::collection::vec(0.0..2.0f64, 6),
        phases in prop::collection::vec(0.0..std::f64::consts::TAU, 6),
    ) {
        let n = norm.n();
        let best = norm.receive_snr(&RisConfiguration::aligned(&norm, amps[..n].to_vec()).unwrap()).unwrap();
        let other = norm.receive_snr(&RisConfiguration::new(amps[..n].to_vec(), phases[..n].to_vec()).unwrap()).unwrap();
        prop_assert!(other <= best * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn normalization_preserves_snr(
        h_d in complex(),
        (h1, h2) in channels(1..6),
        powers in (0.0..50.0f64, 0.1..50.0f64, 0.05..5.0f64, 0.05..5.0f64),
        amps in prop::collection::vec(0.0..2.0f64, 6),
    ) {
        let (p1, p2, s1, s2) = powers;
        let scenario = Scenario::new(h_d, h1, h2, p1, p2, s1, s2).unwrap();
        let norm = normalize(&scenario);
        let problem = reduce(&norm).unwrap();
        let p = &amps[..norm.n()];
        let reduced = problem.receive_snr(p).unwrap();
        let physical = scenario
            .receive_snr(&scenario.to_physical(&RisConfiguration::aligned(&norm, p.to_vec()).unwrap()))
            .unwrap();
        prop_assert!(relative_gap(reduced, physical) <= 1e-12 || (reduced - physical).abs() < 1e-300);
        // budgets agree as well: physical power relative to P2 equals Σγp²
        let config = scenario.to_physical(&RisConfiguration::aligned(&norm, p.to_vec()).unwrap());
        let used = scenario.ris_power(&config).unwrap() / p2;
        let margin = problem.power_margin(p).unwrap();
        prop_assert!(((1.0 - used) - margin).abs() <= 1e-12 * used.max(1.0));
    }

    #[test]
    fn optimum_grows_with_transmit_snr(h_d in complex(), (h1, h2) in channels(1..6), snr2 in 0.1..50.0f64) {
        let mut last = 0.0;
        for snr1 in [0.01, 0.1, 1.0, 3.0, 10.0, 100.0, 1e3] {
            let norm = NormalizedScenario::new(h_d, h1.clone(), h2.clone(), snr1, snr2).unwrap();
            let snr = match solve(&reduce(&norm).unwrap()) {
                Ok(r) => r.receive_snr,
                Err(_) => norm.h_d().norm_sqr() * snr1,
            };
            prop_assert!(snr >= last * (1.0 - 1e-10), "{snr} < {last} at snr1 {snr1}");
            last = snr;
        }
    }

    #[test]
    fn reduction_keeps_structure(norm in normalized()) {
        let problem = reduce(&norm).unwrap();
        for k in 0..problem.n() {
            prop_assert!(problem.alpha()[k] >= 0.0 && problem.gamma()[k] > 0.0);
            if problem.beta()[k] == 0.0 {
                prop_assert_eq!(problem.alpha()[k], 0.0);
            }
        }
    }

    #[test]
    fn optimum_is_feasible_and_bounded(problem in problem()) {
        let report = solve(&problem).unwrap();
        let margin = problem.power_margin(&report.amplitudes).unwrap();
        prop_assert!(margin >= -1e-9);
        if report.regime != Regime::StationaryHighDirect {
            prop_assert!(margin.abs() <= 1e-9, "budget not exhausted: {margin}");
        }
        prop_assert!(report.objective <= cauchy_schwarz_bound(&problem) * (1.0 + 1e-12));
        prop_assert!(report.objective >= problem.h_d() * problem.h_d() * (1.0 - 1e-12));
        prop_assert!(equal_amplitude(&problem).receive_snr <= report.receive_snr * (1.0 + 1e-12));
    }

    #[test]
    fn closed_form_without_direct_link(problem in problem()) {
        let p0 = problem.with_h_d(0.0).unwrap();
        let p = solve_no_direct(&p0).unwrap();
        let used = 1.0 - p0.power_margin(&p).unwrap();
        prop_assert!((used - 1.0).abs() <= 1e-12);
        let expected: f64 = p0.alpha().iter().zip(p0.beta()).zip(p0.gamma()).map(|((a, b), g)| a * a / (b + g)).sum();
        prop_assert!(relative_gap(p0.objective(&p).unwrap(), expected) <= 1e-12);
        prop_assert!(relative_gap(no_direct_optimum(&p0), expected) <= 1e-12);
    }

    #[test]
    fn regimes_join_continuously(problem in problem()) {
        // at the threshold h_d² = Σα²γ/β² the stationary point just touches the boundary
        let threshold: f64 = problem
            .alpha()
            .iter()
            .zip(problem.beta())
            .zip(problem.gamma())
            .map(|((a, b), g)| a * a * g / (b * b))
            .sum::<f64>()
            .sqrt();
        let below = solve(&problem.with_h_d(threshold * (1.0 - 1e-9)).unwrap()).unwrap();
        let above = solve(&problem.with_h_d(threshold * (1.0 + 1e-9)).unwrap()).unwrap();
        prop_assert_eq!(below.regime, Regime::SecularNewton);
        prop_assert_eq!(above.regime, Regime::StationaryHighDirect);
        for (a, b) in below.amplitudes.iter().zip(&above.amplitudes) {
            prop_assert!((a - b).abs() <= 1e-6 * a.max(1.0), "{a} vs {b}");
        }
        prop_assert!(relative_gap(below.objective, above.objective) <= 1e-6);
    }

    #[test]
    fn vanishing_direct_link_recovers_closed_form(problem in problem()) {
        let closed = solve_no_direct(&problem.with_h_d(0.0).unwrap()).unwrap();
        let tiny = solve(&problem.with_h_d(1e-7).unwrap()).unwrap();
        prop_assert_eq!(tiny.regime, Regime::SecularNewton);
        for (a, b) in closed.iter().zip(&tiny.amplitudes) {
            prop_assert!((a - b).abs() <= 1e-5 * a.max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn relay_dominates_surface(norm in normalized()) {
        let norm = NormalizedScenario::new(Complex64::new(0.0, 0.0), norm.h1().to_vec(), norm.h2().to_vec(), norm.snr1(), norm.snr2()).unwrap();
        let problem = reduce(&norm).unwrap();
        if let Ok(report) = solve(&problem) {
            let eq = equal_amplitude(&problem).receive_snr;
            prop_assert!(eq <= report.receive_snr * (1.0 + 1e-12));
            prop_assert!(report.receive_snr <= relay_optimum_snr(&norm) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ao_never_beats_optimum(problem in problem()) {
        let best = solve(&problem).unwrap().objective;
        let ao = ao_solve(&problem, 500, 1e-12).unwrap();
        prop_assert!(ao.objective <= best * (1.0 + 1e-9));
        prop_assert!(ao.state.objective_trace.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
    }

    #[test]
    fn dinkelbach_agrees(problem in problem()) {
        let best = solve(&problem).unwrap().objective;
        let out = dinkelbach_solve(&problem, 1e-12).unwrap();
        prop_assert!(relative_gap(out.objective, best) <= 1e-6);
        prop_assert!(out.lambda_trace.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
    }

    #[test]
    fn looser_caps_never_hurt(problem in problem(), caps in prop::collection::vec(0.05..3.0f64, 6), grow in 1.0..4.0f64) {
        let n = problem.n();
        if problem.h_d() == 0.0 {
            return Ok(());
        }
        let tight = CapVector::new(caps[..n].to_vec()).unwrap();
        let loose = CapVector::new(caps[..n].iter().map(|c| c * grow).collect()).unwrap();
        let a = solve_per_element_caps(&problem, &tight).unwrap();
        let b = solve_per_element_caps(&problem, &loose).unwrap();
        prop_assert!(a.objective <= b.objective * (1.0 + 1e-12));
        for (k, r) in cap_kkt_residuals(&problem, &a.amplitudes).iter().enumerate() {
            if a.amplitudes[k] < tight.caps()[k] * (1.0 - 1e-12) {
                prop_assert!(r.abs() <= 1e-9, "interior residual {r}");
            } else {
                prop_assert!(*r >= -1e-9, "capped residual {r}");
            }
        }
    }

    #[test]
    fn grouping_never_helps(problem in problem(), split in 0usize..6) {
        let n = problem.n();
        let cut = split.min(n - 1) + 1;
        let groups = if cut < n { vec![(0..cut).collect(), (cut..n).collect()] } else { vec![(0..n).collect()] };
        let partition = SubarrayPartition::new(groups, n).unwrap();
        let grouped = solve_subarrays(&problem, &partition).unwrap();
        let free = solve(&problem).unwrap();
        prop_assert!(grouped.objective <= free.objective * (1.0 + 1e-12));
        prop_assert!(problem.power_margin(&grouped.amplitudes).unwrap() >= -1e-9);
    }

    #[test]
    fn superadditive(x1 in 0.0..1e3f64, y1 in 0.0..1e3f64, x2 in 0.0..1e3f64, y2 in 0.0..1e3f64) {
        let v = superadditivity_check(x1, y1, x2, y2).unwrap();
        prop_assert!(v.holds);
        prop_assert_eq!(v.equality, x1 * y2 == 0.0 && x2 * y1 == 0.0);
    }

    #[test]
    fn ray_objective_is_unimodal(h_d in 0.01..5.0f64, a in 0.01..5.0f64, b in 0.01..5.0f64) {
        // rises up to α/(h_d β) and falls afterwards
        let peak = a / (h_d * b);
        let at = |p: f64| objective_on_ray(h_d, a, b, p);
        prop_assert!(at(0.5 * peak) <= at(peak) && at(2.0 * peak) <= at(peak));
        prop_assert!((at(peak) - (h_d * h_d + a * a / b)).abs() <= 1e-12 * at(peak));
    }
}

#[test]
fn classify_matches_regime_names() {
    let p = AmplitudeProblem::new(0.0, vec![1.0], vec![1.0], vec![1.0], 1.0).unwrap();
    assert_eq!(classify(&p), Regime::NoDirectClosedForm);
    assert_eq!(classify(&p.with_h_d(10.0).unwrap()), Regime::StationaryHighDirect);
    assert_eq!(classify(&p.with_h_d(0.5).unwrap()), Regime::SecularNewton);
}
