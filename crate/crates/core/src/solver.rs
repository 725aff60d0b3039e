//! Global maximizer of the reduced amplitude problem.
//!
//! Three regimes cover every instance:
//!
//! | condition                                   | amplitudes                                      |
//! |---------------------------------------------|-------------------------------------------------|
//! | `h_d = 0`                                   | `α_k/(β_k+γ_k)`, scaled onto `Σγp² = 1`         |
//! | `h_d > 0`, `Σ α²γ/β² ≤ h_d²`                | `α_k/(h_d β_k)` (unconstrained stationary point)|
//! | `h_d > 0`, `Σ α²γ/β² > h_d²`                | `α_k/(h_d(β_k + η(β_k+γ_k)))`, `f(η) = 0`       |
//!
//! where `f(η) = Σ α_n²γ_n/(β_n + η(β_n+γ_n))² − h_d²` is convex and
//! decreasing, so Newton's method started left of the root climbs to it
//! monotonically. Elements with `α_n = 0` contribute nothing to any sum and
//! always get `p_n = 0`. Everything runs in `O(N)` per pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AmplitudeProblem;

/// Default relative tolerance on the secular residual.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Newton iteration cap for the secular equation.
pub const MAX_NEWTON_ITERATIONS: usize = 100;
/// `h_d` below this multiple of `max α` is routed to the closed form.
pub const DIRECT_LINK_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// No direct link: closed-form amplitudes with the budget active.
    NoDirectClosedForm,
    /// Strong direct link: the unconstrained stationary point is feasible.
    StationaryHighDirect,
    /// Direct link present and the budget binds: secular root via Newton.
    SecularNewton,
}

/// Outcome of [`solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub regime: Regime,
    pub amplitudes: Vec<f64>,
    /// Secular root, present only for [`Regime::SecularNewton`].
    pub eta: Option<f64>,
    /// `(h_d + Σαp)² / (1 + Σβp²)`.
    pub objective: f64,
    /// `objective · snr1`.
    pub receive_snr: f64,
    pub newton_iterations: usize,
    /// `|f(η*)|`; zero outside the secular regime.
    pub residual: f64,
}

/// Result of [`secular_root`].
#[derive(Debug, Clone, PartialEq)]
pub struct SecularRoot {
    pub eta: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Newton iterates, starting with the bracketing guess.
    pub iterates: Vec<f64>,
}

/// Solves the amplitude problem to global optimality.
pub fn solve(problem: &AmplitudeProblem) -> Result<SolveReport> {
    solve_with_tolerance(problem, DEFAULT_TOLERANCE)
}

pub fn solve_with_tolerance(problem: &AmplitudeProblem, tol: f64) -> Result<SolveReport> {
    let (amplitudes, regime, root) = match classify(problem) {
        Regime::NoDirectClosedForm => {
            let p = if has_signal(problem) {
                solve_no_direct(problem)?
            } else {
                vec![0.0; problem.n()]
            };
            (p, Regime::NoDirectClosedForm, None)
        }
        Regime::StationaryHighDirect => (solve_stationary(problem)?, Regime::StationaryHighDirect, None),
        Regime::SecularNewton => {
            let root = secular_root(problem, tol)?;
            (solve_with_direct(problem, root.eta), Regime::SecularNewton, Some(root))
        }
    };
    let objective = problem.objective_unchecked(&amplitudes);
    Ok(SolveReport {
        regime,
        objective,
        receive_snr: objective * problem.snr1(),
        eta: root.as_ref().map(|r| r.eta),
        newton_iterations: root.as_ref().map_or(0, |r| r.iterations),
        residual: root.as_ref().map_or(0.0, |r| r.residual),
        amplitudes,
    })
}

/// Which regime `solve` dispatches `problem` to.
pub fn classify(problem: &AmplitudeProblem) -> Regime {
    if direct_link_vanishes(problem) {
        Regime::NoDirectClosedForm
    } else if stationary_condition(problem) <= problem.h_d() * problem.h_d() {
        Regime::StationaryHighDirect
    } else {
        Regime::SecularNewton
    }
}

/// `Σ α_n²γ_n/β_n²`, the left-hand side of the strong-direct-link test.
pub fn stationary_condition(problem: &AmplitudeProblem) -> f64 {
    active(problem).map(|(a, b, g)| a * a * g / (b * b)).sum()
}

/// Closed-form optimum without direct link:
/// `p_k = α_k/(β_k+γ_k) · (Σ α_n²γ_n/(β_n+γ_n)²)^{-1/2}`.
pub fn solve_no_direct(problem: &AmplitudeProblem) -> Result<Vec<f64>> {
    if !has_signal(problem) {
        return Err(Error::NoSignal);
    }
    let direction: Vec<f64> = problem
        .alpha()
        .iter()
        .zip(problem.beta())
        .zip(problem.gamma())
        .map(|((&a, &b), &g)| if a > 0.0 { a / (b + g) } else { 0.0 })
        .collect();
    let norm_sq: f64 = direction.iter().zip(problem.gamma()).map(|(d, g)| g * d * d).sum();
    let scale = norm_sq.sqrt().recip();
    Ok(direction.into_iter().map(|d| d * scale).collect())
}

/// Unconstrained stationary point `p_n = α_n/(h_d β_n)`, valid when
/// `h_d > 0` and `Σ α²γ/β² ≤ h_d²`.
pub fn solve_stationary(problem: &AmplitudeProblem) -> Result<Vec<f64>> {
    let h_d = problem.h_d();
    if h_d <= 0.0 {
        return Err(Error::Contract("stationary point needs h_d > 0".into()));
    }
    let cond = stationary_condition(problem);
    if cond > h_d * h_d {
        return Err(Error::Contract(format!(
            "stationary point infeasible: Σα²γ/β² = {cond} > h_d² = {}",
            h_d * h_d
        )));
    }
    Ok(problem
        .alpha()
        .iter()
        .zip(problem.beta())
        .map(|(&a, &b)| if a > 0.0 { a / (h_d * b) } else { 0.0 })
        .collect())
}

/// Root of `f(η) = Σ α_n²γ_n/(β_n + η(β_n+γ_n))² − h_d²` by Newton's method
/// from the bracketing start `max(0, √(Σ α²γ/(β+γ)²)/h_d − 1)`.
///
/// Stops once `|f| ≤ tol·h_d²` (which implies `|f| ≤ tol·max(1, h_d²)`) or
/// when the iterates stop moving in floating point.
pub fn secular_root(problem: &AmplitudeProblem, tol: f64) -> Result<SecularRoot> {
    let h_d = problem.h_d();
    if h_d <= 0.0 {
        return Err(Error::Contract("secular equation needs h_d > 0".into()));
    }
    let target = h_d * h_d;
    if stationary_condition(problem) <= target {
        return Err(Error::Contract(
            "secular equation has no positive root when Σα²γ/β² ≤ h_d²".into(),
        ));
    }
    let scale: f64 = active(problem).map(|(a, b, g)| a * a * g / ((b + g) * (b + g))).sum();
    let mut eta = (scale.sqrt() / h_d - 1.0).max(0.0);
    let mut iterates = vec![eta];
    let (mut f, mut df) = secular_value(problem, eta);
    for iteration in 1..=MAX_NEWTON_ITERATIONS {
        if f.abs() <= tol * target {
            return Ok(SecularRoot {
                eta,
                iterations: iteration - 1,
                residual: f.abs(),
                iterates,
            });
        }
        let next = eta - f / df;
        if !next.is_finite() {
            break;
        }
        // rounding-level steps: the root is resolved to machine precision
        let stalled = (next - eta).abs() <= 4.0 * f64::EPSILON * eta.max(f64::MIN_POSITIVE);
        eta = next;
        iterates.push(eta);
        (f, df) = secular_value(problem, eta);
        if stalled || (f < 0.0 && f.abs() <= 1e3 * f64::EPSILON * target) {
            return Ok(SecularRoot {
                eta,
                iterations: iteration,
                residual: f.abs(),
                iterates,
            });
        }
    }
    Err(Error::Convergence {
        solver: "secular Newton",
        iterations: MAX_NEWTON_ITERATIONS,
        last: eta,
    })
}

/// `f(η)` and `f'(η)` of the secular equation.
pub fn secular_value(problem: &AmplitudeProblem, eta: f64) -> (f64, f64) {
    let h_d = problem.h_d();
    let mut f = -h_d * h_d;
    let mut df = 0.0;
    for (a, b, g) in active(problem) {
        let d = b + eta * (b + g);
        let t = a * a * g / (d * d);
        f += t;
        df -= 2.0 * t * (b + g) / d;
    }
    (f, df)
}

/// Amplitudes on the secular branch,
/// `p_n = α_n / (h_d (β_n + η(β_n+γ_n)))`.
pub fn solve_with_direct(problem: &AmplitudeProblem, eta: f64) -> Vec<f64> {
    let h_d = problem.h_d();
    problem
        .alpha()
        .iter()
        .zip(problem.beta())
        .zip(problem.gamma())
        .map(|((&a, &b), &g)| if a > 0.0 { a / (h_d * (b + eta * (b + g))) } else { 0.0 })
        .collect()
}

/// Upper bound attained on the secular branch,
/// `(1+η)h_d² + Σ α_n²/(β_n + η/(1+η) γ_n)`.
pub fn direct_link_bound(problem: &AmplitudeProblem, eta: f64) -> f64 {
    let h_d = problem.h_d();
    let w = eta / (1.0 + eta);
    (1.0 + eta) * h_d * h_d + active(problem).map(|(a, b, g)| a * a / (b + w * g)).sum::<f64>()
}

/// `h_d² + Σ α_n²/β_n`: the unconstrained optimum and an upper bound on every
/// feasible objective.
pub fn cauchy_schwarz_bound(problem: &AmplitudeProblem) -> f64 {
    let h_d = problem.h_d();
    h_d * h_d + active(problem).map(|(a, b, _)| a * a / b).sum::<f64>()
}

/// `Σ α_n²/(β_n+γ_n)`: the optimum when there is no direct link.
pub fn no_direct_optimum(problem: &AmplitudeProblem) -> f64 {
    active(problem).map(|(a, b, g)| a * a / (b + g)).sum()
}

fn direct_link_vanishes(problem: &AmplitudeProblem) -> bool {
    let max_alpha = problem.alpha().iter().copied().fold(0.0, f64::max);
    problem.h_d() == 0.0 || problem.h_d() < DIRECT_LINK_FLOOR * max_alpha
}

fn has_signal(problem: &AmplitudeProblem) -> bool {
    problem.alpha().iter().any(|&a| a > 0.0)
}

/// `(α_n, β_n, γ_n)` for elements with `α_n > 0` (hence `β_n > 0`).
fn active(problem: &AmplitudeProblem) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
    problem
        .alpha()
        .iter()
        .zip(problem.beta())
        .zip(problem.gamma())
        .filter(|((&a, _), _)| a > 0.0)
        .map(|((&a, &b), &g)| (a, b, g))
}
