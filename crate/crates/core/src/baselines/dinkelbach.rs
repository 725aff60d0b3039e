//! Dinkelbach iteration on the square-root objective
//! `(h_d + Σαp) / √(1 + Σβp²)`, concave over convex on the ellipsoid.
//!
//! Each outer step maximizes `h_d + Σαp − λ√(1 + Σβp²)` by projected gradient
//! ascent (backtracking on a sufficient-ascent test) and then resets `λ` to the
//! ratio at the new point. Warm starts keep every parametric value
//! nonnegative, so `λ` never decreases.

use serde::{Deserialize, Serialize};

use super::full_power_equal_start;
use crate::error::{Error, Result};
use crate::model::{dot, AmplitudeProblem};
use crate::roots::decreasing_root;

const MAX_OUTER: usize = 200;
const MAX_INNER: usize = 200_000;
const GRADIENT_MAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DinkelbachState {
    pub p: Vec<f64>,
    pub lambda: f64,
    /// Parametric value `N(p) − λD(p)` reached by the last inner solve.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DinkelbachOutcome {
    pub state: DinkelbachState,
    /// `λ` before the first inner solve and after each outer step.
    pub lambda_trace: Vec<f64>,
    /// `(h_d + Σαp)²/(1 + Σβp²)` at the final amplitudes.
    pub objective: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
}

/// Ratio `(h_d + Σαp)/√(1 + Σβp²)`.
pub fn ratio(problem: &AmplitudeProblem, p: &[f64]) -> f64 {
    let (num, den) = parts(problem, p);
    num / den
}

pub fn dinkelbach_solve(problem: &AmplitudeProblem, tol: f64) -> Result<DinkelbachOutcome> {
    let has_signal = problem.alpha().iter().any(|&a| a > 0.0);
    if !has_signal {
        if problem.h_d() > 0.0 {
            let p = vec![0.0; problem.n()];
            let lambda = problem.h_d();
            return Ok(DinkelbachOutcome {
                state: DinkelbachState { p, lambda, gap: 0.0 },
                lambda_trace: vec![lambda],
                objective: lambda * lambda,
                outer_iterations: 0,
                inner_iterations: 0,
            });
        }
        return Err(Error::NoSignal);
    }

    let mut p = full_power_equal_start(problem);
    let mut lambda = ratio(problem, &p);
    let mut trace = vec![lambda];
    let mut inner_total = 0;
    for outer in 1..=MAX_OUTER {
        let inner = inner_maximize(problem, lambda, &p)?;
        inner_total += inner.iterations;
        let next = ratio(problem, &inner.p);
        if next < lambda {
            // exact steps never lower λ; a drop is inner-solve rounding at the optimum
            return Ok(DinkelbachOutcome {
                objective: problem.objective_unchecked(&p),
                state: DinkelbachState {
                    p,
                    lambda,
                    gap: inner.value.max(0.0),
                },
                lambda_trace: trace,
                outer_iterations: outer,
                inner_iterations: inner_total,
            });
        }
        p = inner.p;
        trace.push(next);
        let done = inner.value <= tol * lambda.max(1.0) || (next - lambda).abs() <= tol * next.max(1.0);
        lambda = next;
        if done {
            return Ok(DinkelbachOutcome {
                objective: problem.objective_unchecked(&p),
                state: DinkelbachState {
                    p,
                    lambda,
                    gap: inner.value,
                },
                lambda_trace: trace,
                outer_iterations: outer,
                inner_iterations: inner_total,
            });
        }
    }
    Err(Error::Convergence {
        solver: "Dinkelbach",
        iterations: MAX_OUTER,
        last: lambda,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub p: Vec<f64>,
    /// `h_d + Σαp − λ√(1 + Σβp²)` at `p`.
    pub value: f64,
    pub iterations: usize,
}

/// Maximizes `h_d + Σαp − λ√(1 + Σβp²)` over `Σγp² ≤ 1`, starting at `start`.
pub fn inner_maximize(problem: &AmplitudeProblem, lambda: f64, start: &[f64]) -> Result<InnerSolution> {
    let (alpha, beta, gamma) = (problem.alpha(), problem.beta(), problem.gamma());
    let noise = |p: &[f64]| 1.0 + beta.iter().zip(p).map(|(b, x)| b * x * x).sum::<f64>();

    let lipschitz = lambda * beta.iter().copied().fold(0.0, f64::max);
    let mut step = if lipschitz > 0.0 { 1.0 / lipschitz } else { 1.0 };
    let mut p = project_ellipsoid(start, gamma);
    let mut den = noise(&p);
    for iteration in 1..=MAX_INNER {
        let root = den.sqrt();
        let g: Vec<f64> = alpha
            .iter()
            .zip(beta)
            .zip(&p)
            .map(|((a, b), x)| a - lambda * b * x / root)
            .collect();
        loop {
            let trial: Vec<f64> = p.iter().zip(&g).map(|(x, d)| x + step * d).collect();
            let next = project_ellipsoid(&trial, gamma);
            let d: Vec<f64> = next.iter().zip(&p).map(|(a, b)| a - b).collect();
            let moved = dot(&d, &d);
            // increment of the parametric value, free of cancellation
            let den_change: f64 = beta
                .iter()
                .zip(&d)
                .zip(next.iter().zip(&p))
                .map(|((b, dx), (x1, x0))| b * dx * (x1 + x0))
                .sum();
            let next_den = den + den_change;
            let gain = dot(alpha, &d) - lambda * den_change / (next_den.sqrt() + root);
            if moved == 0.0 || gain >= dot(&g, &d) - moved / (2.0 * step) {
                let map_norm = moved.sqrt() / step;
                p = next;
                den = noise(&p);
                if map_norm <= GRADIENT_MAP_TOL {
                    let value = problem.h_d() + dot(alpha, &p) - lambda * den.sqrt();
                    return Ok(InnerSolution {
                        p,
                        value,
                        iterations: iteration,
                    });
                }
                step *= 2.0;
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                return Err(Error::Convergence {
                    solver: "Dinkelbach inner ascent (step underflow)",
                    iterations: iteration,
                    last: lambda,
                });
            }
        }
    }
    Err(Error::Convergence {
        solver: "Dinkelbach inner ascent",
        iterations: MAX_INNER,
        last: lambda,
    })
}

/// Euclidean projection onto `{x : Σ γ_n x_n² ≤ 1}`.
pub fn project_ellipsoid(y: &[f64], gamma: &[f64]) -> Vec<f64> {
    let used: f64 = gamma.iter().zip(y).map(|(g, x)| g * x * x).sum();
    if used <= 1.0 {
        return y.to_vec();
    }
    // Σ γ y²/(1+μγ)² − 1 is convex and decreasing in μ
    let eval = |mu: f64| {
        let mut f = -1.0;
        let mut df = 0.0;
        for (g, x) in gamma.iter().zip(y) {
            let d = 1.0 + mu * g;
            let t = g * x * x / (d * d);
            f += t;
            df -= 2.0 * t * g / d;
        }
        (f, df)
    };
    let upper = y.iter().zip(gamma).map(|(x, g)| x * x / g).sum::<f64>().sqrt();
    let mu = match decreasing_root(eval, 0.0, upper, 0.0, 1e-15, 500) {
        Ok((mu, _)) | Err(mu) => mu,
    };
    let mut x: Vec<f64> = y.iter().zip(gamma).map(|(x, g)| x / (1.0 + mu * g)).collect();
    let used: f64 = gamma.iter().zip(&x).map(|(g, x)| g * x * x).sum();
    if used > 1.0 {
        let s = used.sqrt().recip();
        x.iter_mut().for_each(|v| *v *= s);
    }
    x
}

fn parts(problem: &AmplitudeProblem, p: &[f64]) -> (f64, f64) {
    let num = problem.h_d() + dot(problem.alpha(), p);
    let den = (1.0 + problem.beta().iter().zip(p).map(|(b, x)| b * x * x).sum::<f64>()).sqrt();
    (num, den)
}
