//! Alternating optimization over `(p, ρ, w)`.
//!
//! The log-SNR is lower-bounded by the surrogate
//!
//! ```text
//! F(p, ρ, w) = ln(1+ρ) − ρ + 2√(1+ρ)·S·w − (S² + D)·w²,
//! S = h_d + Σ α_n p_n,   D = 1 + Σ β_n p_n²,
//! ```
//!
//! which is tight at `ρ = S²/D`, `w = √(1+ρ)S/(S²+D)`. Each block is
//! maximized exactly in turn, so `F` never decreases. The amplitude block is a
//! concave quadratic over the ellipsoid `Σγp² ≤ 1` whose Hessian
//! `−w²(ααᵀ + diag β)` is diagonal plus rank one; it is solved through the
//! Lagrange multiplier with Sherman–Morrison solves, `O(N)` per evaluation.

use serde::{Deserialize, Serialize};

use super::full_power_equal_start;
use crate::error::{Error, Result};
use crate::model::{dot, AmplitudeProblem};
use crate::roots::decreasing_root;

const MULTIPLIER_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoState {
    pub p: Vec<f64>,
    pub rho: f64,
    pub w: f64,
    /// Surrogate value after every sweep, starting with the initial point.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoOutcome {
    pub state: AoState,
    /// Best amplitudes seen (by the true objective).
    pub best_p: Vec<f64>,
    /// True objective `(h_d + Σαp)²/(1 + Σβp²)` at `best_p`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `ρ = (ξ² + ξ√(ξ²+4))/2` with `ξ = S·w`.
pub fn rho_update(xi: f64) -> f64 {
    (xi * xi + xi * (xi * xi + 4.0).sqrt()) / 2.0
}

/// `w = √(1+ρ)·S / (S² + D)`.
pub fn w_update(signal: f64, noise: f64, rho: f64) -> f64 {
    (1.0 + rho).sqrt() * signal / (signal * signal + noise)
}

/// Surrogate `F(p, ρ, w)`.
pub fn surrogate(problem: &AmplitudeProblem, p: &[f64], rho: f64, w: f64) -> f64 {
    let (s, d) = signal_noise(problem, p);
    (1.0 + rho).ln() - rho + 2.0 * (1.0 + rho).sqrt() * s * w - (s * s + d) * w * w
}

/// Exact maximizer of `2√(1+ρ)·S·w − (S² + D)·w²` over `Σγp² ≤ 1`, `p ≥ 0`.
pub fn p_update(problem: &AmplitudeProblem, rho: f64, w: f64) -> Result<Vec<f64>> {
    let n = problem.n();
    // linear coefficient of α·p is 2c
    let c = (1.0 + rho).sqrt() * w - problem.h_d() * w * w;
    let active: Vec<usize> = (0..n).filter(|&k| problem.alpha()[k] > 0.0).collect();
    if c <= 0.0 || w == 0.0 || active.is_empty() {
        return Ok(vec![0.0; n]);
    }
    let alpha: Vec<f64> = active.iter().map(|&k| problem.alpha()[k]).collect();
    let beta: Vec<f64> = active.iter().map(|&k| problem.beta()[k]).collect();
    let gamma: Vec<f64> = active.iter().map(|&k| problem.gamma()[k]).collect();
    let system = TrustRegionSystem {
        alpha: &alpha,
        beta: &beta,
        gamma: &gamma,
        w2: w * w,
        c,
    };

    let unconstrained = system.solve(0.0);
    let reduced = if system.weighted_norm_sq(&unconstrained) <= 1.0 {
        unconstrained
    } else {
        let upper = c * alpha.iter().zip(&gamma).map(|(a, g)| a * a / g).sum::<f64>().sqrt();
        let mu = decreasing_root(
            |mu| system.secular(mu),
            0.0,
            upper,
            0.0,
            1e-15,
            MULTIPLIER_MAX_ITERATIONS,
        )
        .map_err(|last| Error::Convergence {
            solver: "AO trust-region multiplier",
            iterations: MULTIPLIER_MAX_ITERATIONS,
            last,
        })?
        .0;
        let mut p = system.solve(mu);
        // land exactly on the boundary
        let used = system.weighted_norm_sq(&p);
        if used > 1.0 {
            let s = used.sqrt().recip();
            p.iter_mut().for_each(|x| *x *= s);
        }
        p
    };
    let mut p = vec![0.0; n];
    for (&k, x) in active.iter().zip(reduced) {
        p[k] = x.max(0.0);
    }
    Ok(p)
}

/// Runs AO from `p_n = 1/√(Σγ)` until the relative surrogate change drops
/// below `tol` or `max_iters` sweeps have run.
pub fn ao_solve(problem: &AmplitudeProblem, max_iters: usize, tol: f64) -> Result<AoOutcome> {
    let start = full_power_equal_start(problem);
    let (s, d) = signal_noise(problem, &start);
    if s == 0.0 {
        // no direct link and no coupling: every configuration gives zero
        return Ok(AoOutcome {
            state: AoState {
                p: start.clone(),
                rho: 0.0,
                w: 0.0,
                objective_trace: vec![0.0],
            },
            best_p: start,
            objective: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let mut rho = s * s / d;
    let mut w = w_update(s, d, rho);
    let mut p = start;
    let mut trace = vec![surrogate(problem, &p, rho, w)];
    let mut best_p = p.clone();
    let mut best = problem.objective_unchecked(&p);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        let (s, _) = signal_noise(problem, &p);
        rho = rho_update(s * w);
        let (s, d) = signal_noise(problem, &p);
        w = w_update(s, d, rho);
        p = p_update(problem, rho, w)?;
        if problem.h_d() == 0.0 && p.iter().all(|&x| x == 0.0) {
            p = full_power_equal_start(problem);
        }

        let objective = problem.objective_unchecked(&p);
        if objective > best {
            best = objective;
            best_p.clone_from(&p);
        }
        let value = surrogate(problem, &p, rho, w);
        let previous = *trace.last().unwrap();
        trace.push(value);
        if (value - previous).abs() <= tol * value.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    Ok(AoOutcome {
        state: AoState {
            p,
            rho,
            w,
            objective_trace: trace,
        },
        best_p,
        objective: best,
        iterations,
        converged,
    })
}

fn signal_noise(problem: &AmplitudeProblem, p: &[f64]) -> (f64, f64) {
    let s = problem.h_d() + dot(problem.alpha(), p);
    let d = 1.0 + problem.beta().iter().zip(p).map(|(b, x)| b * x * x).sum::<f64>();
    (s, d)
}

/// Stationarity system `(w²(diag β + ααᵀ) + μ diag γ) p = c α` restricted to
/// elements with `α > 0`.
struct TrustRegionSystem<'a> {
    alpha: &'a [f64],
    beta: &'a [f64],
    gamma: &'a [f64],
    w2: f64,
    c: f64,
}

impl TrustRegionSystem<'_> {
    fn diag(&self, mu: f64) -> impl Iterator<Item = f64> + '_ {
        self.beta.iter().zip(self.gamma).map(move |(b, g)| self.w2 * b + mu * g)
    }

    /// `(D + vvᵀ)⁻¹ x` with `D = w²β + μγ`, `v = wα`.
    fn apply_inverse(&self, mu: f64, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = self.diag(mu).collect();
        let mut v_dinv_x = 0.0;
        let mut v_dinv_v = 0.0;
        for ((a, x), d) in self.alpha.iter().zip(x).zip(&d) {
            v_dinv_x += a * x / d;
            v_dinv_v += a * a / d;
        }
        v_dinv_x *= self.w2.sqrt();
        v_dinv_v *= self.w2;
        let coef = v_dinv_x / (1.0 + v_dinv_v) * self.w2.sqrt();
        x.iter()
            .zip(self.alpha)
            .zip(&d)
            .map(|((x, a), d)| (x - coef * a) / d)
            .collect()
    }

    fn solve(&self, mu: f64) -> Vec<f64> {
        // right-hand side is proportional to v, so the solve collapses
        let s: f64 = self.w2
            * self
                .alpha
                .iter()
                .zip(self.diag(mu))
                .map(|(a, d)| a * a / d)
                .sum::<f64>();
        self.alpha
            .iter()
            .zip(self.diag(mu))
            .map(|(a, d)| self.c * a / (d * (1.0 + s)))
            .collect()
    }

    fn weighted_norm_sq(&self, p: &[f64]) -> f64 {
        self.gamma.iter().zip(p).map(|(g, x)| g * x * x).sum()
    }

    /// `1 − 1/‖p(μ)‖_γ` and its derivative; decreasing in `μ`, nearly
    /// linear, zero on the boundary.
    fn secular(&self, mu: f64) -> (f64, f64) {
        let p = self.solve(mu);
        let phi = self.weighted_norm_sq(&p);
        let gp: Vec<f64> = self.gamma.iter().zip(&p).map(|(g, x)| g * x).collect();
        let dphi = -2.0 * dot(&gp, &self.apply_inverse(mu, &gp));
        (1.0 - phi.sqrt().recip(), dphi / (2.0 * phi.powf(1.5)))
    }
}
