//! Independent verifiers: brute-force maximization of the amplitude problem
//! and direct checks of the architecture ordering inequalities.
//!
//! Nothing here calls into [`crate::solver`]; the objective, projections and
//! searches are written out separately so the two can certify each other.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constrained::CapVector;
use crate::error::{invalid, Error, Result};
use crate::model::{AmplitudeProblem, NormalizedScenario};

/// Largest `N` the brute-force search accepts.
pub const MAX_ORACLE_ELEMENTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleConstraint {
    /// `Σ γ_n p_n² ≤ 1`.
    Ellipsoid,
    /// `0 ≤ p_n ≤ p̄_n`.
    Box(CapVector),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleResolution {
    /// Uniform grid with this step (boundary points included).
    Grid(f64),
    /// Projected gradient ascent from `starts` random feasible points.
    MultiStart { starts: usize, seed: u64 },
    /// Derivative-sign bisection; `N = 1` only.
    Bisection1D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMethod {
    Grid,
    MultiStartProjectedAscent,
    Bisection1D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_p: Vec<f64>,
    pub best_objective: f64,
    /// Grid step, start count, or bisection width.
    pub resolution: f64,
    pub method: OracleMethod,
}

pub fn brute_force_optimum(
    problem: &AmplitudeProblem,
    constraint: &OracleConstraint,
    resolution: OracleResolution,
) -> Result<OracleResult> {
    let n = problem.n();
    if n > MAX_ORACLE_ELEMENTS {
        return Err(Error::TooLarge {
            n,
            limit: MAX_ORACLE_ELEMENTS,
        });
    }
    if let OracleConstraint::Box(caps) = constraint {
        if caps.caps().len() != n {
            return Err(invalid("cap vector length differs from problem size"));
        }
    }
    let domain = Domain::new(problem, constraint);
    match resolution {
        OracleResolution::Grid(step) => {
            if !(step.is_finite() && step > 0.0) {
                return Err(invalid(format!("grid step must be positive, got {step}")));
            }
            Ok(grid_search(&domain, step))
        }
        OracleResolution::MultiStart { starts, seed } => {
            if starts == 0 {
                return Err(invalid("multi-start needs at least one start"));
            }
            Ok(multi_start(&domain, starts, seed))
        }
        OracleResolution::Bisection1D => {
            if n != 1 {
                return Err(invalid("bisection oracle handles a single element only"));
            }
            Ok(bisection_1d(&domain))
        }
    }
}

/// Everything the searches need, copied out of the problem.
struct Domain {
    h_d: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    caps: Option<Vec<f64>>,
}

impl Domain {
    fn new(problem: &AmplitudeProblem, constraint: &OracleConstraint) -> Self {
        Self {
            h_d: problem.h_d(),
            alpha: problem.alpha().to_vec(),
            beta: problem.beta().to_vec(),
            gamma: problem.gamma().to_vec(),
            caps: match constraint {
                OracleConstraint::Ellipsoid => None,
                OracleConstraint::Box(c) => Some(c.caps().to_vec()),
            },
        }
    }

    fn n(&self) -> usize {
        self.alpha.len()
    }

    fn parts(&self, p: &[f64]) -> (f64, f64) {
        let mut s = self.h_d;
        let mut d = 1.0;
        for ((a, b), x) in self.alpha.iter().zip(&self.beta).zip(p) {
            s += a * x;
            d += b * x * x;
        }
        (s, d)
    }

    fn value(&self, p: &[f64]) -> f64 {
        let (s, d) = self.parts(p);
        s * s / d
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let (s, d) = self.parts(p);
        (0..p.len())
            .map(|k| 2.0 * self.alpha[k] * s / d - 2.0 * self.beta[k] * p[k] * s * s / (d * d))
            .collect()
    }

    /// Upper limit of coordinate `k` given the budget left by the others.
    fn upper(&self, k: usize, remaining: f64) -> f64 {
        match &self.caps {
            Some(c) => c[k],
            None => (remaining.max(0.0) / self.gamma[k]).sqrt(),
        }
    }

    fn spend(&self, k: usize, x: f64, remaining: f64) -> f64 {
        match &self.caps {
            Some(_) => remaining,
            None => remaining - self.gamma[k] * x * x,
        }
    }

    fn project(&self, y: &[f64]) -> Vec<f64> {
        let clipped: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
        match &self.caps {
            Some(c) => clipped.iter().zip(c).map(|(v, c)| v.min(*c)).collect(),
            None => project_ellipsoid_bisect(&clipped, &self.gamma),
        }
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match &self.caps {
            Some(c) => c.iter().map(|c| rng.random_range(0.0..=*c)).collect(),
            None => {
                let u: Vec<f64> = (0..self.n()).map(|_| rng.random_range(0.0..1.0)).collect();
                let used: f64 = u.iter().zip(&self.gamma).map(|(x, g)| g * x * x).sum();
                let radius: f64 = rng.random_range(0.0..=1.0);
                if used == 0.0 {
                    u
                } else {
                    u.iter().map(|x| x * radius / used.sqrt()).collect()
                }
            }
        }
    }
}

fn axis_values(upper: f64, step: f64) -> Vec<f64> {
    let count = (upper / step).floor() as usize;
    let mut values: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
    if values.last().is_some_and(|&v| v < upper) {
        values.push(upper);
    }
    values
}

fn grid_search(domain: &Domain, step: f64) -> OracleResult {
    fn descend(domain: &Domain, step: f64, k: usize, remaining: f64, p: &mut Vec<f64>, best: &mut (f64, Vec<f64>)) {
        if k == domain.n() {
            let v = domain.value(p);
            if v > best.0 {
                *best = (v, p.clone());
            }
            return;
        }
        for x in axis_values(domain.upper(k, remaining), step) {
            p[k] = x;
            descend(domain, step, k + 1, domain.spend(k, x, remaining), p, best);
        }
        p[k] = 0.0;
    }

    let n = domain.n();
    let (best_objective, best_p) = axis_values(domain.upper(0, 1.0), step)
        .into_par_iter()
        .map(|x| {
            let mut p = vec![0.0; n];
            p[0] = x;
            let mut best = (f64::NEG_INFINITY, p.clone());
            descend(domain, step, 1, domain.spend(0, x, 1.0), &mut p, &mut best);
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, vec![0.0; n]),
            |a, b| if b.0 > a.0 { b } else { a },
        );
    OracleResult {
        best_p,
        best_objective,
        resolution: step,
        method: OracleMethod::Grid,
    }
}

fn multi_start(domain: &Domain, starts: usize, seed: u64) -> OracleResult {
    let n = domain.n();
    let (best_objective, best_p) = (0..starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            ascend(domain, domain.random_point(&mut rng))
        })
        .reduce(
            || (f64::NEG_INFINITY, vec![0.0; n]),
            |a, b| if b.0 > a.0 { b } else { a },
        );
    OracleResult {
        best_p,
        best_objective,
        resolution: starts as f64,
        method: OracleMethod::MultiStartProjectedAscent,
    }
}

fn ascend(domain: &Domain, start: Vec<f64>) -> (f64, Vec<f64>) {
    let mut p = domain.project(&start);
    let mut value = domain.value(&p);
    let mut step = 1.0;
    for _ in 0..20_000 {
        let g = domain.gradient(&p);
        let mut accepted = false;
        while step > 1e-18 {
            let trial: Vec<f64> = p.iter().zip(&g).map(|(x, d)| x + step * d).collect();
            let next = domain.project(&trial);
            let moved: f64 = next.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = domain.value(&next);
            if v >= value + 1e-4 * moved / step {
                let done = moved.sqrt() <= 1e-13;
                p = next;
                value = v;
                step = (step * 2.0).min(1.0);
                accepted = !done;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (value, p)
}

/// Projection onto `{x ≥ 0 : Σγx² ≤ 1}` by bisection on the multiplier.
fn project_ellipsoid_bisect(y: &[f64], gamma: &[f64]) -> Vec<f64> {
    let used = |mu: f64| -> f64 {
        y.iter()
            .zip(gamma)
            .map(|(x, g)| {
                let v = x / (1.0 + mu * g);
                g * v * v
            })
            .sum()
    };
    if used(0.0) <= 1.0 {
        return y.to_vec();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while used(hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if used(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    y.iter().zip(gamma).map(|(x, g)| x / (1.0 + hi * g)).collect()
}

fn bisection_1d(domain: &Domain) -> OracleResult {
    let upper = domain.upper(0, 1.0);
    // the ray objective rises then falls: bisect the derivative sign
    let slope = |p: f64| domain.gradient(&[p])[0];
    let (mut lo, mut hi) = (0.0, upper);
    let best = if slope(upper) >= 0.0 {
        upper
    } else if slope(0.0) <= 0.0 {
        0.0
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    OracleResult {
        best_objective: domain.value(&[best]),
        best_p: vec![best],
        resolution: hi - lo,
        method: OracleMethod::Bisection1D,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperadditivityVerdict {
    /// `g(x₁,y₁) + g(x₂,y₂)` with `g(x,y) = xy/(1+x+y)`.
    pub lhs: f64,
    /// `g(x₁+x₂, y₁+y₂)`.
    pub rhs: f64,
    /// `(x₁y₂−x₂y₁)² + x₁y₂(x₁+y₂+1) + x₂y₁(x₂+y₁+1)`, the cleared-denominator
    /// gap; nonnegative.
    pub margin: f64,
    pub holds: bool,
    /// Gap is exactly zero, i.e. `x₁y₂ = x₂y₁ = 0`.
    pub equality: bool,
}

/// Checks superadditivity of `g(x,y) = xy/(1+x+y)` on one pair of points.
pub fn superadditivity_check(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<SuperadditivityVerdict> {
    if [x1, y1, x2, y2].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("superadditivity inputs must be finite and >= 0"));
    }
    let g = |x: f64, y: f64| x * y / (1.0 + x + y);
    let lhs = g(x1, y1) + g(x2, y2);
    let rhs = g(x1 + x2, y1 + y2);
    let cross = x1 * y2 - x2 * y1;
    let margin = cross * cross + x1 * y2 * (x1 + y2 + 1.0) + x2 * y1 * (x2 + y1 + 1.0);
    Ok(SuperadditivityVerdict {
        lhs,
        rhs,
        margin,
        holds: lhs <= rhs * (1.0 + 1e-12) && margin >= 0.0,
        equality: margin == 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingVerdict {
    pub equal: f64,
    pub optimal: f64,
    pub relay: f64,
    pub equal_le_optimal: bool,
    pub optimal_le_relay: bool,
    /// No pair `i ≠ j` has both `h1_i ≠ 0` and `h2_j ≠ 0`: either hop is
    /// entirely zero, or both live on the same single element.
    pub optimal_equals_relay: bool,
    /// `|h1_n h2_n| / (|h1_n|²snr1 + |h2_n|²snr2 + 1)` is the same for every
    /// element (relative tolerance 1e-12).
    pub equal_equals_optimal: bool,
}

/// Evaluates the three no-direct-link SNR formulas from the channels alone
/// and checks `equal ≤ optimal ≤ relay` with 1e-12 relative slack.
///
/// The direct link is ignored.
pub fn snr_ordering_check(norm: &NormalizedScenario) -> OrderingVerdict {
    let (s1, s2) = (norm.snr1(), norm.snr2());
    let n = norm.n() as f64;
    let m1: Vec<f64> = norm.h1().iter().map(|h| h.norm()).collect();
    let m2: Vec<f64> = norm.h2().iter().map(|h| h.norm()).collect();
    let g1: f64 = m1.iter().map(|m| m * m).sum();
    let g2: f64 = m2.iter().map(|m| m * m).sum();
    let coupling: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| a * b).collect();
    let per_element: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| a * a * s1 + b * b * s2 + 1.0).collect();

    let equal = coupling.iter().sum::<f64>().powi(2) / (g1 * s1 + g2 * s2 + n) * s1 * s2;
    let optimal = coupling.iter().zip(&per_element).map(|(c, d)| c * c / d).sum::<f64>() * s1 * s2;
    let relay = g1 * g2 / (g1 * s1 + g2 * s2 + 1.0) * s1 * s2;

    let ratios: Vec<f64> = coupling.iter().zip(&per_element).map(|(c, d)| c / d).collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let slack = 1e-12;
    OrderingVerdict {
        equal,
        optimal,
        relay,
        equal_le_optimal: equal <= optimal + slack * optimal.max(f64::MIN_POSITIVE),
        optimal_le_relay: optimal <= relay + slack * relay.max(f64::MIN_POSITIVE),
        optimal_equals_relay: relay_bound_tight(&m1, &m2),
        equal_equals_optimal: hi - lo <= slack * hi,
    }
}

fn relay_bound_tight(m1: &[f64], m2: &[f64]) -> bool {
    let support = |m: &[f64]| -> Vec<usize> { (0..m.len()).filter(|&k| m[k] > 0.0).collect() };
    let (s1, s2) = (support(m1), support(m2));
    s1.is_empty() || s2.is_empty() || (s1.len() == 1 && s1 == s2)
}
