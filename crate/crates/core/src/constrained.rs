//! Hardware-constrained variants: shared amplifiers per subarray, and
//! per-element amplitude caps in place of the total power budget.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{dot, AmplitudeProblem};
use crate::solver::{solve, SolveReport};

/// Disjoint, nonempty groups of element indices covering `0..N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubarrayPartition {
    groups: Vec<Vec<usize>>,
    n: usize,
}

impl SubarrayPartition {
    pub fn new(groups: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for (m, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(invalid(format!("subarray {m} is empty")));
            }
            for &k in group {
                if k >= n {
                    return Err(invalid(format!("subarray {m} names element {k}, but N = {n}")));
                }
                if std::mem::replace(&mut seen[k], true) {
                    return Err(invalid(format!("element {k} appears in more than one subarray")));
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(invalid(format!("element {k} belongs to no subarray")));
        }
        Ok(Self { groups, n })
    }

    /// One group per element.
    pub fn singletons(n: usize) -> Self {
        Self {
            groups: (0..n).map(|k| vec![k]).collect(),
            n,
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Spreads one amplitude per group back over its elements.
    pub fn expand(&self, group_amplitudes: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n];
        for (group, &value) in self.groups.iter().zip(group_amplitudes) {
            for &k in group {
                p[k] = value;
            }
        }
        p
    }
}

/// Per-element amplitude caps `p̄_n > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapVector {
    caps: Vec<f64>,
}

impl CapVector {
    pub fn new(caps: Vec<f64>) -> Result<Self> {
        if let Some(c) = caps.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(invalid(format!("caps must be finite and > 0, got {c}")));
        }
        Ok(Self { caps })
    }

    pub fn caps(&self) -> &[f64] {
        &self.caps
    }
}

/// Collapses each subarray to a single element with
/// `ᾱ_m = Σα_n`, `β̄_m = Σβ_n`, `γ̄_m = Σγ_n` over its members.
pub fn aggregate_subarrays(problem: &AmplitudeProblem, partition: &SubarrayPartition) -> Result<AmplitudeProblem> {
    if partition.n() != problem.n() {
        return Err(invalid(format!(
            "partition covers {} elements, problem has {}",
            partition.n(),
            problem.n()
        )));
    }
    let sum = |v: &[f64], group: &[usize]| group.iter().map(|&k| v[k]).sum::<f64>();
    let groups = partition.groups();
    AmplitudeProblem::new(
        problem.h_d(),
        groups.iter().map(|g| sum(problem.alpha(), g)).collect(),
        groups.iter().map(|g| sum(problem.beta(), g)).collect(),
        groups.iter().map(|g| sum(problem.gamma(), g)).collect(),
        problem.snr1(),
    )
}

/// Optimum under the subarray constraint, reported per element.
pub fn solve_subarrays(problem: &AmplitudeProblem, partition: &SubarrayPartition) -> Result<SolveReport> {
    let mut report = solve(&aggregate_subarrays(problem, partition)?)?;
    report.amplitudes = partition.expand(&report.amplitudes);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapSolution {
    pub amplitudes: Vec<f64>,
    /// Root of `h_d ρ + Σ p̄_n max(0, α_n ρ − β_n p̄_n) = 1`.
    pub rho: f64,
    pub objective: f64,
}

/// Optimum under `0 ≤ p_n ≤ p̄_n` (no total power constraint).
///
/// The left-hand side `g(ρ) = h_d ρ + Σ p̄_n max(0, α_n ρ − β_n p̄_n)` is
/// piecewise linear and nondecreasing with breakpoints `β_n p̄_n / α_n`; the
/// crossing `g(ρ) = 1` is found by a sorted scan and `p_k = min(α_k ρ/β_k, p̄_k)`.
pub fn solve_per_element_caps(problem: &AmplitudeProblem, caps: &CapVector) -> Result<CapSolution> {
    let caps = caps.caps();
    if caps.len() != problem.n() {
        return Err(invalid(format!("{} caps for {} elements", caps.len(), problem.n())));
    }
    let (h_d, alpha, beta) = (problem.h_d(), problem.alpha(), problem.beta());

    // (breakpoint, slope gained, intercept lost) for every coupled element
    let mut kinks: Vec<(f64, f64, f64)> = (0..problem.n())
        .filter(|&k| alpha[k] > 0.0)
        .map(|k| {
            (
                beta[k] * caps[k] / alpha[k],
                caps[k] * alpha[k],
                caps[k] * caps[k] * beta[k],
            )
        })
        .collect();
    if h_d == 0.0 && kinks.is_empty() {
        return Err(Error::NoSignal);
    }
    kinks.sort_by(|a, b| a.0.total_cmp(&b.0));

    // g(ρ) = slope·ρ − offset on the current segment
    let mut slope = h_d;
    let mut offset = 0.0;
    let mut rho = None;
    for &(point, gained, lost) in &kinks {
        if slope * point - offset >= 1.0 {
            rho = Some((1.0 + offset) / slope);
            break;
        }
        slope += gained;
        offset += lost;
    }
    let rho = rho.unwrap_or((1.0 + offset) / slope);

    let amplitudes: Vec<f64> = (0..problem.n())
        .map(|k| {
            if alpha[k] > 0.0 {
                (alpha[k] * rho / beta[k]).min(caps[k])
            } else {
                0.0
            }
        })
        .collect();
    let objective = problem.objective_unchecked(&amplitudes);
    Ok(CapSolution {
        amplitudes,
        rho,
        objective,
    })
}

/// KKT stationarity residuals `α_k/(h_d+Σαp) − β_k p_k/(1+Σβp²)` of the
/// cap-constrained problem; nonnegative everywhere and zero below the cap at
/// a KKT point.
pub fn cap_kkt_residuals(problem: &AmplitudeProblem, p: &[f64]) -> Vec<f64> {
    let signal = problem.h_d() + dot(problem.alpha(), p);
    let noise = 1.0 + problem.beta().iter().zip(p).map(|(b, x)| b * x * x).sum::<f64>();
    problem
        .alpha()
        .iter()
        .zip(problem.beta())
        .zip(p)
        .map(|((a, b), x)| a / signal - b * x / noise)
        .collect()
}
