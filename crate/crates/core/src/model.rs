//! Physical link description, unit-noise normalization, phase alignment and
//! the reduced amplitude-only problem.
//!
//! A [`Scenario`] holds the raw channels, powers and noise variances. After
//! [`normalize`] both noises have unit variance and the powers become the two
//! SNRs. Aligning every cascaded path with the direct link ([`optimal_phases`])
//! leaves a problem over nonnegative amplitudes only, described by the
//! coefficient vectors of [`AmplitudeProblem`]:
//!
//! ```text
//! maximize  (h_d + Σ α_n p_n)² / (1 + Σ β_n p_n²)
//! s.t.      Σ γ_n p_n² ≤ 1
//! ```

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Channel magnitudes below this are treated as exact zeros.
pub const ZERO_MAGNITUDE: f64 = 1e-300;

/// Raw single-antenna link assisted by an `N`-element active RIS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    h_d: Complex64,
    h1: Vec<Complex64>,
    h2: Vec<Complex64>,
    p1: f64,
    p2: f64,
    sigma1_sq: f64,
    sigma2_sq: f64,
}

impl Scenario {
    /// `h1` is the transmitter to RIS channel, `h2` the RIS to receiver
    /// channel, `p1`/`p2` the transmit and RIS power budgets and
    /// `sigma1_sq`/`sigma2_sq` the RIS and receiver noise variances.
    pub fn new(
        h_d: Complex64,
        h1: Vec<Complex64>,
        h2: Vec<Complex64>,
        p1: f64,
        p2: f64,
        sigma1_sq: f64,
        sigma2_sq: f64,
    ) -> Result<Self> {
        check_channels(h_d, &h1, &h2)?;
        for (name, v) in [("P1", p1), ("P2", p2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("sigma1_sq", sigma1_sq), ("sigma2_sq", sigma2_sq)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self {
            h_d,
            h1,
            h2,
            p1,
            p2,
            sigma1_sq,
            sigma2_sq,
        })
    }

    pub fn n(&self) -> usize {
        self.h1.len()
    }

    pub fn h_d(&self) -> Complex64 {
        self.h_d
    }

    pub fn h1(&self) -> &[Complex64] {
        &self.h1
    }

    pub fn h2(&self) -> &[Complex64] {
        &self.h2
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn sigma1_sq(&self) -> f64 {
        self.sigma1_sq
    }

    pub fn sigma2_sq(&self) -> f64 {
        self.sigma2_sq
    }

    /// Receive SNR of a physical (un-normalized) configuration:
    /// `P1 |h_d + h2ᵀΦh1|² / (σ1² ‖h2ᵀΦ‖² + σ2²)`.
    pub fn receive_snr(&self, config: &RisConfiguration) -> Result<f64> {
        self.check_config(config)?;
        let (gain, noise) = cascade(self.h_d, &self.h1, &self.h2, config);
        Ok(gain.norm_sqr() * self.p1 / (self.sigma1_sq * noise + self.sigma2_sq))
    }

    /// Power radiated by the RIS, `P1 ‖Φh1‖² + σ1² ‖Φ‖_F²`.
    pub fn ris_power(&self, config: &RisConfiguration) -> Result<f64> {
        self.check_config(config)?;
        Ok(config
            .amplitudes
            .iter()
            .zip(&self.h1)
            .map(|(p, h)| p * p * (self.p1 * h.norm_sqr() + self.sigma1_sq))
            .sum())
    }

    /// Converts a configuration expressed in normalized units back to the
    /// physical diagonal (amplitudes scale by σ2/σ1).
    pub fn to_physical(&self, normalized: &RisConfiguration) -> RisConfiguration {
        let scale = (self.sigma2_sq / self.sigma1_sq).sqrt();
        RisConfiguration {
            amplitudes: normalized.amplitudes.iter().map(|p| p * scale).collect(),
            phases: normalized.phases.clone(),
        }
    }

    fn check_config(&self, config: &RisConfiguration) -> Result<()> {
        if config.len() != self.n() {
            return Err(invalid(format!(
                "configuration has {} elements, scenario has {}",
                config.len(),
                self.n()
            )));
        }
        Ok(())
    }
}

/// Link in unit-noise form: noises have unit variance and the transmit and
/// RIS budgets are the SNRs `snr1 = P1/σ1²`, `snr2 = P2/σ2²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedScenario {
    h_d: Complex64,
    h1: Vec<Complex64>,
    h2: Vec<Complex64>,
    snr1: f64,
    snr2: f64,
}

impl NormalizedScenario {
    pub fn new(h_d: Complex64, h1: Vec<Complex64>, h2: Vec<Complex64>, snr1: f64, snr2: f64) -> Result<Self> {
        check_channels(h_d, &h1, &h2)?;
        for (name, v) in [("snr1", snr1), ("snr2", snr2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self {
            h_d,
            h1,
            h2,
            snr1,
            snr2,
        })
    }

    pub fn n(&self) -> usize {
        self.h1.len()
    }

    pub fn h_d(&self) -> Complex64 {
        self.h_d
    }

    pub fn h1(&self) -> &[Complex64] {
        &self.h1
    }

    pub fn h2(&self) -> &[Complex64] {
        &self.h2
    }

    pub fn snr1(&self) -> f64 {
        self.snr1
    }

    pub fn snr2(&self) -> f64 {
        self.snr2
    }

    /// Receive SNR `|h_d + h2ᵀΦh1|² / (1 + ‖h2ᵀΦ‖²) · snr1` for arbitrary
    /// phases.
    pub fn receive_snr(&self, config: &RisConfiguration) -> Result<f64> {
        if config.len() != self.n() {
            return Err(invalid(format!(
                "configuration has {} elements, scenario has {}",
                config.len(),
                self.n()
            )));
        }
        let (gain, noise) = cascade(self.h_d, &self.h1, &self.h2, config);
        Ok(gain.norm_sqr() / (1.0 + noise) * self.snr1)
    }

    /// Left-hand side of the normalized budget, `snr1 ‖Φh1‖² + ‖Φ‖_F²`;
    /// feasible when it does not exceed `snr2`.
    pub fn budget_used(&self, config: &RisConfiguration) -> f64 {
        config
            .amplitudes
            .iter()
            .zip(&self.h1)
            .map(|(p, h)| p * p * (self.snr1 * h.norm_sqr() + 1.0))
            .sum()
    }
}

/// Diagonal RIS response `Φ = diag(p_n e^{jφ_n})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RisConfiguration {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
}

impl RisConfiguration {
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(invalid(format!(
                "{} amplitudes but {} phases",
                amplitudes.len(),
                phases.len()
            )));
        }
        if let Some(p) = amplitudes.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(invalid(format!("amplitudes must be finite and >= 0, got {p}")));
        }
        if let Some(phi) = phases.iter().find(|p| !p.is_finite()) {
            return Err(invalid(format!("phases must be finite, got {phi}")));
        }
        Ok(Self { amplitudes, phases })
    }

    /// Amplitudes paired with the phase alignment of [`optimal_phases`].
    pub fn aligned(norm: &NormalizedScenario, amplitudes: Vec<f64>) -> Result<Self> {
        Self::new(amplitudes, optimal_phases(norm))
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Diagonal entries `p_n e^{jφ_n}`.
    pub fn diagonal(&self) -> Vec<Complex64> {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(&p, &phi)| Complex64::from_polar(p, phi))
            .collect()
    }
}

/// Reduced nonnegative amplitude problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeProblem {
    h_d: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    snr1: f64,
}

impl AmplitudeProblem {
    /// Validates `h_d, α, β ≥ 0`, `γ > 0`, equal lengths, `N ≥ 1` and that
    /// `β_n = 0` forces `α_n = 0`.
    pub fn new(h_d: f64, alpha: Vec<f64>, beta: Vec<f64>, gamma: Vec<f64>, snr1: f64) -> Result<Self> {
        let n = alpha.len();
        if n == 0 {
            return Err(invalid("problem needs at least one element"));
        }
        if beta.len() != n || gamma.len() != n {
            return Err(invalid(format!(
                "coefficient lengths differ: alpha {n}, beta {}, gamma {}",
                beta.len(),
                gamma.len()
            )));
        }
        if !(h_d.is_finite() && h_d >= 0.0) {
            return Err(invalid(format!("h_d must be finite and >= 0, got {h_d}")));
        }
        if !(snr1.is_finite() && snr1 >= 0.0) {
            return Err(invalid(format!("snr1 must be finite and >= 0, got {snr1}")));
        }
        for k in 0..n {
            let (a, b, g) = (alpha[k], beta[k], gamma[k]);
            if !(a.is_finite() && a >= 0.0 && b.is_finite() && b >= 0.0) {
                return Err(invalid(format!("alpha/beta must be finite and >= 0 at index {k}")));
            }
            if !(g.is_finite() && g > 0.0) {
                return Err(invalid(format!("gamma must be finite and > 0 at index {k}, got {g}")));
            }
            if b == 0.0 && a != 0.0 {
                return Err(invalid(format!("beta is zero but alpha is not at index {k}")));
            }
        }
        Ok(Self {
            h_d,
            alpha,
            beta,
            gamma,
            snr1,
        })
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn h_d(&self) -> f64 {
        self.h_d
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn snr1(&self) -> f64 {
        self.snr1
    }

    /// Copy of this problem with a different direct-link gain.
    pub fn with_h_d(&self, h_d: f64) -> Result<Self> {
        Self::new(
            h_d,
            self.alpha.clone(),
            self.beta.clone(),
            self.gamma.clone(),
            self.snr1,
        )
    }

    /// `(h_d + Σ α_n p_n)² / (1 + Σ β_n p_n²)`.
    pub fn objective(&self, p: &[f64]) -> Result<f64> {
        self.check_len(p)?;
        Ok(self.objective_unchecked(p))
    }

    /// Objective times `snr1`.
    pub fn receive_snr(&self, p: &[f64]) -> Result<f64> {
        Ok(self.objective(p)? * self.snr1)
    }

    /// `1 − Σ γ_n p_n²`; the amplitudes are feasible when this is nonnegative.
    pub fn power_margin(&self, p: &[f64]) -> Result<f64> {
        self.check_len(p)?;
        Ok(1.0 - self.power_used(p))
    }

    pub(crate) fn objective_unchecked(&self, p: &[f64]) -> f64 {
        let signal = self.h_d + dot(&self.alpha, p);
        let noise = 1.0 + self.beta.iter().zip(p).map(|(b, x)| b * x * x).sum::<f64>();
        signal * signal / noise
    }

    pub(crate) fn power_used(&self, p: &[f64]) -> f64 {
        self.gamma.iter().zip(p).map(|(g, x)| g * x * x).sum()
    }

    pub(crate) fn check_len(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.n() {
            return Err(invalid(format!(
                "amplitude vector has {} entries, problem has {}",
                p.len(),
                self.n()
            )));
        }
        Ok(())
    }
}

/// Rescales to unit noise: `snr1 = P1/σ1²`, `snr2 = P2/σ2²`,
/// `h_d ← (σ1/σ2) h_d`. Channels pass through unchanged.
pub fn normalize(scenario: &Scenario) -> NormalizedScenario {
    NormalizedScenario {
        h_d: scenario.h_d * (scenario.sigma1_sq / scenario.sigma2_sq).sqrt(),
        h1: scenario.h1.clone(),
        h2: scenario.h2.clone(),
        snr1: scenario.p1 / scenario.sigma1_sq,
        snr2: scenario.p2 / scenario.sigma2_sq,
    }
}

/// Phases aligning every cascaded path with the direct link,
/// `φ_n = ∠h_d − ∠[h2]_n − ∠[h1]_n`, reported in `[0, 2π)`.
///
/// The argument of a zero is taken as 0.
pub fn optimal_phases(norm: &NormalizedScenario) -> Vec<f64> {
    let direct = arg(norm.h_d);
    norm.h1
        .iter()
        .zip(&norm.h2)
        .map(|(&a, &b)| wrap_phase(direct - arg(b) - arg(a)))
        .collect()
}

/// Builds the amplitude problem: `α_n = |h1_n||h2_n|`, `β_n = |h2_n|²`,
/// `γ_n = (|h1_n|² snr1 + 1)/snr2`, `h_d ← |h_d|`.
pub fn reduce(norm: &NormalizedScenario) -> Result<AmplitudeProblem> {
    if norm.snr2 <= 0.0 {
        return Err(Error::DegenerateBudget);
    }
    let n = norm.n();
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    for (a, b) in norm.h1.iter().zip(&norm.h2) {
        let m1 = flush(a.norm());
        let m2 = flush(b.norm());
        alpha.push(m1 * m2);
        beta.push(m2 * m2);
        gamma.push((m1 * m1 * norm.snr1 + 1.0) / norm.snr2);
    }
    AmplitudeProblem::new(flush(norm.h_d.norm()), alpha, beta, gamma, norm.snr1)
}

/// Objective restricted to the first coordinate axis,
/// `(h_d + α₁p₁)² / (1 + β₁p₁²)`.
pub fn objective_on_ray(h_d: f64, alpha1: f64, beta1: f64, p1: f64) -> f64 {
    let s = h_d + alpha1 * p1;
    s * s / (1.0 + beta1 * p1 * p1)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn arg(z: Complex64) -> f64 {
    if z.norm() < ZERO_MAGNITUDE {
        0.0
    } else {
        z.arg()
    }
}

fn flush(m: f64) -> f64 {
    if m < ZERO_MAGNITUDE {
        0.0
    } else {
        m
    }
}

/// Maps an angle to `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn cascade(h_d: Complex64, h1: &[Complex64], h2: &[Complex64], config: &RisConfiguration) -> (Complex64, f64) {
    let mut gain = h_d;
    let mut noise = 0.0;
    for ((a, b), phi) in h1.iter().zip(h2).zip(config.diagonal()) {
        gain += b * phi * a;
        noise += (b * phi).norm_sqr();
    }
    (gain, noise)
}

fn check_channels(h_d: Complex64, h1: &[Complex64], h2: &[Complex64]) -> Result<()> {
    if h1.is_empty() {
        return Err(invalid("the RIS needs at least one element"));
    }
    if h1.len() != h2.len() {
        return Err(invalid(format!("h1 has {} entries but h2 has {}", h1.len(), h2.len())));
    }
    let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
    if !finite(&h_d) || !h1.iter().all(finite) || !h2.iter().all(finite) {
        return Err(invalid("channel coefficients must be finite"));
    }
    Ok(())
}
