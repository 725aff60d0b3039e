//! Monte Carlo harness: Rayleigh channel draws, per-realization evaluation of
//! every architecture, and CSV output of the averaged receive SNR.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{ao_solve, dinkelbach_solve, equal_amplitude, relay_total_snr};
use crate::error::{invalid, Error, Result};
use crate::model::{normalize, objective_on_ray, reduce, NormalizedScenario, Scenario};
use crate::solver::solve;

/// AO sweep cap used by the harness.
pub const AO_MAX_ITERATIONS: usize = 2000;
/// Relative surrogate change at which AO stops.
pub const AO_TOLERANCE: f64 = 1e-12;
/// Outer tolerance for Dinkelbach in the harness.
pub const DINKELBACH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Optimal,
    Equal,
    Relay,
    Ao,
    Dinkelbach,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Optimal,
        Algorithm::Equal,
        Algorithm::Relay,
        Algorithm::Ao,
        Algorithm::Dinkelbach,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Optimal => "optimal",
            Algorithm::Equal => "equal",
            Algorithm::Relay => "relay",
            Algorithm::Ao => "ao",
            Algorithm::Dinkelbach => "dinkelbach",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AvgDomain {
    /// Mean of linear SNR, then converted to dB.
    #[default]
    Linear,
    /// Mean of per-realization dB values.
    Db,
}

impl FromStr for AvgDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(AvgDomain::Linear),
            "db" => Ok(AvgDomain::Db),
            other => Err(invalid(format!("unknown averaging domain {other:?}"))),
        }
    }
}

/// A fixed dB value or an inclusive `start..=stop` range with `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DbAxis {
    Value(f64),
    Range { start: f64, stop: f64, step: f64 },
}

impl DbAxis {
    pub fn points(&self) -> Result<Vec<f64>> {
        match *self {
            DbAxis::Value(v) if v.is_finite() => Ok(vec![v]),
            DbAxis::Value(v) => Err(invalid(format!("dB value must be finite, got {v}"))),
            DbAxis::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0) {
                    return Err(invalid("sweep range needs finite start/stop and a positive step"));
                }
                if stop < start {
                    return Err(invalid(format!("empty sweep range {start}..{stop}")));
                }
                // integer count keeps the grid free of accumulated drift
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=count).map(|k| start + k as f64 * step).collect())
            }
        }
    }
}

fn default_h_d() -> f64 {
    0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub n_elements: usize,
    pub snr1_db: DbAxis,
    pub snr2_db: DbAxis,
    #[serde(default = "default_h_d")]
    pub h_d: f64,
    pub realizations: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub avg_domain: AvgDomain,
    /// Per-entry variance of the Rayleigh draws; `n_elements` when absent.
    #[serde(default)]
    pub channel_variance: Option<f64>,
    #[serde(default)]
    pub output: Option<String>,
}

impl BenchmarkConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| invalid(format!("bad config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elements == 0 {
            return Err(invalid("n_elements must be at least 1"));
        }
        if self.realizations == 0 {
            return Err(invalid("realizations must be at least 1"));
        }
        if !(self.h_d.is_finite() && self.h_d >= 0.0) {
            return Err(invalid(format!("h_d must be finite and >= 0, got {}", self.h_d)));
        }
        if let Some(v) = self.channel_variance {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("channel_variance must be positive, got {v}")));
            }
        }
        self.snr1_db.points()?;
        self.snr2_db.points()?;
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        self.channel_variance.unwrap_or(self.n_elements as f64)
    }

    /// All `(snr1_db, snr2_db)` pairs, `snr1` varying slowest.
    pub fn operating_points(&self) -> Result<Vec<(f64, f64)>> {
        let s1 = self.snr1_db.points()?;
        let s2 = self.snr2_db.points()?;
        Ok(s1.iter().flat_map(|&a| s2.iter().map(move |&b| (a, b))).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub architecture: String,
    pub snr1_db: f64,
    pub snr2_db: f64,
    pub h_d: f64,
    pub mean_snr_db: f64,
    /// Realizations that entered the mean.
    pub realizations: usize,
    /// Realizations on which the algorithm failed and was excluded.
    pub failures: usize,
    pub seed: u64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Channels of realization `index`: i.i.d. entries `√(variance/2)(g_re + j g_im)`.
///
/// The generator is ChaCha8 keyed by `seed` with the realization index as the
/// stream number, so any realization can be regenerated on its own.
pub fn generate_rayleigh(seed: u64, index: u64, n: usize, variance: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let scale = (variance / 2.0).sqrt();
    let mut draw = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(scale * re, scale * im)
    };
    let h1 = (0..n).map(|_| draw()).collect();
    let h2 = (0..n).map(|_| draw()).collect();
    (h1, h2)
}

/// Builds the unit-noise scenario of one realization.
pub fn realization_scenario(
    config: &BenchmarkConfig,
    snr1_db: f64,
    snr2_db: f64,
    index: u64,
) -> Result<NormalizedScenario> {
    let (h1, h2) = generate_rayleigh(config.seed, index, config.n_elements, config.variance());
    let scenario = Scenario::new(
        Complex64::new(config.h_d, 0.0),
        h1,
        h2,
        db_to_linear(snr1_db),
        db_to_linear(snr2_db),
        1.0,
        1.0,
    )?;
    Ok(normalize(&scenario))
}

/// Receive SNR (linear) reached by `algorithm` on one scenario.
pub fn evaluate(norm: &NormalizedScenario, algorithm: Algorithm) -> Result<f64> {
    if algorithm == Algorithm::Relay {
        return Ok(relay_total_snr(norm));
    }
    let problem = match reduce(norm) {
        Ok(problem) => problem,
        // no RIS budget: only the direct link is left
        Err(Error::DegenerateBudget) => return Ok(norm.h_d().norm_sqr() * norm.snr1()),
        Err(e) => return Err(e),
    };
    let objective = match algorithm {
        Algorithm::Optimal => match solve(&problem) {
            Ok(report) => report.objective,
            Err(Error::NoSignal) => problem.h_d() * problem.h_d(),
            Err(e) => return Err(e),
        },
        Algorithm::Equal => return Ok(equal_amplitude(&problem).receive_snr),
        Algorithm::Ao => ao_solve(&problem, AO_MAX_ITERATIONS, AO_TOLERANCE)?.objective,
        Algorithm::Dinkelbach => match dinkelbach_solve(&problem, DINKELBACH_TOLERANCE) {
            Ok(outcome) => outcome.objective,
            Err(Error::NoSignal) => 0.0,
            Err(e) => return Err(e),
        },
        Algorithm::Relay => unreachable!(),
    };
    Ok(objective * problem.snr1())
}

/// Per-realization receive SNRs at one operating point, in index order; one
/// inner vector per realization, aligned with `config.algorithms`.
pub fn realization_snrs(config: &BenchmarkConfig, snr1_db: f64, snr2_db: f64) -> Result<Vec<Vec<Result<f64>>>> {
    config.validate()?;
    (0..config.realizations as u64)
        .into_par_iter()
        .map(|index| {
            let norm = realization_scenario(config, snr1_db, snr2_db, index)?;
            Ok(config.algorithms.iter().map(|&a| evaluate(&norm, a)).collect())
        })
        .collect()
}

/// Neumaier-compensated sum, taken in slice order.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Mean of linear SNR values, returned in dB.
pub fn mean_snr_db(values: &[f64], domain: AvgDomain) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let count = values.len() as f64;
    match domain {
        AvgDomain::Linear => linear_to_db(compensated_sum(values) / count),
        AvgDomain::Db => {
            let db: Vec<f64> = values.iter().map(|&v| linear_to_db(v)).collect();
            compensated_sum(&db) / count
        }
    }
}

pub fn run_benchmark(config: &BenchmarkConfig) -> Result<Vec<BenchmarkRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for (snr1_db, snr2_db) in config.operating_points()? {
        let per_realization = realization_snrs(config, snr1_db, snr2_db)?;
        for (k, &algorithm) in config.algorithms.iter().enumerate() {
            let values: Vec<f64> = per_realization
                .iter()
                .filter_map(|r| r[k].as_ref().ok().copied())
                .collect();
            rows.push(BenchmarkRow {
                architecture: algorithm.label().to_string(),
                snr1_db,
                snr2_db,
                h_d: config.h_d,
                mean_snr_db: mean_snr_db(&values, config.avg_domain),
                realizations: values.len(),
                failures: per_realization.len() - values.len(),
                seed: config.seed,
            });
        }
    }
    Ok(rows)
}

/// Sweep over `snr1_db`: one row per `(snr1_db, architecture)`.
pub fn sweep_snr(config: &BenchmarkConfig) -> Result<Vec<BenchmarkRow>> {
    if !matches!(config.snr1_db, DbAxis::Range { .. }) {
        return Err(invalid("sweep needs a range for snr1_db"));
    }
    if config.snr2_db.points()?.len() != 1 {
        return Err(invalid("sweep needs a single snr2_db value"));
    }
    run_benchmark(config)
}

pub const BENCHMARK_HEADER: &str = "architecture,snr1_db,snr2_db,h_d,mean_snr_db,realizations,failures,seed";

pub fn rows_to_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from(BENCHMARK_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.architecture, r.snr1_db, r.snr2_db, r.h_d, r.mean_snr_db, r.realizations, r.failures, r.seed
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayParameters {
    pub h_d: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub p_max: f64,
    pub steps: usize,
}

impl Default for RayParameters {
    fn default() -> Self {
        Self {
            h_d: 1.0,
            alpha1: 1.0,
            beta1: 1.0,
            p_max: 10.0,
            steps: 1001,
        }
    }
}

/// Samples of the single-element objective on `[0, p_max]`.
pub fn ray_profile(params: &RayParameters) -> Result<Vec<(f64, f64)>> {
    let RayParameters {
        h_d,
        alpha1,
        beta1,
        p_max,
        steps,
    } = *params;
    if steps < 2 {
        return Err(invalid("ray profile needs at least two samples"));
    }
    if !(p_max.is_finite() && p_max > 0.0) {
        return Err(invalid(format!("p_max must be positive, got {p_max}")));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            let p = p_max * k as f64 / last;
            (p, objective_on_ray(h_d, alpha1, beta1, p))
        })
        .collect())
}

pub fn emit_ray_profile(params: &RayParameters) -> Result<String> {
    let mut out = String::from("p1,objective\n");
    for (p, v) in ray_profile(params)? {
        let _ = writeln!(out, "{p},{v}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(algorithms: Vec<Algorithm>) -> BenchmarkConfig {
        BenchmarkConfig {
            n_elements: 4,
            snr1_db: DbAxis::Value(10.0),
            snr2_db: DbAxis::Value(10.0),
            h_d: 0.0,
            realizations: 50,
            seed: 7,
            algorithms,
            avg_domain: AvgDomain::Linear,
            channel_variance: None,
            output: None,
        }
    }

    #[test]
    fn rayleigh_is_deterministic_and_indexed() {
        let a = generate_rayleigh(1, 5, 8, 8.0);
        assert_eq!(a, generate_rayleigh(1, 5, 8, 8.0));
        assert_ne!(a, generate_rayleigh(1, 6, 8, 8.0));
        assert_ne!(a, generate_rayleigh(2, 5, 8, 8.0));
    }

    #[test]
    fn rayleigh_power_matches_variance() {
        let n = 4;
        let draws = 25_000;
        let total: f64 = (0..draws)
            .map(|i| {
                let (h1, h2) = generate_rayleigh(11, i, n, n as f64);
                h1.iter().chain(&h2).map(|h| h.norm_sqr()).sum::<f64>()
            })
            .sum();
        let mean = total / (draws as f64 * 2.0 * n as f64);
        assert!((mean - n as f64).abs() < 0.02 * n as f64, "mean {mean}");
    }

    #[test]
    fn axis_points() {
        assert_eq!(DbAxis::Value(3.0).points().unwrap(), vec![3.0]);
        let r = DbAxis::Range {
            start: -10.0,
            stop: 10.0,
            step: 5.0,
        };
        assert_eq!(r.points().unwrap(), vec![-10.0, -5.0, 0.0, 5.0, 10.0]);
        let bad = DbAxis::Range {
            start: 1.0,
            stop: 0.0,
            step: 1.0,
        };
        assert!(bad.points().is_err());
    }

    #[test]
    fn config_parses_scalar_and_range() {
        let c = BenchmarkConfig::from_json(
            r#"{"n_elements":4,"snr1_db":{"start":0,"stop":10,"step":5},"snr2_db":10,
                "realizations":3,"seed":1,"algorithms":["optimal","relay"]}"#,
        )
        .unwrap();
        assert_eq!(c.operating_points().unwrap().len(), 3);
        assert_eq!(c.variance(), 4.0);
        assert_eq!(c.avg_domain, AvgDomain::Linear);
        assert!(BenchmarkConfig::from_json(r#"{"n_elements":0}"#).is_err());
    }

    #[test]
    fn relay_dominates_optimal_row_wise() {
        let c = config(vec![Algorithm::Optimal, Algorithm::Relay, Algorithm::Equal]);
        for r in realization_snrs(&c, 10.0, 10.0).unwrap() {
            let (opt, relay, eq) = (
                *r[0].as_ref().unwrap(),
                *r[1].as_ref().unwrap(),
                *r[2].as_ref().unwrap(),
            );
            assert!(eq <= opt * (1.0 + 1e-12) && opt <= relay * (1.0 + 1e-12));
        }
        let rows = run_benchmark(&c).unwrap();
        assert!(rows[1].mean_snr_db >= rows[0].mean_snr_db);
    }

    #[test]
    fn benchmark_is_reproducible() {
        let c = config(Algorithm::ALL.to_vec());
        let a = rows_to_csv(&run_benchmark(&c).unwrap());
        assert_eq!(a, rows_to_csv(&run_benchmark(&c).unwrap()));
        assert_eq!(a.lines().count(), 1 + Algorithm::ALL.len());
    }

    #[test]
    fn empty_algorithm_set_gives_header_only() {
        let mut c = config(vec![]);
        c.snr1_db = DbAxis::Range {
            start: 0.0,
            stop: 10.0,
            step: 10.0,
        };
        let csv = rows_to_csv(&sweep_snr(&c).unwrap());
        assert_eq!(csv, format!("{BENCHMARK_HEADER}\n"));
    }

    #[test]
    fn averaging_domains() {
        let v = [1.0, 100.0];
        assert!((mean_snr_db(&v, AvgDomain::Linear) - linear_to_db(50.5)).abs() < 1e-12);
        assert!((mean_snr_db(&v, AvgDomain::Db) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_budget_falls_back_to_direct_link() {
        let norm = NormalizedScenario::new(
            Complex64::new(2.0, 0.0),
            vec![Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0)],
            3.0,
            0.0,
        )
        .unwrap();
        for a in [
            Algorithm::Optimal,
            Algorithm::Equal,
            Algorithm::Ao,
            Algorithm::Dinkelbach,
        ] {
            assert_eq!(evaluate(&norm, a).unwrap(), 12.0);
        }
    }

    #[test]
    fn ray_profile_examples() {
        let rows = ray_profile(&RayParameters {
            p_max: 1.0,
            steps: 2,
            ..RayParameters::default()
        })
        .unwrap();
        assert_eq!(rows, vec![(0.0, 1.0), (1.0, 2.0)]);
        let tail = ray_profile(&RayParameters {
            p_max: 1e6,
            steps: 2,
            ..RayParameters::default()
        })
        .unwrap();
        assert!((tail[1].1 - 1.0).abs() < 1e-5);
        assert!(emit_ray_profile(&RayParameters::default())
            .unwrap()
            .starts_with("p1,objective\n0,1\n"));
        assert!(ray_profile(&RayParameters {
            steps: 1,
            ..RayParameters::default()
        })
        .is_err());
    }
}
