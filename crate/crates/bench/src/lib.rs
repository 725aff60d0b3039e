//! Fixtures shared by the benchmarks.

use num_complex::Complex64;
use ris_opt_core::experiment::{db_to_linear, generate_rayleigh};
use ris_opt_core::{reduce, AmplitudeProblem, NormalizedScenario};

/// Rayleigh instance with unit-variance entries at the given SNRs (dB).
pub fn rayleigh_problem(n: usize, h_d: f64, snr1_db: f64, snr2_db: f64, seed: u64) -> AmplitudeProblem {
    let (h1, h2) = generate_rayleigh(seed, 0, n, 1.0);
    let norm = NormalizedScenario::new(
        Complex64::new(h_d, 0.0),
        h1,
        h2,
        db_to_linear(snr1_db),
        db_to_linear(snr2_db),
    )
    .expect("generated channels are finite");
    reduce(&norm).expect("snr2 is positive")
}
