//! Comparison architectures and prior-art algorithms.
//!
//! * [`relay`]: the amplify-and-forward relay optimum (no diagonal constraint).
//! * [`equal`]: every element shares one amplitude at full power.
//! * [`ao`]: alternating optimization over the amplitudes and two auxiliary
//!   scalars, with an exact trust-region amplitude step.
//! * [`dinkelbach`]: concave-over-convex fractional programming on the square
//!   root of the objective.

pub mod ao;
pub mod dinkelbach;
pub mod equal;
pub mod relay;

pub use ao::{ao_solve, AoOutcome, AoState};
pub use dinkelbach::{dinkelbach_solve, DinkelbachOutcome, DinkelbachState};
pub use equal::{equal_amplitude, EqualAmplitude};
pub use relay::{relay_optimum_snr, relay_total_snr};

use crate::model::AmplitudeProblem;

/// The shared starting point `p_n = 1/√(Σγ)`.
pub fn full_power_equal_start(problem: &AmplitudeProblem) -> Vec<f64> {
    let total: f64 = problem.gamma().iter().sum();
    vec![total.sqrt().recip(); problem.n()]
}
