use serde::{Deserialize, Serialize};

use super::full_power_equal_start;
use crate::model::AmplitudeProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualAmplitude {
    /// Common amplitude `1/√(Σγ)`.
    pub p: f64,
    pub receive_snr: f64,
}

/// Equal-amplitude configuration at full RIS power.
///
/// With `h_d = 0` the SNR is `(Σα)²p²/(1 + (Σβ)p²) · snr1`; with a direct
/// link the same amplitude is evaluated with the full objective.
pub fn equal_amplitude(problem: &AmplitudeProblem) -> EqualAmplitude {
    let amplitudes = full_power_equal_start(problem);
    EqualAmplitude {
        p: amplitudes[0],
        receive_snr: problem.objective_unchecked(&amplitudes) * problem.snr1(),
    }
}
