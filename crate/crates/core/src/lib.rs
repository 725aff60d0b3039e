//! Globally optimal amplitude and phase configuration of an active
//! reconfigurable intelligent surface on a single-antenna link, together with
//! the baselines it is compared against and independent verifiers.
//!
//! The usual path is [`normalize`] → [`reduce`] → [`solve`]:
//!
//! ```
//! use num_complex::Complex64;
//! use ris_opt_core::{normalize, reduce, solve, Scenario};
//!
//! let one = Complex64::new(1.0, 0.0);
//! let scenario = Scenario::new(Complex64::new(0.0, 0.0), vec![one], vec![one], 1.0, 1.0, 1.0, 1.0)?;
//! let report = solve(&reduce(&normalize(&scenario))?)?;
//! assert!((report.receive_snr - 1.0 / 3.0).abs() < 1e-12);
//! # Ok::<(), ris_opt_core::Error>(())
//! ```

pub mod baselines;
pub mod constrained;
pub mod error;
pub mod experiment;
pub mod model;
pub mod oracle;
pub mod scenario_file;
pub mod solver;

mod roots;

pub use constrained::{CapVector, SubarrayPartition};
pub use error::{Error, Result};
pub use model::{normalize, optimal_phases, reduce, AmplitudeProblem, NormalizedScenario, RisConfiguration, Scenario};
pub use solver::{solve, Regime, SolveReport};
