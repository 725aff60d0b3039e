//! JSON scenario files.
//!
//! ```json
//! { "h_d": [1, 0], "h1": [[1, 0], [0, 1]], "h2": [[2, 0], [1, 1]],
//!   "snr1_db": 10, "snr2_db": 3, "caps": [1.5, 1.5] }
//! ```
//!
//! Powers are given either physically (`P1`, `P2`, `sigma1_sq`, `sigma2_sq`)
//! or as `snr1_db`/`snr2_db`, in which case both noise variances are 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constrained::{CapVector, SubarrayPartition};
use crate::error::{invalid, Result};
use crate::experiment::db_to_linear;
use crate::model::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub h_d: [f64; 2],
    pub h1: Vec<[f64; 2]>,
    pub h2: Vec<[f64; 2]>,
    #[serde(rename = "P1", default)]
    pub p1: Option<f64>,
    #[serde(rename = "P2", default)]
    pub p2: Option<f64>,
    #[serde(default)]
    pub sigma1_sq: Option<f64>,
    #[serde(default)]
    pub sigma2_sq: Option<f64>,
    #[serde(default)]
    pub snr1_db: Option<f64>,
    #[serde(default)]
    pub snr2_db: Option<f64>,
    /// 0-based element indices per group.
    #[serde(default)]
    pub subarrays: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub caps: Option<Vec<f64>>,
}

/// A parsed and validated scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub subarrays: Option<SubarrayPartition>,
    pub caps: Option<CapVector>,
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl ScenarioFile {
    pub fn into_loaded(self) -> Result<LoadedScenario> {
        let physical = [self.p1, self.p2, self.sigma1_sq, self.sigma2_sq];
        let db = [self.snr1_db, self.snr2_db];
        let any_physical = physical.iter().any(Option::is_some);
        let any_db = db.iter().any(Option::is_some);
        let (p1, p2, s1, s2) = match (any_physical, any_db) {
            (true, true) => {
                return Err(invalid(
                    "give either P1/P2/sigma1_sq/sigma2_sq or snr1_db/snr2_db, not both",
                ))
            }
            (true, false) => match physical {
                [Some(p1), Some(p2), Some(s1), Some(s2)] => (p1, p2, s1, s2),
                _ => return Err(invalid("P1, P2, sigma1_sq and sigma2_sq must all be present")),
            },
            (false, true) => match db {
                [Some(a), Some(b)] => (db_to_linear(a), db_to_linear(b), 1.0, 1.0),
                _ => return Err(invalid("snr1_db and snr2_db must both be present")),
            },
            (false, false) => return Err(invalid("scenario has no power specification")),
        };
        let n = self.h1.len();
        let scenario = Scenario::new(
            complex(self.h_d),
            self.h1.into_iter().map(complex).collect(),
            self.h2.into_iter().map(complex).collect(),
            p1,
            p2,
            s1,
            s2,
        )?;
        let subarrays = self.subarrays.map(|g| SubarrayPartition::new(g, n)).transpose()?;
        let caps = match self.caps {
            Some(c) if c.len() != n => {
                return Err(invalid(format!("{} caps given for {n} elements", c.len())));
            }
            Some(c) => Some(CapVector::new(c)?),
            None => None,
        };
        Ok(LoadedScenario {
            scenario,
            subarrays,
            caps,
        })
    }
}

pub fn parse_scenario(text: &str) -> Result<LoadedScenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| invalid(format!("bad scenario: {e}")))?;
    file.into_loaded()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn physical_powers() {
        let s = parse_scenario(r#"{"h_d":[1,0],"h1":[[1,0]],"h2":[[0,1]],"P1":10,"P2":5,"sigma1_sq":1,"sigma2_sq":1}"#)
            .unwrap();
        assert_eq!(s.scenario.p1(), 10.0);
        assert_eq!(s.scenario.h2()[0], Complex64::new(0.0, 1.0));
        assert!(s.caps.is_none() && s.subarrays.is_none());
    }

    #[test]
    fn db_powers_use_unit_noise() {
        let s = parse_scenario(r#"{"h_d":[0,0],"h1":[[1,0]],"h2":[[1,0]],"snr1_db":10,"snr2_db":-10}"#).unwrap();
        assert!((s.scenario.p1() - 10.0).abs() < 1e-12);
        assert!((s.scenario.p2() - 0.1).abs() < 1e-15);
        assert_eq!((s.scenario.sigma1_sq(), s.scenario.sigma2_sq()), (1.0, 1.0));
    }

    #[test]
    fn optional_constraints() {
        let s = parse_scenario(
            r#"{"h_d":[0,0],"h1":[[1,0],[1,0]],"h2":[[1,0],[1,0]],"snr1_db":0,"snr2_db":0,
                "subarrays":[[0,1]],"caps":[1,2]}"#,
        )
        .unwrap();
        assert_eq!(s.subarrays.unwrap().groups(), &[vec![0, 1]]);
        assert_eq!(s.caps.unwrap().caps(), &[1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_files() {
        for text in [
            r#"{"h_d":[0,0],"h1":[[1,0]],"h2":[[1,0]]}"#,
            r#"{"h_d":[0,0],"h1":[[1,0]],"h2":[[1,0]],"snr1_db":0}"#,
            r#"{"h_d":[0,0],"h1":[[1,0]],"h2":[[1,0]],"snr1_db":0,"snr2_db":0,"P1":1}"#,
            r#"{"h_d":[0,0],"h1":[[1,0]],"h2":[[1,0]],"P1":1,"P2":1,"sigma1_sq":0,"sigma2_sq":1}"#,
            r#"{"h_d":[0,0],"h1":[[1,0]],"h2":[[1,0],[1,0]],"snr1_db":0,"snr2_db":0}"#,
            r#"{"h_d":[0,0],"h1":[[1,0]],"h2":[[1,0]],"snr1_db":0,"snr2_db":0,"caps":[1,1]}"#,
            r#"{"h_d":[0,0],"h1":[[1,0]],"h2":[[1,0]],"snr1_db":0,"snr2_db":0,"subarrays":[[1]]}"#,
            r#"not json"#,
        ] {
            assert!(parse_scenario(text).is_err(), "{text}");
        }
    }
}
