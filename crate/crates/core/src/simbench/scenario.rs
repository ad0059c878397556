use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::BcrError;

/// Default predictor count of the high-dimensional scenarios.
pub const HD_DEFAULT_P: usize = 15_000;
/// Held-out observations per high-dimensional replicate.
pub const HD_TEST_SIZE: usize = 110;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    /// Five coefficients equal to 1, n = 110.
    Hd1 { p: usize },
    /// Every coefficient equal to 0.1, n = 110.
    Hd2 { p: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: ScenarioId,
    pub n: usize,
    pub p: usize,
    pub n_test: usize,
    pub beta0: Vec<f64>,
    pub sigma2: f64,
    pub rho: f64,
}

fn leading(p: usize, k: usize, value: f64) -> Vec<f64> {
    (0..p).map(|j| if j < k { value } else { 0.0 }).collect()
}

/// Looks up a scenario definition.
pub fn scenario(id: ScenarioId) -> Scenario {
    let (n, p, beta0) = match id {
        ScenarioId::M1 => (70, 100, leading(100, 5, 1.2)),
        ScenarioId::M2 => (110, 100, leading(100, 5, 1.2)),
        ScenarioId::M3 => (70, 100, leading(100, 15, 1.0)),
        ScenarioId::M4 => (110, 100, leading(100, 15, 1.0)),
        ScenarioId::M5 => (70, 100, vec![0.2; 100]),
        ScenarioId::M6 => (110, 100, vec![0.2; 100]),
        ScenarioId::Hd1 { p } => (110, p, leading(p, 5, 1.0)),
        ScenarioId::Hd2 { p } => (110, p, vec![0.1; p]),
    };
    let n_test = match id {
        ScenarioId::Hd1 { .. } | ScenarioId::Hd2 { .. } => HD_TEST_SIZE,
        _ => n,
    };
    Scenario {
        id,
        n,
        p,
        n_test,
        beta0,
        sigma2: 1.0,
        rho: 0.5,
    }
}

impl Scenario {
    pub fn from_name(name: &str) -> Result<Self, BcrError> {
        name.parse().map(scenario)
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioId::M1 => f.write_str("M1"),
            ScenarioId::M2 => f.write_str("M2"),
            ScenarioId::M3 => f.write_str("M3"),
            ScenarioId::M4 => f.write_str("M4"),
            ScenarioId::M5 => f.write_str("M5"),
            ScenarioId::M6 => f.write_str("M6"),
            ScenarioId::Hd1 { p } => write!(f, "HD1-{p}"),
            ScenarioId::Hd2 { p } => write!(f, "HD2-{p}"),
        }
    }
}

impl FromStr for ScenarioId {
    type Err = BcrError;

    /// Accepts `M1`..`M6`, `HD1`, `HD2` (p = 15000) and `HD1-<p>`/`HD2-<p>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || BcrError::UnknownScenario(s.to_string());
        let upper = s.trim().to_ascii_uppercase();
        let (head, p) = match upper.split_once(['-', ':']) {
            Some((h, p)) => (h.to_string(), Some(p.parse::<usize>().map_err(|_| unknown())?)),
            None => (upper, None),
        };
        let simple = |id: ScenarioId| if p.is_none() { Ok(id) } else { Err(unknown()) };
        match head.as_str() {
            "M1" => simple(ScenarioId::M1),
            "M2" => simple(ScenarioId::M2),
            "M3" => simple(ScenarioId::M3),
            "M4" => simple(ScenarioId::M4),
            "M5" => simple(ScenarioId::M5),
            "M6" => simple(ScenarioId::M6),
            "HD1" | "HD2" => {
                let p = p.unwrap_or(HD_DEFAULT_P);
                if p < 5 {
                    return Err(unknown());
                }
                Ok(if head == "HD1" {
                    ScenarioId::Hd1 { p }
                } else {
                    ScenarioId::Hd2 { p }
                })
            }
            _ => Err(unknown()),
        }
    }
}
