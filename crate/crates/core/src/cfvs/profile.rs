use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CfvsError;
use crate::sample_space::{next_prime_power, prime_power};

/// Numeric thresholds used by the constrained-FVS stages.
///
/// The asymptotic values grow with powers of `log k` and are far too large
/// to produce anything but empty or gigantic families on small inputs, so
/// each one is a named parameter. [`ConstantsProfile::paper`] gives the
/// formulas and [`ConstantsProfile::toy`] small values suited to tests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsProfile {
    /// Window length for homogeneity and the independence degree of the sample space.
    pub hom_window: usize,
    /// Size/ratio threshold for large `X_i` and `Y_i` sets.
    pub large_ratio: usize,
    /// Back-edge matching bound between consecutive blocks.
    pub weak_matching: usize,
    /// Conflict-edge incidence bound per block.
    pub block_degree: usize,
    /// FVS size target per part of the decoupling partition.
    pub part_fvs_f: usize,
    /// Conflict-edge incidence target per part.
    pub part_degree_d: usize,
    /// How many guessed exceptions (`|H^|`, `|B|`) the stages enumerate.
    pub budget_slack: usize,
    /// Simple back edges tolerated between consecutive blocks.
    pub simple_back: usize,
    /// Range of the sample-space functions; must be a prime power.
    pub sample_q: usize,
    /// Largest family any single enumeration may produce.
    #[serde(default = "default_cap")]
    pub family_cap: usize,
}

fn default_cap() -> usize {
    200_000
}

impl ConstantsProfile {
    /// The asymptotic constants at budget `k`, with `log k` clamped to at least 1
    /// and `q = log^2 k` rounded up to a prime power.
    pub fn paper(k: usize) -> Self {
        let l = (k.max(2) as f64).log2().max(1.0);
        let c = |coef: f64, e: i32| (coef * l.powi(e)).ceil() as usize;
        ConstantsProfile {
            hom_window: c(10.0, 3),
            large_ratio: c(10.0, 5),
            weak_matching: c(201.0, 8),
            block_degree: c(201.0, 10),
            part_fvs_f: c(201.0, 12),
            part_degree_d: c(201.0, 12),
            budget_slack: (2.0 * k as f64 / (l * l)).floor() as usize,
            simple_back: c(200.0, 6),
            sample_q: next_prime_power(l.powi(2).ceil() as usize),
            family_cap: default_cap(),
        }
    }

    pub fn toy() -> Self {
        ConstantsProfile {
            hom_window: 2,
            large_ratio: 3,
            weak_matching: 2,
            block_degree: 2,
            part_fvs_f: 1,
            part_degree_d: 2,
            budget_slack: 1,
            simple_back: 1,
            sample_q: 3,
            family_cap: default_cap(),
        }
    }

    /// All thresholds must be positive except the two exception counts,
    /// where 0 disables the enumeration.
    pub fn validate(&self) -> Result<(), CfvsError> {
        let positive = [
            ("hom_window", self.hom_window),
            ("large_ratio", self.large_ratio),
            ("weak_matching", self.weak_matching),
            ("block_degree", self.block_degree),
            ("part_fvs_f", self.part_fvs_f),
            ("part_degree_d", self.part_degree_d),
            ("family_cap", self.family_cap),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(CfvsError::InvalidProfile(format!(
                    "{name} must be at least 1"
                )));
            }
        }
        if prime_power(self.sample_q).is_none() {
            return Err(CfvsError::InvalidProfile(format!(
                "sample_q = {} is not a prime power",
                self.sample_q
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, CfvsError> {
        let p: ConstantsProfile =
            serde_json::from_str(text).map_err(|e| CfvsError::InvalidProfile(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// `paper`, `toy`, or `file:<path>` to a JSON profile.
    pub fn resolve(spec: &str, k: usize) -> Result<Self, CfvsError> {
        match spec {
            "paper" => Ok(Self::paper(k)),
            "toy" => Ok(Self::toy()),
            _ => match spec.strip_prefix("file:") {
                Some(path) => {
                    let text = std::fs::read_to_string(Path::new(path))
                        .map_err(|e| CfvsError::InvalidProfile(format!("{path}: {e}")))?;
                    Self::from_json(&text)
                }
                None => Err(CfvsError::InvalidProfile(format!(
                    "unknown profile {spec:?}; expected paper, toy or file:<path>"
                ))),
            },
        }
    }
}
