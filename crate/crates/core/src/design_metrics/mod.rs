//! Standard errors, power, sign and magnitude errors, and sample sizes.
//!
//! Every quantity uses the normal approximation. Closed forms are in
//! [`diagnostics_fixed`]; the Monte Carlo routes ([`diagnostics_fixed_mc`],
//! [`diagnostics_mixture`]) are deterministic given `(seed, draws)` and do
//! not depend on how many threads run them.

mod diagnostics;
mod monte_carlo;
mod pilot;
mod se;
mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diagnostics::{
    diagnostics_fixed, diagnostics_fixed_mc, diagnostics_mixture, power_fixed, z_crit,
    DesignDiagnostics, Exaggeration, McStandardErrors, Method, EXAGGERATION_MEAN_FLOOR,
    MIN_MIXTURE_DRAWS,
};
pub use pilot::{pilot_report, pilot_report_with, NMultiplier, PilotReport, PilotResult};
pub use se::{se_conservative_binary, se_two_mean, se_two_proportion};
pub use solver::{ratio_for_power, required_n, SampleSize};

use crate::effect_model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("standard error must be positive and finite, got {0}")]
    NonPositiveSe(f64),
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("{name} must be at least {min}, got {value}")]
    CountTooSmall {
        name: &'static str,
        min: usize,
        value: usize,
    },
    #[error("{name} must be a probability in [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("standard deviation must be positive and finite, got {0}")]
    NonPositiveSd(f64),
    #[error("{0} is not finite")]
    NonFinite(&'static str),
    #[error("Monte Carlo needs at least {min} draws, got {draws}")]
    TooFewDraws { draws: u64, min: u64 },
    #[error("a zero effect cannot reach any target power above alpha")]
    ZeroEffect,
    #[error("target power {target} must exceed alpha {alpha} and be below 1")]
    InvalidTargetPower { target: f64, alpha: f64 },
    #[error("allocation ratio must be positive and finite, got {0}")]
    InvalidAllocation(f64),
    #[error("treatment rate {rate} implied by base rate {base_rate} and effect {effect} is not a probability")]
    RateOutOfRange {
        base_rate: f64,
        effect: f64,
        rate: f64,
    },
    #[error("no sample size up to {0} per arm reaches the target power")]
    Unreachable(u64),
    #[error("{arm} arm has {successes} successes out of {n}")]
    InvalidPilot {
        arm: &'static str,
        successes: u64,
        n: u64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, DesignError>;

/// Two-sided tests reject on `|estimate|`; one-sided tests are directed at
/// the sign of the hypothesized effect (positive when it is zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sides {
    #[default]
    TwoSided,
    OneSided,
}

/// How a per-observation standard deviation is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeModel {
    /// Binary outcome with both rates at 0.5, an upper bound on the standard error.
    #[default]
    BinaryConservative,
    /// Binary outcome with the control rate given and the treatment rate at `base_rate + effect`.
    BinaryBaseRate { base_rate: f64 },
    Continuous { sd: f64 },
}

impl OutcomeModel {
    pub fn standard_error(&self, effect: f64, n_treat: usize, n_control: usize) -> Result<f64> {
        match *self {
            OutcomeModel::BinaryConservative => se_conservative_binary(n_treat, n_control),
            OutcomeModel::BinaryBaseRate { base_rate } => {
                let rate = base_rate + effect;
                if !(0.0..=1.0).contains(&rate) {
                    return Err(DesignError::RateOutOfRange {
                        base_rate,
                        effect,
                        rate,
                    });
                }
                se_two_proportion(rate, base_rate, n_treat, n_control)
            }
            OutcomeModel::Continuous { sd } => se_two_mean(sd, n_treat, n_control),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            OutcomeModel::BinaryConservative => Ok(()),
            OutcomeModel::BinaryBaseRate { base_rate } => {
                check_probability("base_rate", base_rate).map(|_| ())
            }
            OutcomeModel::Continuous { sd } => {
                if sd.is_finite() && sd > 0.0 {
                    Ok(())
                } else {
                    Err(DesignError::NonPositiveSd(sd))
                }
            }
        }
    }
}

fn default_alpha() -> f64 {
    0.05
}

/// Everything needed to compute a standard error for a two-arm comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub n_treat: usize,
    pub n_control: usize,
    #[serde(default)]
    pub outcome: OutcomeModel,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub sides: Sides,
}

impl DesignSpec {
    pub fn new(n_treat: usize, n_control: usize, outcome: OutcomeModel) -> Result<Self> {
        let spec = DesignSpec {
            n_treat,
            n_control,
            outcome,
            alpha: default_alpha(),
            sides: Sides::TwoSided,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sides(mut self, sides: Sides) -> Self {
        self.sides = sides;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_count("n_treat", self.n_treat, 2)?;
        check_count("n_control", self.n_control, 2)?;
        check_alpha(self.alpha)?;
        self.outcome.validate()
    }

    /// Standard error of the difference in means under this design, for a
    /// given effect (only the base-rate binary model depends on it).
    pub fn standard_error(&self, effect: f64) -> Result<f64> {
        self.validate()?;
        self.outcome
            .standard_error(effect, self.n_treat, self.n_control)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(DesignError::InvalidAlpha(alpha))
    }
}

pub(crate) fn check_se(se: f64) -> Result<f64> {
    if se.is_finite() && se > 0.0 {
        Ok(se)
    } else {
        Err(DesignError::NonPositiveSe(se))
    }
}

pub(crate) fn check_count(name: &'static str, value: usize, min: usize) -> Result<usize> {
    if value >= min {
        Ok(value)
    } else {
        Err(DesignError::CountTooSmall { name, min, value })
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(DesignError::Probability { name, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_spec_standard_error() {
        let d = DesignSpec::new(63, 63, OutcomeModel::BinaryConservative).unwrap();
        assert!((d.standard_error(0.25).unwrap() - 0.0891).abs() < 5e-5);
        let d = DesignSpec::new(50, 50, OutcomeModel::Continuous { sd: 0.5 }).unwrap();
        assert!((d.standard_error(0.0).unwrap() - 0.1).abs() < 1e-15);
        let d = DesignSpec::new(100, 100, OutcomeModel::BinaryBaseRate { base_rate: 0.9 }).unwrap();
        let se = d.standard_error(0.04).unwrap();
        assert!((se - se_two_proportion(0.94, 0.9, 100, 100).unwrap()).abs() < 1e-15);
        assert!(matches!(
            d.standard_error(0.2),
            Err(DesignError::RateOutOfRange { .. })
        ));
    }

    #[test]
    fn design_spec_rejects_bad_inputs() {
        assert!(DesignSpec::new(1, 10, OutcomeModel::BinaryConservative).is_err());
        assert!(DesignSpec::new(10, 10, OutcomeModel::Continuous { sd: 0.0 }).is_err());
        let d = DesignSpec::new(10, 10, OutcomeModel::BinaryConservative).unwrap();
        assert!(d.with_alpha(0.0).is_err());
        assert!(d.with_alpha(1.0).is_err());
    }

    #[test]
    fn design_spec_json_defaults() {
        let d: DesignSpec = serde_json::from_str(r#"{"n_treat": 63, "n_control": 63}"#).unwrap();
        assert_eq!(d.alpha, 0.05);
        assert_eq!(d.sides, Sides::TwoSided);
        assert_eq!(d.outcome, OutcomeModel::BinaryConservative);
        let d: DesignSpec = serde_json::from_str(
            r#"{"n_treat": 5, "n_control": 5, "outcome": {"kind": "continuous", "sd": 2.0}, "sides": "one_sided"}"#,
        )
        .unwrap();
        assert_eq!(d.outcome, OutcomeModel::Continuous { sd: 2.0 });
        assert_eq!(d.sides, Sides::OneSided);
    }
}
