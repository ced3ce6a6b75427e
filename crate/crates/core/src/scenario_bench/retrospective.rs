use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::design_metrics::{diagnostics_mixture, DesignDiagnostics, DesignError, Exaggeration, Sides};
use crate::effect_model::EffectDistribution;

/// Null shares tabulated in the decomposition of a claimed average.
pub const P_NULL_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.9];

/// One way to reach the claimed average: a share of pure nulls and the
/// effect the remaining units would need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRow {
    pub p_null: f64,
    pub magnitude_needed: f64,
}

/// `claimed / (1 - p_null)` over [`P_NULL_GRID`].
pub fn decomposition(claimed_effect: f64) -> Vec<DecompositionRow> {
    P_NULL_GRID
        .iter()
        .map(|&p_null| DecompositionRow {
            p_null,
            magnitude_needed: claimed_effect / (1.0 - p_null),
        })
        .collect()
}

pub fn decomposition_table(rows: &[DecompositionRow]) -> String {
    let mut out = String::from("p_null  magnitude_needed\n");
    for r in rows {
        let _ = writeln!(out, "{:<6}  {}", r.p_null, r.magnitude_needed);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityReport {
    pub claimed_effect: f64,
    pub claimed_se: f64,
    pub alpha: f64,
    pub hypothesized: EffectDistribution,
    pub hypothesized_mean: f64,
    pub implied_power: f64,
    pub implied_type_s: f64,
    pub implied_exaggeration: Exaggeration,
    /// Claimed effect over the hypothesized mean; `None` when the mean is zero.
    pub claimed_over_mean: Option<f64>,
    pub decomposition: Vec<DecompositionRow>,
    pub diagnostics: DesignDiagnostics,
}

impl PlausibilityReport {
    pub fn decomposition_table(&self) -> String {
        decomposition_table(&self.decomposition)
    }
}

/// What a published estimate looks like against a hypothesized distribution
/// of true effects, measured at the published standard error.
pub fn retrospective_plausibility(
    claimed_effect: f64,
    claimed_se: f64,
    hypothesized: &EffectDistribution,
    alpha: f64,
    draws: u64,
    seed: u64,
) -> Result<PlausibilityReport, DesignError> {
    if !claimed_effect.is_finite() {
        return Err(DesignError::NonFinite("claimed effect"));
    }
    let diagnostics = diagnostics_mixture(hypothesized, claimed_se, alpha, Sides::TwoSided, draws, seed)?;
    let mean = hypothesized.mean();
    Ok(PlausibilityReport {
        claimed_effect,
        claimed_se,
        alpha,
        hypothesized: hypothesized.clone(),
        hypothesized_mean: mean,
        implied_power: diagnostics.power,
        implied_type_s: diagnostics.type_s,
        implied_exaggeration: diagnostics.exaggeration,
        claimed_over_mean: (mean != 0.0).then(|| claimed_effect / mean),
        decomposition: decomposition(claimed_effect),
        diagnostics,
    })
}
