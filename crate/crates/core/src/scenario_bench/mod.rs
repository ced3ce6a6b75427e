//! Worked examples as executable fixtures.
//!
//! Each scenario is a JSON file under `scenarios/` with its inputs and the
//! expected values, frozen as constants with a note on where each number
//! comes from. Running a scenario recomputes every quantity through the
//! library and compares it against the frozen value.

mod retrospective;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design_metrics::{
    pilot_report_with, power_fixed, ratio_for_power, required_n, DesignError, OutcomeModel,
    PilotResult, Sides,
};
use crate::effect_model::{
    binary_type_ate, from_plausible_range, heuristic_ate, mixture_mean, mixture_variance,
    with_null_mass, BinaryTypeModel, EffectDistribution, ModelError, PlausibleRange,
};

pub use retrospective::{
    decomposition, decomposition_table, retrospective_plausibility, DecompositionRow,
    PlausibilityReport, P_NULL_GRID,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    Unknown(String),
    #[error("scenario fixture `{file}` is malformed: {message}")]
    Fixture { file: &'static str, message: String },
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|computed - value| <= tolerance`
    #[default]
    Approx,
    AtLeast,
    AtMost,
}

impl Comparison {
    fn holds(self, computed: f64, value: f64, tolerance: f64) -> bool {
        match self {
            Comparison::Approx => (computed - value).abs() <= tolerance,
            Comparison::AtLeast => computed >= value - tolerance,
            Comparison::AtMost => computed <= value + tolerance,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::Approx => "~",
            Comparison::AtLeast => ">=",
            Comparison::AtMost => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub quantity: String,
    pub value: f64,
    #[serde(default)]
    pub tolerance: f64,
    #[serde(default)]
    pub comparison: Comparison,
    pub provenance: String,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_target_power() -> f64 {
    0.8
}

fn default_draws() -> u64 {
    1_000_000
}

/// What a scenario computes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioInputs {
    /// Quantities: `ate`, `treat_rate`, `control_rate`.
    BinaryTypes { types: BinaryTypeModel },
    /// Type counts out of a hypothetical cohort. Same quantities as `binary_types`.
    TypeCounts {
        always: u64,
        saved: u64,
        harmed: u64,
        never: u64,
    },
    /// Quantities: `ate`, `variance`.
    Distribution { distribution: EffectDistribution },
    /// A plausible range turned into a normal with a share of pure nulls.
    /// Quantities: `ate`, `heuristic_ate`.
    Range { lo: f64, hi: f64, p_null: f64 },
    /// A fixed effect against a two-arm design with equal arms.
    /// Quantities: `se`, `effect_over_se`, `power`, `crossing_ratio`, `required_total`.
    Design {
        effect: f64,
        n_per_arm: usize,
        outcome: OutcomeModel,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_target_power")]
        target_power: f64,
    },
    /// Quantities: `estimate`, `se`, `interval_lo`, `interval_hi`, `multiplier`.
    Pilot {
        pilot: PilotResult,
        #[serde(default = "default_alpha")]
        alpha: f64,
        assumed_effect: f64,
    },
    /// Sample size for a smaller, noisier effect relative to a baseline one.
    /// Quantity: `penalty`.
    SampleSizePenalty {
        baseline_effect: f64,
        baseline_outcome: OutcomeModel,
        effect: f64,
        outcome: OutcomeModel,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_target_power")]
        target_power: f64,
    },
    /// A published estimate against a hypothesized distribution. Quantities:
    /// `magnitude_needed@<p_null>` for each grid row and, when a
    /// distribution and standard error are given, `hypothesized_mean`,
    /// `implied_power`, `implied_type_s` and `implied_exaggeration`.
    Retrospective {
        claimed_effect: f64,
        #[serde(default)]
        claimed_se: Option<f64>,
        #[serde(default)]
        hypothesized: Option<EffectDistribution>,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_draws")]
        draws: u64,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub inputs: ScenarioInputs,
    pub expected: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub quantity: String,
    pub expected: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    /// `None` when the scenario does not produce this quantity.
    pub computed: Option<f64>,
    pub passed: bool,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub name: String,
    pub description: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub computed: BTreeMap<String, f64>,
}

impl ScenarioRun {
    pub fn table(&self) -> String {
        let mut out = format!(
            "{} [{}]\n",
            self.name,
            if self.passed { "PASS" } else { "FAIL" }
        );
        let _ = writeln!(
            out,
            "  {:<24} {:>22} {:>4} {:>12} {:>10}  status",
            "quantity", "computed", "", "expected", "tolerance"
        );
        for c in &self.checks {
            let computed = c.computed.map_or("-".to_string(), |v| format!("{v}"));
            let _ = writeln!(
                out,
                "  {:<24} {:>22} {:>4} {:>12} {:>10}  {}",
                c.quantity,
                computed,
                c.comparison.symbol(),
                c.expected,
                c.tolerance,
                if c.passed { "ok" } else { "FAIL" }
            );
        }
        out
    }
}

const FIXTURES: [(&str, &str); 12] = [
    ("covid_saves_and_kills.json", include_str!("../../scenarios/covid_saves_and_kills.json")),
    ("covid_three_types.json", include_str!("../../scenarios/covid_three_types.json")),
    ("covid_trial.json", include_str!("../../scenarios/covid_trial.json")),
    ("earnings_claim.json", include_str!("../../scenarios/earnings_claim.json")),
    ("effectiveness_unscreened.json", include_str!("../../scenarios/effectiveness_unscreened.json")),
    ("efficacy_screened.json", include_str!("../../scenarios/efficacy_screened.json")),
    ("interaction_penalty.json", include_str!("../../scenarios/interaction_penalty.json")),
    ("null_share_heuristic.json", include_str!("../../scenarios/null_share_heuristic.json")),
    ("penumbra.json", include_str!("../../scenarios/penumbra.json")),
    ("pilot_surgery.json", include_str!("../../scenarios/pilot_surgery.json")),
    ("red_clothing.json", include_str!("../../scenarios/red_clothing.json")),
    ("tumor_shrinkage.json", include_str!("../../scenarios/tumor_shrinkage.json")),
];

fn parse_fixtures() -> Result<Vec<Scenario>> {
    let mut scenarios = FIXTURES
        .iter()
        .map(|(file, text)| {
            let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Fixture {
                file,
                message: e.to_string(),
            })?;
            if let Some(e) = s.expected.iter().find(|e| e.provenance.trim().is_empty()) {
                return Err(ScenarioError::Fixture {
                    file,
                    message: format!("expected `{}` has no provenance", e.quantity),
                });
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    scenarios.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(scenarios)
}

/// All built-in scenarios, sorted by name.
pub fn registry() -> &'static [Scenario] {
    static REGISTRY: OnceLock<Vec<Scenario>> = OnceLock::new();
    REGISTRY.get_or_init(|| parse_fixtures().expect("built-in scenario fixtures are valid"))
}

pub fn scenario_names() -> Vec<&'static str> {
    registry().iter().map(|s| s.name.as_str()).collect()
}

pub fn find(name: &str) -> Result<&'static Scenario> {
    registry()
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| ScenarioError::Unknown(name.to_string()))
}

pub fn run_scenario(name: &str) -> Result<ScenarioRun> {
    find(name)?.run()
}

/// Every scenario, in registry order. Scenarios run in parallel.
pub fn run_all() -> Result<Vec<ScenarioRun>> {
    registry().par_iter().map(Scenario::run).collect()
}

impl Scenario {
    pub fn run(&self) -> Result<ScenarioRun> {
        let computed = self.inputs.compute()?;
        let checks: Vec<CheckResult> = self
            .expected
            .iter()
            .map(|e| {
                let value = computed.get(&e.quantity).copied();
                CheckResult {
                    quantity: e.quantity.clone(),
                    expected: e.value,
                    comparison: e.comparison,
                    tolerance: e.tolerance,
                    computed: value,
                    passed: value.is_some_and(|v| e.comparison.holds(v, e.value, e.tolerance)),
                    provenance: e.provenance.clone(),
                }
            })
            .collect();
        Ok(ScenarioRun {
            name: self.name.clone(),
            description: self.description.clone(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            computed,
        })
    }
}

impl ScenarioInputs {
    /// Every quantity this input kind produces.
    pub fn compute(&self) -> Result<BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: f64| {
            out.insert(k.to_string(), v);
        };
        match self {
            ScenarioInputs::BinaryTypes { types } => binary_quantities(types, &mut put),
            ScenarioInputs::TypeCounts {
                always,
                saved,
                harmed,
                never,
            } => {
                let types = BinaryTypeModel::from_counts(*always, *saved, *harmed, *never)?;
                binary_quantities(&types, &mut put);
            }
            ScenarioInputs::Distribution { distribution } => {
                put("ate", mixture_mean(distribution));
                put("variance", mixture_variance(distribution));
            }
            ScenarioInputs::Range { lo, hi, p_null } => {
                let range = PlausibleRange::new(*lo, *hi)?;
                let dist = with_null_mass(from_plausible_range(range), *p_null)?;
                put("ate", mixture_mean(&dist));
                if *lo == 0.0 {
                    put("heuristic_ate", heuristic_ate(*hi, *p_null)?);
                }
            }
            ScenarioInputs::Design {
                effect,
                n_per_arm,
                outcome,
                alpha,
                target_power,
            } => {
                let se = outcome.standard_error(*effect, *n_per_arm, *n_per_arm)?;
                put("se", se);
                put("effect_over_se", effect / se);
                put("power", power_fixed(*effect, se, *alpha, Sides::TwoSided)?);
                put("crossing_ratio", ratio_for_power(*target_power, *alpha, Sides::TwoSided)?);
                let n = required_n(*effect, *outcome, *alpha, Sides::TwoSided, *target_power, 1.0)?;
                put("required_total", n.total() as f64);
            }
            ScenarioInputs::Pilot {
                pilot,
                alpha,
                assumed_effect,
            } => {
                let r = pilot_report_with(pilot, *alpha, &[*assumed_effect])?;
                put("estimate", r.estimate);
                put("se", r.se);
                put("interval_lo", r.interval_lo);
                put("interval_hi", r.interval_hi);
                if let Some(m) = r.n_multipliers.first() {
                    put("multiplier", m.multiplier);
                }
            }
            ScenarioInputs::SampleSizePenalty {
                baseline_effect,
                baseline_outcome,
                effect,
                outcome,
                alpha,
                target_power,
            } => {
                let solve = |e: f64, o: OutcomeModel| {
                    required_n(e, o, *alpha, Sides::TwoSided, *target_power, 1.0)
                };
                let base = solve(*baseline_effect, *baseline_outcome)?;
                let n = solve(*effect, *outcome)?;
                put("penalty", n.ratio_to(&base));
            }
            ScenarioInputs::Retrospective {
                claimed_effect,
                claimed_se,
                hypothesized,
                alpha,
                draws,
                seed,
            } => {
                for row in decomposition(*claimed_effect) {
                    put(&format!("magnitude_needed@{}", row.p_null), row.magnitude_needed);
                }
                if let (Some(se), Some(dist)) = (claimed_se, hypothesized) {
                    let r = retrospective_plausibility(*claimed_effect, *se, dist, *alpha, *draws, *seed)?;
                    put("hypothesized_mean", r.hypothesized_mean);
                    put("implied_power", r.implied_power);
                    put("implied_type_s", r.implied_type_s);
                    if let Some(x) = r.implied_exaggeration.ratio() {
                        put("implied_exaggeration", x);
                    }
                }
            }
        }
        Ok(out)
    }
}

fn binary_quantities(types: &BinaryTypeModel, put: &mut impl FnMut(&str, f64)) {
    let r = binary_type_ate(types);
    put("ate", r.ate);
    put("treat_rate", r.treat_rate);
    put("control_rate", r.control_rate);
}

/// Plain-text summary of several runs.
pub fn summary_table(runs: &[ScenarioRun]) -> String {
    let mut out = String::new();
    for run in runs {
        out.push_str(&run.table());
        out.push('\n');
    }
    let failed = runs.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} scenarios, {} failed", runs.len(), failed);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_sorted_and_unique() {
        let names = scenario_names();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(names, sorted);
        assert!(names.len() >= 8);
    }

    #[test]
    fn every_scenario_passes() {
        for run in run_all().unwrap() {
            assert!(run.passed, "{}", run.table());
        }
    }

    #[test]
    fn unknown_name() {
        assert_eq!(
            run_scenario("nope"),
            Err(ScenarioError::Unknown("nope".into()))
        );
    }

    #[test]
    fn penumbra_value() {
        let run = run_scenario("penumbra").unwrap();
        assert!((run.computed["ate"] - 0.1).abs() <= 1e-12);
    }

    #[test]
    fn missing_quantity_fails() {
        let mut s = find("penumbra").unwrap().clone();
        s.expected[0].quantity = "power".into();
        let run = s.run().unwrap();
        assert!(!run.passed);
        assert_eq!(run.checks[0].computed, None);
    }

    #[test]
    fn frozen_value_regression_is_caught() {
        let mut s = find("efficacy_screened").unwrap().clone();
        s.expected[0].value = 0.66;
        assert!(!s.run().unwrap().passed);
    }

    #[test]
    fn comparisons() {
        assert!(Comparison::AtLeast.holds(0.81, 0.8, 0.0));
        assert!(!Comparison::AtLeast.holds(0.79, 0.8, 0.0));
        assert!(Comparison::AtMost.holds(126.0, 126.0, 0.0));
        assert!(Comparison::Approx.holds(0.65, 0.65, 0.0));
    }
}
