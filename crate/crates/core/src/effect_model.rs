//! Distributions of individual treatment effects.
//!
//! An [`EffectDistribution`] is a weighted mixture of [`EffectComponent`]s.
//! The helpers here build the mixtures that come up when hypothesizing an
//! average effect from the bottom up: a plausible range turned into a normal,
//! a share of pure nulls, binary potential-outcome types, discrete bins, and
//! stratified effect curves.

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version of the distribution JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance on weights and masses summing to one.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Default share of pure nulls for direct interventions in medicine and social science.
pub const P_NULL_DIRECT_INTERVENTION: f64 = 0.5;

/// Default share of pure nulls for marketing-style interventions that are mostly ignored.
pub const P_NULL_INDIRECT_MARKETING: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("uniform component needs lo <= hi, got ({lo}, {hi})")]
    InvalidUniform { lo: f64, hi: f64 },
    #[error("normal component needs a positive finite scale, got {0}")]
    InvalidScale(f64),
    #[error("discrete component: {0}")]
    InvalidDiscrete(String),
    #[error("{what} must sum to 1 within 1e-9, got {sum}")]
    BadSum { what: &'static str, sum: f64 },
    #[error("{what} must be nonnegative and finite, got {value}")]
    NegativeWeight { what: &'static str, value: f64 },
    #[error("a mixture needs at least one component")]
    EmptyMixture,
    #[error("{0} is not finite")]
    NonFinite(&'static str),
    #[error("plausible range needs lo < hi, got ({lo}, {hi})")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("{name} must be a probability in [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("a stratified curve needs at least one stratum")]
    EmptyStrata,
    #[error("unsupported distribution schema version {found} (this build reads version {supported})")]
    UnsupportedSchema { found: u32, supported: u32 },
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(ModelError::Probability { name, value })
    }
}

/// Checks that `values` sum to one within [`WEIGHT_TOLERANCE`] and returns
/// them rescaled. Sums that are off by no more than accumulated rounding
/// are left untouched so that exact constructions stay exact.
fn normalize(what: &'static str, values: &[f64]) -> Result<Vec<f64>> {
    for &v in values {
        if !v.is_finite() || v < 0.0 {
            return Err(ModelError::NegativeWeight { what, value: v });
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(ModelError::BadSum { what, sum });
    }
    if (sum - 1.0).abs() <= f64::EPSILON * values.len() as f64 {
        Ok(values.to_vec())
    } else {
        Ok(values.iter().map(|v| v / sum).collect())
    }
}

/// One building block of an effect distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EffectComponent {
    PointMass { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Normal { center: f64, scale: f64 },
    Discrete { values: Vec<f64>, masses: Vec<f64> },
}

impl EffectComponent {
    pub fn point_mass(value: f64) -> Self {
        EffectComponent::PointMass { value }
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        EffectComponent::Uniform { lo, hi }.validated()
    }

    pub fn normal(center: f64, scale: f64) -> Result<Self> {
        EffectComponent::Normal { center, scale }.validated()
    }

    pub fn discrete(values: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        EffectComponent::Discrete { values, masses }.validated()
    }

    /// Checks the component invariants, renormalizing discrete masses that
    /// are within tolerance.
    pub fn validated(self) -> Result<Self> {
        match self {
            EffectComponent::PointMass { value } => {
                if !value.is_finite() {
                    return Err(ModelError::NonFinite("point mass value"));
                }
                Ok(self)
            }
            EffectComponent::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err(ModelError::NonFinite("uniform bound"));
                }
                if lo > hi {
                    return Err(ModelError::InvalidUniform { lo, hi });
                }
                Ok(self)
            }
            EffectComponent::Normal { center, scale } => {
                if !center.is_finite() {
                    return Err(ModelError::NonFinite("normal center"));
                }
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(ModelError::InvalidScale(scale));
                }
                Ok(self)
            }
            EffectComponent::Discrete { values, masses } => {
                if values.is_empty() {
                    return Err(ModelError::InvalidDiscrete("needs at least one value".into()));
                }
                if values.len() != masses.len() {
                    return Err(ModelError::InvalidDiscrete(format!(
                        "{} values but {} masses",
                        values.len(),
                        masses.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(ModelError::NonFinite("discrete value"));
                }
                let masses = normalize("discrete masses", &masses)?;
                Ok(EffectComponent::Discrete { values, masses })
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            EffectComponent::PointMass { value } => *value,
            EffectComponent::Uniform { lo, hi } => (lo + hi) / 2.0,
            EffectComponent::Normal { center, .. } => *center,
            EffectComponent::Discrete { values, masses } => {
                values.iter().zip(masses).map(|(v, m)| v * m).sum()
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            EffectComponent::PointMass { .. } => 0.0,
            EffectComponent::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            EffectComponent::Normal { scale, .. } => scale * scale,
            EffectComponent::Discrete { values, masses } => {
                let mean = self.mean();
                values
                    .iter()
                    .zip(masses)
                    .map(|(v, m)| m * (v - mean).powi(2))
                    .sum()
            }
        }
    }
}

impl fmt::Display for EffectComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectComponent::PointMass { value } => write!(f, "point_mass({value})"),
            EffectComponent::Uniform { lo, hi } => write!(f, "uniform({lo}, {hi})"),
            EffectComponent::Normal { center, scale } => write!(f, "normal({center}, {scale})"),
            EffectComponent::Discrete { values, masses } => {
                write!(f, "discrete{{")?;
                for (i, (v, m)) in values.iter().zip(masses).enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}: {m}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedComponent {
    pub weight: f64,
    #[serde(flatten)]
    pub component: EffectComponent,
}

/// JSON form of an [`EffectDistribution`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DistributionDocument {
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    units: Option<String>,
    components: Vec<WeightedComponent>,
}

/// A validated mixture of effect components. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionDocument", into = "DistributionDocument")]
pub struct EffectDistribution {
    components: Vec<WeightedComponent>,
    units: Option<String>,
}

impl TryFrom<DistributionDocument> for EffectDistribution {
    type Error = ModelError;

    fn try_from(doc: DistributionDocument) -> Result<Self> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(ModelError::UnsupportedSchema {
                found: doc.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        let dist = EffectDistribution::new(
            doc.components
                .into_iter()
                .map(|c| (c.weight, c.component))
                .collect(),
        )?;
        Ok(match doc.units {
            Some(u) => dist.with_units(u),
            None => dist,
        })
    }
}

impl From<EffectDistribution> for DistributionDocument {
    fn from(d: EffectDistribution) -> Self {
        DistributionDocument {
            schema_version: SCHEMA_VERSION,
            units: d.units,
            components: d.components,
        }
    }
}

impl EffectDistribution {
    pub fn new(components: Vec<(f64, EffectComponent)>) -> Result<Self> {
        if components.is_empty() {
            return Err(ModelError::EmptyMixture);
        }
        let weights: Vec<f64> = components.iter().map(|(w, _)| *w).collect();
        let weights = normalize("mixture weights", &weights)?;
        let components = components
            .into_iter()
            .zip(weights)
            .map(|((_, c), weight)| {
                Ok(WeightedComponent {
                    weight,
                    component: c.validated()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let dist = EffectDistribution {
            components,
            units: None,
        };
        if !dist.mean().is_finite() {
            return Err(ModelError::NonFinite("mixture mean"));
        }
        if !dist.variance().is_finite() {
            return Err(ModelError::NonFinite("mixture variance"));
        }
        Ok(dist)
    }

    pub fn single(component: EffectComponent) -> Result<Self> {
        Self::new(vec![(1.0, component)])
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::single(EffectComponent::point_mass(value))
    }

    /// Attaches a free-text description of what one effect unit means.
    pub fn with_units(mut self, units: impl Into<String>) -> Self {
        self.units = Some(units.into());
        self
    }

    pub fn units(&self) -> Option<&str> {
        self.units.as_deref()
    }

    pub fn components(&self) -> &[WeightedComponent] {
        &self.components
    }

    pub fn mean(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.component.mean())
            .sum()
    }

    /// Law of total variance over components.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let second: f64 = self
            .components
            .iter()
            .map(|c| {
                let m = c.component.mean();
                c.weight * (c.component.variance() + m * m)
            })
            .sum();
        (second - mean * mean).max(0.0)
    }

    /// Precomputes what is needed to draw from the mixture repeatedly.
    pub fn sampler(&self) -> Sampler {
        Sampler::new(self)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let sampler = self.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| sampler.draw(&mut rng)).collect()
    }

    /// Multiplies every effect by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|wc| {
                let c = match &wc.component {
                    EffectComponent::PointMass { value } => EffectComponent::point_mass(value * factor),
                    EffectComponent::Uniform { lo, hi } => {
                        let (a, b) = (lo * factor, hi * factor);
                        EffectComponent::Uniform { lo: a.min(b), hi: a.max(b) }
                    }
                    EffectComponent::Normal { center, scale } => EffectComponent::Normal {
                        center: center * factor,
                        scale: scale * factor.abs(),
                    },
                    EffectComponent::Discrete { values, masses } => EffectComponent::Discrete {
                        values: values.iter().map(|v| v * factor).collect(),
                        masses: masses.clone(),
                    },
                };
                (wc.weight, c)
            })
            .collect();
        let mut out = Self::new(components)?;
        out.units = self.units.clone();
        Ok(out)
    }
}

impl fmt::Display for EffectDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}·{}", c.weight, c.component)?;
        }
        Ok(())
    }
}

enum ComponentSampler {
    Point(f64),
    Uniform(Uniform<f64>),
    Normal(Normal<f64>),
    Discrete(Vec<f64>, WeightedIndex<f64>),
}

/// Reusable draw machinery for one distribution.
pub struct Sampler {
    pick: Option<WeightedIndex<f64>>,
    parts: Vec<ComponentSampler>,
}

impl Sampler {
    fn new(dist: &EffectDistribution) -> Self {
        let parts = dist
            .components
            .iter()
            .map(|wc| match &wc.component {
                EffectComponent::PointMass { value } => ComponentSampler::Point(*value),
                EffectComponent::Uniform { lo, hi } if lo == hi => ComponentSampler::Point(*lo),
                EffectComponent::Uniform { lo, hi } => ComponentSampler::Uniform(
                    Uniform::new_inclusive(*lo, *hi).expect("validated uniform bounds"),
                ),
                EffectComponent::Normal { center, scale } => ComponentSampler::Normal(
                    Normal::new(*center, *scale).expect("validated normal scale"),
                ),
                EffectComponent::Discrete { values, masses } => ComponentSampler::Discrete(
                    values.clone(),
                    WeightedIndex::new(masses).expect("validated discrete masses"),
                ),
            })
            .collect::<Vec<_>>();
        let pick = if parts.len() > 1 {
            Some(
                WeightedIndex::new(dist.components.iter().map(|c| c.weight))
                    .expect("validated mixture weights"),
            )
        } else {
            None
        };
        Sampler { pick, parts }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let idx = match &self.pick {
            Some(w) => w.sample(rng),
            None => 0,
        };
        match &self.parts[idx] {
            ComponentSampler::Point(v) => *v,
            ComponentSampler::Uniform(u) => u.sample(rng),
            ComponentSampler::Normal(n) => n.sample(rng),
            ComponentSampler::Discrete(values, w) => values[w.sample(rng)],
        }
    }
}

/// An elicited range of effects, `(0, X)` for a plausible effect size `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlausibleRange {
    pub lo: f64,
    pub hi: f64,
}

impl PlausibleRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(ModelError::NonFinite("range bound"));
        }
        if lo >= hi {
            return Err(ModelError::InvalidRange { lo, hi });
        }
        Ok(PlausibleRange { lo, hi })
    }

    /// The range `(0, x)`.
    pub fn up_to(x: f64) -> Result<Self> {
        Self::new(0.0, x)
    }
}

/// Proportions of the four binary potential-outcome types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTypes")]
pub struct BinaryTypeModel {
    p_always: f64,
    p_saved: f64,
    p_harmed: f64,
    p_never: f64,
}

#[derive(Deserialize)]
struct RawTypes {
    p_always: f64,
    p_saved: f64,
    #[serde(default)]
    p_harmed: f64,
    p_never: f64,
}

impl TryFrom<RawTypes> for BinaryTypeModel {
    type Error = ModelError;
    fn try_from(r: RawTypes) -> Result<Self> {
        BinaryTypeModel::new(r.p_always, r.p_saved, r.p_harmed, r.p_never)
    }
}

impl BinaryTypeModel {
    pub fn new(p_always: f64, p_saved: f64, p_harmed: f64, p_never: f64) -> Result<Self> {
        check_probability("p_always", p_always)?;
        check_probability("p_saved", p_saved)?;
        check_probability("p_harmed", p_harmed)?;
        check_probability("p_never", p_never)?;
        let sum = p_always + p_saved + p_harmed + p_never;
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(ModelError::BadSum {
                what: "type proportions",
                sum,
            });
        }
        Ok(BinaryTypeModel {
            p_always,
            p_saved,
            p_harmed,
            p_never,
        })
    }

    /// A model without a harmed type.
    pub fn without_harm(p_always: f64, p_saved: f64, p_never: f64) -> Result<Self> {
        Self::new(p_always, p_saved, 0.0, p_never)
    }

    /// Builds a model from counts per type, e.g. out of 1000 patients.
    pub fn from_counts(always: u64, saved: u64, harmed: u64, never: u64) -> Result<Self> {
        let total = (always + saved + harmed + never) as f64;
        if total == 0.0 {
            return Err(ModelError::BadSum {
                what: "type proportions",
                sum: 0.0,
            });
        }
        Self::new(
            always as f64 / total,
            saved as f64 / total,
            harmed as f64 / total,
            never as f64 / total,
        )
    }

    pub fn p_always(&self) -> f64 {
        self.p_always
    }
    pub fn p_saved(&self) -> f64 {
        self.p_saved
    }
    pub fn p_harmed(&self) -> f64 {
        self.p_harmed
    }
    pub fn p_never(&self) -> f64 {
        self.p_never
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryTypeAte {
    pub ate: f64,
    pub treat_rate: f64,
    pub control_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub label: String,
    pub effect: f64,
    pub population_share: f64,
    pub sample_share: f64,
}

/// A discretized effect-versus-covariate curve with population and sample shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Stratum>", into = "Vec<Stratum>")]
pub struct StratifiedEffectCurve {
    strata: Vec<Stratum>,
}

impl TryFrom<Vec<Stratum>> for StratifiedEffectCurve {
    type Error = ModelError;
    fn try_from(strata: Vec<Stratum>) -> Result<Self> {
        StratifiedEffectCurve::new(strata)
    }
}

impl From<StratifiedEffectCurve> for Vec<Stratum> {
    fn from(c: StratifiedEffectCurve) -> Self {
        c.strata
    }
}

impl StratifiedEffectCurve {
    pub fn new(strata: Vec<Stratum>) -> Result<Self> {
        if strata.is_empty() {
            return Err(ModelError::EmptyStrata);
        }
        if strata.iter().any(|s| !s.effect.is_finite()) {
            return Err(ModelError::NonFinite("stratum effect"));
        }
        let pop: Vec<f64> = strata.iter().map(|s| s.population_share).collect();
        let smp: Vec<f64> = strata.iter().map(|s| s.sample_share).collect();
        let pop = normalize("population shares", &pop)?;
        let smp = normalize("sample shares", &smp)?;
        let strata = strata
            .into_iter()
            .zip(pop.into_iter().zip(smp))
            .map(|(s, (p, q))| Stratum {
                population_share: p,
                sample_share: q,
                ..s
            })
            .collect();
        Ok(StratifiedEffectCurve { strata })
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Population,
    Sample,
}

pub fn mixture_mean(dist: &EffectDistribution) -> f64 {
    dist.mean()
}

pub fn mixture_variance(dist: &EffectDistribution) -> f64 {
    dist.variance()
}

/// `n` independent draws, deterministic given `seed`.
pub fn sample(dist: &EffectDistribution, n: usize, seed: u64) -> Vec<f64> {
    dist.sample(n, seed)
}

/// Normal centered at the midpoint of the range with scale equal to its half-width.
///
/// The normal is not truncated: tails past either end of the range stand for
/// rare exceptional responders and occasional reversals.
pub fn from_plausible_range(range: PlausibleRange) -> EffectComponent {
    EffectComponent::Normal {
        center: (range.lo + range.hi) / 2.0,
        scale: (range.hi - range.lo) / 2.0,
    }
}

/// `{p_null: point_mass(0), 1 - p_null: base}`.
pub fn with_null_mass(base: EffectComponent, p_null: f64) -> Result<EffectDistribution> {
    check_probability("p_null", p_null)?;
    EffectDistribution::new(vec![
        (p_null, EffectComponent::point_mass(0.0)),
        (1.0 - p_null, base),
    ])
}

/// Mixes a share `p_null` of pure nulls into an existing distribution.
/// Returns `dist` unchanged when `p_null` is zero.
pub fn dilute(dist: &EffectDistribution, p_null: f64) -> Result<EffectDistribution> {
    check_probability("p_null", p_null)?;
    if p_null == 0.0 {
        return Ok(dist.clone());
    }
    let mut parts = vec![(p_null, EffectComponent::point_mass(0.0))];
    parts.extend(
        dist.components
            .iter()
            .map(|c| ((1.0 - p_null) * c.weight, c.component.clone())),
    );
    let diluted = EffectDistribution::new(parts)?;
    Ok(match &dist.units {
        Some(u) => diluted.with_units(u.clone()),
        None => diluted,
    })
}

/// Rule-of-thumb average effect `(1 - p_null) * X / 2` for a plausible effect size `X`.
pub fn heuristic_ate(x: f64, p_null: f64) -> Result<f64> {
    check_probability("p_null", p_null)?;
    Ok((1.0 - p_null) * (0.5 * x))
}

pub fn binary_type_ate(model: &BinaryTypeModel) -> BinaryTypeAte {
    let treat_rate = model.p_always + model.p_saved;
    let control_rate = model.p_always + model.p_harmed;
    BinaryTypeAte {
        ate: model.p_saved - model.p_harmed,
        treat_rate,
        control_rate,
    }
}

/// Individual effects are +1 for saved, -1 for harmed and 0 otherwise.
pub fn binary_to_distribution(model: &BinaryTypeModel) -> EffectDistribution {
    let parts = [
        (model.p_saved, 1.0),
        (model.p_harmed, -1.0),
        (model.p_always + model.p_never, 0.0),
    ];
    let components = parts
        .iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, v)| (*w, EffectComponent::point_mass(*v)))
        .collect();
    EffectDistribution::new(components).expect("type model proportions are validated")
}

/// Share-weighted average effect over strata.
pub fn stratified_ate(curve: &StratifiedEffectCurve, weighting: Weighting) -> f64 {
    let mut terms: Vec<f64> = curve
        .strata
        .iter()
        .map(|s| {
            let share = match weighting {
                Weighting::Population => s.population_share,
                Weighting::Sample => s.sample_share,
            };
            s.effect * share
        })
        .collect();
    // summation order fixed by value so the result does not depend on stratum order
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}
