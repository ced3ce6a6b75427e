//! Guided elicitation of a distribution of individual effects.
//!
//! A researcher first states the study context and an initial guess of the
//! average effect (ATE_pre). They then describe the units with the largest
//! and smallest effects, allocate the rest of the sample across effect bins
//! (or split it at the midpoint) and give the share of pure nulls. The
//! session then holds the implied average (ATE_post), and a final
//! reflection closes the comparison.
//!
//! Sessions are immutable values: [`ElicitationSession::advance`] returns a
//! new session and leaves its receiver untouched.

mod store;

use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::effect_model::{
    check_probability, mixture_mean, with_null_mass, EffectComponent, EffectDistribution,
    ModelError, WEIGHT_TOLERANCE,
};

pub use store::{FileStore, MemoryStore, SessionHub, SessionStore};

/// Version of the session JSON document.
pub const SESSION_SCHEMA_VERSION: u32 = 1;

/// Balls handed out by the distribution builder unless stated otherwise.
pub const DEFAULT_TOTAL_BALLS: u32 = 20;

/// Extreme-bin mass and stated tail share may differ by this factor before
/// a warning is raised.
pub const TAIL_SHARE_WARNING_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElicitationError {
    #[error("session is at stage `{expected}` but received a `{got}` payload")]
    StageMismatch { expected: Stage, got: Stage },
    #[error("session is complete; no further input is accepted")]
    Completed,
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("session is missing {0}")]
    Incomplete(&'static str),
    #[error("session `{0}` not found")]
    NotFound(String),
    #[error("session `{id}` conflict: {reason}")]
    Conflict { id: String, reason: String },
    #[error("unsupported session schema version {found} (this build reads version {supported})")]
    UnsupportedSchema { found: u32, supported: u32 },
    #[error("invalid session id `{0}`")]
    InvalidId(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("malformed session JSON: {0}")]
    Json(String),
    #[error("session store: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ElicitationError>;

fn invalid(field: &str, message: impl Into<String>) -> ElicitationError {
    ElicitationError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Protocol stages, in order. A session's stage names the input it is waiting for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Context,
    AtePre,
    Extremes,
    Allocation,
    NullShare,
    Derived,
    Compared,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Context,
        Stage::AtePre,
        Stage::Extremes,
        Stage::Allocation,
        Stage::NullShare,
        Stage::Derived,
        Stage::Compared,
    ];

    pub fn next(self) -> Option<Stage> {
        let i = Stage::ALL.iter().position(|s| *s == self)?;
        Stage::ALL.get(i + 1).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Context => "context",
            Stage::AtePre => "ate_pre",
            Stage::Extremes => "extremes",
            Stage::Allocation => "allocation",
            Stage::NullShare => "null_share",
            Stage::Derived => "derived",
            Stage::Compared => "compared",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyContext {
    pub population: String,
    pub sample_size_estimate: u64,
    pub treatment: String,
    pub control: String,
    pub outcome_measure: String,
    pub analysis_plan: String,
    pub effect_units: String,
}

impl StudyContext {
    pub fn validate(&self) -> Result<()> {
        for (field, text) in [
            ("population", &self.population),
            ("treatment", &self.treatment),
            ("control", &self.control),
            ("outcome_measure", &self.outcome_measure),
            ("analysis_plan", &self.analysis_plan),
            ("effect_units", &self.effect_units),
        ] {
            if text.trim().is_empty() {
                return Err(invalid(field, "must not be empty"));
            }
        }
        if self.sample_size_estimate == 0 {
            return Err(invalid("sample_size_estimate", "must be at least 1"));
        }
        Ok(())
    }
}

/// What the researcher expects of the units at one end of the effect range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeJudgment {
    pub effect: f64,
    /// Who these units are.
    #[serde(default)]
    pub description: String,
    /// Recorded and reported, never used in the derived average.
    #[serde(default)]
    pub uncertainty: f64,
    /// Fraction expected at this effect or beyond.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_share: Option<f64>,
}

impl ExtremeJudgment {
    pub fn at(effect: f64) -> Self {
        ExtremeJudgment {
            effect,
            description: String::new(),
            uncertainty: 0.0,
            tail_share: None,
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        if !self.effect.is_finite() {
            return Err(invalid(&format!("{field}.effect"), "must be finite"));
        }
        if !(self.uncertainty.is_finite() && self.uncertainty >= 0.0) {
            return Err(invalid(
                &format!("{field}.uncertainty"),
                "must be finite and nonnegative",
            ));
        }
        if let Some(t) = self.tail_share {
            if !(0.0..=1.0).contains(&t) {
                return Err(invalid(&format!("{field}.tail_share"), "must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub largest: ExtremeJudgment,
    pub smallest: ExtremeJudgment,
}

impl Extremes {
    pub fn new(smallest: f64, largest: f64) -> Self {
        Extremes {
            largest: ExtremeJudgment::at(largest),
            smallest: ExtremeJudgment::at(smallest),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.largest.validate("largest")?;
        self.smallest.validate("smallest")?;
        if self.largest.effect < self.smallest.effect {
            return Err(invalid(
                "largest.effect",
                format!(
                    "largest effect {} is below smallest effect {}",
                    self.largest.effect, self.smallest.effect
                ),
            ));
        }
        Ok(())
    }

    pub fn midpoint(&self) -> f64 {
        (self.smallest.effect + self.largest.effect) / 2.0
    }
}

/// Balls placed in effect bins, the distribution-builder answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallsAllocation {
    pub bin_edges: Vec<f64>,
    pub balls: Vec<u32>,
    #[serde(default = "default_total_balls")]
    pub total_balls: u32,
}

fn default_total_balls() -> u32 {
    DEFAULT_TOTAL_BALLS
}

impl BallsAllocation {
    /// `k` equal-width bins spanning `[lo, hi]`, all empty.
    pub fn equal_bins(lo: f64, hi: f64, k: usize, total_balls: u32) -> Self {
        let mut bin_edges: Vec<f64> = (0..k)
            .map(|i| lo + (hi - lo) * i as f64 / k as f64)
            .collect();
        bin_edges.push(hi);
        BallsAllocation {
            bin_edges,
            balls: vec![0; k],
            total_balls,
        }
    }

    pub fn with_balls(mut self, balls: Vec<u32>) -> Self {
        self.balls = balls;
        self
    }

    pub fn bins(&self) -> usize {
        self.bin_edges.len().saturating_sub(1)
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        let total = self.total_balls as f64;
        self.balls.iter().map(|b| *b as f64 / total).collect()
    }

    /// Discrete component at the bin midpoints with masses `balls / total_balls`.
    pub fn to_component(&self) -> Result<EffectComponent> {
        self.validate()?;
        Ok(EffectComponent::discrete(self.midpoints(), self.masses())?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins() < 2 {
            return Err(invalid("bin_edges", "need at least three edges (two bins)"));
        }
        if self.bin_edges.iter().any(|e| !e.is_finite()) {
            return Err(invalid("bin_edges", "edges must be finite"));
        }
        if self.bin_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("bin_edges", "edges must be strictly increasing"));
        }
        if self.balls.len() != self.bins() {
            return Err(invalid(
                "balls",
                format!("{} counts for {} bins", self.balls.len(), self.bins()),
            ));
        }
        if self.total_balls == 0 {
            return Err(invalid("total_balls", "must be at least 1"));
        }
        let placed: u64 = self.balls.iter().map(|b| *b as u64).sum();
        if placed != self.total_balls as u64 {
            return Err(invalid(
                "balls",
                format!("{placed} balls placed, expected {}", self.total_balls),
            ));
        }
        Ok(())
    }
}

/// Shares below and above the midpoint of the extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MidpointSplit {
    pub share_lower: f64,
    pub share_upper: f64,
}

impl MidpointSplit {
    pub fn new(share_lower: f64, share_upper: f64) -> Self {
        MidpointSplit {
            share_lower,
            share_upper,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("share_lower", self.share_lower), ("share_upper", self.share_upper)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(field, "must lie in [0, 1]"));
            }
        }
        let sum = self.share_lower + self.share_upper;
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(invalid("share_upper", format!("shares sum to {sum}, not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Allocation {
    Balls(BallsAllocation),
    Midpoint(MidpointSplit),
}

impl Allocation {
    fn validate(&self, extremes: &Extremes) -> Result<()> {
        match self {
            Allocation::Midpoint(m) => m.validate(),
            Allocation::Balls(b) => {
                b.validate()?;
                let (lo, hi) = (extremes.smallest.effect, extremes.largest.effect);
                let (first, last) = (b.bin_edges[0], b.bin_edges[b.bins()]);
                if first < lo || last > hi {
                    return Err(invalid(
                        "bin_edges",
                        format!("bins [{first}, {last}] reach outside the extremes [{lo}, {hi}]"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Representative effects and their masses. A midpoint split puts its
    /// shares at the quarter points of the extremes.
    fn points(&self, extremes: &Extremes) -> (Vec<f64>, Vec<f64>) {
        match self {
            Allocation::Balls(b) => (b.midpoints(), b.masses()),
            Allocation::Midpoint(m) => {
                let (lo, hi) = (extremes.smallest.effect, extremes.largest.effect);
                let mid = extremes.midpoint();
                (
                    vec![(lo + mid) / 2.0, (mid + hi) / 2.0],
                    vec![m.share_lower, m.share_upper],
                )
            }
        }
    }
}

/// Input for one protocol step, tagged with the stage it answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Payload {
    Context(StudyContext),
    AtePre { ate_pre: f64 },
    Extremes(Extremes),
    Allocation { allocation: Allocation },
    NullShare { p_null: f64 },
    /// The researcher's free-text reaction to the comparison.
    Reflection { text: String },
}

impl Payload {
    /// Stage at which this payload is accepted.
    pub fn stage(&self) -> Stage {
        match self {
            Payload::Context(_) => Stage::Context,
            Payload::AtePre { .. } => Stage::AtePre,
            Payload::Extremes(_) => Stage::Extremes,
            Payload::Allocation { .. } => Stage::Allocation,
            Payload::NullShare { .. } => Stage::NullShare,
            Payload::Reflection { .. } => Stage::Derived,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub timestamp_ms: u64,
    pub from: Stage,
    pub to: Stage,
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SessionDocument {
    schema_version: u32,
    #[serde(flatten)]
    session: SessionFields,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SessionFields {
    id: String,
    stage: Stage,
    #[serde(default)]
    context: Option<StudyContext>,
    #[serde(default)]
    ate_pre: Option<f64>,
    #[serde(default)]
    extremes: Option<Extremes>,
    #[serde(default)]
    allocation: Option<Allocation>,
    #[serde(default)]
    p_null: Option<f64>,
    #[serde(default)]
    ate_post: Option<f64>,
    #[serde(default)]
    distribution: Option<EffectDistribution>,
    #[serde(default)]
    reflection: Option<String>,
    #[serde(default)]
    warnings: Vec<String>,
    #[serde(default)]
    log: Vec<LogEntry>,
}

/// One researcher's walk through the protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SessionDocument", into = "SessionDocument")]
pub struct ElicitationSession {
    inner: SessionFields,
}

impl TryFrom<SessionDocument> for ElicitationSession {
    type Error = ElicitationError;

    fn try_from(doc: SessionDocument) -> Result<Self> {
        if doc.schema_version != SESSION_SCHEMA_VERSION {
            return Err(ElicitationError::UnsupportedSchema {
                found: doc.schema_version,
                supported: SESSION_SCHEMA_VERSION,
            });
        }
        Ok(ElicitationSession { inner: doc.session })
    }
}

impl From<ElicitationSession> for SessionDocument {
    fn from(s: ElicitationSession) -> Self {
        SessionDocument {
            schema_version: SESSION_SCHEMA_VERSION,
            session: s.inner,
        }
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl ElicitationSession {
    /// Fresh session waiting for the study context.
    pub fn new(id: impl Into<String>) -> Self {
        ElicitationSession {
            inner: SessionFields {
                id: id.into(),
                stage: Stage::Context,
                context: None,
                ate_pre: None,
                extremes: None,
                allocation: None,
                p_null: None,
                ate_post: None,
                distribution: None,
                reflection: None,
                warnings: Vec::new(),
                log: Vec::new(),
            },
        }
    }

    /// Fresh session with a random v4 UUID.
    pub fn with_random_id() -> Self {
        Self::new(uuid::Uuid::new_v4().to_string())
    }

    pub fn id(&self) -> &str {
        &self.inner.id
    }
    pub fn stage(&self) -> Stage {
        self.inner.stage
    }
    pub fn context(&self) -> Option<&StudyContext> {
        self.inner.context.as_ref()
    }
    pub fn ate_pre(&self) -> Option<f64> {
        self.inner.ate_pre
    }
    pub fn extremes(&self) -> Option<&Extremes> {
        self.inner.extremes.as_ref()
    }
    pub fn allocation(&self) -> Option<&Allocation> {
        self.inner.allocation.as_ref()
    }
    pub fn p_null(&self) -> Option<f64> {
        self.inner.p_null
    }
    pub fn ate_post(&self) -> Option<f64> {
        self.inner.ate_post
    }
    /// The elicited distribution, in the effect-model schema.
    pub fn distribution(&self) -> Option<&EffectDistribution> {
        self.inner.distribution.as_ref()
    }
    pub fn reflection(&self) -> Option<&str> {
        self.inner.reflection.as_deref()
    }
    pub fn warnings(&self) -> &[String] {
        &self.inner.warnings
    }
    pub fn log(&self) -> &[LogEntry] {
        &self.inner.log
    }

    /// Number of accepted advances.
    pub fn revision(&self) -> usize {
        self.inner.log.len()
    }

    /// Next session after accepting `payload`, stamped with the current time.
    pub fn advance(&self, payload: Payload) -> Result<ElicitationSession> {
        self.advance_at(payload, now_ms())
    }

    /// [`advance`](Self::advance) with an explicit log timestamp.
    pub fn advance_at(&self, payload: Payload, timestamp_ms: u64) -> Result<ElicitationSession> {
        let from = self.stage();
        let to = from.next().ok_or(ElicitationError::Completed)?;
        if payload.stage() != from {
            return Err(ElicitationError::StageMismatch {
                expected: from,
                got: payload.stage(),
            });
        }
        let logged = serde_json::to_value(&payload).map_err(|e| ElicitationError::Json(e.to_string()))?;
        let mut next = self.clone();
        let s = &mut next.inner;
        match payload {
            Payload::Context(ctx) => {
                ctx.validate()?;
                s.context = Some(ctx);
            }
            Payload::AtePre { ate_pre } => {
                if !ate_pre.is_finite() {
                    return Err(invalid("ate_pre", "must be finite"));
                }
                s.ate_pre = Some(ate_pre);
            }
            Payload::Extremes(ex) => {
                ex.validate()?;
                s.extremes = Some(ex);
            }
            Payload::Allocation { allocation } => {
                let ex = s.extremes.as_ref().ok_or(ElicitationError::Incomplete("extremes"))?;
                allocation.validate(ex)?;
                s.warnings.extend(tail_share_warnings(ex, &allocation));
                s.allocation = Some(allocation);
            }
            Payload::NullShare { p_null } => {
                check_probability("p_null", p_null).map_err(|e| invalid("p_null", e.to_string()))?;
                s.p_null = Some(p_null);
                let dist = derive_distribution(&next)?;
                next.inner.ate_post = Some(mixture_mean(&dist));
                next.inner.distribution = Some(dist);
            }
            Payload::Reflection { text } => {
                s.reflection = Some(text);
            }
        }
        next.inner.stage = to;
        next.inner.log.push(LogEntry {
            timestamp_ms,
            from,
            to,
            payload: logged,
        });
        Ok(next)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("session serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("session serializes")
    }

    /// Parses a session document, checking the schema version before the body.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| ElicitationError::Json(e.to_string()))?;
        let found = value.get("schema_version").and_then(Value::as_u64);
        match found {
            Some(v) if v == SESSION_SCHEMA_VERSION as u64 => {}
            Some(v) => {
                return Err(ElicitationError::UnsupportedSchema {
                    found: v.min(u32::MAX as u64) as u32,
                    supported: SESSION_SCHEMA_VERSION,
                })
            }
            None => return Err(ElicitationError::Json("missing schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| ElicitationError::Json(e.to_string()))
    }
}

fn tail_share_warnings(ex: &Extremes, allocation: &Allocation) -> Vec<String> {
    let Allocation::Balls(b) = allocation else {
        return Vec::new();
    };
    let masses = b.masses();
    let ends = [
        ("smallest", &ex.smallest, masses[0]),
        ("largest", &ex.largest, masses[masses.len() - 1]),
    ];
    ends.into_iter()
        .filter_map(|(name, judgment, mass)| {
            let stated = judgment.tail_share?;
            let off = if stated == 0.0 || mass == 0.0 {
                stated != mass
            } else {
                let r = mass / stated;
                !(1.0 / TAIL_SHARE_WARNING_FACTOR..=TAIL_SHARE_WARNING_FACTOR).contains(&r)
            };
            off.then(|| {
                format!(
                    "{name} extreme: stated tail share {stated} but the end bin holds {mass}"
                )
            })
        })
        .collect()
}

/// Elicited distribution: allocation points with a share `p_null` of pure nulls.
pub fn derive_distribution(session: &ElicitationSession) -> Result<EffectDistribution> {
    let s = &session.inner;
    let extremes = s.extremes.as_ref().ok_or(ElicitationError::Incomplete("extremes"))?;
    let allocation = s.allocation.as_ref().ok_or(ElicitationError::Incomplete("allocation"))?;
    let p_null = s.p_null.ok_or(ElicitationError::Incomplete("p_null"))?;
    let (values, masses) = allocation.points(extremes);
    let base = EffectComponent::discrete(values, masses)?;
    let dist = with_null_mass(base, p_null)?;
    Ok(match &s.context {
        Some(ctx) => dist.with_units(ctx.effect_units.clone()),
        None => dist,
    })
}

/// Proportion-weighted average effect implied by the elicited answers.
pub fn derive_ate_post(session: &ElicitationSession) -> Result<f64> {
    derive_distribution(session).map(|d| mixture_mean(&d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Unchanged,
    Lower,
    Higher,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub ate_pre: f64,
    pub ate_post: f64,
    /// `ate_post / ate_pre`; `None` when `ate_pre` is zero.
    pub ratio: Option<f64>,
    pub difference: f64,
    pub verdict: Verdict,
    pub summary: String,
    pub p_null: f64,
    pub extremes: Extremes,
    pub distribution: EffectDistribution,
    pub prompts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflection: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

const PROMPTS: [&str; 3] = [
    "Does the derived average look plausible next to your first guess?",
    "Which part of the elicited distribution drives the difference?",
    "Would you revise the planned sample size given the derived average?",
];

/// Side-by-side view of the first guess and the derived average.
pub fn comparison_report(session: &ElicitationSession) -> Result<ComparisonReport> {
    if session.stage() < Stage::Derived {
        return Err(ElicitationError::Incomplete("a derived ATE_post"));
    }
    let s = &session.inner;
    let ate_pre = s.ate_pre.ok_or(ElicitationError::Incomplete("ate_pre"))?;
    let ate_post = s.ate_post.ok_or(ElicitationError::Incomplete("ate_post"))?;
    let difference = ate_post - ate_pre;
    let ratio = (ate_pre != 0.0).then(|| ate_post / ate_pre);
    let verdict = match ate_post.partial_cmp(&ate_pre) {
        Some(std::cmp::Ordering::Less) => Verdict::Lower,
        Some(std::cmp::Ordering::Greater) => Verdict::Higher,
        _ => Verdict::Unchanged,
    };
    let summary = match (verdict, ratio) {
        (Verdict::Unchanged, _) => "unchanged".to_string(),
        (_, Some(r)) => format!("ATE_post is {r} times ATE_pre"),
        (_, None) => format!("ratio undefined because ATE_pre is 0; absolute difference {difference}"),
    };
    let extremes = s.extremes.clone().ok_or(ElicitationError::Incomplete("extremes"))?;
    let mut warnings = s.warnings.clone();
    for (name, j) in [("largest", &extremes.largest), ("smallest", &extremes.smallest)] {
        if j.uncertainty > 0.0 {
            warnings.push(format!(
                "{name} extreme carries a stated uncertainty of {}; it is not reflected in ATE_post",
                j.uncertainty
            ));
        }
    }
    Ok(ComparisonReport {
        ate_pre,
        ate_post,
        ratio,
        difference,
        verdict,
        summary,
        p_null: s.p_null.ok_or(ElicitationError::Incomplete("p_null"))?,
        extremes,
        distribution: s
            .distribution
            .clone()
            .ok_or(ElicitationError::Incomplete("distribution"))?,
        prompts: PROMPTS.iter().map(|p| p.to_string()).collect(),
        reflection: s.reflection.clone(),
        warnings,
    })
}
