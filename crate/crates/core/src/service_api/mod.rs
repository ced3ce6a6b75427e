//! JSON-over-HTTP surface for sessions, implied averages, diagnostics and scenarios.
//!
//! [`Api::handle`] is framework-agnostic: it maps a method, path and body to
//! a status code and a JSON envelope. [`router`] mounts it on axum.
//!
//! Every response body is an envelope `{"schema_version": 1, "payload": ...}`
//! or `{"schema_version": 1, "error": {"code", "message", ...}}`.

mod http;

use std::collections::BTreeMap;
use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::design_metrics::{
    diagnostics_fixed, diagnostics_fixed_mc, diagnostics_mixture, DesignDiagnostics, DesignError,
    DesignSpec, Sides,
};
use crate::effect_model::{
    binary_to_distribution, binary_type_ate, dilute, from_plausible_range, heuristic_ate,
    mixture_mean, with_null_mass, BinaryTypeAte, BinaryTypeModel, EffectDistribution, ModelError,
    PlausibleRange,
};
use crate::elicitation::{
    comparison_report, BallsAllocation, ElicitationError, ElicitationSession, Payload,
    SessionHub, Stage, StudyContext,
};
use crate::scenario_bench::{registry, run_scenario, ScenarioError};

pub use http::{router, serve};

/// Version of the response envelope.
pub const API_SCHEMA_VERSION: u32 = 1;

/// Monte Carlo draws for mixture diagnostics when the request names none.
pub const DEFAULT_MIXTURE_DRAWS: u64 = 200_000;

/// Error body of the envelope, with the HTTP status it maps to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_stage: Option<Stage>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub fields: BTreeMap<String, String>,
    /// Set on conflicts: the same request may succeed after reloading.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub retryable: bool,
}

impl ApiError {
    pub fn new(status: u16, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_string(),
            message: message.into(),
            expected_stage: None,
            fields: BTreeMap::new(),
            retryable: false,
        }
    }

    fn validation(field: Option<&str>, message: impl Into<String>) -> Self {
        let message = message.into();
        let mut e = ApiError::new(422, "validation", message.clone());
        if let Some(f) = field {
            e.fields.insert(f.to_string(), message);
        }
        e
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(404, "not_found", message)
    }
}

impl fmt::Display for ApiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ApiError {}

fn model_field(e: &ModelError) -> Option<&'static str> {
    match e {
        ModelError::Probability { name, .. } => Some(name),
        ModelError::BadSum { what, .. } | ModelError::NegativeWeight { what, .. } => Some(what),
        ModelError::InvalidRange { .. } => Some("range"),
        _ => None,
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        ApiError::validation(model_field(&e), e.to_string())
    }
}

impl From<DesignError> for ApiError {
    fn from(e: DesignError) -> Self {
        let field = match &e {
            DesignError::NonPositiveSe(_) => Some("se"),
            DesignError::InvalidAlpha(_) => Some("alpha"),
            DesignError::CountTooSmall { name, .. } | DesignError::Probability { name, .. } => {
                Some(*name)
            }
            DesignError::NonPositiveSd(_) => Some("sd"),
            DesignError::TooFewDraws { .. } => Some("draws"),
            DesignError::InvalidTargetPower { .. } => Some("target_power"),
            DesignError::InvalidAllocation(_) => Some("allocation"),
            DesignError::ZeroEffect => Some("effect"),
            DesignError::Model(m) => model_field(m),
            _ => None,
        };
        ApiError::validation(field, e.to_string())
    }
}

impl From<ElicitationError> for ApiError {
    fn from(e: ElicitationError) -> Self {
        let message = e.to_string();
        match e {
            ElicitationError::StageMismatch { expected, .. } => {
                let mut err = ApiError::new(422, "stage_mismatch", message);
                err.expected_stage = Some(expected);
                err
            }
            ElicitationError::Completed => ApiError::new(422, "session_complete", message),
            ElicitationError::Invalid { field, .. } => ApiError::validation(Some(&field), message),
            ElicitationError::Incomplete(_) => ApiError::new(422, "incomplete", message),
            ElicitationError::NotFound(_) | ElicitationError::InvalidId(_) => {
                ApiError::not_found(message)
            }
            ElicitationError::Conflict { .. } => {
                let mut err = ApiError::new(409, "conflict", message);
                err.retryable = true;
                err
            }
            ElicitationError::UnsupportedSchema { .. } => {
                ApiError::new(422, "unsupported_schema", message)
            }
            ElicitationError::Model(m) => m.into(),
            ElicitationError::Json(_) | ElicitationError::Io(_) => {
                ApiError::new(500, "internal", message)
            }
        }
    }
}

impl From<ScenarioError> for ApiError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Unknown(_) => ApiError::not_found(e.to_string()),
            ScenarioError::Design(d) => d.into(),
            ScenarioError::Model(m) => m.into(),
            ScenarioError::Fixture { .. } => ApiError::new(500, "internal", e.to_string()),
        }
    }
}

/// Request for power, type S and exaggeration.
///
/// Give exactly one of `effect` and `distribution`, and exactly one of `se`
/// and `design`. A fixed effect uses the closed form unless `draws` is set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<EffectDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    /// Standard error from arm sizes and an outcome model; its alpha and
    /// sides apply unless given here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<Sides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub fn compute_diagnostics(req: &DiagnosticsRequest) -> Result<DesignDiagnostics, ApiError> {
    let reference_effect = match (req.effect, &req.distribution) {
        (Some(e), None) => e,
        (None, Some(d)) => d.mean(),
        _ => {
            return Err(ApiError::validation(
                Some("effect"),
                "give exactly one of `effect` and `distribution`",
            ))
        }
    };
    let (se, alpha, sides) = match (req.se, &req.design) {
        (Some(se), None) => (se, req.alpha.unwrap_or(0.05), req.sides.unwrap_or_default()),
        (None, Some(design)) => (
            design.standard_error(reference_effect)?,
            req.alpha.unwrap_or(design.alpha),
            req.sides.unwrap_or(design.sides),
        ),
        _ => {
            return Err(ApiError::validation(
                Some("se"),
                "give exactly one of `se` and `design`",
            ))
        }
    };
    let seed = req.seed.unwrap_or(0);
    let out = match (&req.distribution, req.draws) {
        (Some(dist), draws) => diagnostics_mixture(
            dist,
            se,
            alpha,
            sides,
            draws.unwrap_or(DEFAULT_MIXTURE_DRAWS),
            seed,
        )?,
        (None, Some(draws)) => diagnostics_fixed_mc(reference_effect, se, alpha, sides, draws, seed)?,
        (None, None) => diagnostics_fixed(reference_effect, se, alpha, sides)?,
    };
    Ok(out)
}

/// Request for the average effect implied by one description of individual
/// effects, diluted by a share of pure nulls.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AteRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<PlausibleRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balls: Option<BallsAllocation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types: Option<BinaryTypeModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<EffectDistribution>,
    #[serde(default)]
    pub p_null: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AteReport {
    pub ate: f64,
    pub p_null: f64,
    pub distribution: EffectDistribution,
    /// `(1 - p_null) * X / 2`, for ranges starting at zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heuristic_ate: Option<f64>,
    /// Arm rates of the type model before any dilution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types: Option<BinaryTypeAte>,
}

pub fn compute_ate(req: &AteRequest) -> Result<AteReport, ApiError> {
    let given = [
        req.range.is_some(),
        req.balls.is_some(),
        req.types.is_some(),
        req.distribution.is_some(),
    ];
    if given.iter().filter(|g| **g).count() != 1 {
        return Err(ApiError::validation(
            None,
            "give exactly one of `range`, `balls`, `types` and `distribution`",
        ));
    }
    let p_null = req.p_null;
    let mut report = AteReport {
        ate: 0.0,
        p_null,
        distribution: EffectDistribution::point_mass(0.0)?,
        heuristic_ate: None,
        types: None,
    };
    if let Some(r) = req.range {
        let range = PlausibleRange::new(r.lo, r.hi)?;
        report.distribution = with_null_mass(from_plausible_range(range), p_null)?;
        report.ate = mixture_mean(&report.distribution);
        if range.lo == 0.0 {
            report.heuristic_ate = Some(heuristic_ate(range.hi, p_null)?);
        }
    } else if let Some(b) = &req.balls {
        report.distribution = with_null_mass(b.to_component()?, p_null)?;
        report.ate = mixture_mean(&report.distribution);
    } else if let Some(t) = &req.types {
        let arms = binary_type_ate(t);
        report.distribution = dilute(&binary_to_distribution(t), p_null)?;
        // the undiluted average is reported as saved minus harmed
        report.ate = if p_null == 0.0 {
            arms.ate
        } else {
            mixture_mean(&report.distribution)
        };
        report.types = Some(arms);
    } else if let Some(d) = &req.distribution {
        report.distribution = dilute(d, p_null)?;
        report.ate = mixture_mean(&report.distribution);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    #[serde(default)]
    pub context: Option<StudyContext>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvanceRequest {
    pub payload: Payload,
    /// Revision the client last saw; a stale value is a conflict.
    #[serde(default)]
    pub expected_revision: Option<usize>,
}

/// Session state as returned by the session routes.
pub fn session_view(s: &ElicitationSession) -> Value {
    json!({
        "id": s.id(),
        "revision": s.revision(),
        "stage": s.stage(),
        "ate_post": s.ate_post(),
        "session": s,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiResponse {
    pub status: u16,
    pub body: Value,
}

impl ApiResponse {
    fn ok(status: u16, payload: Value) -> Self {
        ApiResponse {
            status,
            body: json!({ "schema_version": API_SCHEMA_VERSION, "payload": payload }),
        }
    }

    fn err(e: ApiError) -> Self {
        ApiResponse {
            status: e.status,
            body: json!({ "schema_version": API_SCHEMA_VERSION, "error": e }),
        }
    }

    pub fn payload(&self) -> Option<&Value> {
        self.body.get("payload")
    }

    pub fn error(&self) -> Option<&Value> {
        self.body.get("error")
    }

    pub fn to_json(&self) -> String {
        self.body.to_string()
    }
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let body = if body.iter().all(u8::is_ascii_whitespace) {
        b"{}".as_slice()
    } else {
        body
    };
    serde_json::from_slice(body).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => ApiError::validation(None, e.to_string()),
        _ => ApiError::new(400, "bad_request", format!("malformed JSON: {e}")),
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("response types serialize")
}

/// Route table over a session hub. Compute routes hold no state.
pub struct Api {
    hub: SessionHub,
}

impl Default for Api {
    fn default() -> Self {
        Api::new(SessionHub::in_memory())
    }
}

impl Api {
    pub fn new(hub: SessionHub) -> Self {
        Api { hub }
    }

    pub fn hub(&self) -> &SessionHub {
        &self.hub
    }

    pub fn handle(&self, method: &str, path: &str, body: &[u8]) -> ApiResponse {
        match self.route(method, path, body) {
            Ok((status, payload)) => ApiResponse::ok(status, payload),
            Err(e) => ApiResponse::err(e),
        }
    }

    fn route(&self, method: &str, path: &str, body: &[u8]) -> Result<(u16, Value), ApiError> {
        let path = path.split('?').next().unwrap_or("");
        let segments: Vec<&str> = path.trim_matches('/').split('/').collect();
        let method = method.to_ascii_uppercase();
        let allowed = |m: &str| {
            if method == m {
                Ok(())
            } else {
                Err(ApiError::new(
                    405,
                    "method_not_allowed",
                    format!("{method} is not allowed on {path}; use {m}"),
                ))
            }
        };
        match segments.as_slice() {
            ["v1", "sessions"] => {
                allowed("POST")?;
                let req: CreateSessionRequest = parse(body)?;
                let s = self.hub.create(req.context)?;
                Ok((201, session_view(&s)))
            }
            ["v1", "sessions", id] => {
                allowed("GET")?;
                Ok((200, session_view(&self.hub.get(id)?)))
            }
            ["v1", "sessions", id, "advance"] => {
                allowed("POST")?;
                let req: AdvanceRequest = parse(body)?;
                let s = self.hub.advance(id, req.payload, req.expected_revision)?;
                Ok((200, session_view(&s)))
            }
            ["v1", "sessions", id, "report"] => {
                allowed("GET")?;
                let report = comparison_report(&self.hub.get(id)?)?;
                Ok((200, to_value(&report)))
            }
            ["v1", "diagnostics"] => {
                allowed("POST")?;
                let req: DiagnosticsRequest = parse(body)?;
                Ok((200, to_value(&compute_diagnostics(&req)?)))
            }
            ["v1", "ate"] => {
                allowed("POST")?;
                let req: AteRequest = parse(body)?;
                Ok((200, to_value(&compute_ate(&req)?)))
            }
            ["v1", "scenarios"] => {
                allowed("GET")?;
                let list: Vec<Value> = registry()
                    .iter()
                    .map(|s| json!({ "name": s.name, "description": s.description }))
                    .collect();
                Ok((200, json!({ "scenarios": list })))
            }
            ["v1", "scenarios", name, "run"] => {
                allowed("POST")?;
                Ok((200, to_value(&run_scenario(name)?)))
            }
            _ => Err(ApiError::not_found(format!("no route for {path}"))),
        }
    }
}
