//! Command-line front end. Each subcommand builds the same request the HTTP
//! API takes and prints the library's answer, as JSON or a text table.
//!
//! Exit codes: 0 on success, 1 when a computation or validation fails (or a
//! scenario check fails), 2 on a usage error.

mod wizard;

use std::fs;
use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::design_metrics::{
    required_n, DesignDiagnostics, DesignSpec, Method, OutcomeModel, SampleSize, Sides,
};
use crate::effect_model::{BinaryTypeModel, EffectDistribution, PlausibleRange};
use crate::elicitation::{
    derive_ate_post, BallsAllocation, ElicitationSession, FileStore, SessionHub, Stage,
};
use crate::scenario_bench::{registry, run_all, run_scenario, summary_table, ScenarioRun};
use crate::service_api::{
    compute_ate, compute_diagnostics, serve, Api, AteReport, AteRequest, DiagnosticsRequest,
};

pub use wizard::run_wizard;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Json,
    #[default]
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "effect-design", version, about = "Hypothesize distributions of effects and check study designs against them")]
pub struct Cli {
    #[arg(long, value_enum, global = true, default_value = "table")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average effect implied by a range, a balls-in-bins allocation, binary types or a distribution.
    Ate(AteArgs),
    /// Power, type S error and exaggeration ratio.
    Power(PowerArgs),
    /// Smallest sample size reaching a target power.
    SolveN(SolveArgs),
    /// Walk through the elicitation protocol on stdin/stdout.
    Elicit(ElicitArgs),
    /// List or run the built-in scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

fn pair(s: &str) -> Result<(f64, f64), String> {
    let v = numbers(s)?;
    match v.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected two comma-separated numbers, got `{s}`")),
    }
}

fn quad(s: &str) -> Result<[f64; 4], String> {
    let v = numbers(s)?;
    v.try_into()
        .map_err(|_| format!("expected four comma-separated numbers, got `{s}`"))
}

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{}` is not a number", p.trim()))
        })
        .collect()
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["range", "balls", "types", "dist"])))]
pub struct AteArgs {
    /// Plausible range `lo,hi`, turned into normal((lo+hi)/2, (hi-lo)/2).
    #[arg(long, value_parser = pair, allow_hyphen_values = true)]
    pub range: Option<(f64, f64)>,
    /// JSON file with a balls-in-bins allocation.
    #[arg(long)]
    pub balls: Option<PathBuf>,
    /// Type shares `always,saved,harmed,never`.
    #[arg(long, value_parser = quad)]
    pub types: Option<[f64; 4]>,
    /// Distribution JSON file, or a session file holding one.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    /// Share of pure nulls mixed in.
    #[arg(long, default_value_t = 0.0)]
    pub p_null: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutcomeArgs {
    /// Binary outcome with the standard error bounded at rates 0.5 (default).
    #[arg(long, conflicts_with_all = ["sd", "base_rate"])]
    pub binary_conservative: bool,
    /// Continuous outcome with this residual standard deviation.
    #[arg(long, conflicts_with = "base_rate")]
    pub sd: Option<f64>,
    /// Binary outcome with this control rate.
    #[arg(long)]
    pub base_rate: Option<f64>,
}

impl OutcomeArgs {
    fn model(&self) -> OutcomeModel {
        match (self.sd, self.base_rate) {
            (Some(sd), _) => OutcomeModel::Continuous { sd },
            (None, Some(base_rate)) => OutcomeModel::BinaryBaseRate { base_rate },
            (None, None) => OutcomeModel::BinaryConservative,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("truth").required(true).args(["effect", "dist"])))]
#[command(group(clap::ArgGroup::new("noise").required(true).args(["se", "n_per_arm"])))]
pub struct PowerArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub effect: Option<f64>,
    /// Distribution JSON file (or session file) of true effects; uses Monte Carlo.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    #[arg(long)]
    pub se: Option<f64>,
    #[arg(long)]
    pub n_per_arm: Option<usize>,
    #[command(flatten)]
    pub outcome: OutcomeArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub one_sided: bool,
    /// Monte Carlo draws; a fixed effect uses the closed form unless this is set.
    #[arg(long)]
    pub draws: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub effect: f64,
    #[arg(long, default_value_t = 0.8)]
    pub target_power: f64,
    #[command(flatten)]
    pub outcome: OutcomeArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub one_sided: bool,
    /// Control-to-treatment size ratio.
    #[arg(long, default_value_t = 1.0)]
    pub allocation: f64,
    /// Also solve for this effect and report the size ratio against it.
    #[arg(long, allow_hyphen_values = true)]
    pub relative_to: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ElicitArgs {
    /// Where the session is written after every step.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Continue a saved session from its current stage.
    #[arg(long, conflicts_with = "replay")]
    pub resume: Option<PathBuf>,
    /// Recompute ATE_post of a saved session and check it matches.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ScenarioAction {
    List,
    /// Run one scenario by name, or `all`.
    Run { name: String },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory for the session files; sessions stay in memory without it.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

/// A failure that maps to exit code 1.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the CLI with the process's stdin, stdout and stderr.
pub fn main_with_std() -> i32 {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    run(std::env::args_os(), &mut input, &mut out, &mut err)
}

pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(&cli, input, out, err) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn dispatch(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Ate(a) => ate(a, cli.format, out),
        Command::Power(a) => power(a, cli.format, out),
        Command::SolveN(a) => solve_n(a, cli.format, out),
        Command::Elicit(a) => elicit(a, cli.format, input, out),
        Command::Scenario { action } => scenario(action, cli.format, out),
        Command::Serve(a) => serve_cmd(a, out, err),
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Outcome {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(EXIT_OK)
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

/// A distribution document, or the distribution held by a session document.
pub fn load_distribution(path: &Path) -> Result<EffectDistribution, Failure> {
    let text = read_file(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("stage").is_some() {
        let session = ElicitationSession::from_json(&text)?;
        return session
            .distribution()
            .cloned()
            .ok_or_else(|| Failure(format!("session in {} has no derived distribution yet", path.display())));
    }
    Ok(serde_json::from_value(value)?)
}

pub fn ate_request(a: &AteArgs) -> Result<AteRequest, Failure> {
    let mut req = AteRequest {
        p_null: a.p_null,
        ..AteRequest::default()
    };
    if let Some((lo, hi)) = a.range {
        req.range = Some(PlausibleRange::new(lo, hi)?);
    }
    if let Some(path) = &a.balls {
        let balls: BallsAllocation = serde_json::from_str(&read_file(path)?)?;
        req.balls = Some(balls);
    }
    if let Some([always, saved, harmed, never]) = a.types {
        req.types = Some(BinaryTypeModel::new(always, saved, harmed, never)?);
    }
    if let Some(path) = &a.dist {
        req.distribution = Some(load_distribution(path)?);
    }
    Ok(req)
}

fn ate(a: &AteArgs, format: Format, out: &mut dyn Write) -> Outcome {
    let report = compute_ate(&ate_request(a)?)?;
    match format {
        Format::Json => print_json(out, &report),
        Format::Table => {
            write!(out, "{}", ate_table(&report))?;
            Ok(EXIT_OK)
        }
    }
}

fn ate_table(r: &AteReport) -> String {
    let mut s = format!("{:<16} {}\n", "implied ATE", r.ate);
    if let Some(h) = r.heuristic_ate {
        s += &format!("{:<16} {}\n", "heuristic ATE", h);
    }
    s += &format!("{:<16} {}\n", "p_null", r.p_null);
    if let Some(t) = &r.types {
        s += &format!("{:<16} {}\n", "treatment rate", t.treat_rate);
        s += &format!("{:<16} {}\n", "control rate", t.control_rate);
    }
    s += &format!("{:<16} {}\n", "distribution", r.distribution);
    s
}

pub fn diagnostics_request(a: &PowerArgs) -> Result<DiagnosticsRequest, Failure> {
    let sides = if a.one_sided {
        Sides::OneSided
    } else {
        Sides::TwoSided
    };
    let mut req = DiagnosticsRequest {
        effect: a.effect,
        se: a.se,
        alpha: Some(a.alpha),
        sides: Some(sides),
        draws: a.draws,
        seed: a.seed,
        ..DiagnosticsRequest::default()
    };
    if let Some(path) = &a.dist {
        req.distribution = Some(load_distribution(path)?);
    }
    if let Some(n) = a.n_per_arm {
        let spec = DesignSpec::new(n, n, a.outcome.model())?
            .with_alpha(a.alpha)?
            .with_sides(sides);
        req.design = Some(spec);
    }
    Ok(req)
}

fn power(a: &PowerArgs, format: Format, out: &mut dyn Write) -> Outcome {
    let d = compute_diagnostics(&diagnostics_request(a)?)?;
    match format {
        Format::Json => print_json(out, &d),
        Format::Table => {
            write!(out, "{}", diagnostics_table(&d))?;
            Ok(EXIT_OK)
        }
    }
}

pub fn diagnostics_table(d: &DesignDiagnostics) -> String {
    let mut s = String::new();
    let mut row = |k: &str, v: String| s.push_str(&format!("{k:<16} {v}\n"));
    match d.method {
        Method::ClosedForm => row("method", "closed form".into()),
        Method::MonteCarlo { draws, seed } => {
            row("method", format!("monte carlo ({draws} draws, seed {seed})"))
        }
    }
    if let Some(e) = d.effect {
        row("effect", e.to_string());
    }
    if let Some(dist) = &d.distribution {
        row("mean effect", dist.mean().to_string());
    }
    row("se", d.se.to_string());
    row("alpha", format!("{} ({:?})", d.alpha, d.sides));
    row("z_crit", d.z_crit.to_string());
    row("power", d.power.to_string());
    row("type S", d.type_s.to_string());
    row("exaggeration", d.exaggeration.to_string());
    if let Some(m) = d.median_abs_significant {
        row("median |sig|", m.to_string());
    }
    if let Some(mc) = &d.mc_standard_errors {
        let mut text = format!("power {}, type S {}", mc.power, mc.type_s);
        if let Some(x) = mc.exaggeration {
            text += &format!(", exaggeration {x}");
        }
        row("MC std. errors", text);
    }
    for w in &d.warnings {
        row("warning", w.clone());
    }
    s
}

#[derive(Debug, Serialize)]
struct SolveReport {
    effect: f64,
    sample_size: SampleSize,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative: Option<RelativeSize>,
}

#[derive(Debug, Serialize)]
struct RelativeSize {
    effect: f64,
    sample_size: SampleSize,
    /// Total size for `effect` over total size for the relative effect.
    multiplier: f64,
}

fn solve_n(a: &SolveArgs, format: Format, out: &mut dyn Write) -> Outcome {
    let sides = if a.one_sided {
        Sides::OneSided
    } else {
        Sides::TwoSided
    };
    let solve = |effect: f64| {
        required_n(
            effect,
            a.outcome.model(),
            a.alpha,
            sides,
            a.target_power,
            a.allocation,
        )
    };
    let n = solve(a.effect)?;
    let relative = match a.relative_to {
        Some(e) => {
            let base = solve(e)?;
            Some(RelativeSize {
                effect: e,
                sample_size: base,
                multiplier: n.ratio_to(&base),
            })
        }
        None => None,
    };
    let report = SolveReport {
        effect: a.effect,
        sample_size: n,
        relative,
    };
    match format {
        Format::Json => print_json(out, &report),
        Format::Table => {
            writeln!(out, "{:<16} {}", "effect", report.effect)?;
            writeln!(out, "{:<16} {}", "n treatment", n.n_treat)?;
            writeln!(out, "{:<16} {}", "n control", n.n_control)?;
            writeln!(out, "{:<16} {}", "n total", n.total())?;
            writeln!(out, "{:<16} {}", "achieved power", n.achieved_power)?;
            if let Some(r) = &report.relative {
                writeln!(out, "{:<16} {} (total {})", "relative to", r.effect, r.sample_size.total())?;
                writeln!(out, "{:<16} {}", "multiplier", r.multiplier)?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn elicit(a: &ElicitArgs, format: Format, input: &mut dyn BufRead, out: &mut dyn Write) -> Outcome {
    if let Some(path) = &a.replay {
        let session = ElicitationSession::from_json(&read_file(path)?)?;
        let stored = session
            .ate_post()
            .ok_or_else(|| Failure(format!("session is at stage `{}`; nothing to replay", session.stage())))?;
        let recomputed = derive_ate_post(&session)?;
        let matches = recomputed.to_bits() == stored.to_bits();
        match format {
            Format::Json => {
                print_json(out, &json!({"stored": stored, "recomputed": recomputed, "matches": matches}))?;
            }
            Format::Table => {
                writeln!(out, "{:<16} {}", "stored ATE_post", stored)?;
                writeln!(out, "{:<16} {}", "recomputed", recomputed)?;
                writeln!(out, "{:<16} {}", "matches", matches)?;
            }
        }
        return Ok(if matches { EXIT_OK } else { EXIT_FAILURE });
    }
    let (session, target) = match &a.resume {
        Some(path) => (
            ElicitationSession::from_json(&read_file(path)?)?,
            a.out.clone().unwrap_or_else(|| path.clone()),
        ),
        None => (
            ElicitationSession::with_random_id(),
            a.out.clone().unwrap_or_else(|| PathBuf::from("session.json")),
        ),
    };
    let save = |s: &ElicitationSession| -> io::Result<()> {
        let tmp = target.with_extension("json.tmp");
        fs::write(&tmp, s.to_json_pretty())?;
        fs::rename(&tmp, &target)
    };
    let done = run_wizard(session, input, out, save)?;
    writeln!(out, "session saved to {}", target.display())?;
    Ok(if done.stage() == Stage::Compared {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn scenario(action: &ScenarioAction, format: Format, out: &mut dyn Write) -> Outcome {
    match action {
        ScenarioAction::List => {
            match format {
                Format::Json => {
                    let list: Vec<_> = registry()
                        .iter()
                        .map(|s| json!({"name": s.name, "description": s.description}))
                        .collect();
                    print_json(out, &json!({ "scenarios": list }))?;
                }
                Format::Table => {
                    for s in registry() {
                        writeln!(out, "{:<26} {}", s.name, s.description)?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        ScenarioAction::Run { name } => {
            let runs: Vec<ScenarioRun> = if name == "all" {
                run_all()?
            } else {
                vec![run_scenario(name)?]
            };
            match format {
                Format::Json if name == "all" => print_json(out, &runs)?,
                Format::Json => print_json(out, &runs[0])?,
                Format::Table => write!(out, "{}", summary_table(&runs)).map(|_| EXIT_OK)?,
            };
            Ok(if runs.iter().all(|r| r.passed) {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
    }
}

fn serve_cmd(a: &ServeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let hub = match &a.store {
        Some(dir) => SessionHub::new(FileStore::open(dir)?),
        None => SessionHub::in_memory(),
    };
    let api = Arc::new(Api::new(hub));
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| Failure(format!("bad address {}:{}: {e}", a.host, a.port)))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        writeln!(out, "listening on http://{}", listener.local_addr()?)?;
        out.flush()?;
        if let Err(e) = serve(listener, api).await {
            writeln!(err, "server stopped: {e}")?;
            return Ok(EXIT_FAILURE);
        }
        Ok(EXIT_OK)
    })
}
