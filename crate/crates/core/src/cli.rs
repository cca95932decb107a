//! `qfilt` command-line front end.
//!
//! Each subcommand is a thin wrapper over the library; output text is a pure
//! function of the input file, the flags and the optional config file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::dynamics::{loss_requirement_curve, solve_loss_rate, sweep, RatioConvention, TwoModeModel};
use crate::error::Error;
use crate::linalg::{fmt_c, CMat, C64};
use crate::oscillator::{extract_slh_with, total_hamiltonian_terms, GeneralizedOpenOscillator};
use crate::pipeline::realize_grid;
use crate::realizability::{
    check_doubled_up_symmetry, check_realizable_with, check_symplectic_tf_with, check_transform_conditions_with,
    transform_to_realizable_with,
};
use crate::statespace::{denormalize, minimality_report_with, normalize, tf_to_minimal_ss_with, StateSpace};
use crate::synthesis::{synthesize, PhysicalRealization, C_LIGHT};
use crate::tfio::{
    assemble_doubled_up, deserialize_goo, deserialize_state_space, deserialize_two_mode_model, matrix_to_doc,
    serialize_goo, serialize_realization, serialize_state_space, TransferMatrix, GOO_FORMAT, STATE_SPACE_FORMAT,
};
use crate::tolerance::Tolerances;

#[derive(Parser, Debug)]
#[command(name = "qfilt", version, about = "Realize and simulate linear quantum filters")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Tolerance override, e.g. `--tol realizability=1e-8`. Repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true)]
    tol: Vec<String>,
    /// JSON run configuration; flags take precedence.
    #[arg(long, value_name = "FILE", global = true)]
    config: Option<PathBuf>,
    /// Write output to a file instead of stdout.
    #[arg(long, short, value_name = "FILE", global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Symplectic and realizability checks on a transfer matrix or state space.
    Check {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Minimal realizable state space for a transfer matrix.
    Realize {
        input: PathBuf,
        /// Realize in the dimensionless variable `2 s / s0`.
        #[arg(long, value_name = "S0")]
        normalize: Option<f64>,
    },
    /// Scattering matrix, coupling operators and Hamiltonian.
    Slh {
        input: PathBuf,
        #[arg(long, value_name = "S0")]
        normalize: Option<f64>,
    },
    /// Optical hardware parameters.
    Synth {
        input: PathBuf,
        #[arg(long, value_name = "S0")]
        normalize: Option<f64>,
        /// Auxiliary cavity bandwidth in rad/s.
        #[arg(long, value_name = "RATE")]
        gamma_aux: Option<f64>,
        /// Cavity length in meters.
        #[arg(long, value_name = "METERS")]
        cavity_length: Option<f64>,
    },
    /// Frequency sweep of the two-mode filter with losses (CSV).
    Sweep {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Required main-cavity loss against cavity length (CSV).
    Losscurve {
        /// Optional; the curve depends only on flags and config.
        input: Option<PathBuf>,
        /// Target noise-to-signal figure at DC.
        #[arg(long)]
        target: Option<f64>,
        /// Arm length in meters, sets `s0 = c / L_arm`.
        #[arg(long, value_name = "METERS")]
        arm_length: Option<f64>,
        #[arg(long, value_enum)]
        convention: Option<ConventionArg>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args, Debug, Default, Clone)]
struct GridArgs {
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    scale: Option<GridScale>,
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum ConventionArg {
    Power,
    Amplitude,
}

impl From<ConventionArg> for RatioConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Power => RatioConvention::Power,
            ConventionArg::Amplitude => RatioConvention::Amplitude,
        }
    }
}

#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
    scale: Option<GridScale>,
}

/// Contents of `--config`.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    grid: GridConfig,
    normalize: Option<f64>,
    gamma_aux: Option<f64>,
    cavity_length: Option<f64>,
    target: Option<f64>,
    arm_length: Option<f64>,
    convention: Option<ConventionArg>,
}

/// Resolved sample grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl GridSpec {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.points < 2 {
            return Err(format!("grid needs at least 2 points, got {}", self.points));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if self.scale == GridScale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err("log grid needs positive bounds".into());
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let t = k as f64 / last;
                match self.scale {
                    GridScale::Linear => self.start + (self.stop - self.start) * t,
                    GridScale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

/// Exit code plus captured streams.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Ctx {
    json: bool,
    tol: Tolerances,
    config: RunConfig,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let json = cli.json;
    let output = cli.output.clone();
    let (code, text) = match execute(cli) {
        Ok((code, text)) => (code, text),
        Err(f) => {
            let (code, kind, msg) = match f {
                Failure::Usage(m) => (2, "usage".to_string(), m),
                Failure::Lib(e) => (if e.is_io_or_usage() { 2 } else { 1 }, e.kind().to_string(), e.to_string()),
            };
            if json {
                let v = json!({"error": {"kind": kind, "message": msg}});
                (code, pretty(&v))
            } else {
                return Outcome {
                    code,
                    stdout: String::new(),
                    stderr: format!("error [{kind}]: {msg}\n"),
                };
            }
        }
    };
    match output {
        Some(path) => match std::fs::write(&path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error [io]: cannot write {}: {e}\n", path.display()),
            },
        },
        None => Outcome { code, stdout: text, stderr: String::new() },
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn execute(cli: Cli) -> CliResult<(i32, String)> {
    let config = match &cli.config {
        Some(p) => {
            let text = read(p)?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| Failure::Usage(format!("config: {e}")))?
        }
        None => RunConfig::default(),
    };
    let mut tol = Tolerances::default();
    for (k, v) in &config.tolerances {
        tol.set(k, *v).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    for item in &cli.tol {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--tol expects NAME=VALUE, got `{item}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("--tol value `{v}` is not a number")))?;
        tol.set(k.trim(), v).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let ctx = Ctx { json: cli.json, tol, config };
    match cli.cmd {
        Cmd::Check { input, grid } => cmd_check(&ctx, &input, &grid),
        Cmd::Realize { input, normalize } => cmd_realize(&ctx, &input, normalize.or(ctx.config.normalize)),
        Cmd::Slh { input, normalize } => cmd_slh(&ctx, &input, normalize.or(ctx.config.normalize)),
        Cmd::Synth {
            input,
            normalize,
            gamma_aux,
            cavity_length,
        } => cmd_synth(
            &ctx,
            &input,
            normalize.or(ctx.config.normalize),
            gamma_aux.or(ctx.config.gamma_aux),
            cavity_length.or(ctx.config.cavity_length),
        ),
        Cmd::Sweep { input, grid } => cmd_sweep(&ctx, &input, &grid),
        Cmd::Losscurve {
            input,
            target,
            arm_length,
            convention,
            grid,
        } => cmd_losscurve(&ctx, input.as_deref(), target, arm_length, convention, &grid),
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Failure::Lib(Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}

fn resolve_grid(ctx: &Ctx, args: &GridArgs, default: GridSpec) -> CliResult<GridSpec> {
    let c = &ctx.config.grid;
    let g = GridSpec {
        start: args.start.or(c.start).unwrap_or(default.start),
        stop: args.stop.or(c.stop).unwrap_or(default.stop),
        points: args.points.or(c.points).unwrap_or(default.points),
        scale: args.scale.or(c.scale).unwrap_or(default.scale),
    };
    g.validate().map_err(Failure::Usage)?;
    Ok(g)
}

enum Input {
    Transfer(TransferMatrix),
    State(StateSpace),
    Oscillator(GeneralizedOpenOscillator),
    Model(TwoModeModel),
}

impl Input {
    fn name(&self) -> &'static str {
        match self {
            Input::Transfer(_) => "transfer_matrix",
            Input::State(_) => "state_space",
            Input::Oscillator(_) => "oscillator",
            Input::Model(_) => "two_mode_model",
        }
    }
}

/// Recognizes transfer matrices, state spaces (bare or inside a `realize` report),
/// oscillators and two-mode models.
fn load(path: &Path) -> CliResult<Input> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(Error::from)?;
    if let Some(f) = v.get("format").and_then(Value::as_str) {
        return match f {
            STATE_SPACE_FORMAT => Ok(Input::State(deserialize_state_space(&text)?)),
            GOO_FORMAT => Ok(Input::Oscillator(deserialize_goo(&text)?)),
            other => Err(Error::schema("format", format!("unsupported document `{other}`")).into()),
        };
    }
    if let Some(ss) = v.get("state_space") {
        return Ok(Input::State(deserialize_state_space(&ss.to_string())?));
    }
    if v.get("entries").is_some() {
        return Ok(Input::Transfer(TransferMatrix::from_json(&text)?));
    }
    if v.get("gamma").is_some() {
        return Ok(Input::Model(deserialize_two_mode_model(&text)?));
    }
    Err(Error::schema("", "unrecognized input document").into())
}

fn fmt_matrix(out: &mut String, name: &str, m: &CMat) {
    if m.is_empty() {
        let _ = writeln!(out, "{name} = [] ({}x{})", m.nrows(), m.ncols());
        return;
    }
    let _ = writeln!(out, "{name} =");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:>24}", fmt_c(m[(i, j)]))).collect();
        let _ = writeln!(out, "  [{} ]", row.join(""));
    }
}

fn mat(m: &CMat) -> Value {
    serde_json::to_value(matrix_to_doc(m)).expect("matrix documents serialize")
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

const CHECK_GRID: GridSpec = GridSpec {
    start: 0.0,
    stop: 10.0,
    points: 200,
    scale: GridScale::Linear,
};

fn cmd_check(ctx: &Ctx, input: &Path, grid: &GridArgs) -> CliResult<(i32, String)> {
    let input = load(input)?;
    let spec = resolve_grid(ctx, grid, CHECK_GRID)?;
    let points: Vec<C64> = spec.values().into_iter().map(|w| C64::new(0.0, w)).collect();
    let tol = &ctx.tol;
    let mut checks: Vec<(String, bool)> = Vec::new();
    let mut report = serde_json::Map::new();
    report.insert("input_kind".into(), json!(input.name()));
    match &input {
        Input::Transfer(tm) => {
            let g = assemble_doubled_up(tm);
            let sym = check_symplectic_tf_with(&g, &points, tol)?;
            checks.push(("symplectic".into(), sym.pass));
            report.insert("symplectic".into(), json!(sym));
            let ss = tf_to_minimal_ss_with(&g, tol)?;
            let cond = check_transform_conditions_with(&ss, tol)?;
            checks.push(("eigenvalue_pair".into(), cond.eigen_ok));
            checks.push(("feedthrough".into(), cond.d_ok));
            report.insert("minimality".into(), json!(minimality_report_with(&ss, tol.rank)));
            report.insert("conditions".into(), json!(cond));
        }
        Input::State(ss) => {
            let rep = check_realizable_with(ss, tol);
            checks.push(("realizability".into(), rep.pass));
            report.insert("realizability".into(), json!(rep));
            let sym = check_symplectic_tf_with(ss, &points, tol)?;
            checks.push(("symplectic".into(), sym.pass));
            report.insert("symplectic".into(), json!(sym));
            report.insert("minimality".into(), json!(minimality_report_with(ss, tol.rank)));
            report.insert("symmetry".into(), json!(check_doubled_up_symmetry(ss)));
        }
        _ => {
            return Err(Failure::Usage(format!(
                "check expects a transfer matrix or state space, got {}",
                input.name()
            )))
        }
    }
    let pass = checks.iter().all(|(_, p)| *p);
    let failed: Vec<&str> = checks.iter().filter(|(_, p)| !p).map(|(n, _)| n.as_str()).collect();
    report.insert("checks".into(), json!(checks.iter().map(|(n, p)| json!({"name": n, "pass": p})).collect::<Vec<_>>()));
    report.insert("failed".into(), json!(failed));
    report.insert("pass".into(), json!(pass));
    let code = if pass { 0 } else { 1 };
    if ctx.json {
        return Ok((code, pretty(&Value::Object(report))));
    }
    let mut out = String::new();
    let _ = writeln!(out, "input: {}", input.name());
    if let Some(r) = report.get("realizability") {
        let _ = writeln!(
            out,
            "realizability  dyn {}  out {}  feed {}  tol {}  {}",
            fmt_sci(r["residual_dyn"].as_f64().unwrap_or(f64::NAN), 3),
            fmt_sci(r["residual_out"].as_f64().unwrap_or(f64::NAN), 3),
            fmt_sci(r["residual_feed"].as_f64().unwrap_or(f64::NAN), 3),
            fmt_sci(r["tolerance"].as_f64().unwrap_or(f64::NAN), 3),
            status(r["pass"].as_bool().unwrap_or(false)),
        );
    }
    let s = &report["symplectic"];
    let _ = writeln!(
        out,
        "symplectic     max {} at s = {}i over {} points  {}",
        fmt_sci(s["max_residual"].as_f64().unwrap_or(f64::NAN), 3),
        s["worst_s"][1],
        s["points"],
        status(s["pass"].as_bool().unwrap_or(false)),
    );
    if let Some(c) = report.get("conditions") {
        let _ = writeln!(
            out,
            "eigenvalue pair min |l_i + conj(l_j)| {} (threshold {})  {}",
            fmt_sci(c["min_pair_sum"].as_f64().unwrap_or(f64::NAN), 3),
            fmt_sci(c["eigen_threshold"].as_f64().unwrap_or(f64::NAN), 3),
            status(c["eigen_ok"].as_bool().unwrap_or(false)),
        );
        let _ = writeln!(
            out,
            "feedthrough    unitary {}  symplectic {}  {}",
            fmt_sci(c["unitary_residual"].as_f64().unwrap_or(f64::NAN), 3),
            fmt_sci(c["feed_residual"].as_f64().unwrap_or(f64::NAN), 3),
            status(c["d_ok"].as_bool().unwrap_or(false)),
        );
    }
    if !failed.is_empty() {
        let _ = writeln!(out, "failed: {}", failed.join(", "));
    }
    let _ = writeln!(out, "result: {}", status(pass));
    Ok((code, out))
}

/// Realizable state space in physical units plus the report fields of `realize`.
struct RealizeOut {
    physical: StateSpace,
    working: Option<StateSpace>,
    report: serde_json::Map<String, Value>,
}

fn realize_any(ctx: &Ctx, input: Input, normalize_rate: Option<f64>) -> CliResult<RealizeOut> {
    let tol = &ctx.tol;
    let mut report = serde_json::Map::new();
    report.insert("input_kind".into(), json!(input.name()));
    report.insert("normalize".into(), json!(normalize_rate));
    match input {
        Input::Transfer(tm) => {
            let r = realize_grid(&assemble_doubled_up(&tm), normalize_rate, tol)?;
            report.insert("minimality".into(), json!(r.minimality));
            report.insert("conditions".into(), json!(r.conditions));
            report.insert("X".into(), mat(&r.x));
            report.insert("T".into(), mat(&r.t));
            report.insert("realizability".into(), json!(r.report));
            report.insert("symmetry".into(), json!(r.symmetry));
            let working = normalize_rate.map(|_| r.working.clone());
            Ok(RealizeOut {
                physical: r.physical,
                working,
                report,
            })
        }
        Input::State(ss) => {
            let work = match normalize_rate {
                Some(s0) => normalize(&ss, s0)?,
                None => ss,
            };
            let cond = check_transform_conditions_with(&work, tol)?;
            let tr = transform_to_realizable_with(&work, tol)?;
            let physical = match normalize_rate {
                Some(_) => denormalize(&tr.ss)?,
                None => tr.ss.clone(),
            };
            report.insert("minimality".into(), json!(minimality_report_with(&work, tol.rank)));
            report.insert("conditions".into(), json!(cond));
            report.insert("X".into(), mat(&tr.x));
            report.insert("T".into(), mat(&tr.t));
            report.insert("realizability".into(), json!(tr.report));
            report.insert("symmetry".into(), json!(check_doubled_up_symmetry(&physical)));
            Ok(RealizeOut {
                physical,
                working: normalize_rate.map(|_| tr.ss),
                report,
            })
        }
        other => Err(Failure::Usage(format!(
            "expected a transfer matrix or state space, got {}",
            other.name()
        ))),
    }
}

fn ss_value(ss: &StateSpace) -> CliResult<Value> {
    Ok(serde_json::from_str(&serialize_state_space(ss)?).map_err(Error::from)?)
}

fn fmt_state_space(out: &mut String, ss: &StateSpace) {
    let _ = writeln!(out, "n = {}, m = {}", ss.n(), ss.m());
    fmt_matrix(out, "A", ss.a());
    fmt_matrix(out, "B", ss.b());
    fmt_matrix(out, "C", ss.c());
    fmt_matrix(out, "D", ss.d());
}

fn cmd_realize(ctx: &Ctx, input: &Path, normalize_rate: Option<f64>) -> CliResult<(i32, String)> {
    let input = load(input)?;
    let r = realize_any(ctx, input, normalize_rate)?;
    if ctx.json {
        let mut doc = r.report.clone();
        doc.insert("state_space".into(), ss_value(&r.physical)?);
        if let Some(w) = &r.working {
            doc.insert("dimensionless".into(), ss_value(w)?);
        }
        return Ok((0, pretty(&Value::Object(doc))));
    }
    let mut out = String::new();
    if let Some(w) = &r.working {
        let _ = writeln!(out, "# dimensionless model");
        fmt_state_space(&mut out, w);
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "# realizable model (sign convention G(s) = C(-sI - A)^-1 B + D)");
    fmt_state_space(&mut out, &r.physical);
    let t: CMat = doc_matrix(&r.report["T"]);
    fmt_matrix(&mut out, "T", &t);
    let rep = &r.report["realizability"];
    let _ = writeln!(
        out,
        "residuals: dyn {}  out {}  feed {}",
        fmt_sci(rep["residual_dyn"].as_f64().unwrap_or(f64::NAN), 3),
        fmt_sci(rep["residual_out"].as_f64().unwrap_or(f64::NAN), 3),
        fmt_sci(rep["residual_feed"].as_f64().unwrap_or(f64::NAN), 3),
    );
    if !r.report["symmetry"]["pass"].as_bool().unwrap_or(true) {
        let _ = writeln!(out, "warning: transformed model breaks conjugate-pair symmetry");
    }
    Ok((0, out))
}

fn doc_matrix(v: &Value) -> CMat {
    let doc: crate::tfio::MatrixDoc = serde_json::from_value(v.clone()).expect("written by matrix_to_doc");
    crate::tfio::matrix_from_doc(&doc, "", (doc.rows, doc.cols)).expect("shape matches declaration")
}

fn oscillator_of(ctx: &Ctx, input: Input, normalize_rate: Option<f64>) -> CliResult<GeneralizedOpenOscillator> {
    match input {
        Input::Oscillator(g) => Ok(g),
        Input::State(ss) if check_realizable_with(&ss, &ctx.tol).pass && normalize_rate.is_none() => {
            Ok(extract_slh_with(&ss, &ctx.tol)?)
        }
        other => {
            let r = realize_any(ctx, other, normalize_rate)?;
            Ok(extract_slh_with(&r.physical, &ctx.tol)?)
        }
    }
}

/// `L_j = sum_k (K_{j,2k} a_k + K_{j,2k+1} a_k^H)` with zero terms omitted.
fn coupling_strings(goo: &GeneralizedOpenOscillator) -> Vec<String> {
    let k = goo.k();
    (0..goo.m())
        .map(|ch| {
            let mut parts = Vec::new();
            for j in 0..goo.n() {
                for (col, op) in [(2 * j, format!("a{}", j + 1)), (2 * j + 1, format!("a{}^H", j + 1))] {
                    let z = k[(ch, col)];
                    if z.norm() > 0.0 {
                        parts.push(format!("({}) {op}", fmt_c(z)));
                    }
                }
            }
            let rhs = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
            format!("L{} = {rhs}", ch + 1)
        })
        .collect()
}

fn cmd_slh(ctx: &Ctx, input: &Path, normalize_rate: Option<f64>) -> CliResult<(i32, String)> {
    let input = load(input)?;
    let goo = oscillator_of(ctx, input, normalize_rate)?;
    let terms = total_hamiltonian_terms(&goo);
    let couplings = coupling_strings(&goo);
    if ctx.json {
        let goo_v: Value = serde_json::from_str(&serialize_goo(&goo)?).map_err(Error::from)?;
        let v = json!({
            "oscillator": goo_v,
            "coupling_operators": couplings,
            "hamiltonian_terms": terms,
        });
        return Ok((0, pretty(&v)));
    }
    let mut out = String::new();
    fmt_matrix(&mut out, "S", goo.s());
    for l in &couplings {
        let _ = writeln!(out, "{l}");
    }
    let internal: Vec<String> = terms
        .iter()
        .filter(|t| t.kind == crate::oscillator::TermKind::Internal)
        .map(|t| format!("({}) {}", fmt_c(t.coefficient), t.operators))
        .collect();
    if internal.is_empty() {
        let _ = writeln!(out, "H = 0");
    } else {
        let _ = writeln!(out, "H = {}", internal.join(" + "));
    }
    fmt_matrix(&mut out, "Omega", goo.omega());
    Ok((0, out))
}

fn fmt_realization(out: &mut String, r: &PhysicalRealization) {
    let _ = writeln!(out, "auxiliary bandwidth gamma = {}", r.gamma_aux);
    let _ = writeln!(
        out,
        "series order: {}",
        r.series_order.iter().map(|k| format!("a{}", k + 1)).collect::<Vec<_>>().join(" -> ")
    );
    let _ = writeln!(out, "{:<6}{:>26}{:>30}{:>16}", "mode", "detuning", "internal pump", "crystal r");
    for o in &r.oscillators {
        let cr = o.internal.crystal_r.map(|v| fmt_sci(v, 6)).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<6}{:>26}{:>30}{:>16}",
            format!("a{}", o.mode_id + 1),
            o.internal.delta,
            fmt_c(o.internal.epsilon),
            cr
        );
    }
    let _ = writeln!(
        out,
        "{:<6}{:<6}{:>30}{:>30}{:>16}{:>16}",
        "mode", "chan", "beamsplitter eps2", "squeezer eps1", "theta_bs", "phi"
    );
    for o in &r.oscillators {
        for c in &o.couplings {
            let _ = writeln!(
                out,
                "{:<6}{:<6}{:>30}{:>30}{:>16}{:>16}",
                format!("a{}", o.mode_id + 1),
                format!("u{}", c.channel + 1),
                fmt_c(c.eps2),
                fmt_c(c.eps1),
                fmt_sci(c.theta_bs, 6),
                fmt_sci(c.phi, 6)
            );
        }
    }
    for h in &r.interactions {
        let _ = writeln!(
            out,
            "interaction a{}-a{}: theta_bs {}  phi {}  pump {}",
            h.modes.0 + 1,
            h.modes.1 + 1,
            fmt_sci(h.theta_bs, 6),
            fmt_sci(h.phi, 6),
            fmt_c(h.pump)
        );
    }
    for p in &r.crystal_params {
        let _ = writeln!(
            out,
            "crystal a{}/u{}: r {}  L {} m  T {}",
            p.mode_id + 1,
            p.channel + 1,
            fmt_sci(p.r, 6),
            p.cavity_length,
            fmt_sci(p.mirror_transmissivity, 6)
        );
    }
}

fn cmd_synth(
    ctx: &Ctx,
    input: &Path,
    normalize_rate: Option<f64>,
    gamma_aux: Option<f64>,
    cavity_length: Option<f64>,
) -> CliResult<(i32, String)> {
    let gamma_aux = gamma_aux.ok_or_else(|| Failure::Usage("synth requires --gamma-aux".into()))?;
    let input = load(input)?;
    let goo = oscillator_of(ctx, input, normalize_rate)?;
    let r = synthesize(&goo, gamma_aux, cavity_length)?;
    if ctx.json {
        let mut s = serialize_realization(&r)?;
        s.push('\n');
        return Ok((0, s));
    }
    let mut out = String::new();
    fmt_realization(&mut out, &r);
    Ok((0, out))
}

/// C-style `%.12e`: mantissa with 12 decimals and a signed two-digit exponent.
pub fn fmt_e(x: f64) -> String {
    fmt_sci(x, 12)
}

/// C-style `%.<prec>e`.
pub fn fmt_sci(x: f64, prec: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{:.*e}", prec, x + 0.0);
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

fn cmd_sweep(ctx: &Ctx, input: &Path, grid: &GridArgs) -> CliResult<(i32, String)> {
    let model = match load(input)? {
        Input::Model(m) => m,
        other => return Err(Failure::Usage(format!("sweep expects a two-mode model, got {}", other.name()))),
    };
    let spec = resolve_grid(
        ctx,
        grid,
        GridSpec {
            start: 0.0,
            stop: 0.3 * model.s0,
            points: 101,
            scale: GridScale::Linear,
        },
    )?;
    let rows = sweep(&model, &spec.values())?;
    if ctx.json {
        return Ok((0, pretty(&json!({"model": model, "rows": rows}))));
    }
    let mut out = String::from("omega,signal_re,signal_im,signal_power,noise_a_power,noise_b_power,formula_ratio\n");
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_e(r.omega),
            fmt_e(r.signal.re),
            fmt_e(r.signal.im),
            fmt_e(r.signal_power),
            fmt_e(r.noise_a_power),
            fmt_e(r.noise_b_power),
            fmt_e(r.formula_ratio.unwrap_or(f64::NAN)),
        );
    }
    Ok((0, out))
}

fn cmd_losscurve(
    ctx: &Ctx,
    input: Option<&Path>,
    target: Option<f64>,
    arm_length: Option<f64>,
    convention: Option<ConventionArg>,
    grid: &GridArgs,
) -> CliResult<(i32, String)> {
    if let Some(p) = input {
        // The input only supplies the model file for provenance; it must still exist and parse.
        load(p)?;
    }
    let target = target.or(ctx.config.target).unwrap_or(0.1);
    let l_arm = arm_length.or(ctx.config.arm_length).unwrap_or(4000.0);
    let conv: RatioConvention = convention.or(ctx.config.convention).unwrap_or(ConventionArg::Amplitude).into();
    let spec = resolve_grid(
        ctx,
        grid,
        GridSpec {
            start: 0.1,
            stop: 10.0,
            points: 100,
            scale: GridScale::Linear,
        },
    )?;
    if !(l_arm > 0.0) {
        return Err(Failure::Usage("--arm-length must be positive".into()));
    }
    let s0 = C_LIGHT / l_arm;
    let gamma_a = solve_loss_rate(s0, target, conv)?;
    let pts = loss_requirement_curve(l_arm, target, &spec.values(), conv)?;
    if ctx.json {
        let v = json!({
            "convention": conv.name(),
            "target": target,
            "arm_length": l_arm,
            "s0": s0,
            "gamma_a": gamma_a,
            "points": pts,
        });
        return Ok((0, pretty(&v)));
    }
    let mut out = String::from("L_a,eps_a,eps_a_per_L_a\n");
    for p in &pts {
        let _ = writeln!(out, "{},{},{}", fmt_e(p.length_a), fmt_e(p.eps_a), fmt_e(p.eps_per_length));
    }
    Ok((0, out))
}
