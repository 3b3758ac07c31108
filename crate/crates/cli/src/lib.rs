//! Command-line front end for `rdmap`.
//!
//! Every subcommand writes one JSON document (or CSV rows for
//! `map-converge --format csv`) to stdout or `--out`. Exit codes: 0 success,
//! 1 usage or input error, 2 mathematical failure (with certificate),
//! 3 ball-size cap exceeded.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rdmap::kernel::DEFAULT_TOL;
use rdmap::sample::{random_element, rng_from_seed};
use rdmap::{
    builtin_rd_params, cn_check_matrix, opnorm_bracket, opnorm_lower, psd_check, run_grid,
    schoenberg_kernel, select_epsilon, GridOptions, GridSchedule, Group, GroupRingElement,
    KernelMatrix, NRule, PowerOptions, RdParams, DEFAULT_BALL_CAP,
};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rdmap", version, about = "Rapid decay, heat multipliers and contractive approximations on group C*-algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test conditional negativity of the word-length kernel on a ball, or of an imported matrix.
    CheckCn(CheckCnArgs),
    /// Test positive-definiteness of e^{-r l} on a ball for each r.
    CheckPd(CheckPdArgs),
    /// Bracket the reduced operator norm of a group-ring element.
    Norm(NormArgs),
    /// Check the rapid-decay inequality on seeded random elements.
    RdSample(RdSampleArgs),
    /// Sweep rescaled truncated heat multipliers and select the first row below epsilon.
    MapConverge(MapConvergeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format; CSV is only available for map-converge rows.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Maximum number of elements in an enumerated ball.
    #[arg(long, default_value_t = DEFAULT_BALL_CAP)]
    pub ball_cap: usize,
}

#[derive(Debug, Args)]
pub struct RdOverride {
    /// Rapid-decay constant C (defaults to the group's built-in value).
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// Rapid-decay exponent s (defaults to the group's built-in value).
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Seed of the power-iteration start vector.
    #[arg(long, default_value_t = PowerOptions::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = PowerOptions::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Relative-change stopping tolerance of the power iteration.
    #[arg(long, default_value_t = PowerOptions::DEFAULT_TOL)]
    pub power_tol: f64,
}

#[derive(Debug, Args)]
pub struct CheckCnArgs {
    /// Group descriptor, e.g. free:2, free-abelian:1, cyclic:5.
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long)]
    pub radius: Option<u64>,
    /// Kernel matrix JSON file (or inline JSON) instead of a group ball.
    #[arg(long, conflicts_with_all = ["group", "radius"])]
    pub kernel: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CheckPdArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub radius: u64,
    /// Comma-separated list of r values.
    #[arg(long = "r", value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Group-ring element: JSON file, inline JSON, or `generators` / `identity`.
    #[arg(long)]
    pub element: String,
    #[arg(long)]
    pub group: Option<String>,
    /// Radius of the ball used for the compression lower bound.
    #[arg(long, default_value_t = 6)]
    pub radius: u64,
    #[command(flatten)]
    pub rd: RdOverride,
    #[command(flatten)]
    pub power: PowerArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct RdSampleArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub count: usize,
    /// Seed for sampling; mandatory.
    #[arg(long)]
    pub seed: u64,
    /// Radius of the compression ball.
    #[arg(long, default_value_t = 4)]
    pub radius: u64,
    /// Samples are supported in the ball of this radius.
    #[arg(long, default_value_t = 2)]
    pub support_radius: u64,
    #[arg(long, default_value_t = 6)]
    pub max_terms: usize,
    #[command(flatten)]
    pub rd: RdOverride,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MapConvergeArgs {
    #[arg(long)]
    pub element: String,
    #[arg(long)]
    pub group: Option<String>,
    /// Strictly decreasing comma-separated r values.
    #[arg(long = "r", value_delimiter = ',', default_values_t = GridSchedule::DEFAULT_R.to_vec(), allow_negative_numbers = true)]
    pub r: Vec<f64>,
    /// Truncation rule n(r) = ceil(factor * s / r).
    #[arg(long, default_value_t = NRule::DEFAULT_FACTOR)]
    pub n_factor: f64,
    /// Fixed truncation radius instead of the proportional rule.
    #[arg(long, conflicts_with = "n_factor")]
    pub n: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Radius of the compression ball for the defect lower bounds.
    #[arg(long, default_value_t = 4)]
    pub radius: u64,
    /// Record per-row wall-clock time (output is then not reproducible).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub rd: RdOverride,
    #[command(flatten)]
    pub power: PowerArgs,
    #[command(flatten)]
    pub output: Output,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<rdmap::Error> for Failure {
    fn from(e: rdmap::Error) -> Self {
        let code = match e {
            rdmap::Error::BallCapExceeded { .. } => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match execute(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    match command {
        Command::CheckCn(a) => check_cn(a, stdout),
        Command::CheckPd(a) => check_pd(a, stdout),
        Command::Norm(a) => norm(a, stdout),
        Command::RdSample(a) => rd_sample(a, stdout),
        Command::MapConverge(a) => map_converge(a, stdout, stderr),
    }
}

fn parse_group(text: &str) -> Result<Group, Failure> {
    text.parse::<Group>().map_err(Failure::from)
}

/// Inline JSON when the text looks like JSON, otherwise a file path.
fn load_json(text: &str) -> Result<Value, Failure> {
    let trimmed = text.trim_start();
    let raw = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        text.to_string()
    } else {
        fs::read_to_string(text).map_err(|e| Failure::usage(format!("cannot read {text}: {e}")))?
    };
    serde_json::from_str(&raw).map_err(|e| Failure::usage(format!("malformed JSON: {e}")))
}

fn load_element(text: &str, group: Option<&str>) -> Result<GroupRingElement, Failure> {
    let group = group.map(parse_group).transpose()?;
    match text {
        "generators" | "identity" => {
            let g = group.ok_or_else(|| Failure::usage(format!("--element {text} needs --group")))?;
            Ok(if text == "generators" {
                GroupRingElement::generator_sum(g)
            } else {
                GroupRingElement::delta(g, g.identity())?
            })
        }
        _ => Ok(GroupRingElement::from_json(&load_json(text)?, group)?),
    }
}

fn resolve_rd(g: &Group, o: &RdOverride) -> Result<RdParams, Failure> {
    let base = builtin_rd_params(g);
    Ok(RdParams::new(o.c.unwrap_or(base.c), o.s.unwrap_or(base.s))?)
}

fn power_options(p: &PowerArgs, radius: u64, ball_cap: usize) -> Result<PowerOptions, Failure> {
    if !(p.power_tol > 0.0) {
        return Err(Failure::usage("--power-tol must be positive"));
    }
    Ok(PowerOptions {
        radius,
        max_iters: p.max_iters,
        tol: p.power_tol,
        seed: p.seed,
        ball_cap,
    })
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::usage(format!("--tol must be positive, got {tol}")))
    }
}

fn json_only(o: &Output) -> Result<(), Failure> {
    if o.format == Format::Csv {
        return Err(Failure::usage("CSV output is only available for map-converge"));
    }
    Ok(())
}

fn emit(o: &Output, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    match &o.out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(bytes)
            .map_err(|e| Failure::usage(format!("cannot write output: {e}"))),
    }
}

fn emit_json(o: &Output, stdout: &mut dyn Write, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    emit(o, stdout, text.as_bytes())
}

fn check_cn(a: &CheckCnArgs, stdout: &mut dyn Write) -> Outcome {
    json_only(&a.output)?;
    check_tol(a.tol)?;
    let (kernel, source) = match (&a.kernel, &a.group, a.radius) {
        (Some(k), _, _) => (KernelMatrix::from_json(&load_json(k)?)?, json!({"kernel": k})),
        (None, Some(g), Some(radius)) => {
            let g = parse_group(g)?;
            let points = g.ball(radius, a.output.ball_cap)?;
            (
                KernelMatrix::length_kernel(&g, &points)?,
                json!({"group": g, "radius": radius}),
            )
        }
        _ => return Err(Failure::usage("check-cn needs --kernel, or --group with --radius")),
    };
    let verdict = cn_check_matrix(&kernel, a.tol)?;
    let witness_value = verdict.witness.as_ref().map(|c| kernel.quadratic_form(c));
    let report = json!({
        "command": "check-cn",
        "source": source,
        "points": kernel.size(),
        "tol": a.tol,
        "verdict": verdict,
        "witness_quadratic_form": witness_value,
    });
    emit_json(&a.output, stdout, &report)?;
    Ok(if verdict.passed { EXIT_OK } else { EXIT_FAILURE })
}

fn check_pd(a: &CheckPdArgs, stdout: &mut dyn Write) -> Outcome {
    json_only(&a.output)?;
    check_tol(a.tol)?;
    if let Some(r) = a.r.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Failure::usage(format!("every r must be positive, got {r}")));
    }
    let g = parse_group(&a.group)?;
    let points = g.ball(a.radius, a.output.ball_cap)?;
    let mut results = Vec::with_capacity(a.r.len());
    let mut all = true;
    for &r in &a.r {
        let v = psd_check(&schoenberg_kernel(&g, &points, r)?, a.tol);
        all &= v.passed;
        results.push(json!({"r": r, "passed": v.passed, "min_eigenvalue": v.min_eigenvalue}));
    }
    let report = json!({
        "command": "check-pd",
        "group": g,
        "radius": a.radius,
        "points": points.len(),
        "tol": a.tol,
        "passed": all,
        "results": results,
    });
    emit_json(&a.output, stdout, &report)?;
    Ok(if all { EXIT_OK } else { EXIT_FAILURE })
}

fn norm(a: &NormArgs, stdout: &mut dyn Write) -> Outcome {
    json_only(&a.output)?;
    let f = load_element(&a.element, a.group.as_deref())?;
    let g = f.group();
    let rd = resolve_rd(&g, &a.rd)?;
    let opts = power_options(&a.power, a.radius, a.output.ball_cap)?;
    let bracket = opnorm_bracket(&f, &rd, &opts)?;
    let report = json!({
        "command": "norm",
        "element": f.to_json(),
        "rd": rd,
        "l1_norm": f.l1_norm(),
        "l2_norm": f.l2_norm(),
        "sobolev_norm": f.sobolev_norm(rd.s),
        "bracket": bracket,
    });
    emit_json(&a.output, stdout, &report)?;
    Ok(EXIT_OK)
}

fn rd_sample(a: &RdSampleArgs, stdout: &mut dyn Write) -> Outcome {
    json_only(&a.output)?;
    if a.count == 0 {
        return Err(Failure::usage("--count must be at least 1"));
    }
    if a.max_terms == 0 {
        return Err(Failure::usage("--max-terms must be at least 1"));
    }
    let g = parse_group(&a.group)?;
    let rd = resolve_rd(&g, &a.rd)?;
    let pool = g.ball(a.support_radius, a.output.ball_cap)?;
    let opts = PowerOptions {
        radius: a.radius,
        ball_cap: a.output.ball_cap,
        ..PowerOptions::default()
    };
    let mut rng = rng_from_seed(a.seed);
    let mut violations = 0usize;
    let mut worst: Option<(f64, Value)> = None;
    for index in 0..a.count {
        let f = random_element(g, &pool, &mut rng, a.max_terms);
        let lower = opnorm_lower(&f, &opts)?.value;
        let bound = rd.bound(&f);
        if lower > bound + 1e-9 {
            violations += 1;
        }
        let ratio = lower / bound;
        if worst.as_ref().is_none_or(|(w, _)| ratio > *w) {
            worst = Some((
                ratio,
                json!({
                    "index": index,
                    "element": f.to_json(),
                    "lower": lower,
                    "rd_bound": bound,
                    "ratio": ratio,
                }),
            ));
        }
    }
    let (max_ratio, worst) = worst.expect("count >= 1");
    let passed = violations == 0;
    let report = json!({
        "command": "rd-sample",
        "group": g,
        "rd": rd,
        "count": a.count,
        "seed": a.seed,
        "radius": a.radius,
        "support_radius": a.support_radius,
        "passed": passed,
        "violations": violations,
        "max_ratio": max_ratio,
        "worst": worst,
    });
    emit_json(&a.output, stdout, &report)?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
}

fn map_converge(a: &MapConvergeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    if a.epsilon.is_nan() || a.epsilon < 0.0 {
        return Err(Failure::usage(format!("--epsilon must be nonnegative, got {}", a.epsilon)));
    }
    let f = load_element(&a.element, a.group.as_deref())?;
    let g = f.group();
    let rd = resolve_rd(&g, &a.rd)?;
    let n_rule = match a.n {
        Some(n) => NRule::Fixed(n),
        None => NRule::Proportional { factor: a.n_factor },
    };
    let schedule = GridSchedule::new(a.r.clone(), n_rule, rd)?;
    let opts = GridOptions {
        power: power_options(&a.power, a.radius, a.output.ball_cap)?,
        record_timing: a.timing,
    };
    let rows = run_grid(&f, &schedule, &opts)?;
    let selected = select_epsilon(&rows, a.epsilon)?;
    match a.output.format {
        Format::Json => {
            let report = json!({
                "command": "map-converge",
                "element": f.to_json(),
                "rd": rd,
                "schedule": schedule,
                "radius": a.radius,
                "epsilon": a.epsilon,
                "rows": rows,
                "selected": selected.map(|i| json!({"index": i, "row": rows[i]})),
            });
            emit_json(&a.output, stdout, &report)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row)
                    .map_err(|e| Failure::usage(format!("CSV encoding failed: {e}")))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Failure::usage(format!("CSV encoding failed: {e}")))?;
            emit(&a.output, stdout, &bytes)?;
            let _ = match selected {
                Some(i) => writeln!(stderr, "selected row {i}: r={} n={}", rows[i].r, rows[i].n),
                None => writeln!(stderr, "selected: none"),
            };
        }
    }
    Ok(if selected.is_some() { EXIT_OK } else { EXIT_FAILURE })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_json_and_paths_are_distinguished() {
        assert_eq!(load_json(" [1, 2]").unwrap(), json!([1, 2]));
        let err = load_json("/nonexistent/kernel.json").unwrap_err();
        assert_eq!(err.code, EXIT_USAGE);
        assert!(err.message.starts_with("cannot read"));
        assert_eq!(load_json("{oops").unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn element_shorthands_need_a_group() {
        let f = load_element("generators", Some("cyclic:5")).unwrap();
        assert_eq!(f.support_len(), 2);
        let e = load_element("identity", Some("free:3")).unwrap();
        assert_eq!(e.max_length(), 0);
        assert_eq!(load_element("identity", None).unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn library_errors_map_to_exit_codes() {
        let g = Group::free(2).unwrap();
        let cap: Failure = g.ball(11, DEFAULT_BALL_CAP).unwrap_err().into();
        assert_eq!(cap.code, EXIT_CAP);
        let bad: Failure = Group::free(0).unwrap_err().into();
        assert_eq!(bad.code, EXIT_USAGE);
    }

    #[test]
    fn rd_override_is_validated() {
        let g = Group::free(2).unwrap();
        let keep = resolve_rd(&g, &RdOverride { c: None, s: None }).unwrap();
        assert_eq!(keep, builtin_rd_params(&g));
        let c = resolve_rd(&g, &RdOverride { c: Some(2.0), s: None }).unwrap();
        assert_eq!((c.c, c.s), (2.0, keep.s));
        assert!(resolve_rd(&g, &RdOverride { c: Some(0.0), s: None }).is_err());
    }
}
