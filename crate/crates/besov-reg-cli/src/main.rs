//! `besovreg`: plan Besov-scale Tikhonov penalties, solve the penalized
//! least-squares problems, and run delta-grid convergence-rate experiments.
//!
//! Exit codes: 0 on success, 1 on validation errors (bad JSON/CSV, invalid
//! parameters), 2 on numerical failure (solver non-convergence).

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use besov_reg::devore::{devore_csv, devore_diagram_data};
use besov_reg::io::{coef_field_from_csv, coef_field_to_csv};
use besov_reg::planner::{
    feasible_csv, feasible_weakened_sources, plan_direct, plan_optimal, plan_weakened, GridSpec,
    PlanProvenance, ProblemSignature, RegularizationPlan,
};
use besov_reg::rate::{run_rate_experiment, ExperimentConfig};
use besov_reg::scalar::Rational;
use besov_reg::sequence::DiagonalScaleOperator;
use besov_reg::solver::{solve_diagonal, solve_general, PenaltySpec, SolveReport, SolverError};
use besov_reg::space::BesovSpace;
use besov_reg::rate::ExperimentError;

#[derive(Parser)]
#[command(
    name = "besovreg",
    version,
    about = "Tikhonov regularization in Besov scales: penalty planning, sequence-space solves, rate experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive a penalty plan from a problem signature (JSON).
    Plan(PlanArgs),
    /// Sample the region of admissible weaker source conditions as CSV.
    Feasible(FeasibleArgs),
    /// Emit DeVore diagram data (points and differential-dimension lines) as CSV.
    Devore(DevoreArgs),
    /// Minimize the Tikhonov functional for a diagonal operator and data CSV.
    Solve(SolveArgs),
    /// Run a delta-grid rate experiment from an experiment config (JSON).
    Rate(RateArgs),
    /// Run the pinned reference problems and print PASS/FAIL per check.
    Examples,
}

#[derive(Args)]
struct PlanArgs {
    /// Problem signature JSON (`-` for stdin).
    #[arg(long)]
    signature: String,
    /// Use the direct penalty derived from the source smoothness.
    #[arg(long, group = "choice")]
    direct: bool,
    /// Use the weakened source condition with this exponent (e.g. "3/2").
    #[arg(long, group = "choice", value_name = "P")]
    weakened: Option<Rational>,
    /// Use the rate-optimal weakening exponent.
    #[arg(long, group = "choice")]
    optimal: bool,
    /// Also write the plan as JSON to this path (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    json: Option<String>,
}

#[derive(Args)]
struct FeasibleArgs {
    /// Problem signature JSON (`-` for stdin).
    #[arg(long)]
    signature: String,
    #[arg(long, value_name = "S")]
    s_min: Option<Rational>,
    #[arg(long, value_name = "S")]
    s_max: Option<Rational>,
    #[arg(long, default_value_t = 25)]
    s_count: usize,
    #[arg(long, value_name = "P")]
    p_min: Option<Rational>,
    #[arg(long, value_name = "P")]
    p_max: Option<Rational>,
    #[arg(long, default_value_t = 25)]
    p_count: usize,
    /// Output CSV path (`-` for stdout).
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Args)]
struct DevoreArgs {
    /// Diagram config JSON (`-` for stdin).
    #[arg(long)]
    config: String,
    /// Output CSV path (`-` for stdout).
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Args)]
struct SolveArgs {
    /// Diagonal operator spec JSON: {"eta": .., "max_level": ..}.
    #[arg(long)]
    operator: PathBuf,
    /// Data CSV with header level,position,value.
    #[arg(long)]
    data: PathBuf,
    /// Penalty JSON: {"space": {"s":..,"p":..,"d":..}, "alpha": ..}.
    #[arg(long)]
    penalty: PathBuf,
    /// Where to write the minimizer CSV.
    #[arg(long, default_value = "minimizer.csv")]
    minimizer_out: PathBuf,
    /// Where to write the solve report JSON.
    #[arg(long, default_value = "solve_report.json")]
    report_out: PathBuf,
    /// diagonal (exact, per coefficient) or general (proximal gradient).
    #[arg(long, default_value = "diagonal")]
    method: String,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct RateArgs {
    /// Experiment config JSON (`-` for stdin).
    #[arg(long)]
    config: String,
    /// Where to write the rate report JSON.
    #[arg(long, default_value = "rate_report.json")]
    json: PathBuf,
    /// Where to write the per-delta CSV.
    #[arg(long, default_value = "rate_report.csv")]
    csv: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Non-convergence is a numerical failure (2); everything else that can go
/// wrong here is a validation problem (1).
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(SolverError::NonConvergence { .. }) = cause.downcast_ref::<SolverError>() {
            return 2;
        }
        if let Some(ExperimentError::Solver(SolverError::NonConvergence { .. })) =
            cause.downcast_ref::<ExperimentError>()
        {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Feasible(args) => cmd_feasible(args),
        Command::Devore(args) => cmd_devore(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Rate(args) => cmd_rate(args),
        Command::Examples => cmd_examples(),
    }
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .context("reading stdin")?;
        Ok(text)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn write_output(path: &str, content: &str) -> Result<()> {
    if path == "-" {
        print!("{content}");
        Ok(())
    } else {
        fs::write(path, content).with_context(|| format!("writing {path}"))
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| anyhow!("invalid JSON in {what}: {e}"))
}

fn load_signature(path: &str) -> Result<ProblemSignature> {
    let text = read_input(path)?;
    parse_json(&text, "problem signature")
}

fn cmd_plan(args: PlanArgs) -> Result<()> {
    let signature = load_signature(&args.signature)?;
    let plan = if args.direct {
        plan_direct(&signature)?
    } else if let Some(p) = &args.weakened {
        plan_weakened(&signature, p)?
    } else if args.optimal {
        plan_optimal(&signature)?
    } else {
        bail!("choose one of --direct, --weakened <P>, or --optimal");
    };

    println!("{}", render_plan(&plan));
    if let Some(path) = args.json {
        let json = serde_json::to_string_pretty(&plan).context("serializing plan")?;
        write_output(&path, &format!("{json}\n"))?;
    }
    Ok(())
}

fn render_plan(plan: &RegularizationPlan) -> String {
    let mut out = String::new();
    let heading = match &plan.provenance {
        PlanProvenance::Direct => "penalty plan (direct)".to_owned(),
        PlanProvenance::Weakened { p } => format!("penalty plan (weakened, p = {p})"),
        PlanProvenance::Optimal { p, .. } => format!("penalty plan (optimal, p = {p})"),
    };
    out.push_str(&heading);
    out.push('\n');
    out.push_str(&format!("  penalty space   {}\n", plan.penalty_space));
    out.push_str(&format!(
        "  penalty power   {} (= {})\n",
        plan.p_r().to_f64(),
        plan.p_r()
    ));
    out.push_str(&format!(
        "  sigma           {} (= {})\n",
        plan.sigma.to_f64(),
        plan.sigma
    ));
    out.push_str(&format!(
        "  epsilon shift   {} (= {})\n",
        plan.epsilon_shift.to_f64(),
        plan.epsilon_shift
    ));
    if let PlanProvenance::Optimal {
        penalty_is_rate_space: true,
        ..
    } = &plan.provenance
    {
        out.push_str("  rate space      equals the penalty space (p_R = 2)\n");
    } else {
        out.push_str(&format!(
            "  rate space      H^sigma, sigma = {}\n",
            plan.sigma.to_f64()
        ));
    }
    out.push_str("  feasibility\n");
    for check in &plan.feasibility {
        let mark = if check.satisfied { "ok" } else { "FAIL" };
        out.push_str(&format!("    [{mark}] {} ({})\n", check.name, check.detail));
    }
    out
}

fn cmd_feasible(args: FeasibleArgs) -> Result<()> {
    let signature = load_signature(&args.signature)?;
    signature.ensure_valid()?;
    let one = Rational::one();
    let grid = GridSpec {
        s_min: args
            .s_min
            .unwrap_or_else(|| signature.domain.s() - &one),
        s_max: args
            .s_max
            .unwrap_or_else(|| signature.source.s() + &one),
        s_count: args.s_count,
        p_min: args
            .p_min
            .unwrap_or_else(|| signature.source.p().clone()),
        p_max: args.p_max.unwrap_or_else(|| signature.max_weakening()),
        p_count: args.p_count,
    };
    let region = feasible_weakened_sources(&signature, &grid)?;
    write_output(&args.output, &feasible_csv(&region))
}

#[derive(Deserialize)]
struct DevorePoint {
    label: String,
    s: Rational,
    p: Rational,
}

fn default_inv_p_samples() -> Vec<Rational> {
    (0..=8).map(|i| Rational::ratio(i, 4)).collect()
}

#[derive(Deserialize)]
struct DevoreConfig {
    d: u32,
    #[serde(default)]
    points: Vec<DevorePoint>,
    #[serde(default)]
    lines: Vec<Rational>,
    #[serde(default = "default_inv_p_samples")]
    inv_p_samples: Vec<Rational>,
}

fn cmd_devore(args: DevoreArgs) -> Result<()> {
    let text = read_input(&args.config)?;
    let config: DevoreConfig = parse_json(&text, "devore config")?;
    let points = config
        .points
        .into_iter()
        .map(|point| {
            BesovSpace::exact(point.s, point.p, config.d)
                .map(|space| (point.label, space))
                .map_err(anyhow::Error::from)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = devore_diagram_data(config.d, &points, &config.lines, &config.inv_p_samples)?;
    write_output(&args.output, &devore_csv(&rows))
}

#[derive(Deserialize)]
struct OperatorConfig {
    eta: f64,
    max_level: u32,
}

#[derive(Deserialize)]
struct PenaltyConfig {
    space: BesovSpace,
    alpha: f64,
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let operator: OperatorConfig = parse_json(
        &fs::read_to_string(&args.operator)
            .with_context(|| format!("reading {}", args.operator.display()))?,
        "operator spec",
    )?;
    let penalty: PenaltyConfig = parse_json(
        &fs::read_to_string(&args.penalty)
            .with_context(|| format!("reading {}", args.penalty.display()))?,
        "penalty spec",
    )?;
    let data_text = fs::read_to_string(&args.data)
        .with_context(|| format!("reading {}", args.data.display()))?;
    let data = coef_field_from_csv(&data_text)
        .with_context(|| format!("parsing {}", args.data.display()))?;

    let op = DiagonalScaleOperator::new(operator.eta, operator.max_level)?;
    let pen = PenaltySpec::new(penalty.space, penalty.alpha)?;
    let report = match args.method.as_str() {
        "diagonal" => solve_diagonal(&op, &data, &pen)?,
        "general" => solve_general(&op, &data, &pen, args.max_iter, args.tol)?,
        other => bail!("unknown method {other:?}: expected \"diagonal\" or \"general\""),
    };

    write_report_files(&args.minimizer_out, &args.report_out, &report)?;
    println!(
        "objective {:.6e}, residual {:.3e}, iterations {}",
        report.objective, report.residual, report.iterations
    );
    Ok(())
}

fn write_report_files(
    minimizer_path: &Path,
    report_path: &Path,
    report: &SolveReport,
) -> Result<()> {
    fs::write(minimizer_path, coef_field_to_csv(&report.minimizer))
        .with_context(|| format!("writing {}", minimizer_path.display()))?;
    let json = serde_json::json!({
        "objective": report.objective,
        "residual": report.residual,
        "iterations": report.iterations,
    });
    fs::write(report_path, format!("{:#}\n", json))
        .with_context(|| format!("writing {}", report_path.display()))?;
    Ok(())
}

fn cmd_rate(args: RateArgs) -> Result<()> {
    let text = read_input(&args.config)?;
    let config: ExperimentConfig = parse_json(&text, "experiment config")?;
    let report = run_rate_experiment(&config)?;
    let json = serde_json::to_string_pretty(&report).context("serializing rate report")?;
    fs::write(&args.json, format!("{json}\n"))
        .with_context(|| format!("writing {}", args.json.display()))?;
    fs::write(&args.csv, report.to_csv())
        .with_context(|| format!("writing {}", args.csv.display()))?;
    println!(
        "sigma {:.4}: fitted slope {:.4} (R^2 {:.4}) over {} deltas",
        report.sigma,
        report.slope,
        report.r_squared,
        report.rows.len()
    );
    Ok(())
}

fn cmd_examples() -> Result<()> {
    let checks = besov_reg::fixtures::reference_checks();
    let mut failures = 0usize;
    for check in &checks {
        if check.passed {
            println!("PASS {} ({})", check.name, check.detail);
        } else {
            println!("FAIL {} ({})", check.name, check.detail);
            failures += 1;
        }
    }
    if failures > 0 {
        bail!("{failures} of {} reference checks failed", checks.len());
    }
    Ok(())
}
