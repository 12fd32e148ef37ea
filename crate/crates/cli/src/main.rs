//! `gradabs` — numerical laboratory for the fast p-Laplacian equation with
//! gradient absorption. Exit codes: 0 all requested checks passed, 1 check
//! failures, 2 usage or configuration errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use gradabs_cli::config::{ExperimentConfig, PlotKind};
use gradabs_cli::experiment::run_experiment;
use gradabs_cli::plot::emit_plot_data;
use gradabs_cli::snapshot::save_snapshot;
use gradabs_cli::sweep::{run_sweep, SweepSpec};

use gradabs_core::exponents::{classify, critical_exponents, Params};
use gradabs_core::functionals::{fit_exponential_decay, fit_power_decay};
use gradabs_core::verify::{
    check_harmonic_barrier_pc, check_stationary_supersolution, check_time_supersolution, Bernstein,
    BernsteinChoice, TimeBarrier,
};

#[derive(Parser)]
#[command(
    name = "gradabs",
    about = "Singular diffusion with gradient absorption: classification, simulation, verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical exponents and predicted large-time regime for (p, q, N).
    Classify(ClassifyArgs),
    /// Run one experiment from a JSON config.
    Simulate(ConfigArgs),
    /// Run a (p, q) sweep from a JSON config and emit the regime atlas.
    Sweep(ConfigArgs),
    /// Fit a decay law to a two-column CSV time series.
    Fit(FitArgs),
    /// Verify the reaction identities of a Bernstein change of variable.
    VerifyBernstein(BernsteinArgs),
    /// Verify a time-only or stationary super-solution.
    VerifySupersolution(SupersolutionArgs),
    /// Emit plot-data CSV from a run report.
    PlotData(PlotArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    n: u32,
    /// Assume the datum satisfies the sharp power-tail condition.
    #[arg(long)]
    fast_decay: bool,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the JSON configuration.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with a header row; first column is t.
    #[arg(long)]
    input: PathBuf,
    /// power | exp
    #[arg(long)]
    kind: String,
    /// Fit window "a,b".
    #[arg(long)]
    window: String,
    /// Value column, by header name (default: the second column).
    #[arg(long)]
    column: Option<String>,
}

#[derive(Args)]
struct BernsteinArgs {
    /// sharp-power | balanced-power | critical-log | critical-log-half |
    /// subcritical-implicit | hj-sqrt | hj-power
    #[arg(long)]
    choice: String,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1.0)]
    u0_inf: f64,
    #[arg(long, default_value_t = 64)]
    samples: usize,
}

#[derive(Args)]
struct SupersolutionArgs {
    /// Time barriers: sharp-power-exact | sharp-power-shifted |
    /// balanced-power-shifted | critical-log-exact | critical-log-shifted |
    /// critical-log-half-shifted | hj-sub-shifted | hj-power-exact;
    /// stationary barriers: stationary | barrier-pc.
    #[arg(long)]
    which: String,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1.0)]
    u0_inf: f64,
    /// Amplitude A (stationary) or C0 (barrier-pc).
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Comma-separated radii for the stationary checks.
    #[arg(long, default_value = "0.1,1,10")]
    radii: String,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    report: PathBuf,
    /// decay-log-log | mass-ledger | profile-evolution | estimate-ratio
    #[arg(long)]
    kind: String,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Classify(args) => {
            let params = Params::new(args.p, args.q, args.n)?;
            let out = serde_json::json!({
                "params": params,
                "exponents": critical_exponents(&params),
                "prediction": classify(&params, args.fast_decay),
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Command::Simulate(args) => simulate(&args.config),
        Command::Sweep(args) => sweep(&args.config),
        Command::Fit(args) => fit(&args),
        Command::VerifyBernstein(args) => verify_bernstein(&args),
        Command::VerifySupersolution(args) => verify_supersolution(&args),
        Command::PlotData(args) => {
            let text = fs::read_to_string(&args.report)
                .with_context(|| format!("reading report {}", args.report.display()))?;
            let kind = parse_plot_kind(&args.kind)?;
            let csv = emit_plot_data(&text, kind)?;
            write_or_print(args.out.as_deref(), &csv)?;
            Ok(true)
        }
    }
}

fn simulate(config_path: &Path) -> Result<bool> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    let config = ExperimentConfig::from_json(&text)?;
    let started = Instant::now();
    let outcome = run_experiment(&config)?;
    eprintln!(
        "simulate: {:.3}s wall time",
        started.elapsed().as_secs_f64()
    );

    let report_json = outcome.report.to_json();
    match config.output.report.as_deref() {
        None | Some("-") => print!("{report_json}"),
        Some(path) => write_file(Path::new(path), &report_json)?,
    }
    if let Some(path) = &config.output.snapshot {
        let traj = outcome
            .trajectory
            .as_ref()
            .context("snapshot output requested but the experiment had no run block")?;
        save_snapshot(traj, Path::new(path))?;
    }
    for plot in &config.output.plots {
        let csv = emit_plot_data(&report_json, plot.kind)?;
        write_file(Path::new(&plot.path), &csv)?;
    }
    Ok(outcome.report.all_checks_passed())
}

fn sweep(config_path: &Path) -> Result<bool> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading sweep config {}", config_path.display()))?;
    let spec = SweepSpec::from_json(&text)?;
    let started = Instant::now();
    let atlas = run_sweep(&spec)?;
    eprintln!("sweep: {:.3}s wall time", started.elapsed().as_secs_f64());

    let csv = atlas.to_csv();
    match spec.output.csv.as_deref() {
        None | Some("-") => print!("{csv}"),
        Some(path) => write_file(Path::new(path), &csv)?,
    }
    if let Some(path) = &spec.output.json {
        write_file(Path::new(path), &atlas.to_json())?;
    }
    let per_cell_ok = atlas.cells.iter().all(|c| c.error.is_none());
    Ok(per_cell_ok)
}

fn fit(args: &FitArgs) -> Result<bool> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading series {}", args.input.display()))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().context("empty series file")?;
    let col = match &args.column {
        Some(name) => header
            .split(',')
            .position(|h| h.trim() == name)
            .with_context(|| format!("no column `{name}` in header `{header}`"))?,
        None => 1,
    };
    let mut series = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let t: f64 = cols
            .first()
            .context("missing t column")?
            .trim()
            .parse()
            .with_context(|| format!("bad t on line {}", i + 1))?;
        let y: f64 = cols
            .get(col)
            .with_context(|| format!("missing value column on line {}", i + 1))?
            .trim()
            .parse()
            .with_context(|| format!("bad value on line {}", i + 1))?;
        series.push((t, y));
    }
    let (a, b) = args
        .window
        .split_once(',')
        .context("window must be `a,b`")?;
    let window = (a.trim().parse()?, b.trim().parse()?);
    let fit = match args.kind.as_str() {
        "power" => fit_power_decay(&series, window)?,
        "exp" => fit_exponential_decay(&series, window)?,
        other => anyhow::bail!("unknown fit kind `{other}` (power|exp)"),
    };
    println!("{}", serde_json::to_string_pretty(&fit)?);
    Ok(true)
}

fn verify_bernstein(args: &BernsteinArgs) -> Result<bool> {
    let params = Params::new(args.p, args.q, args.n)?;
    let choice = parse_bernstein_choice(&args.choice)?;
    let bernstein = Bernstein::new(choice, &params, args.u0_inf)?;
    let report = bernstein.certify(args.samples)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report.passed)
}

fn verify_supersolution(args: &SupersolutionArgs) -> Result<bool> {
    let params = Params::new(args.p, args.q, args.n)?;
    let report = match args.which.as_str() {
        "stationary" => {
            let radii = parse_radii(&args.radii)?;
            check_stationary_supersolution(args.amplitude, &params, &radii)?
        }
        "barrier-pc" => {
            let radii = parse_radii(&args.radii)?;
            check_harmonic_barrier_pc(&params, args.amplitude, &radii)?
        }
        other => {
            let which = parse_time_barrier(other)?;
            check_time_supersolution(which, &params, args.u0_inf)?
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report.passed)
}

fn parse_radii(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().context("bad radius"))
        .collect()
}

fn parse_bernstein_choice(name: &str) -> Result<BernsteinChoice> {
    BernsteinChoice::ALL
        .into_iter()
        .find(|c| c.as_str() == name)
        .with_context(|| {
            format!(
                "unknown choice `{name}`; expected one of {:?}",
                BernsteinChoice::ALL
                    .iter()
                    .map(|c| c.as_str())
                    .collect::<Vec<_>>()
            )
        })
}

fn parse_time_barrier(name: &str) -> Result<TimeBarrier> {
    TimeBarrier::ALL
        .into_iter()
        .find(|b| b.as_str() == name)
        .with_context(|| {
            format!(
                "unknown barrier `{name}`; expected stationary, barrier-pc, or one of {:?}",
                TimeBarrier::ALL
                    .iter()
                    .map(|b| b.as_str())
                    .collect::<Vec<_>>()
            )
        })
}

fn parse_plot_kind(name: &str) -> Result<PlotKind> {
    Ok(match name {
        "decay-log-log" => PlotKind::DecayLogLog,
        "mass-ledger" => PlotKind::MassLedger,
        "profile-evolution" => PlotKind::ProfileEvolution,
        "estimate-ratio" => PlotKind::EstimateRatio,
        other => anyhow::bail!("unknown plot kind `{other}`"),
    })
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}
