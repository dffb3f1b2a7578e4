//! `wpcn`: run named outage sweeps to CSV/SVG artifacts and validate the
//! analytic evaluators against Monte Carlo simulation.
//!
//! Exit codes: 0 success, 2 configuration error (including usage errors),
//! 3 validation failure, 4 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wpcn_cli::scenario::Scenario;
use wpcn_cli::{run, svg, validate, CliError};

#[derive(Parser)]
#[command(
    name = "wpcn",
    version,
    about = "Outage laboratory for fluid-antenna wireless-powered networks: \
             evaluates scenario sweeps to CSV/SVG and cross-checks analytic \
             forms against simulation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a scenario and write its CSV (and optionally SVG) artifacts.
    Run(RunArgs),
    /// Re-evaluate a scenario and compare analytic values, bounds, and
    /// simulation; exits 0 only if every comparison passes.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario name (fig3..fig12) or path to a scenario file.
    #[arg(long)]
    scenario: String,
    /// Output CSV path. Defaults to <scenario>.csv under WPCN_OUT_DIR (or
    /// the working directory when WPCN_OUT_DIR is unset).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Override the scenario's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Gauss-Laguerre order for the analytic evaluators.
    #[arg(long, default_value_t = 96)]
    glq_order: usize,
    /// Override the dominant-eigenvalue threshold for block derivation.
    #[arg(long)]
    eps: Option<f64>,
    /// Artifact set to write.
    #[arg(long, value_enum, default_value_t = Format::CsvSvg)]
    format: Format,
}

#[derive(Args)]
struct ValidateArgs {
    /// Built-in scenario name (fig3..fig12) or path to a scenario file.
    #[arg(long)]
    scenario: String,
    /// Write the comparison table as CSV here as well.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Override the scenario's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Gauss-Laguerre order for the analytic evaluators.
    #[arg(long, default_value_t = 96)]
    glq_order: usize,
    /// Override the dominant-eigenvalue threshold for block derivation.
    #[arg(long)]
    eps: Option<f64>,
    /// Replace every comparison's default allowance with this value.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Inject a fault to exercise the failure paths.
    #[arg(long, value_enum)]
    inject: Option<InjectArg>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// CSV only.
    Csv,
    /// CSV plus an SVG rendering of the same rows.
    #[value(name = "csv+svg")]
    CsvSvg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InjectArg {
    /// Negate the normalized uplink threshold fed to the harvested-power
    /// lower bound; must surface as a typed validation failure.
    NegateThreshold,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Run(args) => run_cmd(&args),
        Cmd::Validate(args) => validate_cmd(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wpcn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run_cmd(args: &RunArgs) -> Result<(), CliError> {
    let s = load_scenario(&args.scenario, args.trials, args.seed, args.eps)?;
    let rows = run::execute(&s, args.glq_order)?;
    let out = args.out.clone().unwrap_or_else(|| default_out(&s.name));
    write_file(&out, &run::to_csv(&s, &rows))?;
    println!("wrote {} ({} rows)", out.display(), rows.len());
    if args.format == Format::CsvSvg {
        let svg_path = out.with_extension("svg");
        write_file(&svg_path, &svg::render(&s, &rows))?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn validate_cmd(args: &ValidateArgs) -> Result<(), CliError> {
    let s = load_scenario(&args.scenario, args.trials, args.seed, args.eps)?;
    let inject = args.inject.map(|i| match i {
        InjectArg::NegateThreshold => validate::Injection::NegateThreshold,
    });
    let report = validate::execute(&s, args.glq_order, args.tolerance, inject)?;
    print!("{}", report.render_table());
    let (passed, total) = report.counts();
    println!("validation: {passed}/{total} checks passed");
    if let Some(out) = &args.out {
        write_file(out, &report.render_csv())?;
        println!("wrote {}", out.display());
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{}/{total} checks failed",
            total - passed
        )))
    }
}

/// Loads the scenario, applies command-line overrides, and re-validates so
/// an override can never smuggle in an invalid configuration.
fn load_scenario(
    spec: &str,
    trials: Option<u64>,
    seed: Option<u64>,
    eps: Option<f64>,
) -> Result<Scenario, CliError> {
    let mut s = Scenario::load(spec)?;
    if let Some(t) = trials {
        s.trials = t;
    }
    if let Some(sd) = seed {
        s.seed = sd;
    }
    if let Some(e) = eps {
        s.eigen_threshold = e;
    }
    s.validate()?;
    Ok(s)
}

fn default_out(name: &str) -> PathBuf {
    let file = format!("{name}.csv");
    match std::env::var_os("WPCN_OUT_DIR") {
        Some(dir) => Path::new(&dir).join(file),
        None => PathBuf::from(file),
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("creating {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}
