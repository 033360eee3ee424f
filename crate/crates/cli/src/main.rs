//! `icboot`: NPMLE fits, bootstrap confidence intervals, bandwidth selection
//! and simulation studies for interval-censored data.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Settings;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "ICBOOT_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, configuration or data; exit status 1.
    Input(String),
    /// An estimator or the bootstrap failed numerically; exit status 2.
    Numerical(String),
}

impl From<icboot_core::Error> for CliError {
    fn from(e: icboot_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "icboot",
    version,
    about = "Bootstrap inference for interval-censored data"
)]
struct Cli {
    /// Flat `key = value` configuration file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Master random seed.
    #[arg(long, global = true)]
    seed: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the NPMLE and write its values at the observation times.
    Fit(DataArgs),
    /// Bootstrap confidence interval for F(t0).
    Ci(CiArgs),
    /// Bootstrap MSE curve and the selected bandwidth.
    Bandwidth(BandwidthArgs),
    /// Simulation studies.
    Simulate {
        #[command(subcommand)]
        which: SimulateCommand,
    },
    /// Plot-ready data for the figures.
    Figures {
        #[command(subcommand)]
        which: FigureCommand,
    },
    /// Intervals for the embedded breast cosmesis data.
    Realdata(RealdataArgs),
}

#[derive(Subcommand, Debug)]
enum SimulateCommand {
    /// Coverage and mean length of bootstrap intervals.
    Coverage(CoverageArgs),
    /// Quantiles of Chernoff's distribution.
    Chernoff(ChernoffArgs),
}

#[derive(Subcommand, Debug)]
enum FigureCommand {
    /// Sampling and bootstrap distributions of the scaled estimator.
    Fig1(Fig1Args),
    /// Bootstrap 0.95 quantiles along a growing data sequence.
    Fig2(Fig2Args),
    /// True and bootstrap MSE curves over bandwidths.
    Fig3(Fig3Args),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Data file.
    #[arg(long)]
    input: Option<String>,
    /// current-status, intervals or mixed-long.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct CiArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Evaluation time t0.
    #[arg(long = "at")]
    at: Option<String>,
    /// npmle or smle.
    #[arg(long)]
    scheme: Option<String>,
    /// A positive number, `rate` for n^(-1/5), or `auto`.
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    level: Option<String>,
    /// Bootstrap replicates.
    #[arg(long)]
    boot: Option<String>,
    /// npmle or one-step.
    #[arg(long)]
    estimator: Option<String>,
    #[command(flatten)]
    bmse: BmseArgs,
}

#[derive(Args, Debug)]
struct BmseArgs {
    /// Pilot bandwidth of the smoothed source (number or `rate`).
    #[arg(long)]
    h0: Option<String>,
    /// Bandwidth grid, `start:stop:step` or a comma-separated list.
    #[arg(long = "h-grid")]
    h_grid: Option<String>,
    /// Source of the bootstrap MSE: smle or npmle.
    #[arg(long = "bmse-source")]
    bmse_source: Option<String>,
}

#[derive(Args, Debug)]
struct BandwidthArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long = "at")]
    at: Option<String>,
    #[arg(long)]
    boot: Option<String>,
    #[command(flatten)]
    bmse: BmseArgs,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// `law/design`, e.g. `exp/cs:2`, `exp/case2:2`, `folded-normal/mixed:3:2`.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long = "at")]
    at: Option<String>,
}

#[derive(Args, Debug)]
struct CoverageArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    level: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    /// A positive number or `rate` for n^(-1/5).
    #[arg(long)]
    bandwidth: Option<String>,
    /// Simulated datasets.
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    boot: Option<String>,
}

#[derive(Args, Debug)]
struct ChernoffArgs {
    #[arg(long)]
    replicates: Option<String>,
    #[arg(long = "half-width")]
    half_width: Option<String>,
    #[arg(long)]
    dt: Option<String>,
}

#[derive(Args, Debug)]
struct Fig1Args {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    boot: Option<String>,
}

#[derive(Args, Debug)]
struct Fig2Args {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Sample sizes, `start:stop:step` or a comma-separated list.
    #[arg(long = "n-grid")]
    n_grid: Option<String>,
    /// Bandwidth of the smoothed source (number or `rate`).
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    boot: Option<String>,
    #[arg(long = "chernoff-replicates")]
    chernoff_replicates: Option<String>,
}

#[derive(Args, Debug)]
struct Fig3Args {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    n: Option<String>,
    #[arg(long = "h-grid")]
    h_grid: Option<String>,
    /// Pilot bandwidths, comma-separated.
    #[arg(long = "h0-list")]
    h0_list: Option<String>,
    /// Datasets behind the true MSE curve.
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    boot: Option<String>,
}

#[derive(Args, Debug)]
struct RealdataArgs {
    /// Evaluation time; repeatable.
    #[arg(long = "at")]
    at: Vec<String>,
    /// Confidence level; repeatable.
    #[arg(long)]
    level: Vec<String>,
    /// smle, npmle or both.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    boot: Option<String>,
    #[arg(long)]
    estimator: Option<String>,
}

impl DataArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_opt("input", &self.input);
        s.set_opt("format", &self.format);
    }
}

impl BmseArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_opt("h0", &self.h0);
        s.set_opt("h_grid", &self.h_grid);
        s.set_opt("bmse_source", &self.bmse_source);
    }
}

impl ScenarioArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_opt("scenario", &self.scenario);
        s.set_opt("t0", &self.at);
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut settings = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Input(format!("cannot read config {}: {e}", path.display()))
            })?;
            Settings::parse_file(&text)?
        }
        None => Settings::default(),
    };
    settings.set_opt("out", &cli.out);
    settings.set_opt("seed", &cli.seed);
    let s = &mut settings;
    match &cli.command {
        Command::Fit(a) => {
            a.apply(s);
            commands::fit(s)
        }
        Command::Ci(a) => {
            a.data.apply(s);
            a.bmse.apply(s);
            s.set_opt("t0", &a.at);
            s.set_opt("scheme", &a.scheme);
            s.set_opt("bandwidth", &a.bandwidth);
            s.set_opt("level", &a.level);
            s.set_opt("boot", &a.boot);
            s.set_opt("estimator", &a.estimator);
            commands::ci(s)
        }
        Command::Bandwidth(a) => {
            a.data.apply(s);
            a.bmse.apply(s);
            s.set_opt("t0", &a.at);
            s.set_opt("boot", &a.boot);
            commands::bandwidth(s)
        }
        Command::Simulate { which } => match which {
            SimulateCommand::Coverage(a) => {
                a.scenario.apply(s);
                s.set_opt("n", &a.n);
                s.set_opt("level", &a.level);
                s.set_opt("scheme", &a.scheme);
                s.set_opt("bandwidth", &a.bandwidth);
                s.set_opt("reps", &a.reps);
                s.set_opt("boot", &a.boot);
                commands::coverage(s)
            }
            SimulateCommand::Chernoff(a) => {
                s.set_opt("replicates", &a.replicates);
                s.set_opt("half_width", &a.half_width);
                s.set_opt("dt", &a.dt);
                commands::chernoff(s)
            }
        },
        Command::Figures { which } => match which {
            FigureCommand::Fig1(a) => {
                a.scenario.apply(s);
                s.set_opt("n", &a.n);
                s.set_opt("scheme", &a.scheme);
                s.set_opt("bandwidth", &a.bandwidth);
                s.set_opt("reps", &a.reps);
                s.set_opt("boot", &a.boot);
                commands::fig1(s)
            }
            FigureCommand::Fig2(a) => {
                a.scenario.apply(s);
                s.set_opt("n_grid", &a.n_grid);
                s.set_opt("bandwidth", &a.bandwidth);
                s.set_opt("boot", &a.boot);
                s.set_opt("chernoff_replicates", &a.chernoff_replicates);
                commands::fig2(s)
            }
            FigureCommand::Fig3(a) => {
                a.scenario.apply(s);
                s.set_opt("n", &a.n);
                s.set_opt("h_grid", &a.h_grid);
                s.set_opt("h0_list", &a.h0_list);
                s.set_opt("reps", &a.reps);
                s.set_opt("boot", &a.boot);
                commands::fig3(s)
            }
        },
        Command::Realdata(a) => {
            s.set_list("t0", &a.at);
            s.set_list("level", &a.level);
            s.set_opt("scheme", &a.scheme);
            s.set_opt("bandwidth", &a.bandwidth);
            s.set_opt("boot", &a.boot);
            s.set_opt("estimator", &a.estimator);
            commands::realdata(s)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot configure threads: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
