//! Batch front end for the `cellfree` simulator: experiment specs, sweeps,
//! CSV and manifest output, gnuplot scripts.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cellfree::closed_form::{approximations, ApproxKind};
use cellfree::io::{write_approximations, write_large_scale, write_q_table, write_topology, ApproxRecord};
use cellfree::montecarlo::{colocated_gains, placement_topology};
use cellfree::order_stats::q_table;
use cellfree::{colocated_bound, large_scale_fading, pairwise_distances, CsiMode, DeploymentMode};

pub mod config;
pub mod experiment;
pub mod plot;
pub mod presets;

pub use config::{ExperimentKind, ExperimentSpec, Preset};
pub use experiment::{run_cdf_experiment, run_experiment, RunSummary};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, config text or output location. Exit code 2.
    Config(String),
    /// A kernel failed on a valid configuration. Exit code 3.
    Numerical(cellfree::Error),
    /// Writing results failed. Exit code 1.
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cellfree::Error> for CliError {
    fn from(e: cellfree::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Simulates uplink rates of cell-free massive MIMO with zero-forcing detection.
///
/// Any config key can also be given as a flag, e.g. `--sim.L=300` or
/// `--sweep.sim.L 150,300`. Bare sim keys work too (`--alpha 4`).
#[derive(Debug, Parser)]
#[command(name = "cellfree", version)]
pub struct Cli {
    /// key=value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Reduced 5x5x50 trial budget, labeled in the manifest.
    #[arg(long, global = true)]
    pub fast: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the antenna and user positions of one placement.
    Topology {
        /// Placement as `user_draw,antenna_draw`.
        #[arg(long, default_value = "0,0")]
        placement: String,
        /// Also write the large-scale fading matrix here.
        #[arg(long)]
        large_scale: Option<PathBuf>,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured experiment, sweeping if `sweep.*` keys are set.
    Rates {
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form approximations and co-located bounds for one placement.
    Approx {
        #[arg(long, default_value = "0,0")]
        placement: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the order-statistic moments against their asymptote.
    Asymptotics {
        /// Orders l to tabulate.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        orders: Vec<usize>,
        /// Antenna counts (defaults to sweep.sim.L, else sim.L).
        #[arg(long, value_delimiter = ',')]
        antennas: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the data behind a figure or table.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(presets::TARGETS))]
        target: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_placement(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Config(format!("placement {s:?} must be `u,a`"));
    let (u, a) = s.split_once(',').ok_or_else(bad)?;
    Ok((u.trim().parse().map_err(|_| bad())?, a.trim().parse().map_err(|_| bad())?))
}

/// Layers the spec: defaults or preset, config file, `CELLFREE_SEED`,
/// `--fast`, then flag overrides.
fn build_spec(cli: &Cli, mut spec: ExperimentSpec, overrides: &[(String, String)]) -> Result<ExperimentSpec, CliError> {
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        spec.apply_text(&text)?;
    }
    spec.apply_seed_env()?;
    if cli.fast {
        spec.set_preset(Preset::Fast);
    }
    for (k, v) in overrides {
        spec.set(k, v)?;
    }
    Ok(spec)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> Result<(), CliError> {
    let (rest, overrides) = config::extract_overrides(args.into_iter().collect())?;
    let cli = match Cli::try_parse_from(rest) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(e.to_string())),
    };

    match &cli.command {
        Command::Rates { out } => {
            let mut spec = build_spec(&cli, ExperimentSpec::new("rates"), &overrides)?;
            if out.is_some() {
                spec.output_dir = out.clone();
            }
            report(&run_experiment(&spec)?);
        }
        Command::Reproduce { target, out } => {
            let mut spec = build_spec(&cli, presets::preset(target)?, &overrides)?;
            if out.is_some() {
                spec.output_dir = out.clone();
            }
            report(&run_experiment(&spec)?);
        }
        Command::Topology { placement, large_scale, out } => {
            let spec = build_spec(&cli, ExperimentSpec::new("topology"), &overrides)?;
            spec.validate()?;
            let (u, a) = parse_placement(placement)?;
            let topology = placement_topology(&spec.config, u, a)?;
            emit(out, &write_topology(&topology))?;
            if let Some(path) = large_scale {
                let ls = large_scale_fading(&pairwise_distances(&topology), spec.config.alpha, spec.config.min_distance)?;
                fs::write(path, write_large_scale(&ls))?;
            }
        }
        Command::Approx { placement, out } => {
            let mut spec = build_spec(&cli, ExperimentSpec::new("approx"), &overrides)?;
            spec.config.mode = DeploymentMode::CellFree;
            spec.validate()?;
            let (u, a) = parse_placement(placement)?;
            emit(out, &approx_records(&spec, u, a)?)?;
        }
        Command::Asymptotics { orders, antennas, out } => {
            let spec = build_spec(&cli, ExperimentSpec::new("asymptotics"), &overrides)?;
            let ls: Vec<usize> = if !antennas.is_empty() {
                antennas.clone()
            } else {
                spec.points()?.iter().map(|p| p.antennas).collect()
            };
            if orders.is_empty() || orders.contains(&0) {
                return Err(CliError::Config("orders must be positive".into()));
            }
            let rows = q_table(orders, &ls, spec.config.users, spec.config.alpha).map_err(|e| match e {
                e @ cellfree::Error::InvalidParameter { .. } => CliError::Config(e.to_string()),
                e => CliError::Numerical(e),
            })?;
            emit(out, &write_q_table(&rows))?;
        }
    }
    Ok(())
}

fn approx_records(spec: &ExperimentSpec, u: usize, a: usize) -> Result<String, CliError> {
    let c = &spec.config;
    let topology = placement_topology(c, u, a)?;
    let ls = large_scale_fading(&pairwise_distances(&topology), c.alpha, c.min_distance)?;
    let gains = colocated_gains(&topology, c.alpha, c.min_distance)?;
    let imperfect = c.csi == CsiMode::Imperfect;
    let rho_p = imperfect.then(|| c.rho_p());
    let rho_p_db = imperfect.then_some(c.rho_p_db);
    let mut records = Vec::new();
    for (k, pair) in approximations(&ls, c.rho_u(), rho_p)?.into_iter().enumerate() {
        for (upper, value) in [(true, pair.upper), (false, pair.lower)] {
            let kind = ApproxKind::new(upper, imperfect);
            let coloc = colocated_bound(kind, c.antennas, &gains, k, c.rho_u(), rho_p)?;
            for (colocated, value_bits) in [(false, value), (true, coloc)] {
                records.push(ApproxRecord {
                    user: k,
                    kind,
                    colocated,
                    rho_u_db: c.rho_u_db,
                    rho_p_db,
                    value_bits,
                });
            }
        }
    }
    Ok(write_approximations(&records))
}

fn report(summary: &RunSummary) {
    eprintln!(
        "{} point(s): {} ({}; plot with gnuplot {})",
        summary.points,
        summary.data.display(),
        summary.manifest.display(),
        summary.script.display()
    );
}

/// Runs with the process arguments and maps failures to exit codes.
pub fn main_with_args<I: IntoIterator<Item = String>>(args: I) -> ExitCode {
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cellfree: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
