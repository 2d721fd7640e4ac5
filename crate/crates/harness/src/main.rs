use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use skinwalk_harness::acceptance::{self, AcceptanceOptions, AcceptanceTolerances, Fault};
use skinwalk_harness::experiments::{self, RunOptions};
use skinwalk_harness::{Experiment, Format, HarnessError, Result, RunConfig};

/// Floquet skin-effect lattice simulator.
#[derive(Debug, Parser)]
#[command(name = "skinwalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single- or two-photon walks.
    Simulate {
        #[arg(value_enum)]
        kind: WalkKind,
        #[command(flatten)]
        common: Common,
    },
    /// Spectra, generalized Brillouin zone or hopping table.
    Analyze {
        #[arg(value_enum)]
        kind: AnalysisKind,
        #[command(flatten)]
        common: Common,
    },
    /// Rényi-2 entropy curves from the master equation.
    Entropy {
        #[command(flatten)]
        common: Common,
    },
    /// Parameter sweeps.
    Sweep {
        #[arg(value_enum)]
        parameter: SweepParameter,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance suite and write a pass/fail report.
    ReproduceAll {
        #[arg(long, default_value = "out/acceptance")]
        out: PathBuf,
        /// TOML file overriding acceptance thresholds.
        #[arg(long)]
        tolerances: Option<PathBuf>,
        #[arg(long)]
        steps_per_period: Option<usize>,
        /// Number of random specs for the master-equation sanity suite.
        #[arg(long)]
        random_specs: Option<usize>,
        /// Corrupt a fixture on purpose.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WalkKind {
    Single,
    Pair,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AnalysisKind {
    Spectra,
    Gbz,
    Table1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepParameter {
    Phi,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    LyapunovSign,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; missing keys take the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    steps_per_period: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Also write static SVG renderings.
    #[arg(long)]
    svg: bool,
}

fn run_experiment(experiment: Experiment, common: &Common) -> Result<()> {
    let text = match &common.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(HarnessError::io(path))?),
        None => None,
    };
    let mut config = RunConfig::resolve(experiment, text.as_deref())?;
    if let Some(steps) = common.steps_per_period {
        config.steps_per_period = steps;
    }
    let options = RunOptions {
        format: match common.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        svg: common.svg,
    };
    let manifest = experiments::run(&config, &common.out, options)?;
    println!(
        "{} run {}: {} files in {} ({:.1}s)",
        manifest.experiment,
        manifest.run_id,
        manifest.outputs.len(),
        common.out.display(),
        manifest.wall_time_s
    );
    Ok(())
}

fn reproduce_all(
    out: &PathBuf,
    tolerances: Option<&PathBuf>,
    steps: Option<usize>,
    random_specs: Option<usize>,
    fault: Option<FaultArg>,
) -> Result<()> {
    let mut options = AcceptanceOptions::default();
    if let Some(path) = tolerances {
        options.tolerances = AcceptanceTolerances::load(path)?;
    }
    if let Some(steps) = steps {
        options.steps_per_period = steps;
    }
    if let Some(n) = random_specs {
        options.random_specs = n;
    }
    options.fault = fault.map(|FaultArg::LyapunovSign| Fault::LyapunovSign);
    let (_, reports) = acceptance::reproduce_all(out, &options)?;
    print!("{}", acceptance::render(&reports));
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(HarnessError::Acceptance { failed });
    }
    Ok(())
}

fn configure_workers() -> Result<()> {
    let Ok(value) = std::env::var("SKINWALK_WORKERS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HarnessError::Config(format!("SKINWALK_WORKERS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Config(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<()> {
    configure_workers()?;
    match cli.command {
        Command::Simulate { kind, common } => {
            let experiment = match kind {
                WalkKind::Single => Experiment::SingleWalk,
                WalkKind::Pair => Experiment::PairWalk,
            };
            run_experiment(experiment, &common)
        }
        Command::Analyze { kind, common } => {
            let experiment = match kind {
                AnalysisKind::Spectra => Experiment::Spectra,
                AnalysisKind::Gbz => Experiment::Gbz,
                AnalysisKind::Table1 => Experiment::Table1,
            };
            run_experiment(experiment, &common)
        }
        Command::Entropy { common } => run_experiment(Experiment::EntropyCurve, &common),
        Command::Sweep {
            parameter: SweepParameter::Phi,
            common,
        } => run_experiment(Experiment::LyapunovSweep, &common),
        Command::ReproduceAll {
            out,
            tolerances,
            steps_per_period,
            random_specs,
            inject_fault,
        } => reproduce_all(&out, tolerances.as_ref(), steps_per_period, random_specs, inject_fault),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
