use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cavity_dit::cli::{self, CliError, FigureId, GridSpec, RunConfig};
use cavity_dit::{Normalization, Port};

#[derive(Parser)]
#[command(name = "cavity-dit", version, about = "Cavity / quantum-dot transmission: incoherent pumping vs input-output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectra at a single parameter point.
    Spectrum(Common),
    /// Spectra and a summary table over the configured sweep.
    Sweep(Common),
    /// Built-in figure reproductions, written under <out>/figures/<id>/.
    Figure {
        #[arg(value_enum)]
        id: FigureId,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON configuration (or a spectrum sidecar to re-run).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Uniform grid as MIN:MAX:POINTS, offsets in units of γ.
    #[arg(long, value_parser = GridSpec::parse, allow_hyphen_values = true)]
    grid: Option<GridSpec>,
    /// Input-output port: through or drop.
    #[arg(long)]
    port: Option<Port>,
    /// Normalization: unit_max, unit_area or raw.
    #[arg(long)]
    norm: Option<Normalization>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(base.with_overrides(self.grid, self.port, self.norm))
    }

    fn init_pool(&self) -> Result<(), CliError> {
        if let Some(n) = self.jobs {
            if n == 0 {
                return Err(CliError::Config("--jobs must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum(common) => {
            common.init_pool()?;
            let outcome = cli::run_spectrum(&common.config()?, common.out.as_deref())?;
            for f in &outcome.files {
                println!("{}", f.display());
            }
        }
        Command::Sweep(common) => {
            common.init_pool()?;
            let outcome = cli::run_sweep(&common.config()?, common.out.as_deref())?;
            println!("{} ({}/{} points succeeded)", outcome.summary.display(), outcome.succeeded(), outcome.values.len());
        }
        Command::Figure { id, common } => {
            common.init_pool()?;
            let outcome = cli::reproduce_figure(id, &common.config()?, common.out.as_deref())?;
            for s in &outcome.sweeps {
                println!("{} ({}/{} points succeeded)", s.summary.display(), s.succeeded(), s.values.len());
            }
            if let Some(Ok(fit)) = &outcome.pump_fit {
                println!("best pump: {}", fit.best);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
