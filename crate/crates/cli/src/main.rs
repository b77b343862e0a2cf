use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sscdl_cli::{
    cmd_beampattern, cmd_gamma_sweep, cmd_run, list_specs, CliError, Formats, RunConfig, SpecSource,
};

/// SSC-DL beamforming simulator.
#[derive(Parser)]
#[command(name = "sscdl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte Carlo experiments and write SINR curves.
    Run(Args),
    /// Write magnitude responses of each method for one trial.
    Beampattern(Args),
    /// Sweep the loading factor with exact covariances.
    GammaSweep(Args),
    /// List builtin experiment specs.
    ListSpecs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(clap::Args)]
struct Args {
    /// Builtin spec name, or `all` (run only).
    #[arg(long, conflicts_with = "config")]
    spec: Option<String>,
    /// TOML or JSON config file; run manifests are accepted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Override the number of trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    parallel: Option<usize>,
    /// Also write gnuplot scripts.
    #[arg(long)]
    emit_plots: bool,
}

impl Args {
    fn into_config(self) -> RunConfig {
        let source = match (self.config, self.spec) {
            (Some(path), _) => SpecSource::Config(path),
            (None, spec) => SpecSource::Named(spec.unwrap_or_else(|| "baseline".into())),
        };
        let mut cfg = RunConfig::named("baseline", self.out);
        cfg.source = source;
        cfg.formats = match self.format {
            Format::Csv => Formats {
                csv: true,
                json: false,
            },
            Format::Json => Formats {
                csv: false,
                json: true,
            },
            Format::Both => Formats {
                csv: true,
                json: true,
            },
        };
        cfg.emit_plots = self.emit_plots;
        if let Some(p) = self.parallel {
            cfg.parallelism = p;
        }
        cfg.seed = self.seed;
        cfg.trials = self.trials;
        cfg
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<Vec<String>, CliError> = match cli.command {
        Command::ListSpecs => Ok(list_specs()),
        Command::Run(args) => cmd_run(&args.into_config()).map(|r| r.summary),
        Command::Beampattern(args) => cmd_beampattern(&args.into_config()).map(|r| r.summary),
        Command::GammaSweep(args) => cmd_gamma_sweep(&args.into_config()).map(|r| r.summary),
    };
    match result {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sscdl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
