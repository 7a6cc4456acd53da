use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rmt_decoherence::experiments::{
    ExperimentConfig, StudyResult, ensemble_result, row_counts, run_convergence_study,
    run_ensemble_dump, run_layer_comparison, run_werner_study, write_study,
};
use rmt_decoherence::parallel::Workers;
use rmt_decoherence::{Error, Result};

#[derive(Parser)]
#[command(name = "rmtdeco", version, about = "Random-matrix decoherence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gap between observables of the mean state and mean observables vs N.
    Convergence(Common),
    /// Werner-structure diagnostics of partition averages.
    Werner(Common),
    /// Monte Carlo, linear response and master equation side by side.
    Layers(Common),
    /// Raw dump of every reduced state.
    Ensemble(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the root seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.to_string_lossy().into_owned();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cmd: &Command) -> Result<()> {
    let (Command::Convergence(c) | Command::Werner(c) | Command::Layers(c) | Command::Ensemble(c)) =
        cmd;
    let Format::Csv = c.format;
    let cfg = c.config()?;
    let w = Workers(c.workers);
    let result: StudyResult = match cmd {
        Command::Convergence(_) => run_convergence_study(&cfg, w)?.to_result(&cfg),
        Command::Werner(_) => run_werner_study(&cfg, w)?.to_result(&cfg),
        Command::Layers(_) => run_layer_comparison(&cfg, w)?.to_result(&cfg),
        Command::Ensemble(_) => ensemble_result(&cfg, &run_ensemble_dump(&cfg, w)?),
    };
    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }
    let dir = PathBuf::from(&cfg.output_dir);
    write_study(&result, &cfg, &dir)?;
    for (table, rows) in row_counts(&result) {
        println!("{table}: {rows} rows");
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::RegimeExceeded { .. } | Error::Numerical(_) => 3,
        Error::Io { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
