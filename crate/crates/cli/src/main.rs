//! `iadas`: run interference alignment experiments and write CSV.
//!
//! Exit status is 0 on success, 2 for configuration or I/O errors and 3 for
//! numerical failures.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iadas::harness::experiments::{format_properness_table, write_properness_csv};
use iadas::harness::{
    properness_table, run_backoff_prediction, run_cell_map, run_rate_vs_distance, run_snr_sweep, write_csv,
    ExperimentConfig, ResultRow,
};
use iadas::Error;

#[derive(Parser, Debug)]
#[command(name = "iadas", version, about = "Interference alignment experiments for distributed antenna systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify every shape of the properness grid.
    Properness(Common),
    /// Sum-rate versus SNR over Rayleigh channels for each constraint mode.
    Sweep(Common),
    /// Simulated back-off rates next to the analytical prediction.
    BackoffPredict(Common),
    /// Centre-user rate over a grid of positions in the seven-cell network.
    Cellmap(Common),
    /// Centre-user rate versus distance from the cell centre.
    RateVsDistance(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per point (drops per bin or per grid point for cell runs).
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path; stdout when neither this nor the configuration
    /// names one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Properness(c)
            | Command::Sweep(c)
            | Command::BackoffPredict(c)
            | Command::Cellmap(c)
            | Command::RateVsDistance(c) => c,
        }
    }
}

fn load_config(cmd: &Command) -> Result<ExperimentConfig, Error> {
    let c = cmd.common();
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(n) = c.trials {
        match cmd {
            Command::Cellmap(_) => cfg.cell.drops_per_point = n,
            Command::RateVsDistance(_) => cfg.cell.drops_per_bin = n,
            _ => cfg.experiment.trials = n,
        }
    }
    if let Some(t) = c.threads {
        cfg.experiment.threads = t;
    }
    if let Some(out) = &c.out {
        cfg.experiment.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Opens the output before any work starts so that a bad path fails fast.
fn open_sink(cfg: &ExperimentConfig) -> Result<Box<dyn Write>, Error> {
    Ok(match &cfg.experiment.output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
            Box::new(std::io::BufWriter::new(file))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cmd: &Command) -> Result<(), Error> {
    let cfg = load_config(cmd)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.experiment.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    if let Command::Properness(_) = cmd {
        // The table always goes to stdout; the CSV only to a file.
        let rows = properness_table(&cfg.properness);
        if cfg.experiment.output.is_some() {
            let mut sink = open_sink(&cfg)?;
            write_properness_csv(&mut sink, &rows)?;
            sink.flush()?;
        }
        print!("{}", format_properness_table(&rows));
        return Ok(());
    }
    let mut sink = open_sink(&cfg)?;
    let rows: Vec<ResultRow> = pool.install(|| match cmd {
        Command::Sweep(_) => run_snr_sweep(&cfg),
        Command::BackoffPredict(_) => run_backoff_prediction(&cfg),
        Command::Cellmap(_) => run_cell_map(&cfg),
        Command::RateVsDistance(_) => run_rate_vs_distance(&cfg).map(|s| s.rows()),
        Command::Properness(_) => unreachable!("handled above"),
    })?;
    write_csv(&mut sink, &rows)?;
    sink.flush()?;
    if let Some(path) = &cfg.experiment.output {
        eprintln!("wrote {} rows to {}", rows.len(), path.display());
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config() || matches!(e, Error::Io(_)) {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
