use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cusign_cli::commands::{self, StatOptions, DEFAULT_SAMPLES};
use cusign_cli::trace::write_trace;
use cusign_cli::{exit, CliError, Format, Report};

#[derive(Debug, Parser)]
#[command(
    name = "cusign",
    version,
    about = "CUSIGN / CUSUM residual detector experiments"
)]
struct Cli {
    /// Master RNG seed (overrides the scenario file's seed when given).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Pseudo-window ℓ of the memoryless estimator.
    #[arg(long, global = true, default_value_t = 100)]
    window: u32,
    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Suppress the human-readable summary on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic invariants, no simulation.
    Validate,
    /// Alarm rates: Markov chain vs Monte Carlo.
    Table2 {
        #[arg(long = "tau", value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
        taus: Vec<u32>,
    },
    /// Recover the estimator variance scale θ.
    Theta {
        #[arg(long = "tau", value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
        taus: Vec<u32>,
        /// Write Freedman–Diaconis histograms of α̂⁺ here (CSV).
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Estimator mean and spread over thresholds and sign probabilities.
    Appendix {
        #[arg(long = "tau", value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
        taus: Vec<u32>,
        #[arg(long = "p", value_delimiter = ',', default_values_t = [0.4, 0.5, 0.6])]
        p_plus: Vec<f64>,
    },
    /// Closed-loop vehicle scenario from a TOML file.
    Scenario {
        config: PathBuf,
        /// Per-step CSV trace destination.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let stat = |taus: Vec<u32>, p_plus: Option<Vec<f64>>| StatOptions {
        seed: cli.seed.unwrap_or(1),
        samples: cli.samples,
        window: cli.window,
        taus,
        p_plus: p_plus.unwrap_or_else(|| StatOptions::default().p_plus),
        ..StatOptions::default()
    };
    match cli.command {
        Command::Validate => commands::validate(),
        Command::Table2 { ref taus } => commands::table2(&stat(taus.clone(), None)),
        Command::Theta {
            ref taus,
            ref histogram,
        } => {
            let (report, hist) = commands::theta(&stat(taus.clone(), None), histogram.is_some())?;
            if let Some(path) = histogram {
                commands::write_histograms(&hist, create(path)?)?;
            }
            Ok(report)
        }
        Command::Appendix { ref taus, ref p_plus } => {
            commands::appendix(&stat(taus.clone(), Some(p_plus.clone())))
        }
        Command::Scenario {
            ref config,
            ref trace,
        } => {
            let mut cfg = commands::load_scenario(config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let (report, run) = commands::scenario(&cfg)?;
            if let Some(path) = trace {
                write_trace(&run, create(path)?)?;
            }
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, format, quiet) = (cli.out.clone(), cli.format, cli.quiet);
    let result = run(cli).and_then(|report| {
        match &out {
            Some(path) => {
                let mut w = create(path)?;
                report.write(format, &mut w)?;
                w.flush()?;
            }
            None => report.write(format, &mut io::stdout().lock())?,
        }
        Ok(report)
    });
    match result {
        Ok(report) => {
            if !quiet {
                eprint!("{}", report.render_text());
            }
            if report.passed() {
                ExitCode::from(exit::PASS as u8)
            } else {
                for f in report.failures() {
                    eprintln!("failed: {f}");
                }
                ExitCode::from(exit::CHECK_FAILED as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
