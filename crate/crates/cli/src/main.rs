mod experiments;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ztel_core::ExperimentConfig;

const HEISENBERG_FIXTURE: &str = include_str!("../../core/fixtures/heisenberg.toml");

#[derive(Parser)]
#[command(name = "ztel", version, about = "Experiments on the slope compactification of Z^n ⋊ Z")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its artifacts.
    Run {
        experiment: Experiment,
        /// TOML config; optional for demo-heisenberg.
        config: Option<PathBuf>,
        /// Output directory (default: the config's `output`, else `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write SVG plots.
        #[arg(long)]
        plot: bool,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Experiment {
    Group,
    Telescope,
    Nullity,
    Baseline,
    Coarse,
    Boundary,
    DemoHeisenberg,
}

/// Exit status 2: unusable config, bad environment, or a failed pipeline step.
pub(crate) struct Fatal(pub(crate) String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

pub(crate) fn core_error(e: ztel_core::Error) -> Fatal {
    let debug = format!("{e:?}");
    let kind: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
    Fatal(format!("{kind}: {e}"))
}

fn init_threads() -> Result<(), Fatal> {
    let Ok(raw) = std::env::var("ZTEL_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| Fatal(format!("ZTEL_THREADS must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(Fatal("ZTEL_THREADS must be a positive integer, got 0".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn load(experiment: Experiment, path: Option<&PathBuf>) -> Result<ExperimentConfig, Fatal> {
    match (path, experiment) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).map_err(|e| Fatal(format!("cannot read {}: {e}", p.display())))?;
            ExperimentConfig::from_toml_str(&text).map_err(|e| {
                let Fatal(msg) = core_error(e);
                Fatal(format!("{}: {msg}", p.display()))
            })
        }
        (None, Experiment::DemoHeisenberg) => ExperimentConfig::from_toml_str(HEISENBERG_FIXTURE).map_err(core_error),
        (None, _) => Err(Fatal("this experiment needs a config file".into())),
    }
}

fn run(cli: Cli) -> Result<bool, Fatal> {
    init_threads()?;
    let Command::Run { experiment, config, out, plot, seed } = cli.command;
    let mut cfg = load(experiment, config.as_ref())?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = out.or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| Fatal(format!("cannot create {}: {e}", out.display())))?;
    let ctx = experiments::Context { cfg, out, plot };
    let outcome = experiments::run(experiment, &ctx)?;
    println!("{}", outcome.summary);
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verdict: FAIL");
            ExitCode::from(1)
        }
        Err(Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
