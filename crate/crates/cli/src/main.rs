mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heralink::{Error, Scenario};

#[derive(Parser, Debug)]
#[command(name = "heralink", version, about = "Heralded entanglement between two absorptive quantum memories")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Scenario file (JSON). Built-in published defaults when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the scenario's run seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the scenario's Monte Carlo cycle count.
    #[arg(long, global = true)]
    pub cycles: Option<usize>,
    /// Maximum worker threads for Monte Carlo trials.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Source statistics: pump sweep or reconstructed source state.
    Source(commands::SourceArgs),
    /// Heralded swapping without storage over a list of g2 targets.
    Swap(commands::SwapArgs),
    /// Full link Monte Carlo next to the closed-form budget.
    Link,
    /// Closed-form budget table.
    Budget(commands::BudgetArgs),
    /// Curve data along one axis.
    Sweep(commands::SweepArgs),
}

fn load(opts: &GlobalOpts) -> heralink::Result<Scenario> {
    let mut sc = match &opts.config {
        Some(p) => Scenario::load(p)?,
        None => Scenario::published_defaults(),
    };
    if let Some(s) = opts.seed {
        sc.run.seed = s;
    }
    if let Some(c) = opts.cycles {
        sc.run.cycles = c;
    }
    sc.validate()?;
    Ok(sc)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let sc = load(&cli.global)?;
    let ctx = output::Context::new(&sc, &cli.global);
    match cli.command {
        Command::Source(a) => commands::source(&sc, &ctx, &a),
        Command::Swap(a) => commands::swap(&sc, &ctx, &a),
        Command::Link => commands::link(&sc, &ctx),
        Command::Budget(a) => commands::budget(&sc, &ctx, &a),
        Command::Sweep(a) => commands::sweep(&sc, &ctx, &a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<Error>() {
                Some(Error::Scenario { path, reason }) => {
                    eprintln!("error: invalid scenario at `{path}`: {reason}");
                    ExitCode::from(2)
                }
                _ => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
