use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

use commands::CliError;

/// Tensor-train policy iteration for exit-time stochastic control.
#[derive(Debug, Parser)]
#[command(name = "ttpi", version, about)]
struct Cli {
    /// Worker threads; overrides the config file, 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Experiment configuration (TOML).
    config: PathBuf,

    /// Override a config value, e.g. `--set solver.degree=12`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run policy iteration and write the value model.
    Solve(ConfigArgs),
    /// Compare predicted and realized cost of a saved model.
    Evaluate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Model file written by `solve`; `<out>/model.json` by default.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Start state as comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        /// Number of trajectories; 0 reports the prediction only.
        #[arg(long)]
        trajectories: Option<usize>,
    },
    /// Write the reference value function of a one-dimensional problem.
    Reference(ConfigArgs),
    /// Export value grids, cost tables and trajectories as CSV.
    Plotdata {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Model file written by `solve`; `<out>/model.json` by default.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run the built-in consistency checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Solve(args) => commands::solve(&args.config, &args.overrides, args.out, cli.threads),
        Command::Evaluate { cfg, model, x0, trajectories } => {
            commands::evaluate(&cfg.config, &cfg.overrides, cfg.out, cli.threads, model, x0, trajectories)
        }
        Command::Reference(args) => commands::reference(&args.config, &args.overrides, args.out, cli.threads),
        Command::Plotdata { cfg, model } => {
            commands::plotdata(&cfg.config, &cfg.overrides, cfg.out, cli.threads, model)
        }
        Command::Selftest => commands::selftest(cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Config(_) => 1,
                CliError::Numerical(_) => 2,
            })
        }
    }
}
