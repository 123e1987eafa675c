use std::path::PathBuf;

use clap::{Parser, Subcommand};

use geoprox_cli::commands;

#[derive(Parser)]
#[command(name = "geoprox", version, about = "Proximal point solver for vector optimization on Hadamard manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solve from a config file; writes the trace CSV and result JSON.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        verbose: bool,
    },
    /// Run a property suite and print a JSON report.
    Check {
        /// geometry | scalarization | subgradient | fejer | sharpness | all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the general solver against an independent flat-space
    /// max-scalarization proximal loop and compare the iterates.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        verbose: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            verbose,
        } => commands::cmd_run(&config, &out, seed, verbose),
        Command::Check { suite, seed, out } => commands::cmd_check(&suite, seed, out.as_deref()),
        Command::Compare { config, out, verbose } => commands::cmd_compare(&config, &out, verbose),
    };
    std::process::exit(code);
}
