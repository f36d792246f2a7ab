use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracdual_cli::{Experiment, ExperimentConfig, EXIT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(name = "fracdual", version, about = "Reproducible fractional-Laplacian duality experiments")]
struct Cli {
    /// Print the experiment names and exit.
    #[arg(long)]
    list: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for report.json and results.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parse and check the config only.
        #[arg(long)]
        validate: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for e in Experiment::ALL {
            println!("{:<22} {}", e.name(), e.summary());
        }
        return ExitCode::SUCCESS;
    }
    let Some(Command::Run {
        config,
        seed,
        out,
        validate,
    }) = cli.command
    else {
        eprintln!("nothing to do; try `fracdual run <config>` or `fracdual --list`");
        return ExitCode::from(EXIT_CONFIG as u8);
    };

    let mut cfg = match ExperimentConfig::from_path(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if validate {
        return match cfg.resolve() {
            Ok(_) => {
                println!("config ok: {}", cfg.experiment);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG as u8)
            }
        };
    }
    match fracdual_cli::run(&cfg, out.as_deref()) {
        Ok(outcome) => {
            let r = &outcome.report;
            println!(
                "{}: {} ({} items, {:.2} s) -> {}",
                r.experiment,
                if r.pass { "pass" } else { "FAIL" },
                r.items.len(),
                r.wall_time_seconds,
                outcome.out_dir.display()
            );
            if let Some(name) = &r.first_failure {
                eprintln!("first failing assertion: {name}");
            }
            if let Some(e) = &r.error {
                eprintln!("error: {e}");
            }
            if outcome.exit_code == EXIT_OK {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(outcome.exit_code as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
