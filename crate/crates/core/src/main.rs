use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tfpauli::experiment::{emit_plot_data, load_config, run_experiment};
use tfpauli::par::{threads_from_env, with_pool};

/// Thomas-Fermi and magnetic-trace experiments.
///
/// Exit status: 0 success, 2 config error, 3 numerical failure.
/// `TFPAULI_THREADS` bounds the worker pool.
#[derive(Parser)]
#[command(name = "tfpauli", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write JSON-lines records.
    Run { config: PathBuf },
    /// Write selected record columns as CSV.
    Plot {
        records: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        columns: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::Validate { config } => match load_config(&config) {
            Ok(cfg) => {
                for w in cfg.energy.validate().unwrap_or_default() {
                    eprintln!("warning: {w}");
                }
                println!("{}: ok ({}, {} unit(s) of h)", config.display(), cfg.experiment.name(), cfg.h_list.len());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", config.display());
                ExitCode::from(2)
            }
        },
        Command::Run { config } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            for w in cfg.energy.validate().unwrap_or_default() {
                log::warn!("{w}");
            }
            match with_pool(threads_from_env(), || run_experiment(&cfg)) {
                Ok(s) if s.all_converged => {
                    println!("{} record(s) written to {}", s.records, cfg.output_path.display());
                    ExitCode::SUCCESS
                }
                Ok(s) => {
                    eprintln!(
                        "{} record(s) written to {}; some units did not converge",
                        s.records,
                        cfg.output_path.display()
                    );
                    ExitCode::from(3)
                }
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    ExitCode::from(e.exit_code())
                }
            }
        }
        Command::Plot { records, columns, out } => match emit_plot_data(&records, &columns, &out) {
            Ok(n) => {
                println!("{n} row(s) written to {}", out.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", records.display());
                ExitCode::from(2)
            }
        },
    }
}
