use clap::{Parser, Subcommand};
use qkdleak::{compare, run, CompareOptions, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Key-rate bounds for decoy-state BB84 with leaky sources.
#[derive(Parser)]
#[command(name = "qkdleak", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one scenario over its distance grid.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the seed of the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        no_plot: bool,
    },
    /// Sweep two scenarios and report the rate ratio a/b at each distance.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        no_plot: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run { config, out, seed, no_plot } => {
            run(&RunOptions { config, out, seed, no_plot }).map(|files| {
                for f in files {
                    eprintln!("wrote {}", f.display());
                }
            })
        }
        Command::Compare { a, b, out, no_plot } => {
            compare(&CompareOptions { a, b, out, no_plot }).map(|c| {
                print!("{}", c.csv.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect::<String>());
                for f in c.written {
                    eprintln!("wrote {}", f.display());
                }
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qkdleak: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
