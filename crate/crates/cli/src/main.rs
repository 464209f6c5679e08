use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use leftpi::algebra::AlgebraSet;
use leftpi_cli::{cmd_check, cmd_reduce, cmd_roundtrip, load, run_repl, CliError};

#[derive(Parser)]
#[command(
    name = "leftpi",
    version,
    about = "Check and run resource-aware pi-calculus programs"
)]
struct Cli {
    /// Machine-readable output for `check` and `reduce`.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type the program and print its derivation and leftover context.
    Check { file: PathBuf },
    /// Run the program, retyping after every step. Runs to the end unless
    /// `--steps` is given.
    Reduce {
        file: PathBuf,
        #[arg(long, conflicts_with = "to_end")]
        steps: Option<usize>,
        #[arg(long)]
        to_end: bool,
    },
    /// Step through the program by hand, reading choices from stdin.
    Repl { file: PathBuf },
    /// Print the program after converting to indices and back.
    Roundtrip { file: PathBuf },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let algs = AlgebraSet::standard();
    let read = |f: &PathBuf| std::fs::read_to_string(f);
    match cli.command {
        Command::Check { file } => cmd_check(&algs, &read(&file)?, cli.json),
        Command::Reduce {
            file,
            steps,
            to_end,
        } => {
            let max = if to_end { None } else { steps };
            cmd_reduce(&algs, &read(&file)?, max, cli.json)
        }
        Command::Repl { file } => {
            let l = load(&algs, &read(&file)?)?;
            run_repl(&algs, &l, io::stdin().lock(), io::stdout().lock())?;
            Ok(String::new())
        }
        Command::Roundtrip { file } => cmd_roundtrip(&algs, &read(&file)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("leftpi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
