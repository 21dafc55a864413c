use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use chernforge::dsl::{run_source, ExecOptions};
use chernforge::selftest::{run_all, DEFAULT_SEED};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chernforge", version, about = "Exact Chern-class certificates and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a program.
    Run {
        file: PathBuf,
        /// Emit canonical JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Verify every certificate in the model and by the root oracle.
        #[arg(long)]
        verify: bool,
        /// Degree bound for `express` queries and the implicit universal model.
        #[arg(long, value_name = "N")]
        max_degree: Option<u32>,
        /// Write output here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant suites.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

/// `CHERNFORGE_COLOR`: `1`/`always` forces ANSI, `0`/`never` disables it,
/// anything else colors only a terminal.
fn use_color(to_terminal: bool) -> bool {
    match std::env::var("CHERNFORGE_COLOR").as_deref() {
        Ok("1" | "always" | "true") => true,
        Ok("0" | "never" | "false") => false,
        _ => to_terminal,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, json, verify, max_degree, out } => {
            let source = match std::fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("chernforge: cannot read {}: {e}", file.display());
                    return ExitCode::from(2);
                }
            };
            let report = run_source(&source, &ExecOptions { verify, max_degree });
            let text = if json {
                report.to_json() + "\n"
            } else {
                report.render(use_color(out.is_none() && std::io::stdout().is_terminal()))
            };
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("chernforge: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            if !json {
                for d in &report.diagnostics {
                    eprintln!("{}: {d}", file.display());
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Command::Selftest { seed } => {
            let color = use_color(std::io::stdout().is_terminal());
            let results = run_all(seed);
            for r in &results {
                let line = r.to_string();
                if color {
                    let code = if r.passed() { "32" } else { "31" };
                    println!("\x1b[{code}m{line}\x1b[0m");
                } else {
                    println!("{line}");
                }
            }
            let failed = results.iter().filter(|r| !r.passed()).count();
            println!("selftest: {} of {} suites passed (seed {seed})", results.len() - failed, results.len());
            if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
        }
    }
}
