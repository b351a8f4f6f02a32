//! `walker-ext`: scenario front end for the cotangent-bundle curvature
//! engine.  Scenarios describe affine input data, a metric construction, and
//! analysis commands; reports are deterministic for a fixed scenario and
//! seed.

mod fixtures;
mod report;
mod runner;
mod scenario;

use std::fs;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "walker-ext",
    version,
    about = "Exact curvature analysis of Walker metrics built from affine data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a built-in scenario given by name).
    Run {
        /// Path to a scenario file, or the name of a built-in scenario.
        target: String,
        /// Report format.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Override the random seed of every sampling command.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse a scenario and print its canonical form (a fixed normalization
    /// that parses back to the same scenario).
    Print {
        /// Path to a scenario file, or the name of a built-in scenario.
        target: String,
    },
    /// List built-in scenarios, or print the source of one.
    Fixtures {
        /// Name of the built-in scenario to print.
        name: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { target, format, seed } => run(&target, format, seed),
        Command::Print { target } => print_canonical(&target),
        Command::Fixtures { name } => list_fixtures(name.as_deref()),
    }
}

fn load_target(target: &str) -> Result<(String, String), i32> {
    if Path::new(target).is_file() {
        match fs::read_to_string(target) {
            Ok(text) => Ok((text, target.to_string())),
            Err(e) => {
                eprintln!("error: cannot read `{target}`: {e}");
                Err(2)
            }
        }
    } else if let Some(fixture) = fixtures::find(target) {
        Ok((fixture.source.to_string(), fixture.name.to_string()))
    } else {
        eprintln!(
            "error: `{target}` is neither a scenario file nor a built-in scenario \
             (run `walker-ext fixtures` for the built-in names)"
        );
        Err(2)
    }
}

fn run(target: &str, format: Format, seed: Option<u64>) -> i32 {
    let (source, label) = match load_target(target) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let (scenario, notes) = match scenario::parse_scenario(&source) {
        Ok(parsed) => parsed,
        Err(e) => {
            eprintln!("error: {label}: {e}");
            return 2;
        }
    };
    let report = runner::run_scenario(&scenario, notes, &label, seed);
    match format {
        Format::Text => print!("{}", report.render_text()),
        Format::Json => print!("{}", report.render_json()),
    }
    if report.all_passed() {
        0
    } else {
        1
    }
}

fn print_canonical(target: &str) -> i32 {
    let (source, label) = match load_target(target) {
        Ok(x) => x,
        Err(code) => return code,
    };
    match scenario::parse_scenario(&source) {
        Ok((scenario, _)) => {
            print!("{}", scenario.to_text());
            0
        }
        Err(e) => {
            eprintln!("error: {label}: {e}");
            2
        }
    }
}

fn list_fixtures(name: Option<&str>) -> i32 {
    match name {
        None => {
            for fixture in fixtures::FIXTURES {
                println!("{:<20} {}", fixture.name, fixture.summary);
            }
            0
        }
        Some(name) => match fixtures::find(name) {
            Some(fixture) => {
                print!("{}", fixture.source);
                0
            }
            None => {
                eprintln!("error: no built-in scenario named `{name}`");
                2
            }
        },
    }
}
