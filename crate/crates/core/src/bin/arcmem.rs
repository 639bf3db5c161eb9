use std::path::PathBuf;
use std::process::ExitCode;

use arcmem::cli::{resolve_scenario, run, Command, RunOptions};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, ValueEnum)]
enum Sub {
    Simulate,
    Fingerprints,
    Sweep,
    Table1,
}

/// Hybrid arc simulation and memristive fingerprint analysis.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Sub,
    /// Scenario file (`section.key = value` lines).
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in parameter set: fig1, fig2a, fig3, fig4a, fig4b, fig4c, table1.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides the scenario's).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 if a fingerprint check fails.
    #[arg(long)]
    assert: bool,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write every accepted integrator step.
    #[arg(long)]
    raw_steps: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Sub::Simulate => Command::Simulate,
        Sub::Fingerprints => Command::Fingerprints,
        Sub::Sweep => Command::Sweep,
        Sub::Table1 => Command::Table1,
    };
    let opts = RunOptions {
        out: args.out,
        assert: args.assert,
        jobs: args.jobs,
        raw_steps: args.raw_steps,
    };
    let result = resolve_scenario(args.scenario.as_deref(), args.preset.as_deref())
        .and_then(|scenario| run(command, &scenario, &opts));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("arcmem: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
