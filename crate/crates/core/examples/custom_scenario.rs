//! Build a scenario from text, override a preset and write the CSV outputs.

use arcmem::cli::{run, Command, RunOptions, Scenario};

const SCENARIO: &str = "
# Fig. 3 arc with a logistic blend and a coarser sweep
preset = fig3
arc.sigma = logistic
arc.sigma_beta = 2
sweep.axis = f
sweep.values = 400, 4000, 10000
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::parse(SCENARIO)?;
    let out = std::env::temp_dir().join("arcmem-custom-scenario");
    let opts = RunOptions {
        out: Some(out),
        ..Default::default()
    };
    for file in run(Command::Sweep, &scenario, &opts)? {
        println!("wrote {}", file.display());
    }
    Ok(())
}
