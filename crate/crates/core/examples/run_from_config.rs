//! Load a TOML run configuration and drive the simulation through the
//! library instead of the command line.
//!
//! Usage: cargo run --release --example run_from_config [config.toml]

use std::path::PathBuf;

use fpls::cli::run_checks;
use fpls::config::RunConfig;
use fpls::diagnostics::Diagnostics;
use fpls::integrator::{run, SelfConsistent};

fn main() -> fpls::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/two_species.toml"));
    let config = RunConfig::from_path(&path)?;
    let initial = config.initial_state()?;
    for suite in run_checks(&config, &initial)? {
        println!("suite {}: {}", suite.name, suite.failure.as_deref().unwrap_or("pass"));
    }
    let provider = SelfConsistent {
        constants: config.constants.clone(),
    };
    let diagnostics = Diagnostics::new(&initial, &provider, config.run.flux)?;
    let (_, summary) = run(initial, &provider, &config.step_policy()?, |s, e| {
        if e.output {
            let row = diagnostics.row(s, 0)?;
            println!(
                "t {:6.3}  E {:.10}  H {:.10}  Hrel {:.3e}",
                row.time, row.energy, row.entropy, row.relative_entropy
            );
        }
        Ok(())
    })?;
    println!("{} steps", summary.steps);
    Ok(())
}
