//! Write a state to a binary snapshot, read it back and resume the run.
//! The snapshot itself round-trips bit for bit; the resumed run matches the
//! uninterrupted one to round-off.
//!
//! Usage: cargo run --release --example snapshot_io

use fpls::grid::VelocityGrid;
use fpls::integrator::{run, Scheme, SelfConsistent, StepPolicy, TimeStep};
use fpls::io::Snapshot;
use fpls::model::{init_maxwellian_state, MaxwellianParams, PhysicalConstants, SpeciesParams};

fn main() -> fpls::Result<()> {
    let species = vec![SpeciesParams::new("a", 1.0, 1.0)?, SpeciesParams::new("b", 3.0, 1.0)?];
    let params = [
        MaxwellianParams::new(1.0, [0.4, 0.0, 0.0], 1.0),
        MaxwellianParams::new(0.5, [0.0, 0.0, 0.0], 2.0),
    ];
    let state = init_maxwellian_state(&VelocityGrid::new(12, 7.0)?, &species, &params)?;
    let provider = SelfConsistent {
        constants: PhysicalConstants::new(10.0, 1.0, 0.0)?,
    };
    let dt = TimeStep::Fixed(0.02);

    let whole = StepPolicy::new(Scheme::SemiImplicitSplit, dt, 0.4, 0.4)?;
    let (direct, _) = run(state.clone(), &provider, &whole, |_, _| Ok(()))?;

    let half = StepPolicy::new(Scheme::SemiImplicitSplit, dt, 0.2, 0.2)?;
    let (mid, _) = run(state, &provider, &half, |_, _| Ok(()))?;
    let path = std::env::temp_dir().join("fpls_example.fpls");
    Snapshot::from_state(&mid).write(&path)?;
    let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    let restored = Snapshot::read(&path)?.into_state(&species)?;
    let exact = restored
        .distributions
        .iter()
        .zip(&mid.distributions)
        .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    println!(
        "snapshot {} ({bytes} bytes) at t = {}, bitwise round trip: {exact}",
        path.display(),
        restored.time
    );

    let (resumed, _) = run(restored, &provider, &whole, |_, _| Ok(()))?;
    let diff = direct
        .distributions
        .iter()
        .zip(&resumed.distributions)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let peak = direct.distributions.iter().flatten().cloned().fold(0.0, f64::max);
    println!(
        "resumed vs uninterrupted run at t = {}: max difference {:.2e} of the peak value",
        resumed.time,
        diff / peak
    );
    std::fs::remove_file(&path).ok();
    Ok(())
}
