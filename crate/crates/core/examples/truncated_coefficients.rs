//! Regularised coefficients: a species hotter than the Gaussian envelope has
//! its tails cut, and the resulting rates are compared with the plain ones
//! for several regularisation parameters. The two readings of the truncated
//! temperature differ once the rates depend on temperature (gamma != 0).
//!
//! Usage: cargo run --release --example truncated_coefficients

use fpls::coefficients::{compute_coefficients, compute_truncated_coefficients, TruncationReading};
use fpls::grid::VelocityGrid;
use fpls::model::{init_maxwellian_state, MaxwellianParams, PhysicalConstants, SpeciesParams};

fn main() -> fpls::Result<()> {
    let species = vec![SpeciesParams::new("a", 1.0, 1.0)?, SpeciesParams::new("b", 2.0, -1.0)?];
    let params = [
        MaxwellianParams::new(1.0, [0.2, 0.0, 0.0], 1.5),
        MaxwellianParams::new(1.0, [-0.1, 0.0, 0.0], 1.0),
    ];
    let grid = VelocityGrid::new(16, 6.0)?;
    let state = init_maxwellian_state(&grid, &species, &params)?;
    let densities: Vec<f64> = params.iter().map(|p| p.density).collect();
    for gamma in [1.0, -1.0] {
        let constants = PhysicalConstants::new(8.0 * std::f64::consts::PI, 1.0, gamma)?;
        let plain = compute_coefficients(&state.moments()?, &species, &constants)?;
        println!(
            "gamma {gamma}: plain rate(a<-b) {:.6}  T(a,b) {:.6}",
            plain.c(1, 0),
            plain.t(1, 0)
        );
        for eps in [1e-1, 1e-2, 1e-3] {
            for reading in [TruncationReading::Consistent, TruncationReading::Literal] {
                let co = compute_truncated_coefficients(
                    &state.distributions,
                    &species,
                    &densities,
                    &constants,
                    eps,
                    reading,
                    &grid,
                )?;
                println!(
                    "  eps {eps:6.0e} {reading:10?}: rate(a<-b) {:.6}  T(a,b) {:.6}  u_x(a,b) {:+.6}",
                    co.c(1, 0),
                    co.t(1, 0),
                    co.u(1, 0)[0]
                );
            }
        }
    }
    Ok(())
}
