//! Collision rates, mixture velocities and mixture temperatures for a
//! three-species plasma, and how the rates depend on the potential exponent.
//!
//! Usage: cargo run --example pair_coefficients

use fpls::coefficients::compute_coefficients;
use fpls::model::{PhysicalConstants, SpeciesParams};
use fpls::moments::SpeciesMoments;

fn main() -> fpls::Result<()> {
    let species = vec![
        SpeciesParams::new("e", 0.05, -1.0)?,
        SpeciesParams::new("p", 1.0, 1.0)?,
        SpeciesParams::new("He", 4.0, 2.0)?,
    ];
    let moments = vec![
        SpeciesMoments::new(0.05, 2.0, [0.5, 0.0, 0.0], 1.2),
        SpeciesMoments::new(1.0, 1.0, [0.0, 0.1, 0.0], 1.0),
        SpeciesMoments::new(4.0, 0.5, [-0.2, 0.0, 0.0], 0.7),
    ];
    for gamma in [-3.0, 0.0, 1.0] {
        let constants = PhysicalConstants::new(10.0, 1.0, gamma)?;
        let co = compute_coefficients(&moments, &species, &constants)?;
        println!("gamma = {gamma} ({:?})", constants.potential_class());
        for i in 0..3 {
            for j in 0..3 {
                let u = co.u(j, i);
                println!(
                    "  {} <- {}: rate {:10.4e}  T {:.5}  u ({:+.4}, {:+.4}, {:+.4})",
                    species[i].label,
                    species[j].label,
                    co.c(j, i),
                    co.t(j, i),
                    u[0],
                    u[1],
                    u[2]
                );
            }
        }
    }
    Ok(())
}
