//! Kinetic moments against the closed moment equations for a short
//! relaxation, with the per-species deviation summary.
//!
//! Usage: cargo run --release --example moment_oracle

use fpls::grid::VelocityGrid;
use fpls::integrator::{run, Scheme, SelfConsistent, StepPolicy, TimeStep};
use fpls::model::{init_maxwellian_state, MaxwellianParams, PhysicalConstants, SpeciesParams};
use fpls::oracle::{compare_trajectories, integrate_moments, MomentState};

fn main() -> fpls::Result<()> {
    let species = vec![SpeciesParams::new("a", 1.0, 1.0)?, SpeciesParams::new("b", 2.0, -1.0)?];
    let params = [
        MaxwellianParams::new(1.0, [1.0, 0.0, 0.0], 1.0),
        MaxwellianParams::new(1.0, [-0.5, 0.0, 0.0], 2.0),
    ];
    let constants = PhysicalConstants::new(8.0 * std::f64::consts::PI, 1.0, 0.0)?;
    let state = init_maxwellian_state(&VelocityGrid::new(20, 8.0)?, &species, &params)?;
    let (t_end, every) = (2.0, 0.25);

    let start = MomentState::new(0.0, state.moments()?);
    let ode = integrate_moments(&start, &species, &constants, t_end, 1e-3, every)?;

    let provider = SelfConsistent { constants };
    let policy = StepPolicy::new(Scheme::SemiImplicitSplit, TimeStep::Fixed(0.005), t_end, every)?;
    let mut pde = Vec::new();
    run(state, &provider, &policy, |s, e| {
        if e.output {
            pde.push(MomentState::new(s.time, s.moments()?));
        }
        Ok(())
    })?;

    println!("     t   T_a kinetic  T_a moments   u_b kinetic  u_b moments");
    for (k, o) in pde.iter().zip(&ode) {
        println!(
            "{:6.2}  {:11.6}  {:11.6}  {:+11.6}  {:+11.6}",
            k.time,
            k.species[0].temperature,
            o.species[0].temperature,
            k.species[1].bulk_velocity[0],
            o.species[1].bulk_velocity[0]
        );
    }
    let dev = compare_trajectories(&pde, &ode)?;
    for (sp, d) in species.iter().zip(&dev.species) {
        println!(
            "{}: density {:.2e}  velocity {:.2e}  temperature {:.2e}",
            sp.label,
            d.density,
            d.velocity.iter().cloned().fold(0.0, f64::max),
            d.temperature
        );
    }
    println!("max deviation {:.3e}", dev.max());
    Ok(())
}
