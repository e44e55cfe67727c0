//! Two species with opposite drifts and different temperatures relax to a
//! common Maxwellian. Prints moments, entropy and the distance to the
//! equilibrium along the way.
//!
//! Usage: cargo run --release --example two_species_relaxation [n_per_axis]

use std::time::Instant;

use fpls::collision::FluxScheme;
use fpls::diagnostics::Diagnostics;
use fpls::grid::VelocityGrid;
use fpls::integrator::{run, Scheme, SelfConsistent, StepPolicy, TimeStep};
use fpls::model::{init_maxwellian_state, MaxwellianParams, PhysicalConstants, SpeciesParams};
use fpls::oracle::{relaxation_time, MomentState};

fn main() -> fpls::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(32);
    let species = vec![SpeciesParams::new("a", 1.0, 1.0)?, SpeciesParams::new("b", 2.0, -1.0)?];
    let params = [
        MaxwellianParams::new(1.0, [1.0, 0.0, 0.0], 1.0),
        MaxwellianParams::new(1.0, [-0.5, 0.0, 0.0], 2.0),
    ];
    let constants = PhysicalConstants::new(8.0 * std::f64::consts::PI, 1.0, 0.0)?;
    let grid = VelocityGrid::new(n, 8.0)?;
    let state = init_maxwellian_state(&grid, &species, &params)?;

    let moments = MomentState::new(0.0, state.moments()?);
    let tau = relaxation_time(&moments, &species, &constants)?;
    let t_end = 10.0 * tau;
    println!("relaxation time {tau:.4}, running to t = {t_end:.3}");

    let provider = SelfConsistent { constants };
    let policy = StepPolicy::new(Scheme::ExplicitRk4, TimeStep::Auto, t_end, t_end / 10.0)?;
    let diagnostics = Diagnostics::new(&state, &provider, FluxScheme::Conservative)?;
    println!(
        "equilibrium u* = {:?}, T* = {:.6}",
        diagnostics.equilibrium.velocity, diagnostics.equilibrium.temperature
    );
    let start = Instant::now();
    let mut clamped = 0;
    let (_, summary) = run(state, &provider, &policy, |s, event| {
        if let Some(r) = event.report {
            clamped += r.clamped_cells;
        }
        if event.output {
            let row = diagnostics.row(s, clamped)?;
            let m = &row.moments;
            println!(
                "t {:8.3}  u_a {:+.6}  u_b {:+.6}  T_a {:.6}  T_b {:.6}  H {:.9}  D {:.3e}  Hrel {:.3e}",
                row.time,
                m[0].bulk_velocity[0],
                m[1].bulk_velocity[0],
                m[0].temperature,
                m[1].temperature,
                row.entropy,
                row.dissipation,
                row.relative_entropy
            );
        }
        Ok(())
    })?;
    println!(
        "{} steps in {:.1} s, {} clamped cells",
        summary.steps,
        start.elapsed().as_secs_f64(),
        summary.clamped_cells
    );
    Ok(())
}
