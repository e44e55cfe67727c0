//! One species relaxing against a fixed Maxwellian background. The variance
//! follows 1 + (s0 - 1) exp(-2 c t); both time integrators are compared with
//! that law.
//!
//! Usage: cargo run --release --example ou_relaxation

use fpls::coefficients::CoefficientSet;
use fpls::grid::VelocityGrid;
use fpls::integrator::{run, Frozen, Scheme, StepPolicy, TimeStep};
use fpls::model::{init_maxwellian_state, MaxwellianParams, SpeciesParams};

fn main() -> fpls::Result<()> {
    let grid = VelocityGrid::new(24, 10.0)?;
    let species = vec![SpeciesParams::new("p", 1.0, 1.0)?];
    let initial = init_maxwellian_state(&grid, &species, &[MaxwellianParams::new(1.0, [0.0; 3], 2.0)])?;
    let c = 1.0;
    let background = Frozen(CoefficientSet::uniform(1, c, [0.0; 3], 1.0));
    let exact = |t: f64| 1.0 + (-2.0 * c * t).exp();
    for (scheme, dt) in [
        (Scheme::ExplicitRk4, TimeStep::Auto),
        (Scheme::SemiImplicitSplit, TimeStep::Fixed(0.01)),
    ] {
        println!("{}", scheme.name());
        let policy = StepPolicy::new(scheme, dt, 1.5, 0.25)?;
        let (_, summary) = run(initial.clone(), &background, &policy, |s, e| {
            if e.output {
                let var = s.moments()?[0].temperature;
                println!(
                    "  t {:5.2}  variance {:.6}  exact {:.6}  rel. error {:+.2e}",
                    s.time,
                    var,
                    exact(s.time),
                    var / exact(s.time) - 1.0
                );
            }
            Ok(())
        })?;
        println!("  {} steps", summary.steps);
    }
    Ok(())
}
