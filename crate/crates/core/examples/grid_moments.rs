//! Discretise a drifting Maxwellian on the velocity grid and recover its
//! moments by quadrature.
//!
//! Usage: cargo run --example grid_moments

use fpls::grid::VelocityGrid;
use fpls::moments::{compute_moments, maxwellian_field};

fn main() -> fpls::Result<()> {
    let (mass, n, u, t) = (2.0, 1.5, [0.3, -0.2, 0.0], 0.8);
    for cells in [8, 16, 32] {
        let grid = VelocityGrid::new(cells, 6.0)?;
        let f = maxwellian_field(n, mass, u, t, &grid)?;
        let m = compute_moments(&f, mass, &grid)?;
        println!(
            "n_per_axis {cells:3}  h {:.4}  n {:.12}  u ({:+.3e}, {:+.3e}, {:+.3e})  T {:.12}",
            grid.spacing(),
            m.number_density,
            m.bulk_velocity[0] - u[0],
            m.bulk_velocity[1] - u[1],
            m.bulk_velocity[2] - u[2],
            m.temperature
        );
    }
    Ok(())
}
