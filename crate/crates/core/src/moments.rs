//! Species moments, sampled Maxwellians and the common equilibrium the
//! mixture relaxes to.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{CompensatedSum, VelocityGrid};
use crate::model::SpeciesParams;
use crate::vec3::{self, Vec3};

/// Number density, mass density, bulk velocity and temperature of one
/// species. Temperature carries energy units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesMoments {
    pub number_density: f64,
    pub mass_density: f64,
    pub bulk_velocity: Vec3,
    pub temperature: f64,
}

impl SpeciesMoments {
    pub fn new(mass: f64, number_density: f64, bulk_velocity: Vec3, temperature: f64) -> Self {
        Self {
            number_density,
            mass_density: mass * number_density,
            bulk_velocity,
            temperature,
        }
    }

    /// A zero temperature only arises from a field concentrated in one cell.
    pub fn is_degenerate(&self) -> bool {
        self.temperature <= 0.0
    }

    /// Raw second moment `int f |v|^2 = 3 n T / m + n |u|^2`.
    pub fn second_moment(&self, mass: f64) -> f64 {
        self.number_density * (3.0 * self.temperature / mass + vec3::norm2(self.bulk_velocity))
    }
}

/// Density, velocity and temperature of a gridded field.
pub fn compute_moments(field: &[f64], mass: f64, grid: &VelocityGrid) -> Result<SpeciesMoments> {
    let n = grid.integrate(field)?;
    if n <= 0.0 {
        return Err(Error::DegenerateMoments {
            species: 0,
            reason: format!("total mass {n} is not positive"),
        });
    }
    let c = grid.centers();
    let np = grid.n_per_axis();
    let mut sx = CompensatedSum::default();
    let mut sy = CompensatedSum::default();
    let mut sz = CompensatedSum::default();
    let mut idx = 0;
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                let f = field[idx];
                sx.add(f * c[i]);
                sy.add(f * c[j]);
                sz.add(f * c[k]);
                idx += 1;
            }
        }
    }
    let vol = grid.cell_volume();
    let u = [sx.value() * vol / n, sy.value() * vol / n, sz.value() * vol / n];
    let mut sq = CompensatedSum::default();
    idx = 0;
    for k in 0..np {
        let dz = c[k] - u[2];
        for j in 0..np {
            let dy = c[j] - u[1];
            for i in 0..np {
                let dx = c[i] - u[0];
                sq.add(field[idx] * (dx * dx + dy * dy + dz * dz));
                idx += 1;
            }
        }
    }
    let temperature = (mass / (3.0 * n) * sq.value() * vol).max(0.0);
    Ok(SpeciesMoments::new(mass, n, u, temperature))
}

/// `n (m / 2 pi T)^{3/2} exp(-m |v - u|^2 / 2T)` at every cell centre.
pub fn maxwellian_field(n: f64, mass: f64, velocity: Vec3, temperature: f64, grid: &VelocityGrid) -> Result<Vec<f64>> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::param("n", format!("must be positive, got {n}")));
    }
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::param("T", format!("must be positive, got {temperature}")));
    }
    let peak = n * (mass / (2.0 * PI * temperature)).powf(1.5);
    let beta = mass / (2.0 * temperature);
    // Separable: exp(-beta |v-u|^2) = ex * ey * ez.
    let axis = |d: usize| -> Vec<f64> {
        grid.centers()
            .iter()
            .map(|&x| (-beta * (x - velocity[d]) * (x - velocity[d])).exp())
            .collect()
    };
    let (ex, ey, ez) = (axis(0), axis(1), axis(2));
    let np = grid.n_per_axis();
    let mut out = Vec::with_capacity(grid.total_cells());
    for k in 0..np {
        for j in 0..np {
            let yz = peak * ey[j] * ez[k];
            for i in 0..np {
                out.push(yz * ex[i]);
            }
        }
    }
    Ok(out)
}

/// Common drift velocity and temperature fixed by the conserved totals, with
/// the corresponding per-species Maxwellians.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalEquilibrium {
    pub velocity: Vec3,
    pub temperature: f64,
    pub fields: Vec<Vec<f64>>,
}

/// `(u*, T*)` from total momentum and total energy.
pub fn equilibrium_parameters(moments: &[SpeciesMoments]) -> (Vec3, f64) {
    let rho: f64 = moments.iter().map(|m| m.mass_density).sum();
    let mut u = vec3::ZERO;
    for m in moments {
        u = vec3::add(u, vec3::scale(m.bulk_velocity, m.mass_density));
    }
    let u = vec3::scale(u, 1.0 / rho);
    let num: f64 = moments
        .iter()
        .map(|m| 3.0 * m.number_density * m.temperature + m.mass_density * vec3::norm2(vec3::sub(m.bulk_velocity, u)))
        .sum();
    let n_tot: f64 = moments.iter().map(|m| m.number_density).sum();
    (u, num / (3.0 * n_tot))
}

pub fn global_equilibrium(
    moments: &[SpeciesMoments],
    species: &[SpeciesParams],
    grid: &VelocityGrid,
) -> Result<GlobalEquilibrium> {
    let (velocity, temperature) = equilibrium_parameters(moments);
    let fields = moments
        .iter()
        .zip(species)
        .map(|(m, s)| maxwellian_field(m.number_density, s.mass, velocity, temperature, grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(GlobalEquilibrium {
        velocity,
        temperature,
        fields,
    })
}
