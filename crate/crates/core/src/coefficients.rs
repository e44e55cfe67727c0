//! Nonlocal coupling coefficients `c_ji`, mixture velocities `u_ji` and
//! mixture temperatures `T_ji`.
//!
//! Index convention, used by every array in this module and by the file
//! formats: entry `(j, i)` is stored at `j * s + i`, i.e. row = partner
//! species `j`, column = own species `i`. `c_ji` multiplies the operator
//! acting on `f_i` and carries the prefactor `m_i^-2` together with the
//! density and temperature of the partner `j`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{CompensatedSum, VelocityGrid};
use crate::model::{PhysicalConstants, SpeciesParams};
use crate::moments::{self, SpeciesMoments};
use crate::vec3::{self, Vec3};

/// The `s x s` coefficient arrays driving one evaluation of the collision
/// operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    s: usize,
    c: Vec<f64>,
    u: Vec<Vec3>,
    t: Vec<f64>,
    /// `Some(eps)` when produced by the truncated (regularised) formulas.
    pub truncation: Option<f64>,
}

impl CoefficientSet {
    /// Assembles a set from raw arrays in `(partner, own)` layout.
    pub fn from_parts(s: usize, c: Vec<f64>, u: Vec<Vec3>, t: Vec<f64>) -> Result<Self> {
        if c.len() != s * s || u.len() != s * s || t.len() != s * s {
            return Err(Error::DegenerateCoefficients(format!(
                "coefficient arrays must have {} entries",
                s * s
            )));
        }
        Ok(Self {
            s,
            c,
            u,
            t,
            truncation: None,
        })
    }

    /// Same coefficients for every ordered pair; used for frozen-coefficient
    /// runs such as the single-species relaxation benchmark.
    pub fn uniform(s: usize, c: f64, u: Vec3, t: f64) -> Self {
        Self {
            s,
            c: vec![c; s * s],
            u: vec![u; s * s],
            t: vec![t; s * s],
            truncation: None,
        }
    }

    #[inline]
    pub fn num_species(&self) -> usize {
        self.s
    }

    /// `c_ji`: partner `j`, own species `i`.
    #[inline]
    pub fn c(&self, j: usize, i: usize) -> f64 {
        self.c[j * self.s + i]
    }

    #[inline]
    pub fn u(&self, j: usize, i: usize) -> Vec3 {
        self.u[j * self.s + i]
    }

    #[inline]
    pub fn t(&self, j: usize, i: usize) -> f64 {
        self.t[j * self.s + i]
    }

    pub fn c_mut(&mut self) -> &mut [f64] {
        &mut self.c
    }

    pub fn u_mut(&mut self) -> &mut [Vec3] {
        &mut self.u
    }

    pub fn t_mut(&mut self) -> &mut [f64] {
        &mut self.t
    }

    /// Checks positivity and finiteness required by the collision operator.
    pub fn validate(&self) -> Result<()> {
        for j in 0..self.s {
            for i in 0..self.s {
                let (c, t, u) = (self.c(j, i), self.t(j, i), self.u(j, i));
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::DegenerateCoefficients(format!("c[{j}][{i}] = {c}")));
                }
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::DegenerateCoefficients(format!("T[{j}][{i}] = {t}")));
                }
                if !vec3::is_finite(u) {
                    return Err(Error::DegenerateCoefficients(format!("u[{j}][{i}] = {u:?}")));
                }
            }
        }
        Ok(())
    }

    /// Smallest mixture temperature over all ordered pairs.
    pub fn min_temperature(&self) -> f64 {
        self.t.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `sum_j c_ji` for own species `i`.
    pub fn total_rate(&self, i: usize) -> f64 {
        (0..self.s).map(|j| self.c(j, i)).sum()
    }
}

/// `c_ji = |log L| q_i^2 q_j^2 / (8 pi eps0^2 m_i^2) * n_j (T_j / m_j)^{gamma/2}`.
pub fn compute_cji(
    moments: &[SpeciesMoments],
    species: &[SpeciesParams],
    constants: &PhysicalConstants,
) -> Result<Vec<f64>> {
    let s = species.len();
    for (j, m) in moments.iter().enumerate() {
        if !(m.temperature > 0.0) {
            return Err(Error::DegenerateMoments {
                species: j,
                reason: format!("temperature {} must be positive", m.temperature),
            });
        }
        if !(m.number_density > 0.0) {
            return Err(Error::DegenerateMoments {
                species: j,
                reason: format!("density {} must be positive", m.number_density),
            });
        }
    }
    let mut c = vec![0.0; s * s];
    for j in 0..s {
        let partner =
            moments[j].number_density * (moments[j].temperature / species[j].mass).powf(constants.gamma / 2.0);
        for i in 0..s {
            c[j * s + i] = constants.coupling_prefactor(&species[j], &species[i]) * partner;
        }
    }
    Ok(c)
}

/// Momentum weights `c_ji m_i rho_i` for the mixture formulas.
fn mixture_velocity(c: &[f64], masses: &[f64], rho: &[f64], velocities: &[Vec3]) -> Vec<Vec3> {
    let s = masses.len();
    let mut u = vec![vec3::ZERO; s * s];
    for i in 0..s {
        u[i * s + i] = velocities[i];
        for j in (i + 1)..s {
            let wi = c[j * s + i] * masses[i] * rho[i];
            let wj = c[i * s + j] * masses[j] * rho[j];
            let mixed = vec3::scale(
                vec3::add(vec3::scale(velocities[i], wi), vec3::scale(velocities[j], wj)),
                1.0 / (wi + wj),
            );
            u[j * s + i] = mixed;
            u[i * s + j] = mixed;
        }
    }
    u
}

fn mixture_temperature(c: &[f64], masses: &[f64], rho: &[f64], velocities: &[Vec3], temperatures: &[f64]) -> Vec<f64> {
    let s = masses.len();
    let mut t = vec![0.0; s * s];
    for i in 0..s {
        t[i * s + i] = temperatures[i];
        for j in (i + 1)..s {
            let ai = c[j * s + i] * rho[i];
            let aj = c[i * s + j] * rho[j];
            let bi = ai * masses[i];
            let bj = aj * masses[j];
            let du2 = vec3::norm2(vec3::sub(velocities[i], velocities[j]));
            let mixed = (ai * temperatures[i] + aj * temperatures[j]) / (ai + aj)
                + bi * bj * du2 / (3.0 * (ai + aj) * (bi + bj));
            t[j * s + i] = mixed;
            t[i * s + j] = mixed;
        }
    }
    t
}

/// `u_ji = (c_ji m_i rho_i u_i + c_ij m_j rho_j u_j) / (c_ji m_i rho_i + c_ij m_j rho_j)`.
pub fn compute_uji(moments: &[SpeciesMoments], masses: &[f64], c: &[f64]) -> Vec<Vec3> {
    let rho: Vec<f64> = moments.iter().map(|m| m.mass_density).collect();
    let vel: Vec<Vec3> = moments.iter().map(|m| m.bulk_velocity).collect();
    mixture_velocity(c, masses, &rho, &vel)
}

/// Mixture temperature: convex combination of `T_i`, `T_j` plus the
/// relative-drift heating term.
pub fn compute_tji(moments: &[SpeciesMoments], masses: &[f64], c: &[f64]) -> Vec<f64> {
    let rho: Vec<f64> = moments.iter().map(|m| m.mass_density).collect();
    let vel: Vec<Vec3> = moments.iter().map(|m| m.bulk_velocity).collect();
    let tem: Vec<f64> = moments.iter().map(|m| m.temperature).collect();
    mixture_temperature(c, masses, &rho, &vel, &tem)
}

/// Full coefficient set from the species moments.
pub fn compute_coefficients(
    moments: &[SpeciesMoments],
    species: &[SpeciesParams],
    constants: &PhysicalConstants,
) -> Result<CoefficientSet> {
    let masses: Vec<f64> = species.iter().map(|s| s.mass).collect();
    let c = compute_cji(moments, species, constants)?;
    let u = compute_uji(moments, &masses, &c);
    let t = compute_tji(moments, &masses, &c);
    CoefficientSet::from_parts(species.len(), c, u, t)
}

/// `M_ij = maxwellian(n_i, m_i, u_ij, T_ij)`, returned as `[i][j]`.
pub fn compute_pairwise_maxwellians(
    moments: &[SpeciesMoments],
    species: &[SpeciesParams],
    coeffs: &CoefficientSet,
    grid: &VelocityGrid,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let s = species.len();
    (0..s)
        .map(|i| {
            (0..s)
                .map(|j| {
                    moments::maxwellian_field(
                        moments[i].number_density,
                        species[i].mass,
                        coeffs.u(j, i),
                        coeffs.t(j, i),
                        grid,
                    )
                })
                .collect()
        })
        .collect()
}

/// Which species' truncated temperature enters `c^eps_ji`.
///
/// The regularised formulas write the truncated temperature of species `j`
/// with integrands in terms of `f_i, m_i, n_i`. `Consistent` evaluates it
/// from species `j` throughout; `Literal` keeps the integrand of the own
/// species `i` while dividing by `m_j`, exactly as printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationReading {
    #[default]
    Consistent,
    Literal,
}

/// Truncated moments of one species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMoments {
    /// `(1/n) int min{f+, g/eps} v`.
    pub velocity: Vec3,
    /// `(m/3n) int min{f+, g/eps} |v - u^eps|^2`.
    pub temperature_up: f64,
    /// `(m/3n) int max{f, eps g} |v - u^eps|^2`.
    pub temperature_down: f64,
}

/// Normalised Gaussian envelope `g(v) = pi^{-3/2} exp(-|v|^2)` on the grid.
pub fn gaussian_envelope(grid: &VelocityGrid) -> Vec<f64> {
    grid.sample(|v| PI.powf(-1.5) * (-vec3::norm2(v)).exp())
}

pub fn truncated_moments(
    field: &[f64],
    envelope: &[f64],
    mass: f64,
    density: f64,
    eps: f64,
    grid: &VelocityGrid,
) -> TruncatedMoments {
    let np = grid.n_per_axis();
    let c = grid.centers();
    let vol = grid.cell_volume();
    let mut sv = [CompensatedSum::default(); 3];
    let mut idx = 0;
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                let w = field[idx].max(0.0).min(envelope[idx] / eps);
                sv[0].add(w * c[i]);
                sv[1].add(w * c[j]);
                sv[2].add(w * c[k]);
                idx += 1;
            }
        }
    }
    let u = [
        sv[0].value() * vol / density,
        sv[1].value() * vol / density,
        sv[2].value() * vol / density,
    ];
    let mut up = CompensatedSum::default();
    let mut down = CompensatedSum::default();
    idx = 0;
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                let d2 = (c[i] - u[0]).powi(2) + (c[j] - u[1]).powi(2) + (c[k] - u[2]).powi(2);
                let f = field[idx];
                let g = envelope[idx];
                up.add(f.max(0.0).min(g / eps) * d2);
                down.add(f.max(eps * g) * d2);
                idx += 1;
            }
        }
    }
    let scale = mass / (3.0 * density) * vol;
    TruncatedMoments {
        velocity: u,
        temperature_up: up.value() * scale,
        temperature_down: down.value() * scale,
    }
}

/// Regularised coefficients: `c^eps >= eps`, truncated velocities and a
/// temperature floor proportional to `eps`. Densities are those of the
/// initial datum.
pub fn compute_truncated_coefficients(
    fields: &[Vec<f64>],
    species: &[SpeciesParams],
    initial_densities: &[f64],
    constants: &PhysicalConstants,
    eps: f64,
    reading: TruncationReading,
    grid: &VelocityGrid,
) -> Result<CoefficientSet> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(
            "run.epsilon_truncation",
            format!("must lie in (0, 1), got {eps}"),
        ));
    }
    let s = species.len();
    let envelope = gaussian_envelope(grid);
    let masses: Vec<f64> = species.iter().map(|sp| sp.mass).collect();
    let tm: Vec<TruncatedMoments> = (0..s)
        .map(|i| truncated_moments(&fields[i], &envelope, masses[i], initial_densities[i], eps, grid))
        .collect();
    let select = |k: usize| {
        if constants.gamma >= 0.0 {
            tm[k].temperature_up
        } else {
            tm[k].temperature_down
        }
    };
    let mut c = vec![0.0; s * s];
    for j in 0..s {
        for i in 0..s {
            let temp = match reading {
                TruncationReading::Consistent => select(j),
                TruncationReading::Literal => select(i),
            };
            let base = temp / masses[j];
            // With gamma >= 0 a vanishing truncated temperature just switches
            // the thermal factor off.
            let thermal = if base > 0.0 {
                base.powf(constants.gamma / 2.0)
            } else if constants.gamma > 0.0 {
                0.0
            } else if constants.gamma == 0.0 {
                1.0
            } else {
                return Err(Error::DegenerateCoefficients(format!(
                    "truncated temperature of species {j} vanished with gamma < 0"
                )));
            };
            c[j * s + i] =
                constants.coupling_prefactor(&species[j], &species[i]) * initial_densities[j] * thermal + eps;
        }
    }
    let rho: Vec<f64> = (0..s).map(|i| masses[i] * initial_densities[i]).collect();
    let vel: Vec<Vec3> = tm.iter().map(|t| t.velocity).collect();
    let down: Vec<f64> = tm.iter().map(|t| t.temperature_down).collect();
    let u = mixture_velocity(&c, &masses, &rho, &vel);
    let t = mixture_temperature(&c, &masses, &rho, &vel, &down);
    let mut set = CoefficientSet::from_parts(s, c, u, t)?;
    set.truncation = Some(eps);
    Ok(set)
}
