//! Species parameters, physical constants and the gridded plasma state.

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::moments::{self, SpeciesMoments};
use crate::vec3::{self, Vec3};

/// Mass, charge and a short label for one particle species.
///
/// Only `charge^2` enters the dynamics; the sign is kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesParams {
    pub label: String,
    pub mass: f64,
    pub charge: f64,
}

impl SpeciesParams {
    pub fn new(label: impl Into<String>, mass: f64, charge: f64) -> Result<Self> {
        let label = label.into();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::param(format!("species.{label}.mass"), "must be positive"));
        }
        if !charge.is_finite() || charge == 0.0 {
            return Err(Error::param(format!("species.{label}.charge"), "must be nonzero"));
        }
        Ok(Self { label, mass, charge })
    }
}

/// Hard (`gamma >= 2`) or soft (`gamma < 2`) interaction potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialClass {
    Hard,
    Soft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalConstants {
    /// `|log Lambda|`, the Coulomb logarithm.
    pub coulomb_log: f64,
    pub vacuum_permittivity: f64,
    /// Interaction-strength exponent; `-1` is the Coulomb case.
    pub gamma: f64,
}

impl PhysicalConstants {
    pub fn new(coulomb_log: f64, vacuum_permittivity: f64, gamma: f64) -> Result<Self> {
        if !(coulomb_log.is_finite() && coulomb_log > 0.0) {
            return Err(Error::param("constants.coulomb_log", "must be positive"));
        }
        if !(vacuum_permittivity.is_finite() && vacuum_permittivity > 0.0) {
            return Err(Error::param("constants.eps0", "must be positive"));
        }
        if !gamma.is_finite() {
            return Err(Error::param("constants.gamma", "must be finite"));
        }
        Ok(Self {
            coulomb_log,
            vacuum_permittivity,
            gamma,
        })
    }

    pub fn potential_class(&self) -> PotentialClass {
        if self.gamma >= 2.0 {
            PotentialClass::Hard
        } else {
            PotentialClass::Soft
        }
    }

    /// `|log Lambda| q_i^2 q_j^2 / (8 pi eps0^2 m_i^2)`: the part of `c_ji`
    /// that does not depend on the state.
    pub fn coupling_prefactor(&self, partner: &SpeciesParams, own: &SpeciesParams) -> f64 {
        let qi2 = own.charge * own.charge;
        let qj2 = partner.charge * partner.charge;
        self.coulomb_log * qi2 * qj2
            / (8.0 * std::f64::consts::PI * self.vacuum_permittivity * self.vacuum_permittivity * own.mass * own.mass)
    }
}

/// Density, drift velocity and temperature used to seed a Maxwellian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellianParams {
    pub density: f64,
    pub velocity: Vec3,
    pub temperature: f64,
}

impl MaxwellianParams {
    pub fn new(density: f64, velocity: Vec3, temperature: f64) -> Self {
        Self {
            density,
            velocity,
            temperature,
        }
    }
}

/// Per-species distribution values on the grid at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct PlasmaState {
    pub grid: VelocityGrid,
    pub species: Vec<SpeciesParams>,
    pub distributions: Vec<Vec<f64>>,
    pub time: f64,
}

impl PlasmaState {
    /// Builds a state from explicit fields, checking shape, finiteness,
    /// nonnegativity and positive mass.
    pub fn new(
        grid: VelocityGrid,
        species: Vec<SpeciesParams>,
        distributions: Vec<Vec<f64>>,
        time: f64,
    ) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::param("species", "at least one species is required"));
        }
        if species.len() != distributions.len() {
            return Err(Error::InvalidField(format!(
                "{} species but {} distribution fields",
                species.len(),
                distributions.len()
            )));
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::param("time", "must be nonnegative"));
        }
        let state = Self {
            grid,
            species,
            distributions,
            time,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, f) in self.distributions.iter().enumerate() {
            let n = self.grid.integrate(f)?;
            if let Some(pos) = f.iter().position(|&x| x < 0.0) {
                return Err(Error::InvalidField(format!(
                    "species {i} has negative value {} at cell {pos}",
                    f[pos]
                )));
            }
            if n <= 0.0 {
                return Err(Error::DegenerateMoments {
                    species: i,
                    reason: "total mass is zero".into(),
                });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.species.iter().map(|s| s.mass).collect()
    }

    /// Moments of every species.
    pub fn moments(&self) -> Result<Vec<SpeciesMoments>> {
        self.distributions
            .iter()
            .zip(&self.species)
            .enumerate()
            .map(|(i, (f, sp))| {
                moments::compute_moments(f, sp.mass, &self.grid).map_err(|e| match e {
                    Error::DegenerateMoments { reason, .. } => Error::DegenerateMoments { species: i, reason },
                    other => other,
                })
            })
            .collect()
    }
}

/// Samples one Maxwellian per species at the cell centres, at `t = 0`.
///
/// A drift velocity outside the box is accepted but logged, since the
/// distribution tails will be clipped.
pub fn init_maxwellian_state(
    grid: &VelocityGrid,
    species: &[SpeciesParams],
    params: &[MaxwellianParams],
) -> Result<PlasmaState> {
    if species.len() != params.len() {
        return Err(Error::param(
            "species",
            format!("{} species but {} parameter sets", species.len(), params.len()),
        ));
    }
    let mut fields = Vec::with_capacity(species.len());
    for (sp, p) in species.iter().zip(params) {
        if !(p.density.is_finite() && p.density > 0.0) {
            return Err(Error::param(format!("species.{}.n", sp.label), "must be positive"));
        }
        if !(p.temperature.is_finite() && p.temperature > 0.0) {
            return Err(Error::param(format!("species.{}.T", sp.label), "must be positive"));
        }
        if !vec3::is_finite(p.velocity) {
            return Err(Error::param(format!("species.{}.u", sp.label), "must be finite"));
        }
        if p.velocity.iter().any(|x| x.abs() > grid.extent()) {
            log::warn!(
                "species {}: drift velocity {:?} lies outside the velocity box [-{L}, {L}]^3; tails will be clipped",
                sp.label,
                p.velocity,
                L = grid.extent()
            );
        }
        fields.push(moments::maxwellian_field(
            p.density,
            sp.mass,
            p.velocity,
            p.temperature,
            grid,
        )?);
    }
    PlasmaState::new(grid.clone(), species.to_vec(), fields, 0.0)
}

/// Heuristic half-width that keeps Maxwellian tails below roughly `e^-18`.
pub fn recommended_extent(species: &[SpeciesParams], params: &[MaxwellianParams]) -> f64 {
    let thermal = species
        .iter()
        .zip(params)
        .map(|(s, p)| (p.temperature / s.mass).sqrt())
        .fold(0.0, f64::max);
    let drift = params
        .iter()
        .map(|p| p.velocity.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .fold(0.0, f64::max);
    6.0 * thermal + drift
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proton() -> SpeciesParams {
        SpeciesParams::new("p", 1.0, 1.0).unwrap()
    }

    #[test]
    fn species_validation() {
        assert!(SpeciesParams::new("x", 0.0, 1.0).is_err());
        assert!(SpeciesParams::new("x", 1.0, 0.0).is_err());
        assert!(SpeciesParams::new("e", 1.0, -1.0).is_ok());
    }

    #[test]
    fn potential_class_threshold() {
        assert_eq!(
            PhysicalConstants::new(1.0, 1.0, 2.0).unwrap().potential_class(),
            PotentialClass::Hard
        );
        assert_eq!(
            PhysicalConstants::new(1.0, 1.0, -1.0).unwrap().potential_class(),
            PotentialClass::Soft
        );
        assert!(PhysicalConstants::new(0.0, 1.0, 0.0).is_err());
        assert!(PhysicalConstants::new(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn maxwellian_state_recovers_moments() {
        let grid = VelocityGrid::new(32, 8.0).unwrap();
        let state = init_maxwellian_state(&grid, &[proton()], &[MaxwellianParams::new(1.0, [0.0; 3], 1.0)]).unwrap();
        assert_eq!(state.time, 0.0);
        let m = &state.moments().unwrap()[0];
        assert!((m.number_density - 1.0).abs() < 1e-6);
        assert!(vec3::norm(m.bulk_velocity) < 1e-6);
        assert!((m.temperature - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identical_species_give_identical_fields() {
        let grid = VelocityGrid::new(16, 6.0).unwrap();
        let p = MaxwellianParams::new(0.7, [0.3, -0.2, 0.1], 1.3);
        let state = init_maxwellian_state(&grid, &[proton(), proton()], &[p, p]).unwrap();
        assert_eq!(state.distributions[0], state.distributions[1]);
    }

    #[test]
    fn rejects_zero_density_or_temperature() {
        let grid = VelocityGrid::new(8, 4.0).unwrap();
        assert!(init_maxwellian_state(&grid, &[proton()], &[MaxwellianParams::new(0.0, [0.0; 3], 1.0)]).is_err());
        assert!(init_maxwellian_state(&grid, &[proton()], &[MaxwellianParams::new(1.0, [0.0; 3], 0.0)]).is_err());
    }

    #[test]
    fn state_rejects_negative_and_empty_fields() {
        let grid = VelocityGrid::new(8, 4.0).unwrap();
        let mut f = vec![1.0; grid.total_cells()];
        f[3] = -1.0;
        assert!(PlasmaState::new(grid.clone(), vec![proton()], vec![f], 0.0).is_err());
        let z = vec![0.0; grid.total_cells()];
        assert!(PlasmaState::new(grid, vec![proton()], vec![z], 0.0).is_err());
    }
}
