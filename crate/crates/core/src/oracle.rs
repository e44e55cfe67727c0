//! Closed moment equations used as an independent reference for the kinetic
//! solver.
//!
//! Each pair operator `c div(grad f + m (v - u) / T f)` is linear in `f` and
//! its coefficients depend on `f` only through moments, so integrating it
//! against `v` and `|v|^2` gives an exact closed system for the bulk
//! velocities and temperatures:
//!
//! ```text
//! du_i/dt = sum_j c_ji (m_i / T_ji) (u_ji - u_i)
//! dE_i/dt = sum_j 2 c_ji [3 n_i - (m_i / T_ji) (E_i - n_i u_ji . u_i)]
//! ```
//!
//! with `E_i = 3 n_i T_i / m_i + n_i |u_i|^2` and `n_i` constant. Unlike the
//! kinetic solver it involves no velocity grid, so it carries no
//! discretisation error beyond the time integrator.

use crate::coefficients::{compute_coefficients, CoefficientSet};
use crate::error::{Error, Result};
use crate::model::{PhysicalConstants, SpeciesParams};
use crate::moments::{equilibrium_parameters, SpeciesMoments};
use crate::vec3::{self, Vec3};

/// Densities, velocities and temperatures of all species at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub time: f64,
    pub species: Vec<SpeciesMoments>,
}

impl MomentState {
    pub fn new(time: f64, species: Vec<SpeciesMoments>) -> Self {
        Self { time, species }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, m) in self.species.iter().enumerate() {
            if !(m.number_density > 0.0 && m.number_density.is_finite()) {
                return Err(Error::DegenerateMoments {
                    species: i,
                    reason: format!("density {}", m.number_density),
                });
            }
            if !(m.temperature > 0.0 && m.temperature.is_finite()) {
                return Err(Error::DegenerateMoments {
                    species: i,
                    reason: format!("temperature {} at t = {}", m.temperature, self.time),
                });
            }
            if !vec3::is_finite(m.bulk_velocity) {
                return Err(Error::DegenerateMoments {
                    species: i,
                    reason: "non-finite velocity".into(),
                });
            }
        }
        Ok(())
    }

    /// Total momentum `sum rho_i u_i` and total energy
    /// `sum (3 n_i T_i + rho_i |u_i|^2)`.
    pub fn totals(&self) -> (Vec3, f64) {
        let mut p = vec3::ZERO;
        let mut e = 0.0;
        for m in &self.species {
            p = vec3::add(p, vec3::scale(m.bulk_velocity, m.mass_density));
            e += 3.0 * m.number_density * m.temperature + m.mass_density * vec3::norm2(m.bulk_velocity);
        }
        (p, e)
    }
}

/// Time derivative of the moment system; `n_i` is constant.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentDerivative {
    pub velocity: Vec<Vec3>,
    /// Of the raw second moment `E_i = int f_i |v|^2`.
    pub second_moment: Vec<f64>,
    pub temperature: Vec<f64>,
}

/// Momentum and energy gained by species `i` from partner `j`, stored at
/// `j * s + i`: `m_i n_i du_i/dt|_j` and `m_i dE_i/dt|_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairExchange {
    pub momentum: Vec<Vec3>,
    pub energy: Vec<f64>,
}

pub fn pair_exchange(state: &MomentState, species: &[SpeciesParams], coeffs: &CoefficientSet) -> PairExchange {
    let s = species.len();
    let mut momentum = vec![vec3::ZERO; s * s];
    let mut energy = vec![0.0; s * s];
    for i in 0..s {
        let mi = species[i].mass;
        let mo = &state.species[i];
        let n = mo.number_density;
        let u = mo.bulk_velocity;
        let e = mo.second_moment(mi);
        for j in 0..s {
            let (c, uji, tji) = (coeffs.c(j, i), coeffs.u(j, i), coeffs.t(j, i));
            let a = mi / tji;
            momentum[j * s + i] = vec3::scale(vec3::sub(uji, u), mi * n * c * a);
            energy[j * s + i] = mi * 2.0 * c * (3.0 * n - a * (e - n * vec3::dot(uji, u)));
        }
    }
    PairExchange { momentum, energy }
}

pub fn moment_derivative(
    state: &MomentState,
    species: &[SpeciesParams],
    constants: &PhysicalConstants,
) -> Result<MomentDerivative> {
    state.validate()?;
    let coeffs = compute_coefficients(&state.species, species, constants)?;
    Ok(moment_derivative_with(state, species, &coeffs))
}

/// Moment derivative for given coefficients.
pub fn moment_derivative_with(
    state: &MomentState,
    species: &[SpeciesParams],
    coeffs: &CoefficientSet,
) -> MomentDerivative {
    let s = species.len();
    let ex = pair_exchange(state, species, coeffs);
    let mut velocity = Vec::with_capacity(s);
    let mut second_moment = Vec::with_capacity(s);
    let mut temperature = Vec::with_capacity(s);
    for i in 0..s {
        let mi = species[i].mass;
        let mo = &state.species[i];
        let n = mo.number_density;
        let mut p = vec3::ZERO;
        let mut e = 0.0;
        for j in 0..s {
            p = vec3::add(p, ex.momentum[j * s + i]);
            e += ex.energy[j * s + i];
        }
        let du = vec3::scale(p, 1.0 / (mi * n));
        let de = e / mi;
        // T = m (E/n - |u|^2) / 3
        let dt = mi * (de / n - 2.0 * vec3::dot(mo.bulk_velocity, du)) / 3.0;
        velocity.push(du);
        second_moment.push(de);
        temperature.push(dt);
    }
    MomentDerivative {
        velocity,
        second_moment,
        temperature,
    }
}

fn pack(state: &MomentState, species: &[SpeciesParams]) -> Vec<f64> {
    let mut y = Vec::with_capacity(4 * species.len());
    for (m, sp) in state.species.iter().zip(species) {
        y.extend(m.bulk_velocity);
        y.push(m.second_moment(sp.mass));
    }
    y
}

fn unpack(y: &[f64], template: &MomentState, species: &[SpeciesParams], time: f64) -> MomentState {
    let moments = template
        .species
        .iter()
        .zip(species)
        .enumerate()
        .map(|(i, (m, sp))| {
            let n = m.number_density;
            let u = [y[4 * i], y[4 * i + 1], y[4 * i + 2]];
            let t = sp.mass * (y[4 * i + 3] / n - vec3::norm2(u)) / 3.0;
            SpeciesMoments::new(sp.mass, n, u, t)
        })
        .collect();
    MomentState::new(time, moments)
}

fn rhs(
    y: &[f64],
    template: &MomentState,
    species: &[SpeciesParams],
    constants: &PhysicalConstants,
    time: f64,
) -> Result<Vec<f64>> {
    let st = unpack(y, template, species, time);
    let d = moment_derivative(&st, species, constants)?;
    let mut out = Vec::with_capacity(y.len());
    for i in 0..species.len() {
        out.extend(d.velocity[i]);
        out.push(d.second_moment[i]);
    }
    Ok(out)
}

/// Classical RK4 on the moment system, sampled every `sample_every` and at
/// `t_end`. Time steps are shortened to land on sample times.
pub fn integrate_moments(
    initial: &MomentState,
    species: &[SpeciesParams],
    constants: &PhysicalConstants,
    t_end: f64,
    dt: f64,
    sample_every: f64,
) -> Result<Vec<MomentState>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "must be positive"));
    }
    if !(sample_every > 0.0 && sample_every.is_finite()) {
        return Err(Error::param("sample_every", "must be positive"));
    }
    initial.validate()?;
    let mut out = vec![initial.clone()];
    let mut y = pack(initial, species);
    let mut t = initial.time;
    let tiny = 1e-12 * sample_every.min(t_end.max(f64::MIN_POSITIVE));
    let mut next = t + sample_every;
    while t_end - t > tiny {
        let mut h = dt.min(next - t).min(t_end - t);
        if next - t - h < tiny {
            h = next - t;
        }
        let h = h.min(t_end - t);
        let k1 = rhs(&y, initial, species, constants, t)?;
        let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = rhs(&y2, initial, species, constants, t + 0.5 * h)?;
        let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = rhs(&y3, initial, species, constants, t + 0.5 * h)?;
        let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = rhs(&y4, initial, species, constants, t + h)?;
        for (k, v) in y.iter_mut().enumerate() {
            *v += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        t += h;
        let at_end = t_end - t <= tiny;
        if at_end {
            t = t_end;
        }
        let sampled = next - t <= tiny;
        if sampled {
            while next - t <= tiny {
                next += sample_every;
            }
        }
        if sampled || at_end {
            let st = unpack(&y, initial, species, t);
            st.validate()?;
            out.push(st);
        }
    }
    Ok(out)
}

/// Sup-norm deviations of one species, each relative to the scale of that
/// quantity along the reference trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesDeviation {
    pub density: f64,
    pub velocity: [f64; 3],
    pub temperature: f64,
}

impl SpeciesDeviation {
    pub fn max(&self) -> f64 {
        self.velocity
            .iter()
            .fold(self.density.max(self.temperature), |m, &x| m.max(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDeviation {
    pub species: Vec<SpeciesDeviation>,
}

impl TrajectoryDeviation {
    pub fn max(&self) -> f64 {
        self.species.iter().map(|d| d.max()).fold(0.0, f64::max)
    }
}

fn interpolate(series: &[MomentState], t: f64) -> Option<MomentState> {
    let pos = series.partition_point(|s| s.time < t);
    if pos < series.len() && (series[pos].time - t).abs() <= 1e-12 * t.abs().max(1.0) {
        return Some(series[pos].clone());
    }
    if pos == 0 || pos >= series.len() {
        return None;
    }
    let (a, b) = (&series[pos - 1], &series[pos]);
    let w = (t - a.time) / (b.time - a.time);
    let lerp = |x: f64, y: f64| x + w * (y - x);
    let species = a
        .species
        .iter()
        .zip(&b.species)
        .map(|(p, q)| {
            let n = lerp(p.number_density, q.number_density);
            SpeciesMoments {
                number_density: n,
                mass_density: lerp(p.mass_density, q.mass_density),
                bulk_velocity: [
                    lerp(p.bulk_velocity[0], q.bulk_velocity[0]),
                    lerp(p.bulk_velocity[1], q.bulk_velocity[1]),
                    lerp(p.bulk_velocity[2], q.bulk_velocity[2]),
                ],
                temperature: lerp(p.temperature, q.temperature),
            }
        })
        .collect();
    Some(MomentState::new(t, species))
}

/// Compares `candidate` against `reference` at the candidate's sample
/// times, interpolating the reference linearly. Density and temperature
/// deviations are relative to their largest value along the reference;
/// velocity components share the scale `max_t |u_i|_inf`, or the thermal
/// speed `sqrt(T/m)` when the species is at rest throughout.
pub fn compare_trajectories(candidate: &[MomentState], reference: &[MomentState]) -> Result<TrajectoryDeviation> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(Error::Comparison("empty trajectory".into()));
    }
    let s = reference[0].species.len();
    if candidate.iter().chain(reference).any(|m| m.species.len() != s) {
        return Err(Error::Comparison("species counts differ".into()));
    }
    let mut dev = vec![
        SpeciesDeviation {
            density: 0.0,
            velocity: [0.0; 3],
            temperature: 0.0
        };
        s
    ];
    let mut scales = Vec::with_capacity(s);
    for i in 0..s {
        let n = reference
            .iter()
            .map(|m| m.species[i].number_density.abs())
            .fold(0.0, f64::max);
        let t = reference
            .iter()
            .map(|m| m.species[i].temperature.abs())
            .fold(0.0, f64::max);
        let mut u = reference
            .iter()
            .flat_map(|m| m.species[i].bulk_velocity)
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        if u == 0.0 {
            let m = reference[0].species[i].mass_density / reference[0].species[i].number_density;
            u = (t / m).sqrt();
        }
        scales.push((n, u, t));
    }
    let mut overlap = 0;
    for c in candidate {
        let Some(r) = interpolate(reference, c.time) else {
            continue;
        };
        overlap += 1;
        for i in 0..s {
            let (sn, su, st) = scales[i];
            let (a, b) = (&c.species[i], &r.species[i]);
            let d = &mut dev[i];
            d.density = d.density.max((a.number_density - b.number_density).abs() / sn);
            d.temperature = d.temperature.max((a.temperature - b.temperature).abs() / st);
            for k in 0..3 {
                d.velocity[k] = d.velocity[k].max((a.bulk_velocity[k] - b.bulk_velocity[k]).abs() / su);
            }
        }
    }
    if overlap == 0 {
        return Err(Error::Comparison("time ranges do not overlap".into()));
    }
    Ok(TrajectoryDeviation { species: dev })
}

/// Distance of a moment state from the global equilibrium: velocity gaps in
/// units of the equilibrium thermal speed of the lightest species plus
/// temperature gaps relative to the equilibrium temperature.
pub fn equilibrium_gap(state: &MomentState) -> f64 {
    let (u_star, t_star) = equilibrium_parameters(&state.species);
    let m_min = state
        .species
        .iter()
        .map(|m| m.mass_density / m.number_density)
        .fold(f64::INFINITY, f64::min);
    let vth = (t_star / m_min).sqrt();
    state
        .species
        .iter()
        .map(|m| vec3::norm(vec3::sub(m.bulk_velocity, u_star)) / vth + (m.temperature - t_star).abs() / t_star)
        .fold(0.0, f64::max)
}

/// Slowest relaxation rate of the moment system, fitted from the decay of
/// [`equilibrium_gap`] between `1e-4` and `1e-6` of its initial value. The
/// horizon is extended until the gap falls below the lower level.
pub fn relaxation_time(initial: &MomentState, species: &[SpeciesParams], constants: &PhysicalConstants) -> Result<f64> {
    let g0 = equilibrium_gap(initial);
    if g0 == 0.0 {
        return Err(Error::Comparison("initial state is already at equilibrium".into()));
    }
    let coeffs = compute_coefficients(&initial.species, species, constants)?;
    let fastest = (0..species.len())
        .map(|i| {
            (0..species.len())
                .map(|j| 2.0 * coeffs.c(j, i) * species[i].mass / coeffs.t(j, i))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let dt = 0.02 / fastest;
    let mut horizon = 20.0 / fastest;
    for _ in 0..12 {
        let traj = integrate_moments(initial, species, constants, horizon, dt, dt)?;
        let gaps: Vec<(f64, f64)> = traj.iter().map(|m| (m.time, equilibrium_gap(m) / g0)).collect();
        let cross = |level: f64| gaps.iter().position(|&(_, g)| g < level);
        if let (Some(a), Some(b)) = (cross(1e-4), cross(1e-6)) {
            let (ta, ga) = gaps[a];
            let (tb, gb) = gaps[b];
            if tb > ta {
                return Ok((tb - ta) / (ga / gb).ln());
            }
        }
        horizon *= 2.0;
    }
    Err(Error::Comparison(
        "moment system did not relax within the search horizon".into(),
    ))
}
