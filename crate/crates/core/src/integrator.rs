//! Time stepping: classical RK4 with coefficients recomputed per stage, and a
//! semi-implicit scheme with frozen coefficients and backward-Euler line
//! solves.

use rayon::prelude::*;

use crate::coefficients::{compute_coefficients, compute_truncated_coefficients, CoefficientSet, TruncationReading};
use crate::collision::{AssembledOperator, DriftParams, FluxScheme, SpeciesOperator};
use crate::error::{Error, Result};
use crate::grid::compensated_sum;
use crate::model::{PhysicalConstants, PlasmaState};

/// Negative entries below `-NEGATIVE_TOLERANCE * max f` abort the step.
pub const NEGATIVE_TOLERANCE: f64 = 1e-13;
/// Largest relative change of a species' mass accepted in one step.
pub const MASS_DRIFT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    ExplicitRk4,
    #[default]
    SemiImplicitSplit,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ExplicitRk4 => "explicit-rk4",
            Scheme::SemiImplicitSplit => "semi-implicit-split",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "explicit-rk4" => Some(Scheme::ExplicitRk4),
            "semi-implicit-split" => Some(Scheme::SemiImplicitSplit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepPolicy {
    pub scheme: Scheme,
    pub dt: TimeStep,
    pub safety: f64,
    pub t_end: f64,
    pub output_every: f64,
    pub flux: FluxScheme,
}

impl StepPolicy {
    pub fn new(scheme: Scheme, dt: TimeStep, t_end: f64, output_every: f64) -> Result<Self> {
        let policy = Self {
            scheme,
            dt,
            safety: 0.8,
            t_end,
            output_every,
            flux: FluxScheme::default(),
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn with_safety(mut self, safety: f64) -> Result<Self> {
        self.safety = safety;
        self.validate()?;
        Ok(self)
    }

    pub fn with_flux(mut self, flux: FluxScheme) -> Self {
        self.flux = flux;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::param("run.dt", "must be positive or \"auto\""));
            }
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::param("run.safety", "must lie in (0, 1]"));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::param("run.t_end", "must be nonnegative"));
        }
        if !(self.output_every.is_finite() && self.output_every > 0.0) {
            return Err(Error::param("run.output_every", "must be positive"));
        }
        Ok(())
    }
}

/// Source of the coefficients used to evaluate the collision operator.
pub trait CoefficientProvider: Sync {
    fn coefficients(&self, state: &PlasmaState) -> Result<CoefficientSet>;
}

/// Coefficients computed from the current moments.
#[derive(Debug, Clone)]
pub struct SelfConsistent {
    pub constants: PhysicalConstants,
}

impl CoefficientProvider for SelfConsistent {
    fn coefficients(&self, state: &PlasmaState) -> Result<CoefficientSet> {
        compute_coefficients(&state.moments()?, &state.species, &self.constants)
    }
}

/// Regularised coefficients with truncation level `epsilon`.
#[derive(Debug, Clone)]
pub struct Truncated {
    pub constants: PhysicalConstants,
    pub epsilon: f64,
    pub reading: TruncationReading,
    pub initial_densities: Vec<f64>,
}

impl Truncated {
    pub fn new(
        constants: PhysicalConstants,
        epsilon: f64,
        reading: TruncationReading,
        initial: &PlasmaState,
    ) -> Result<Self> {
        let initial_densities = initial
            .distributions
            .iter()
            .map(|f| initial.grid.quadrature(f))
            .collect();
        Ok(Self {
            constants,
            epsilon,
            reading,
            initial_densities,
        })
    }
}

impl CoefficientProvider for Truncated {
    fn coefficients(&self, state: &PlasmaState) -> Result<CoefficientSet> {
        compute_truncated_coefficients(
            &state.distributions,
            &state.species,
            &self.initial_densities,
            &self.constants,
            self.epsilon,
            self.reading,
            &state.grid,
        )
    }
}

/// The same coefficients at every evaluation.
#[derive(Debug, Clone)]
pub struct Frozen(pub CoefficientSet);

impl CoefficientProvider for Frozen {
    fn coefficients(&self, _state: &PlasmaState) -> Result<CoefficientSet> {
        Ok(self.0.clone())
    }
}

/// Largest step allowed by the stability and accuracy heuristics; infinite
/// when every coefficient vanishes.
pub fn stable_dt(state: &PlasmaState, coeffs: &CoefficientSet, policy: &StepPolicy) -> f64 {
    let s = state.num_species();
    let grid = &state.grid;
    match policy.scheme {
        Scheme::ExplicitRk4 => {
            // The outflow bound covers both the diffusive limit h^2 / (6 c)
            // and the drift-dominated tail cells.
            let max_outflow = (0..s)
                .map(|i| {
                    let pairs: Vec<DriftParams> = (0..s)
                        .map(|j| DriftParams {
                            rate: coeffs.c(j, i),
                            velocity: coeffs.u(j, i),
                            temperature: coeffs.t(j, i),
                        })
                        .collect();
                    SpeciesOperator::from_pairs(state.species[i].mass, &pairs, grid).max_outflow_rate()
                })
                .fold(0.0, f64::max);
            if max_outflow > 0.0 {
                policy.safety / max_outflow
            } else {
                f64::INFINITY
            }
        }
        Scheme::SemiImplicitSplit => {
            let max_rate = (0..s)
                .map(|i| {
                    let m = state.species[i].mass;
                    (0..s).map(|j| 2.0 * coeffs.c(j, i) * m / coeffs.t(j, i)).sum::<f64>()
                })
                .fold(0.0, f64::max);
            if max_rate > 0.0 {
                policy.output_every.min(policy.safety / max_rate)
            } else {
                policy.output_every
            }
        }
    }
}

/// Bookkeeping of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// Entries zeroed by the clamp, summed over species.
    pub clamped_cells: usize,
    /// Smallest mixture temperature over every coefficient evaluation.
    pub min_pair_temperature: f64,
    /// Pairs whose drift matching fell back to the plain parameters.
    pub unmatched_pairs: usize,
}

fn stage_state(base: &PlasmaState, fields: Vec<Vec<f64>>, time: f64) -> PlasmaState {
    PlasmaState {
        grid: base.grid.clone(),
        species: base.species.clone(),
        distributions: fields,
        time,
    }
}

/// Zeros tiny negative entries and rescales so the entry sum is unchanged.
/// Returns the number of zeroed entries.
pub fn clamp_negatives(field: &mut [f64], species: usize, time: f64) -> Result<usize> {
    let maxf = field.iter().fold(0.0f64, |m, &x| m.max(x));
    let mut count = 0;
    let mut worst = 0.0f64;
    for &x in field.iter() {
        if x < 0.0 {
            count += 1;
            worst = worst.min(x);
        }
    }
    if count == 0 {
        return Ok(0);
    }
    if worst < -NEGATIVE_TOLERANCE * maxf {
        return Err(Error::Instability {
            time,
            reason: format!(
                "species {species}: negative value {worst:e} exceeds {NEGATIVE_TOLERANCE:e} of max {maxf:e}"
            ),
        });
    }
    let before = compensated_sum(field.iter().copied());
    field.iter_mut().for_each(|x| *x = x.max(0.0));
    let after = compensated_sum(field.iter().copied());
    if after > 0.0 {
        let scale = before / after;
        field.iter_mut().for_each(|x| *x *= scale);
    }
    log::debug!("t = {time}: zeroed {count} negative entries of species {species}");
    Ok(count)
}

fn check_finite_and_mass(old: &PlasmaState, new: &[Vec<f64>], time: f64) -> Result<()> {
    for (i, (f0, f1)) in old.distributions.iter().zip(new).enumerate() {
        if f1.iter().any(|x| !x.is_finite()) {
            return Err(Error::Instability {
                time,
                reason: format!("species {i}: non-finite value"),
            });
        }
        let m0 = compensated_sum(f0.iter().copied());
        let m1 = compensated_sum(f1.iter().copied());
        let drift = (m1 - m0).abs() / m0.abs();
        if drift > MASS_DRIFT_TOLERANCE {
            return Err(Error::Instability {
                time,
                reason: format!("species {i}: relative mass drift {drift:e} in one step"),
            });
        }
    }
    Ok(())
}

fn axpy(base: &[Vec<f64>], rate: &[Vec<f64>], a: f64) -> Vec<Vec<f64>> {
    base.par_iter()
        .zip(rate.par_iter())
        .map(|(f, r)| f.iter().zip(r).map(|(x, y)| x + a * y).collect())
        .collect()
}

/// Advances `state` by `dt`.
pub fn step(
    state: &PlasmaState,
    provider: &dyn CoefficientProvider,
    scheme: Scheme,
    flux: FluxScheme,
    dt: f64,
) -> Result<(PlasmaState, StepReport)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    let grid = &state.grid;
    let t_new = state.time + dt;
    let mut min_t = f64::INFINITY;
    let mut unmatched = 0;
    let mut fields = match scheme {
        Scheme::ExplicitRk4 => {
            let mut eval = |st: &PlasmaState| -> Result<Vec<Vec<f64>>> {
                let co = provider.coefficients(st)?;
                min_t = min_t.min(co.min_temperature());
                let op = AssembledOperator::new(st, &co, flux)?;
                unmatched += op.unmatched_pairs;
                Ok(op.apply(&st.distributions, grid))
            };
            let f0 = &state.distributions;
            let k1 = eval(state)?;
            let k2 = eval(&stage_state(state, axpy(f0, &k1, 0.5 * dt), state.time + 0.5 * dt))?;
            let k3 = eval(&stage_state(state, axpy(f0, &k2, 0.5 * dt), state.time + 0.5 * dt))?;
            let k4 = eval(&stage_state(state, axpy(f0, &k3, dt), t_new))?;
            (0..state.num_species())
                .into_par_iter()
                .map(|i| {
                    f0[i]
                        .iter()
                        .enumerate()
                        .map(|(c, &x)| x + dt / 6.0 * (k1[i][c] + 2.0 * k2[i][c] + 2.0 * k3[i][c] + k4[i][c]))
                        .collect()
                })
                .collect::<Vec<Vec<f64>>>()
        }
        Scheme::SemiImplicitSplit => {
            let co = provider.coefficients(state)?;
            min_t = min_t.min(co.min_temperature());
            let op = AssembledOperator::new(state, &co, flux)?;
            unmatched += op.unmatched_pairs;
            let s = state.num_species();
            (0..s)
                .into_par_iter()
                .map(|i| {
                    let mut f = state.distributions[i].clone();
                    let mass = state.species[i].mass;
                    for j in 0..s {
                        let p = op.params(j, i);
                        if p.rate == 0.0 {
                            continue;
                        }
                        SpeciesOperator::from_pairs(mass, &[p], grid).implicit_sweeps(&mut f, dt, grid);
                    }
                    f
                })
                .collect()
        }
    };
    let mut clamped = 0;
    for (i, f) in fields.iter_mut().enumerate() {
        clamped += clamp_negatives(f, i, t_new)?;
    }
    check_finite_and_mass(state, &fields, t_new)?;
    let report = StepReport {
        dt,
        clamped_cells: clamped,
        min_pair_temperature: min_t,
        unmatched_pairs: unmatched,
    };
    Ok((stage_state(state, fields, t_new), report))
}

/// What the run loop reports to its observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunEvent {
    pub step: usize,
    /// `None` for the initial state.
    pub report: Option<StepReport>,
    /// True when the state sits on the output cadence or at `t_end`.
    pub output: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub clamped_cells: usize,
    /// `steps * species * cells`, the denominator for the clamp fraction.
    pub cells_touched: usize,
    pub min_pair_temperature: f64,
    pub unmatched_pairs: usize,
}

/// Steps from `state.time` to `policy.t_end`, landing exactly on every
/// output time. The observer sees the initial state and every step.
pub fn run(
    mut state: PlasmaState,
    provider: &dyn CoefficientProvider,
    policy: &StepPolicy,
    mut observer: impl FnMut(&PlasmaState, &RunEvent) -> Result<()>,
) -> Result<(PlasmaState, RunSummary)> {
    policy.validate()?;
    state.validate()?;
    let mut summary = RunSummary {
        steps: 0,
        final_time: state.time,
        clamped_cells: 0,
        cells_touched: 0,
        min_pair_temperature: f64::INFINITY,
        unmatched_pairs: 0,
    };
    observer(
        &state,
        &RunEvent {
            step: 0,
            report: None,
            output: true,
        },
    )?;
    let cells = state.grid.total_cells() * state.num_species();
    let tiny = 1e-12 * policy.output_every.min(policy.t_end.max(f64::MIN_POSITIVE));
    let mut next_output = state.time + policy.output_every;
    let mut warned = false;
    while policy.t_end - state.time > tiny {
        let co = provider.coefficients(&state)?;
        let limit = stable_dt(&state, &co, policy);
        let dt_nominal = match policy.dt {
            TimeStep::Auto => limit,
            TimeStep::Fixed(dt) => {
                if policy.scheme == Scheme::ExplicitRk4 && dt > limit && !warned {
                    log::warn!("fixed dt {dt:e} exceeds the explicit stability limit {limit:e}");
                    warned = true;
                }
                dt
            }
        };
        let mut dt = dt_nominal.min(next_output - state.time).min(policy.t_end - state.time);
        // Avoid a sliver step just before an output time.
        if next_output - state.time - dt < tiny {
            dt = next_output - state.time;
        }
        let dt = dt.min(policy.t_end - state.time);
        let (new_state, report) = step(&state, provider, policy.scheme, policy.flux, dt)?;
        state = new_state;
        summary.steps += 1;
        summary.clamped_cells += report.clamped_cells;
        summary.cells_touched += cells;
        summary.min_pair_temperature = summary.min_pair_temperature.min(report.min_pair_temperature);
        summary.unmatched_pairs += report.unmatched_pairs;
        let at_end = policy.t_end - state.time <= tiny;
        let mut output = at_end;
        if next_output - state.time <= tiny {
            output = true;
            while next_output - state.time <= tiny {
                next_output += policy.output_every;
            }
        }
        if at_end {
            state.time = policy.t_end;
        }
        observer(
            &state,
            &RunEvent {
                step: summary.steps,
                report: Some(report),
                output,
            },
        )?;
    }
    summary.final_time = state.time;
    Ok((state, summary))
}
