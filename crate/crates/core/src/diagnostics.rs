//! Conserved totals, entropy, entropy production, distance to equilibrium
//! and the temperature floor.

use crate::coefficients::CoefficientSet;
use crate::collision::{AssembledOperator, FluxScheme};
use crate::error::{Error, Result};
use crate::grid::{compensated_sum, CompensatedSum};
use crate::integrator::CoefficientProvider;
use crate::model::PlasmaState;
use crate::moments::{global_equilibrium, GlobalEquilibrium, SpeciesMoments};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct ConservedTotals {
    pub masses: Vec<f64>,
    /// `sum_i m_i int f_i v`.
    pub momentum: Vec3,
    /// `sum_i m_i int f_i |v|^2`.
    pub energy: f64,
}

pub fn conserved_totals(state: &PlasmaState) -> ConservedTotals {
    let g = &state.grid;
    let mut masses = Vec::with_capacity(state.num_species());
    let mut p = [CompensatedSum::default(); 3];
    let mut e = CompensatedSum::default();
    for (f, sp) in state.distributions.iter().zip(&state.species) {
        masses.push(g.quadrature(f));
        for (d, acc) in p.iter_mut().enumerate() {
            acc.add(sp.mass * g.quadrature_weighted(f, |v| v[d]));
        }
        e.add(sp.mass * g.quadrature_weighted(f, vec3::norm2));
    }
    ConservedTotals {
        masses,
        momentum: [p[0].value(), p[1].value(), p[2].value()],
        energy: e.value(),
    }
}

/// `sum_i int f_i log f_i` with `0 log 0 = 0`.
pub fn entropy(state: &PlasmaState) -> f64 {
    let vol = state.grid.cell_volume();
    let mut acc = CompensatedSum::default();
    for f in &state.distributions {
        acc.add(compensated_sum(f.iter().map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 })) * vol);
    }
    acc.value()
}

/// Csiszar relative entropy `sum_i int [f log(f/M) - f + M]`; requires
/// strictly positive reference fields.
pub fn relative_entropy(state: &PlasmaState, reference: &[Vec<f64>]) -> Result<f64> {
    if reference.len() != state.num_species() {
        return Err(Error::InvalidField(format!(
            "{} reference fields for {} species",
            reference.len(),
            state.num_species()
        )));
    }
    let vol = state.grid.cell_volume();
    let mut acc = CompensatedSum::default();
    for (i, (f, m)) in state.distributions.iter().zip(reference).enumerate() {
        if m.len() != f.len() {
            return Err(Error::InvalidField(format!("reference field {i} has the wrong length")));
        }
        if let Some(pos) = m.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::InvalidField(format!(
                "reference field {i} is not positive at cell {pos}"
            )));
        }
        let sum = compensated_sum(f.iter().zip(m).map(|(&x, &y)| {
            let log_term = if x > 0.0 { x * (x / y).ln() } else { 0.0 };
            (log_term - x + y).max(0.0)
        }));
        acc.add(sum * vol);
    }
    Ok(acc.value())
}

/// Running minimum of the mixture temperatures plus the analytic floor
/// candidate, which is reported but never asserted.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureFloorMonitor {
    pub minimum: f64,
    pub analytic_floor: Option<f64>,
}

impl Default for TemperatureFloorMonitor {
    fn default() -> Self {
        Self {
            minimum: f64::INFINITY,
            analytic_floor: None,
        }
    }
}

impl TemperatureFloorMonitor {
    pub fn record(&mut self, coeffs: &CoefficientSet) {
        self.record_value(coeffs.min_temperature());
    }

    pub fn record_value(&mut self, t: f64) {
        // NaN must poison the flag rather than be skipped by `min`.
        self.minimum = if t.is_nan() { f64::NAN } else { self.minimum.min(t) };
    }

    /// True iff every recorded temperature was strictly positive.
    pub fn all_positive(&self) -> bool {
        self.minimum > 0.0
    }

    pub fn scan<'a>(sets: impl IntoIterator<Item = &'a CoefficientSet>) -> Self {
        let mut m = Self::default();
        for s in sets {
            m.record(s);
        }
        m
    }
}

/// Temperature lower bound from the entropy-based argument for one species:
/// with `C0 = int (1 + f) log(1 + f)`, `C1 = C0 (1 + 4 pi / 3)` and
/// `lambda = [C0 exp(-2 C1 / n)]^{1/3}`, returns `m lambda^2 / 6`.
/// The constants of the argument are not sharp, so this is informative only.
pub fn analytic_temperature_floor(field: &[f64], mass: f64, state: &PlasmaState) -> f64 {
    let g = &state.grid;
    let n = g.quadrature(field);
    let c0 = compensated_sum(field.iter().map(|&x| (1.0 + x.max(0.0)) * x.max(0.0).ln_1p())) * g.cell_volume();
    let c1 = c0 * (1.0 + 4.0 * std::f64::consts::PI / 3.0);
    let lambda = (c0 * (-2.0 * c1 / n).exp()).cbrt();
    mass * lambda * lambda / 6.0
}

/// Smallest analytic floor candidate over all species.
pub fn analytic_floor_for_state(state: &PlasmaState) -> f64 {
    state
        .distributions
        .iter()
        .zip(&state.species)
        .map(|(f, sp)| analytic_temperature_floor(f, sp.mass, state))
        .fold(f64::INFINITY, f64::min)
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub time: f64,
    pub moments: Vec<SpeciesMoments>,
    pub momentum: Vec3,
    pub energy: f64,
    pub entropy: f64,
    pub dissipation: f64,
    pub relative_entropy: f64,
    pub min_pair_temperature: f64,
    pub negative_cells: usize,
}

impl DiagnosticRow {
    pub fn header(labels: &[String]) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        for l in labels {
            for q in ["n", "u_x", "u_y", "u_z", "T"] {
                h.push(format!("{q}_{l}"));
            }
        }
        for q in ["P_x", "P_y", "P_z", "E", "H", "D", "Hrel", "minTij", "negcells"] {
            h.push(q.to_string());
        }
        h
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.time];
        for m in &self.moments {
            v.extend([
                m.number_density,
                m.bulk_velocity[0],
                m.bulk_velocity[1],
                m.bulk_velocity[2],
                m.temperature,
            ]);
        }
        v.extend(self.momentum);
        v.extend([
            self.energy,
            self.entropy,
            self.dissipation,
            self.relative_entropy,
            self.min_pair_temperature,
            self.negative_cells as f64,
        ]);
        v
    }
}

/// Evaluates diagnostic rows against a fixed global equilibrium built from
/// the initial state's conserved totals.
pub struct Diagnostics<'a> {
    pub provider: &'a dyn CoefficientProvider,
    pub flux: FluxScheme,
    pub equilibrium: GlobalEquilibrium,
}

impl<'a> Diagnostics<'a> {
    pub fn new(initial: &PlasmaState, provider: &'a dyn CoefficientProvider, flux: FluxScheme) -> Result<Self> {
        let equilibrium = global_equilibrium(&initial.moments()?, &initial.species, &initial.grid)?;
        Ok(Self {
            provider,
            flux,
            equilibrium,
        })
    }

    /// Replaces the reference equilibrium, e.g. by a frozen Maxwellian.
    pub fn with_reference(mut self, equilibrium: GlobalEquilibrium) -> Self {
        self.equilibrium = equilibrium;
        self
    }

    /// Coefficients at `state` and the corresponding row.
    pub fn evaluate(&self, state: &PlasmaState, negative_cells: usize) -> Result<(DiagnosticRow, CoefficientSet)> {
        let coeffs = self.provider.coefficients(state)?;
        let op = AssembledOperator::new(state, &coeffs, self.flux)?;
        let totals = conserved_totals(state);
        let row = DiagnosticRow {
            time: state.time,
            moments: state.moments()?,
            momentum: totals.momentum,
            energy: totals.energy,
            entropy: entropy(state),
            dissipation: op.entropy_dissipation(state),
            relative_entropy: relative_entropy(state, &self.equilibrium.fields)?,
            min_pair_temperature: coeffs.min_temperature(),
            negative_cells,
        };
        Ok((row, coeffs))
    }

    pub fn row(&self, state: &PlasmaState, negative_cells: usize) -> Result<DiagnosticRow> {
        Ok(self.evaluate(state, negative_cells)?.0)
    }
}
