//! Flux-form discretisation of the Dougherty collision operator
//! `Q_ji(f_i) = c_ji div(grad f_i + m_i (v - u_ji) / T_ji f_i)`.
//!
//! Each pair operator is a sum of three one-dimensional drift-diffusion
//! operators, discretised with Chang-Cooper (Scharfetter-Gummel) exponential
//! fitting. For face `k` between cells `k - 1` and `k` along one axis,
//!
//! ```text
//! G_k = c / h * [ B(-P_k) f_k - B(P_k) f_{k-1} ],   P_k = m (w_k - u) h / T,
//! ```
//!
//! with `B(x) = x / (e^x - 1)` and `w_k` the face coordinate. Boundary faces
//! carry zero flux. The sampled Maxwellian with parameters `(u, T)` satisfies
//! `f_k / f_{k-1} = e^{-P_k}` exactly, so it is annihilated, and the implicit
//! update matrix is an M-matrix.
//!
//! With [`FluxScheme::Conservative`] the drift velocity and temperature fed
//! to each pair stencil are adjusted by a small Newton solve so that the
//! discrete momentum and energy exchange of the pair equals the continuum
//! exchange `c (m/T) (n u_ji - int f v)` and `2c [3n - (m/T)(int f|v|^2 - u_ji . int f v)]`.
//! Since those continuum rates cancel pairwise, the semi-discrete scheme
//! conserves total momentum and energy to solver tolerance instead of to
//! `O(h^2)`. [`FluxScheme::Plain`] uses `(u_ji, T_ji)` unchanged.

use rayon::prelude::*;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::{CompensatedSum, VelocityGrid};
use crate::linalg::solve_tridiagonal;
use crate::model::PlasmaState;
use crate::vec3::Vec3;

/// How pair drift parameters are chosen for the discrete operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxScheme {
    /// Drift parameters matched to the continuum moment exchange.
    #[default]
    Conservative,
    /// Mixture velocity and temperature used verbatim.
    Plain,
}

/// Bernoulli function `x / (e^x - 1)`, with `B(0) = 1`.
#[inline]
pub fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x / 2.0 + x * x / 12.0
    } else if x > 700.0 {
        x * (-x).exp()
    } else {
        x / x.exp_m1()
    }
}

/// Derivative of [`bernoulli`].
#[inline]
fn bernoulli_derivative(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        -0.5 + x / 6.0 - x * x * x / 180.0
    } else if x > 700.0 {
        (1.0 - x) * (-x).exp()
    } else {
        let em = x.exp_m1();
        (em - x * (em + 1.0)) / (em * em)
    }
}

/// Rate, drift velocity and temperature of one pair operator
/// `c div(grad f + m (v - u) / T f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftParams {
    pub rate: f64,
    pub velocity: Vec3,
    pub temperature: f64,
}

/// Face weights along one axis: `G_k = plus[k] f_k - minus[k] f_{k-1}` in
/// units of flux per `h`. Entries 0 and `n` are boundary faces and are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisStencil {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl AxisStencil {
    fn zeros(n: usize) -> Self {
        Self {
            plus: vec![0.0; n + 1],
            minus: vec![0.0; n + 1],
        }
    }

    /// Adds the stencil of `c d/dx (df/dx + m (x - u) / T f)` along one axis.
    fn accumulate(&mut self, rate: f64, mass: f64, velocity: f64, temperature: f64, grid: &VelocityGrid) {
        let n = grid.n_per_axis();
        let h = grid.spacing();
        let scale = rate / (h * h);
        for k in 1..n {
            let p = peclet(mass, grid.face(k), velocity, temperature, h);
            self.plus[k] += scale * bernoulli(-p);
            self.minus[k] += scale * bernoulli(p);
        }
    }
}

#[inline]
fn peclet(mass: f64, face: f64, velocity: f64, temperature: f64, h: f64) -> f64 {
    mass * (face - velocity) * h / temperature
}

/// Iterates over the starting index of every grid line parallel to `axis`.
fn line_starts(n: usize, axis: usize) -> impl Iterator<Item = usize> {
    (0..n * n).map(move |l| {
        let (p, q) = (l % n, l / n);
        match axis {
            0 => n * (p + n * q),
            1 => p + n * n * q,
            _ => p + n * q,
        }
    })
}

/// Adds the divergence of the axis fluxes of `field` into `out`.
fn add_axis_divergence(stencil: &AxisStencil, axis: usize, field: &[f64], out: &mut [f64], grid: &VelocityGrid) {
    let n = grid.n_per_axis();
    let stride = grid.stride(axis);
    let mut flux = vec![0.0; n + 1];
    for start in line_starts(n, axis) {
        for k in 1..n {
            let here = start + k * stride;
            flux[k] = stencil.plus[k] * field[here] - stencil.minus[k] * field[here - stride];
        }
        for k in 0..n {
            out[start + k * stride] += flux[k + 1] - flux[k];
        }
    }
}

/// Discrete operator of one species: the partner stencils summed per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesOperator {
    pub axes: [AxisStencil; 3],
}

impl SpeciesOperator {
    pub fn from_pairs(mass: f64, pairs: &[DriftParams], grid: &VelocityGrid) -> Self {
        let n = grid.n_per_axis();
        let mut axes = [AxisStencil::zeros(n), AxisStencil::zeros(n), AxisStencil::zeros(n)];
        for p in pairs {
            if p.rate == 0.0 {
                continue;
            }
            for (d, axis) in axes.iter_mut().enumerate() {
                axis.accumulate(p.rate, mass, p.velocity[d], p.temperature, grid);
            }
        }
        Self { axes }
    }

    /// `df/dt` for this species.
    pub fn apply(&self, field: &[f64], grid: &VelocityGrid) -> Vec<f64> {
        let mut out = vec![0.0; field.len()];
        for (d, st) in self.axes.iter().enumerate() {
            add_axis_divergence(st, d, field, &mut out, grid);
        }
        out
    }

    /// Largest total rate at which a cell loses content to its neighbours.
    /// A forward-Euler step of length at most its inverse keeps a
    /// nonnegative field nonnegative.
    pub fn max_outflow_rate(&self) -> f64 {
        self.axes
            .iter()
            .map(|st| {
                (0..st.plus.len() - 1)
                    .map(|k| st.minus[k + 1] + st.plus[k])
                    .fold(0.0, f64::max)
            })
            .sum()
    }

    /// Backward-Euler line sweeps `(I - dt A_d) f_new = f` for `d = x, y, z`
    /// in turn, overwriting `field`.
    pub fn implicit_sweeps(&self, field: &mut [f64], dt: f64, grid: &VelocityGrid) {
        let n = grid.n_per_axis();
        for (axis, st) in self.axes.iter().enumerate() {
            let stride = grid.stride(axis);
            let mut lower = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for k in 0..n {
                // Row k: rate_k = plus[k+1] f_{k+1} - minus[k+1] f_k - plus[k] f_k + minus[k] f_{k-1}.
                lower[k] = -dt * st.minus[k];
                diag[k] = 1.0 + dt * (st.minus[k + 1] + st.plus[k]);
                upper[k] = -dt * st.plus[k + 1];
            }
            let mut line = vec![0.0; n];
            let mut scratch = vec![0.0; n];
            for start in line_starts(n, axis) {
                for k in 0..n {
                    line[k] = field[start + k * stride];
                }
                solve_tridiagonal(&lower, &diag, &upper, &mut line, &mut scratch);
                for k in 0..n {
                    field[start + k * stride] = line[k];
                }
            }
        }
    }
}

/// Plain one-pair operator applied to a field; used for steady-state and
/// positivity checks.
pub fn pair_rate(field: &[f64], mass: f64, params: DriftParams, grid: &VelocityGrid) -> Vec<f64> {
    SpeciesOperator::from_pairs(mass, &[params], grid).apply(field, grid)
}

/// Result of matching a pair's discrete moment exchange to the continuum one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchOutcome {
    pub params: DriftParams,
    pub converged: bool,
    pub iterations: usize,
}

/// Raw moments of a species field assembled from its axis marginals.
#[derive(Debug, Clone)]
pub struct MarginalMoments {
    pub marginals: [Vec<f64>; 3],
    pub mass: f64,
    pub first: Vec3,
    pub second: Vec3,
}

impl MarginalMoments {
    pub fn new(field: &[f64], grid: &VelocityGrid) -> Self {
        let marginals = grid.marginals(field);
        let h = grid.spacing();
        let c = grid.centers();
        let mut first = [0.0; 3];
        let mut second = [0.0; 3];
        for d in 0..3 {
            let mut s1 = CompensatedSum::default();
            let mut s2 = CompensatedSum::default();
            for (k, &g) in marginals[d].iter().enumerate() {
                s1.add(g * c[k]);
                s2.add(g * c[k] * c[k]);
            }
            first[d] = s1.value() * h;
            second[d] = s2.value() * h;
        }
        let mass = crate::grid::compensated_sum(marginals[0].iter().copied()) * h;
        Self {
            marginals,
            mass,
            first,
            second,
        }
    }

    /// Continuum exchange rates per unit `c` for drift `(u, T)`:
    /// momentum per axis and total energy `int Q |v|^2`.
    pub fn continuum_rates(&self, mass: f64, u: Vec3, t: f64) -> ([f64; 3], f64) {
        let a = mass / t;
        let mut p = [0.0; 3];
        let mut e = 0.0;
        for d in 0..3 {
            p[d] = a * (self.mass * u[d] - self.first[d]);
            e += 2.0 * (self.mass - a * (self.second[d] - u[d] * self.first[d]));
        }
        (p, e)
    }
}

/// Discrete momentum and energy exchange along one axis, per unit `c`, and
/// their derivatives with respect to the drift velocity and inverse
/// temperature.
fn discrete_axis_rates(marginal: &[f64], mass: f64, u: f64, beta: f64, grid: &VelocityGrid) -> [f64; 6] {
    let n = grid.n_per_axis();
    let h = grid.spacing();
    let (mut p, mut e, mut pu, mut pb, mut eu, mut eb) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 1..n {
        let w = grid.face(k);
        let x = mass * beta * (w - u) * h;
        let (gk, gl) = (marginal[k], marginal[k - 1]);
        let flux = (bernoulli(-x) * gk - bernoulli(x) * gl) / h;
        let dflux = (-bernoulli_derivative(-x) * gk - bernoulli_derivative(x) * gl) / h;
        let dx_du = -mass * beta * h;
        let dx_db = mass * (w - u) * h;
        p += flux;
        e += w * flux;
        pu += dflux * dx_du;
        pb += dflux * dx_db;
        eu += w * dflux * dx_du;
        eb += w * dflux * dx_db;
    }
    [-h * p, -2.0 * h * e, -h * pu, -h * pb, -2.0 * h * eu, -2.0 * h * eb]
}

/// Newton solve for `(u', T')` such that the Chang-Cooper pair stencil
/// reproduces the continuum momentum and energy exchange of the target
/// parameters. Falls back to the target when the iteration fails.
pub fn match_drift_params(
    moments: &MarginalMoments,
    mass: f64,
    target: DriftParams,
    grid: &VelocityGrid,
) -> MatchOutcome {
    let fallback = MatchOutcome {
        params: target,
        converged: false,
        iterations: 0,
    };
    if target.rate == 0.0 || !(moments.mass > 0.0) {
        return MatchOutcome {
            converged: true,
            ..fallback
        };
    }
    let (tp, te) = moments.continuum_rates(mass, target.velocity, target.temperature);
    let mut u = target.velocity;
    let mut beta = 1.0 / target.temperature;
    let thermal = (target.temperature / mass).sqrt();
    const MAX_ITER: usize = 60;
    for it in 1..=MAX_ITER {
        let rates: Vec<[f64; 6]> = (0..3)
            .map(|d| discrete_axis_rates(&moments.marginals[d], mass, u[d], beta, grid))
            .collect();
        let mut r4 = -te;
        let mut e4 = 0.0;
        let mut num = 0.0;
        let mut den = 0.0;
        let mut rd = [0.0; 3];
        let mut ad = [0.0; 3];
        let mut bd = [0.0; 3];
        for d in 0..3 {
            let [p, e, pu, pb, eu, eb] = rates[d];
            rd[d] = p - tp[d];
            ad[d] = pu;
            bd[d] = pb;
            r4 += e;
            e4 += eb;
            if pu == 0.0 {
                return fallback;
            }
            num += eu * rd[d] / pu;
            den += eu * pb / pu;
        }
        let schur = e4 - den;
        if schur == 0.0 || !schur.is_finite() {
            return fallback;
        }
        let dbeta = (-r4 + num) / schur;
        let mut du = [0.0; 3];
        for d in 0..3 {
            du[d] = (-rd[d] - bd[d] * dbeta) / ad[d];
        }
        let mut new_beta = beta + dbeta;
        if !(new_beta > 0.0) {
            new_beta = 0.5 * beta;
        }
        let step_u = du.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let step_b = (new_beta - beta).abs();
        for d in 0..3 {
            u[d] += du[d];
        }
        beta = new_beta;
        if !(beta.is_finite() && u.iter().all(|x| x.is_finite())) {
            return fallback;
        }
        if step_u <= 1e-14 * (thermal + u.iter().fold(0.0f64, |m, x| m.max(x.abs()))) && step_b <= 1e-14 * beta {
            return MatchOutcome {
                params: DriftParams {
                    rate: target.rate,
                    velocity: u,
                    temperature: 1.0 / beta,
                },
                converged: true,
                iterations: it,
            };
        }
    }
    MatchOutcome {
        params: DriftParams {
            rate: target.rate,
            velocity: u,
            temperature: 1.0 / beta,
        },
        converged: false,
        iterations: MAX_ITER,
    }
}

/// The discrete operator for every species, frozen at given coefficients.
#[derive(Debug, Clone)]
pub struct AssembledOperator {
    pub scheme: FluxScheme,
    /// Drift parameters actually used, in `(partner, own)` layout.
    pub pair_params: Vec<DriftParams>,
    pub species: Vec<SpeciesOperator>,
    /// Number of pairs whose moment matching did not converge.
    pub unmatched_pairs: usize,
}

impl AssembledOperator {
    pub fn new(state: &PlasmaState, coeffs: &CoefficientSet, scheme: FluxScheme) -> Result<Self> {
        let s = state.num_species();
        if coeffs.num_species() != s {
            return Err(Error::DegenerateCoefficients(format!(
                "coefficients for {} species, state has {s}",
                coeffs.num_species()
            )));
        }
        coeffs.validate()?;
        let grid = &state.grid;
        let mut pair_params = Vec::with_capacity(s * s);
        for j in 0..s {
            for i in 0..s {
                pair_params.push(DriftParams {
                    rate: coeffs.c(j, i),
                    velocity: coeffs.u(j, i),
                    temperature: coeffs.t(j, i),
                });
            }
        }
        let mut unmatched_pairs = 0;
        if scheme == FluxScheme::Conservative {
            let outcomes: Vec<Vec<MatchOutcome>> = (0..s)
                .into_par_iter()
                .map(|i| {
                    let mm = MarginalMoments::new(&state.distributions[i], grid);
                    let mass = state.species[i].mass;
                    (0..s)
                        .map(|j| match_drift_params(&mm, mass, pair_params[j * s + i], grid))
                        .collect()
                })
                .collect();
            for (i, per_species) in outcomes.into_iter().enumerate() {
                for (j, o) in per_species.into_iter().enumerate() {
                    if !o.converged {
                        unmatched_pairs += 1;
                    }
                    pair_params[j * s + i] = o.params;
                }
            }
            if unmatched_pairs > 0 {
                log::warn!("{unmatched_pairs} pair(s) fell back to unmatched drift parameters");
            }
        }
        let species = (0..s)
            .into_par_iter()
            .map(|i| {
                let pairs: Vec<DriftParams> = (0..s).map(|j| pair_params[j * s + i]).collect();
                SpeciesOperator::from_pairs(state.species[i].mass, &pairs, grid)
            })
            .collect();
        Ok(Self {
            scheme,
            pair_params,
            species,
            unmatched_pairs,
        })
    }

    #[inline]
    pub fn params(&self, j: usize, i: usize) -> DriftParams {
        self.pair_params[j * self.species.len() + i]
    }

    pub fn apply(&self, fields: &[Vec<f64>], grid: &VelocityGrid) -> Vec<Vec<f64>> {
        self.species
            .par_iter()
            .zip(fields.par_iter())
            .map(|(op, f)| op.apply(f, grid))
            .collect()
    }

    /// Discrete entropy dissipation
    /// `sum_ij c_ji sum_faces f_face |grad_h log(f_i / M_ij)|^2 h^3`, where
    /// `M_ij` is the pair's discrete Maxwellian and the face value
    /// `f_face = B(P) Lambda(f_{k-1}, e^P f_k)` (logarithmic mean) makes it
    /// equal to the pair's exact discrete dissipation. Faces touching cells
    /// below `1e-300 n / h^3` are skipped.
    pub fn entropy_dissipation(&self, state: &PlasmaState) -> f64 {
        let grid = &state.grid;
        let s = state.num_species();
        let n = grid.n_per_axis();
        let h = grid.spacing();
        let mut total = CompensatedSum::default();
        for i in 0..s {
            let f = &state.distributions[i];
            let density = grid.quadrature(f);
            let floor = 1e-300 * density / grid.cell_volume();
            let logf: Vec<f64> = f.iter().map(|&x| if x > floor { x.ln() } else { f64::NAN }).collect();
            let mass = state.species[i].mass;
            for j in 0..s {
                let p = self.params(j, i);
                if p.rate == 0.0 {
                    continue;
                }
                for axis in 0..3 {
                    let stride = grid.stride(axis);
                    let pe: Vec<f64> = (0..=n)
                        .map(|k| peclet(mass, grid.face(k), p.velocity[axis], p.temperature, h))
                        .collect();
                    let bp: Vec<f64> = pe.iter().map(|&x| bernoulli(x)).collect();
                    let bm: Vec<f64> = pe.iter().map(|&x| bernoulli(-x)).collect();
                    let mut acc = 0.0;
                    for start in line_starts(n, axis) {
                        for k in 1..n {
                            let here = start + k * stride;
                            let (lh, ll) = (logf[here], logf[here - stride]);
                            if lh.is_nan() || ll.is_nan() {
                                continue;
                            }
                            let jump = bm[k] * f[here] - bp[k] * f[here - stride];
                            let dlog = lh - ll + pe[k];
                            acc += (jump * dlog).max(0.0);
                        }
                    }
                    total.add(p.rate * h * acc);
                }
            }
        }
        total.value()
    }
}

/// `df_i/dt` for every species.
pub fn apply_collision_operator(
    state: &PlasmaState,
    coeffs: &CoefficientSet,
    scheme: FluxScheme,
) -> Result<Vec<Vec<f64>>> {
    let op = AssembledOperator::new(state, coeffs, scheme)?;
    Ok(op.apply(&state.distributions, &state.grid))
}

/// Discrete entropy production of the state under the given coefficients.
pub fn entropy_dissipation_rate(state: &PlasmaState, coeffs: &CoefficientSet, scheme: FluxScheme) -> Result<f64> {
    Ok(AssembledOperator::new(state, coeffs, scheme)?.entropy_dissipation(state))
}
