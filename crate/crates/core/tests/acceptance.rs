//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use fpls::coefficients::{compute_cji, compute_coefficients, CoefficientSet, TruncationReading};
use fpls::collision::{apply_collision_operator, FluxScheme};
use fpls::diagnostics::{conserved_totals, entropy, relative_entropy, Diagnostics};
use fpls::grid::VelocityGrid;
use fpls::integrator::{run, CoefficientProvider, Frozen, Scheme, SelfConsistent, StepPolicy, TimeStep, Truncated};
use fpls::model::{init_maxwellian_state, MaxwellianParams, PhysicalConstants, PlasmaState, SpeciesParams};
use fpls::moments::{maxwellian_field, SpeciesMoments};
use fpls::oracle::{compare_trajectories, integrate_moments, pair_exchange, relaxation_time, MomentState};
use fpls::vec3::{self, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: u8,
    title: &'static str,
    pass: bool,
    detail: String,
}

/// Everything recorded along one kinetic run.
#[derive(Default)]
struct RunRecord {
    name: String,
    /// Time and entropy after every step, starting with the initial state;
    /// relative to a fixed background when one is given.
    entropy: Vec<(f64, f64)>,
    /// Dissipation after every step, when requested.
    dissipation: Vec<f64>,
    outputs: Vec<PlasmaState>,
    clamped: usize,
    cells_touched: usize,
    min_pair_temperature: f64,
    unmatched: usize,
    seconds: f64,
}

fn record_run(
    name: &str,
    initial: PlasmaState,
    provider: &dyn CoefficientProvider,
    policy: &StepPolicy,
    with_dissipation: bool,
    reference: Option<&[Vec<f64>]>,
) -> RunRecord {
    let diag = Diagnostics::new(&initial, provider, policy.flux).expect("diagnostics");
    let mut rec = RunRecord {
        name: name.to_string(),
        min_pair_temperature: f64::INFINITY,
        ..Default::default()
    };
    let start = Instant::now();
    let (_, summary) = run(initial, provider, policy, |s, e| {
        let h = match reference {
            Some(r) => relative_entropy(s, r)?,
            None => entropy(s),
        };
        rec.entropy.push((s.time, h));
        if with_dissipation {
            let (row, co) = diag.evaluate(s, 0)?;
            rec.dissipation.push(row.dissipation);
            rec.min_pair_temperature = rec.min_pair_temperature.min(co.min_temperature());
        }
        if e.output {
            rec.outputs.push(s.clone());
        }
        Ok(())
    })
    .unwrap_or_else(|e| panic!("{name}: run failed: {e}"));
    rec.seconds = start.elapsed().as_secs_f64();
    rec.clamped = summary.clamped_cells;
    rec.cells_touched = summary.cells_touched;
    rec.min_pair_temperature = rec.min_pair_temperature.min(summary.min_pair_temperature);
    rec.unmatched = summary.unmatched_pairs;
    rec
}

fn moment_series(rec: &RunRecord) -> Vec<MomentState> {
    rec.outputs
        .iter()
        .map(|s| MomentState::new(s.time, s.moments().unwrap()))
        .collect()
}

fn coulomb_constants(gamma: f64) -> PhysicalConstants {
    // coulomb_log = 8 pi with eps0 = 1 makes the prefactor q_i^2 q_j^2 / m_i^2.
    PhysicalConstants::new(8.0 * PI, 1.0, gamma).unwrap()
}

fn two_species() -> Vec<SpeciesParams> {
    vec![
        SpeciesParams::new("a", 1.0, 1.0).unwrap(),
        SpeciesParams::new("b", 2.0, -1.0).unwrap(),
    ]
}

// ---------------------------------------------------------------------------

fn criterion_ou() -> Outcome {
    let grid = VelocityGrid::new(32, 10.0).unwrap();
    let species = vec![SpeciesParams::new("p", 1.0, 1.0).unwrap()];
    let (m, t_bath, var0) = (1.0, 1.0, 2.0);
    let state = init_maxwellian_state(&grid, &species, &[MaxwellianParams::new(1.0, [0.0; 3], var0 * m)]).unwrap();
    let constants = coulomb_constants(0.0);
    let c = compute_cji(&[SpeciesMoments::new(m, 1.0, [0.0; 3], t_bath)], &species, &constants).unwrap()[0];
    let frozen = Frozen(CoefficientSet::uniform(1, c, [0.0; 3], t_bath));
    let background = vec![maxwellian_field(1.0, m, [0.0; 3], t_bath, &grid).unwrap()];
    let t_end = 3.0 / (2.0 * c);
    let exact = |t: f64| t_bath / m + (var0 - t_bath / m) * (-2.0 * c * m * t / t_bath).exp();
    let mut worst = Vec::new();
    let mut times = Vec::new();
    for (scheme, dt) in [
        (Scheme::SemiImplicitSplit, TimeStep::Fixed(t_end / 600.0)),
        (Scheme::ExplicitRk4, TimeStep::Auto),
    ] {
        let policy = StepPolicy::new(scheme, dt, t_end, t_end / 30.0).unwrap();
        let name = format!("OU {} (relative to background)", scheme.name());
        let rec = record_run(&name, state.clone(), &frozen, &policy, false, Some(&background));
        let err = rec
            .outputs
            .iter()
            .map(|s| {
                let var = s.moments().unwrap()[0].temperature / m;
                (var - exact(s.time)).abs() / exact(s.time)
            })
            .fold(0.0, f64::max);
        worst.push(err);
        times.push(rec.seconds);
        log_entropy(&rec);
    }
    let pass = worst.iter().all(|&e| e <= 5e-3);
    Outcome {
        id: 1,
        title: "single-species OU variance law",
        pass,
        detail: format!(
            "c = {c:.4}, t_end = {t_end:.3}; max rel. variance error semi-implicit {:.2e} ({:.1} s), explicit {:.2e} ({:.1} s); tol 5e-3",
            worst[0], times[0], worst[1], times[1]
        ),
    }
}

// ---------------------------------------------------------------------------

thread_local! {
    static CLAMP_LOG: std::cell::RefCell<Vec<(String, usize, usize, f64, usize)>> = const { std::cell::RefCell::new(Vec::new()) };
    static ENTROPY_LOG: std::cell::RefCell<Vec<(String, f64)>> = const { std::cell::RefCell::new(Vec::new()) };
}

fn clamp_entry(rec: &RunRecord) -> (String, usize, usize, f64, usize) {
    (
        rec.name.clone(),
        rec.clamped,
        rec.cells_touched,
        rec.min_pair_temperature,
        rec.unmatched,
    )
}

/// Largest per-step entropy increase relative to `|H(0)|`.
fn entropy_violation(rec: &RunRecord) -> f64 {
    let h0 = rec.entropy[0].1.abs();
    rec.entropy
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / h0)
        .fold(0.0, f64::max)
}

fn log_entropy(rec: &RunRecord) {
    ENTROPY_LOG.with(|l| l.borrow_mut().push((rec.name.clone(), entropy_violation(rec))));
    CLAMP_LOG.with(|l| l.borrow_mut().push(clamp_entry(rec)));
}

fn conservation_state(n: usize) -> PlasmaState {
    let grid = VelocityGrid::new(n, 7.0).unwrap();
    init_maxwellian_state(
        &grid,
        &two_species(),
        &[
            MaxwellianParams::new(1.0, [0.5, 0.0, 0.0], 1.0),
            MaxwellianParams::new(1.0, [-0.1, 0.2, 0.0], 1.5),
        ],
    )
    .unwrap()
}

/// Relative momentum and energy imbalance of the plain operator's
/// instantaneous exchange.
fn plain_exchange_defect(state: &PlasmaState, constants: &PhysicalConstants) -> (f64, f64) {
    let co = compute_coefficients(&state.moments().unwrap(), &state.species, constants).unwrap();
    let rates = apply_collision_operator(state, &co, FluxScheme::Plain).unwrap();
    let g = &state.grid;
    let mut p = vec3::ZERO;
    let mut p_scale = 0.0f64;
    let (mut e, mut e_scale) = (0.0, 0.0f64);
    for (i, r) in rates.iter().enumerate() {
        let m = state.species[i].mass;
        let pi: Vec3 = [0, 1, 2].map(|d| m * g.quadrature_weighted(r, |v| v[d]));
        let ei = m * g.quadrature_weighted(r, vec3::norm2);
        p = vec3::add(p, pi);
        p_scale = p_scale.max(vec3::norm(pi));
        e += ei;
        e_scale = e_scale.max(ei.abs());
    }
    (vec3::norm(p) / p_scale, e.abs() / e_scale)
}

fn criterion_conservation() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for gamma in [-1.0, 0.0, 3.0] {
        let constants = coulomb_constants(gamma);
        let state = conservation_state(32);
        let t0 = conserved_totals(&state);
        let provider = SelfConsistent {
            constants: constants.clone(),
        };
        let policy = StepPolicy::new(Scheme::ExplicitRk4, TimeStep::Auto, 1.0, 0.1).unwrap();
        let rec = record_run(
            &format!("conservation gamma={gamma}"),
            state,
            &provider,
            &policy,
            false,
            None,
        );
        log_entropy(&rec);
        let mut mass = 0.0f64;
        let mut mom = 0.0f64;
        let mut en = 0.0f64;
        for s in &rec.outputs {
            let t = conserved_totals(s);
            for (a, b) in t.masses.iter().zip(&t0.masses) {
                mass = mass.max((a - b).abs() / b);
            }
            mom = mom.max(vec3::norm(vec3::sub(t.momentum, t0.momentum)) / vec3::norm(t0.momentum));
            en = en.max((t.energy - t0.energy).abs() / t0.energy);
        }
        let (p32, e32) = plain_exchange_defect(&conservation_state(32), &constants);
        let (p64, e64) = plain_exchange_defect(&conservation_state(64), &constants);
        let (rp, re) = (p32 / p64, e32 / e64);
        let ok = mass <= 1e-12 && mom <= 1e-4 && en <= 1e-4 && rp >= 3.5 && re >= 3.5;
        pass &= ok;
        lines.push(format!(
            "gamma {gamma:+}: mass {mass:.1e}, P {mom:.1e}, E {en:.1e}; plain-flux exchange defect 32->64 P {p32:.2e}->{p64:.2e} (x{rp:.2}), E {e32:.2e}->{e64:.2e} (x{re:.2})"
        ));
    }
    Outcome {
        id: 2,
        title: "conservation suite",
        pass,
        detail: lines.join("\n      "),
    }
}

// ---------------------------------------------------------------------------

struct RelaxationRuns {
    tau: f64,
    n32: RunRecord,
    n64: RunRecord,
    species: Vec<SpeciesParams>,
    constants: PhysicalConstants,
}

fn relaxation_state(n: usize) -> PlasmaState {
    let grid = VelocityGrid::new(n, 8.0).unwrap();
    init_maxwellian_state(
        &grid,
        &two_species(),
        &[
            MaxwellianParams::new(1.0, [1.0, 0.0, 0.0], 1.0),
            MaxwellianParams::new(1.0, [-0.5, 0.0, 0.0], 2.0),
        ],
    )
    .unwrap()
}

fn relaxation_runs() -> RelaxationRuns {
    let species = two_species();
    let constants = coulomb_constants(0.0);
    let init = relaxation_state(32);
    let tau = relaxation_time(&MomentState::new(0.0, init.moments().unwrap()), &species, &constants).unwrap();
    let provider = SelfConsistent {
        constants: constants.clone(),
    };
    let policy = StepPolicy::new(Scheme::ExplicitRk4, TimeStep::Auto, 10.0 * tau, tau / 4.0).unwrap();
    let n32 = record_run("relaxation n=32", init, &provider, &policy, true, None);
    log_entropy(&n32);
    // The finer grid is run over the first two relaxation times, where the
    // moments change the most.
    let policy64 = StepPolicy::new(Scheme::ExplicitRk4, TimeStep::Auto, 2.0 * tau, tau / 4.0).unwrap();
    let n64 = record_run(
        "relaxation n=64",
        relaxation_state(64),
        &provider,
        &policy64,
        false,
        None,
    );
    log_entropy(&n64);
    RelaxationRuns {
        tau,
        n32,
        n64,
        species,
        constants,
    }
}

fn criterion_equilibration(r: &RelaxationRuns) -> Outcome {
    // Conserved totals of the prescribed initial data.
    let (m1, m2) = (1.0, 2.0);
    let (u1, u2): (f64, f64) = (1.0, -0.5);
    let (t1, t2) = (1.0, 2.0);
    let u_star = (m1 * u1 + m2 * u2) / (m1 + m2);
    let t_star = (3.0 * t1 + 3.0 * t2 + m1 * (u1 - u_star).powi(2) + m2 * (u2 - u_star).powi(2)) / 6.0;
    let last = r.n32.outputs.last().unwrap();
    let moments = last.moments().unwrap();
    let mut du = 0.0f64;
    let mut dt = 0.0f64;
    for m in &moments {
        du = du.max(vec3::norm(vec3::sub(m.bulk_velocity, [u_star, 0.0, 0.0])));
        dt = dt.max((m.temperature - t_star).abs() / t_star);
    }
    let reference: Vec<Vec<f64>> = r
        .species
        .iter()
        .map(|sp| maxwellian_field(1.0, sp.mass, [u_star, 0.0, 0.0], t_star, &last.grid).unwrap())
        .collect();
    let hrel = relative_entropy(last, &reference).unwrap();
    let pass = du <= 1e-4 && dt <= 1e-4 && hrel < 1e-3;
    Outcome {
        id: 4,
        title: "equilibration to the global Maxwellian",
        pass,
        detail: format!(
            "tau = {:.4}, t_end = {:.3} ({} outputs, {:.1} s); u* = {u_star}, T* = {t_star}; max |u_i - u*| {du:.2e} (tol 1e-4), max |T_i - T*|/T* {dt:.2e} (tol 1e-4), relative entropy {hrel:.2e} (tol 1e-3)",
            r.tau,
            last.time,
            r.n32.outputs.len(),
            r.n32.seconds
        ),
    }
}

fn oracle_deviation(rec: &RunRecord, species: &[SpeciesParams], constants: &PhysicalConstants, cadence: f64) -> f64 {
    let pde = moment_series(rec);
    let start = pde[0].clone();
    let t_end = pde.last().unwrap().time;
    let dt = fpls::cli::moment_time_step(&start.species, species, constants, cadence).unwrap();
    let ode = integrate_moments(&start, species, constants, t_end, dt, cadence).unwrap();
    compare_trajectories(&pde, &ode).unwrap().max()
}

fn criterion_oracle(r: &RelaxationRuns) -> Outcome {
    let d32 = oracle_deviation(&r.n32, &r.species, &r.constants, r.tau / 4.0);
    let d64 = oracle_deviation(&r.n64, &r.species, &r.constants, r.tau / 4.0);
    Outcome {
        id: 5,
        title: "moment-oracle agreement",
        pass: d32 <= 0.01 && d64 <= 0.0025,
        detail: format!(
            "n=32 over [0, 10 tau]: {d32:.2e} (tol 1e-2); n=64 over [0, 2 tau] ({:.1} s): {d64:.2e} (tol 2.5e-3)",
            r.n64.seconds
        ),
    }
}

// ---------------------------------------------------------------------------

fn criterion_entropy(r: &RelaxationRuns) -> Outcome {
    let rec = &r.n32;
    // Dissipation match in the window [tau, 5 tau].
    let mut worst = 0.0f64;
    let mut samples = 0;
    for k in 0..rec.entropy.len() - 1 {
        let (t0, h0) = rec.entropy[k];
        let (t1, h1) = rec.entropy[k + 1];
        if t0 < r.tau || t1 > 5.0 * r.tau {
            continue;
        }
        let rate = -(h1 - h0) / (t1 - t0);
        let d = 0.5 * (rec.dissipation[k] + rec.dissipation[k + 1]);
        worst = worst.max((rate - d).abs() / d);
        samples += 1;
    }
    let violations = ENTROPY_LOG.with(|l| l.borrow().clone());
    let worst_h = violations.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let pass = worst_h <= 1e-8 && worst <= 0.05 && samples > 0;
    let per_run: Vec<String> = violations.iter().map(|(n, v)| format!("{n}: {v:.1e}")).collect();
    Outcome {
        id: 3,
        title: "H-theorem",
        pass,
        detail: format!(
            "max per-step increase of the entropy functional / |value at t=0| {worst_h:.2e} (tol 1e-8) over [{}]; -dH/dt vs D on [tau, 5 tau] at n=32: max rel. mismatch {worst:.2e} over {samples} steps (tol 5e-2)",
            per_run.join(", ")
        ),
    }
}

// ---------------------------------------------------------------------------

fn criterion_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut worst = 0.0f64;
    let mut failure = None;
    for trial in 0..1000 {
        let s = rng.gen_range(2..=4);
        let species: Vec<SpeciesParams> = (0..s)
            .map(|k| {
                SpeciesParams::new(
                    format!("s{k}"),
                    rng.gen_range(0.1..10.0),
                    rng.gen_range(-3.0..3.0f64).max(0.1),
                )
                .unwrap()
            })
            .collect();
        let constants = PhysicalConstants::new(
            rng.gen_range(1.0..30.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(-3.0..4.0),
        )
        .unwrap();
        let moments: Vec<SpeciesMoments> = species
            .iter()
            .map(|sp| {
                let u = [
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                ];
                SpeciesMoments::new(sp.mass, rng.gen_range(0.05..5.0), u, rng.gen_range(0.05..5.0))
            })
            .collect();
        let co = compute_coefficients(&moments, &species, &constants).unwrap();
        let st = MomentState::new(0.0, moments.clone());
        let ex = pair_exchange(&st, &species, &co);
        let mut note = |what: String, err: f64| {
            worst = worst.max(err);
            if err > 1e-12 && failure.is_none() {
                failure = Some(format!("trial {trial}: {what} ({err:.2e})"));
            }
        };
        for i in 0..s {
            let mi = &moments[i];
            note(
                format!("T_ii vs T_{i}"),
                (co.t(i, i) - mi.temperature).abs() / mi.temperature,
            );
            let us = vec3::norm(mi.bulk_velocity).max(f64::MIN_POSITIVE);
            note(
                format!("u_ii vs u_{i}"),
                vec3::norm(vec3::sub(co.u(i, i), mi.bulk_velocity)) / us,
            );
            for j in 0..s {
                let mj = &moments[j];
                let (a, b) = (co.t(j, i), co.t(i, j));
                note(format!("T[{j}][{i}] symmetry"), (a - b).abs() / a.max(b));
                let (ua, ub) = (co.u(j, i), co.u(i, j));
                let scale = vec3::norm(mi.bulk_velocity)
                    .max(vec3::norm(mj.bulk_velocity))
                    .max(f64::MIN_POSITIVE);
                note(format!("u[{j}][{i}] symmetry"), vec3::norm(vec3::sub(ua, ub)) / scale);
                let floor = mi.temperature.min(mj.temperature);
                note(format!("T[{j}][{i}] lower bound"), ((floor - a) / floor).max(0.0));
                for d in 0..3 {
                    let (x, y) = (mi.bulk_velocity[d], mj.bulk_velocity[d]);
                    let outside = (x.min(y) - ua[d]).max(ua[d] - x.max(y)).max(0.0);
                    note(format!("u[{j}][{i}] convex bound"), outside / scale);
                }
                // Pairwise cancellation, relative to the size of the summed terms.
                let pscale = |j: usize, i: usize| {
                    let m = &moments[i];
                    m.mass_density * co.c(j, i) * species[i].mass / co.t(j, i)
                        * (vec3::norm(co.u(j, i)) + vec3::norm(m.bulk_velocity))
                };
                let escale = |j: usize, i: usize| {
                    let m = &moments[i];
                    let a = species[i].mass / co.t(j, i);
                    2.0 * species[i].mass
                        * co.c(j, i)
                        * (3.0 * m.number_density
                            + a * (m.second_moment(species[i].mass)
                                + m.number_density * vec3::dot(co.u(j, i), m.bulk_velocity).abs()))
                };
                let p = vec3::add(ex.momentum[j * s + i], ex.momentum[i * s + j]);
                note(
                    format!("pair ({i},{j}) momentum cancellation"),
                    vec3::norm(p) / pscale(j, i).max(pscale(i, j)),
                );
                let e = ex.energy[j * s + i] + ex.energy[i * s + j];
                note(
                    format!("pair ({i},{j}) energy cancellation"),
                    e.abs() / escale(j, i).max(escale(i, j)),
                );
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 6,
        title: "algebraic identity suite",
        pass: failure.is_none() && secs < 1.0,
        detail: match failure {
            None => format!("1000 random states, worst relative residual {worst:.2e} (tol 1e-12), {secs:.3} s"),
            Some(f) => format!("first failure: {f}; {secs:.3} s"),
        },
    }
}

// ---------------------------------------------------------------------------

fn criterion_truncation() -> Outcome {
    let grid = VelocityGrid::new(24, 6.0).unwrap();
    let species = two_species();
    let constants = coulomb_constants(0.0);
    let eps = 1e-3;
    let t_end = 2.0;
    // T_i = m_i / 2 puts every species under the Gaussian envelope.
    let init = init_maxwellian_state(
        &grid,
        &species,
        &[
            MaxwellianParams::new(1.0, [0.2, 0.0, 0.0], 0.5),
            MaxwellianParams::new(1.0, [-0.1, 0.0, 0.0], 1.0),
        ],
    )
    .unwrap();
    let policy = StepPolicy::new(Scheme::ExplicitRk4, TimeStep::Auto, t_end, 0.1).unwrap();
    let plain = SelfConsistent {
        constants: constants.clone(),
    };
    let trunc = Truncated::new(constants.clone(), eps, TruncationReading::Consistent, &init).unwrap();
    let a = record_run("truncation off", init.clone(), &plain, &policy, false, None);
    let b = record_run("truncation on", init.clone(), &trunc, &policy, false, None);
    log_entropy(&a);
    log_entropy(&b);
    let (ma, mb) = (moment_series(&a), moment_series(&b));
    let co = compute_coefficients(&init.moments().unwrap(), &species, &constants).unwrap();
    let c_min = (0..4).map(|k| co.c(k / 2, k % 2)).fold(f64::INFINITY, f64::min);
    let quantity = |m: &MomentState, q: usize| {
        let s = &m.species[q / 2];
        if q % 2 == 0 {
            s.bulk_velocity[0]
        } else {
            s.temperature
        }
    };
    let names = ["u_x(a)", "T(a)", "u_x(b)", "T(b)"];
    let mut pass = ma.len() == mb.len();
    let mut parts = Vec::new();
    for q in 0..4 {
        let rate = ma
            .windows(2)
            .map(|w| ((quantity(&w[1], q) - quantity(&w[0], q)) / (w[1].time - w[0].time)).abs())
            .fold(0.0, f64::max);
        let scale = rate / c_min;
        let dev = ma
            .iter()
            .zip(&mb)
            .map(|(x, y)| (quantity(x, q) - quantity(y, q)).abs())
            .fold(0.0, f64::max);
        let tol = 2.0 * eps * t_end * scale;
        pass &= dev <= tol;
        parts.push(format!("{} {dev:.2e}/{tol:.2e}", names[q]));
    }
    Outcome {
        id: 8,
        title: "regularised-mode consistency",
        pass,
        detail: format!(
            "eps = {eps}, t_end = {t_end}; deviation/tolerance: {}",
            parts.join(", ")
        ),
    }
}

fn criterion_positivity() -> Outcome {
    let log = CLAMP_LOG.with(|l| l.borrow().clone());
    let mut pass = !log.is_empty();
    let mut parts = Vec::new();
    let unmatched: usize = log.iter().map(|e| e.4).sum();
    for (name, clamped, touched, min_t, _) in &log {
        let frac = *clamped as f64 / (*touched).max(1) as f64;
        pass &= frac <= 1e-4 && *min_t > 0.0;
        parts.push(format!("{name}: clamped {clamped} ({frac:.1e}), min T_ij {min_t:.4}"));
    }
    Outcome {
        id: 7,
        title: "positivity and temperature floor",
        pass,
        detail: format!(
            "{}; pairs left unmatched by the drift fit: {unmatched}",
            parts.join("; ")
        ),
    }
}

fn main() -> ExitCode {
    // Respect `cargo test -- --list` and filters by doing nothing special:
    // the suite always runs in full.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let mut outcomes = vec![criterion_identities(), criterion_ou(), criterion_conservation()];
    let relax = relaxation_runs();
    outcomes.push(criterion_equilibration(&relax));
    outcomes.push(criterion_oracle(&relax));
    outcomes.push(criterion_truncation());
    outcomes.push(criterion_entropy(&relax));
    outcomes.push(criterion_positivity());
    outcomes.sort_by_key(|o| o.id);
    println!("acceptance suite ({:.0} s)", start.elapsed().as_secs_f64());
    for o in &outcomes {
        println!(
            "criterion {} [{}] {}\n      {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.title,
            o.detail
        );
    }
    if outcomes.iter().all(|o| o.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
