//! The `fpls` command line: `simulate`, `check` and `oracle`.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 runtime or numerical
//! failure, 3 a check or threshold failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coefficients::{compute_coefficients, CoefficientSet};
use crate::collision::{
    apply_collision_operator, pair_rate, AssembledOperator, DriftParams, FluxScheme, SpeciesOperator,
};
use crate::config::RunConfig;
use crate::diagnostics::{analytic_floor_for_state, DiagnosticRow, Diagnostics, TemperatureFloorMonitor};
use crate::error::{Error, Result};
use crate::integrator::{run, CoefficientProvider, RunSummary, SelfConsistent, Truncated};
use crate::io::{CsvWriter, Snapshot};
use crate::model::{PhysicalConstants, PlasmaState, SpeciesParams};
use crate::moments::{maxwellian_field, SpeciesMoments};
use crate::oracle::{compare_trajectories, integrate_moments, pair_exchange, MomentState, TrajectoryDeviation};
use crate::vec3;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;
pub const EXIT_THRESHOLD: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fpls",
    version,
    about = "Multispecies Fokker-Planck-Landau relaxation solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation and write diagnostics, snapshots and a manifest.
    Simulate { config: PathBuf },
    /// Run the invariant suites against a configuration.
    Check { config: PathBuf },
    /// Compare the kinetic run with the closed moment equations.
    Oracle { config: PathBuf },
}

/// Caps the worker pool when `FPLS_THREADS` is a positive integer.
pub fn configure_threads() {
    let Ok(v) = std::env::var("FPLS_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(0) => {}
        Ok(n) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not set thread count: {e}");
            }
        }
        Err(_) => log::warn!("ignoring FPLS_THREADS={v:?}: not a nonnegative integer"),
    }
}

pub fn main() -> ExitCode {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK });
        }
    };
    configure_threads();
    let code = match &cli.command {
        Command::Simulate { config } => cmd_simulate(config),
        Command::Check { config } => cmd_check(config),
        Command::Oracle { config } => cmd_oracle(config),
    };
    ExitCode::from(code)
}

fn load(path: &Path) -> std::result::Result<(RunConfig, PlasmaState), u8> {
    let result = RunConfig::from_path(path).and_then(|c| {
        let s = c.initial_state()?;
        c.step_policy()?;
        Ok((c, s))
    });
    result.map_err(|e| {
        eprintln!("error: {e}");
        EXIT_VALIDATION
    })
}

fn provider_for(config: &RunConfig, initial: &PlasmaState) -> Result<Box<dyn CoefficientProvider>> {
    if config.run.epsilon_truncation > 0.0 {
        Ok(Box::new(Truncated::new(
            config.constants.clone(),
            config.run.epsilon_truncation,
            config.run.truncation_reading,
            initial,
        )?))
    } else {
        Ok(Box::new(SelfConsistent {
            constants: config.constants.clone(),
        }))
    }
}

fn labels(config: &RunConfig) -> Vec<String> {
    config.species.iter().map(|s| s.params.label.clone()).collect()
}

fn write_manifest(config: &RunConfig, extra: &str) -> Result<()> {
    let path = config.output.path("manifest.txt");
    let text = format!(
        "# fpls {} ({} build)\n{extra}\n{}",
        env!("CARGO_PKG_VERSION"),
        if cfg!(debug_assertions) { "debug" } else { "release" },
        config.to_toml()
    );
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn prepare_output(config: &RunConfig) -> Result<()> {
    let dir = &config.output.directory;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs the configured simulation, streaming diagnostic rows to `csv` and
/// snapshots to the output directory.
fn simulate(
    config: &RunConfig,
    initial: PlasmaState,
    csv: &mut CsvWriter,
) -> Result<(RunSummary, TemperatureFloorMonitor)> {
    let provider = provider_for(config, &initial)?;
    let policy = config.step_policy()?;
    let diagnostics = Diagnostics::new(&initial, provider.as_ref(), config.run.flux)?;
    let mut floor = TemperatureFloorMonitor {
        analytic_floor: Some(analytic_floor_for_state(&initial)),
        ..Default::default()
    };
    let mut clamped = 0;
    let snap_every = config.run.snapshot_every;
    let mut next_snapshot = 0.0;
    let mut snapshot_index = 0;
    let (_, summary) = run(initial, provider.as_ref(), &policy, |state, event| {
        if let Some(r) = event.report {
            clamped += r.clamped_cells;
            floor.record_value(r.min_pair_temperature);
        }
        if event.output {
            let (row, coeffs) = diagnostics.evaluate(state, clamped)?;
            floor.record(&coeffs);
            csv.row(&[], &row.values())?;
        }
        if snap_every > 0.0 && state.time >= next_snapshot - 1e-12 * snap_every {
            let path = config.output.path(&format!("snapshot_{snapshot_index:05}.fpls"));
            Snapshot::from_state(state).write(&path)?;
            snapshot_index += 1;
            while next_snapshot <= state.time + 1e-12 * snap_every {
                next_snapshot += snap_every;
            }
        }
        Ok(())
    })?;
    Ok((summary, floor))
}

pub fn cmd_simulate(path: &Path) -> u8 {
    let (config, initial) = match load(path) {
        Ok(x) => x,
        Err(code) => return code,
    };
    if let Err(e) = prepare_output(&config).and_then(|_| write_manifest(&config, "# command: simulate")) {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    let csv_path = config.output.path("diagnostics.csv");
    let mut csv = match CsvWriter::create(&csv_path, &DiagnosticRow::header(&labels(&config))) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    match simulate(&config, initial, &mut csv) {
        Ok((summary, floor)) => {
            println!(
                "completed {} steps to t = {}; clamped cells {}; min T_ij {:.6e} (analytic floor candidate {:.3e})",
                summary.steps,
                summary.final_time,
                summary.clamped_cells,
                floor.minimum,
                floor.analytic_floor.unwrap_or(f64::NAN)
            );
            println!("wrote {}", csv_path.display());
            EXIT_OK
        }
        Err(e) => {
            let _ = csv.error_record(&e.to_string());
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Outcome of one invariant suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    /// First counterexample, if any.
    pub failure: Option<String>,
}

fn random_moments(rng: &mut ChaCha8Rng, species: &[SpeciesParams]) -> Vec<SpeciesMoments> {
    species
        .iter()
        .map(|sp| {
            let u = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            SpeciesMoments::new(sp.mass, rng.gen_range(0.1..3.0), u, rng.gen_range(0.1..4.0))
        })
        .collect()
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

fn symmetry_counterexample(co: &CoefficientSet, moments: &[SpeciesMoments], tol: f64) -> Option<String> {
    let s = co.num_species();
    for i in 0..s {
        let m = &moments[i];
        if rel(co.t(i, i), m.temperature, m.temperature) > tol {
            return Some(format!("T[{i}][{i}] = {} but T_{i} = {}", co.t(i, i), m.temperature));
        }
        let us = vec3::norm(m.bulk_velocity).max(1.0);
        if vec3::norm(vec3::sub(co.u(i, i), m.bulk_velocity)) > tol * us {
            return Some(format!(
                "u[{i}][{i}] = {:?} but u_{i} = {:?}",
                co.u(i, i),
                m.bulk_velocity
            ));
        }
        for j in 0..s {
            let (a, b) = (co.t(j, i), co.t(i, j));
            if rel(a, b, a.abs().max(b.abs())) > tol {
                return Some(format!("T[{j}][{i}] = {a} differs from T[{i}][{j}] = {b}"));
            }
            let (ua, ub) = (co.u(j, i), co.u(i, j));
            let scale = vec3::norm(ua).max(vec3::norm(ub)).max(1.0);
            if vec3::norm(vec3::sub(ua, ub)) > tol * scale {
                return Some(format!("u[{j}][{i}] = {ua:?} differs from u[{i}][{j}] = {ub:?}"));
            }
            let (ti, tj) = (moments[i].temperature, moments[j].temperature);
            if a < ti.min(tj) * (1.0 - tol) {
                return Some(format!("T[{j}][{i}] = {a} below min(T_{i}, T_{j}) = {}", ti.min(tj)));
            }
            for d in 0..3 {
                let (x, y) = (moments[i].bulk_velocity[d], moments[j].bulk_velocity[d]);
                let (lo, hi) = (x.min(y), x.max(y));
                let slack = tol * (hi.abs().max(lo.abs()).max(1.0));
                if ua[d] < lo - slack || ua[d] > hi + slack {
                    return Some(format!("u[{j}][{i}][{d}] = {} outside [{lo}, {hi}]", ua[d]));
                }
            }
        }
    }
    None
}

fn suite_symmetry(config: &RunConfig, initial: &PlasmaState, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let species = config.species_params();
    let mut states = vec![initial.moments()?];
    for _ in 0..200 {
        states.push(random_moments(rng, &species));
    }
    for moments in &states {
        let mut co = compute_coefficients(moments, &species, &config.constants)?;
        if config.check.inject_symmetry_fault {
            let s = co.num_species();
            let k = if s > 1 { s } else { 0 };
            co.t_mut()[k] *= 1.0 + 1e-6;
        }
        if let Some(msg) = symmetry_counterexample(&co, moments, 1e-12) {
            return Ok(SuiteResult {
                name: "symmetry",
                failure: Some(msg),
            });
        }
    }
    Ok(SuiteResult {
        name: "symmetry",
        failure: None,
    })
}

fn suite_conservation(config: &RunConfig, initial: &PlasmaState, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let species = config.species_params();
    let s = species.len();
    for _ in 0..200 {
        let moments = random_moments(rng, &species);
        let st = MomentState::new(0.0, moments);
        let co = compute_coefficients(&st.species, &species, &config.constants)?;
        let ex = pair_exchange(&st, &species, &co);
        for i in 0..s {
            for j in 0..i {
                let (a, b) = (ex.momentum[j * s + i], ex.momentum[i * s + j]);
                let scale = vec3::norm(a).max(vec3::norm(b)).max(f64::MIN_POSITIVE);
                if vec3::norm(vec3::add(a, b)) > 1e-10 * scale {
                    return Ok(SuiteResult {
                        name: "conservation",
                        failure: Some(format!(
                            "moment equations: pair ({i}, {j}) momentum exchange {a:?} + {b:?} does not cancel"
                        )),
                    });
                }
            }
        }
    }
    // Discrete operator on the configured initial state.
    let co = compute_coefficients(&initial.moments()?, &initial.species, &config.constants)?;
    let rates = apply_collision_operator(initial, &co, config.run.flux)?;
    let g = &initial.grid;
    let mut p = [0.0; 3];
    let mut p_abs = [0.0; 3];
    let (mut e, mut e_abs) = (0.0, 0.0);
    for (i, r) in rates.iter().enumerate() {
        let m = initial.species[i].mass;
        let mass = g.quadrature(r);
        let mass_abs = r.iter().map(|x| x.abs()).sum::<f64>() * g.cell_volume();
        if mass.abs() > 1e-12 * mass_abs.max(f64::MIN_POSITIVE) {
            return Ok(SuiteResult {
                name: "conservation",
                failure: Some(format!("species {i}: mass rate {mass:e} is not zero")),
            });
        }
        for d in 0..3 {
            let x = m * g.quadrature_weighted(r, |v| v[d]);
            p[d] += x;
            p_abs[d] += x.abs();
        }
        let x = m * g.quadrature_weighted(r, vec3::norm2);
        e += x;
        e_abs += x.abs();
    }
    if config.run.flux == FluxScheme::Conservative {
        let p_scale = p_abs.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        for d in 0..3 {
            if p[d].abs() > 1e-9 * p_scale {
                return Ok(SuiteResult {
                    name: "conservation",
                    failure: Some(format!("total momentum rate {:e} along axis {d}", p[d])),
                });
            }
        }
        if e.abs() > 1e-9 * e_abs.max(f64::MIN_POSITIVE) {
            return Ok(SuiteResult {
                name: "conservation",
                failure: Some(format!("total energy rate {e:e}")),
            });
        }
    }
    Ok(SuiteResult {
        name: "conservation",
        failure: None,
    })
}

/// Every pair operator must annihilate the sampled Maxwellian built from its
/// own drift parameters, for both flux variants.
fn suite_equilibrium(config: &RunConfig, initial: &PlasmaState) -> Result<SuiteResult> {
    let co = compute_coefficients(&initial.moments()?, &initial.species, &config.constants)?;
    let grid = &initial.grid;
    let h = grid.spacing();
    let s = initial.num_species();
    for flux in [FluxScheme::Conservative, FluxScheme::Plain] {
        let op = AssembledOperator::new(initial, &co, flux)?;
        for i in 0..s {
            let m = initial.species[i].mass;
            for j in 0..s {
                let p = op.params(j, i);
                if p.rate == 0.0 {
                    continue;
                }
                let field = maxwellian_field(1.0, m, p.velocity, p.temperature, grid)?;
                let rate = pair_rate(&field, m, p, grid);
                let fmax = field.iter().cloned().fold(0.0, f64::max);
                let reach = grid.extent() + p.velocity.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                let scale = fmax * p.rate * (1.0 + m * reach * h / p.temperature) / (h * h);
                let worst = rate.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                if worst > 1e-12 * scale {
                    return Ok(SuiteResult {
                        name: "equilibrium",
                        failure: Some(format!(
                            "{flux:?} flux, pair ({j}, {i}): rate {worst:e} at the pair Maxwellian (scale {scale:e})"
                        )),
                    });
                }
            }
        }
    }
    Ok(SuiteResult {
        name: "equilibrium",
        failure: None,
    })
}

fn suite_positivity(initial: &PlasmaState, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let grid = &initial.grid;
    for trial in 0..5 {
        for (i, f0) in initial.distributions.iter().enumerate() {
            let mut f: Vec<f64> = f0.iter().map(|x| x * rng.gen_range(0.0..2.0)).collect();
            let before = grid.quadrature(&f);
            let params = DriftParams {
                rate: rng.gen_range(0.1..10.0),
                velocity: [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ],
                temperature: rng.gen_range(0.05..3.0),
            };
            let op = SpeciesOperator::from_pairs(initial.species[i].mass, &[params], grid);
            op.implicit_sweeps(&mut f, rng.gen_range(0.01..100.0), grid);
            if let Some(pos) = f.iter().position(|&x| x < 0.0) {
                return Ok(SuiteResult {
                    name: "positivity",
                    failure: Some(format!("trial {trial}, species {i}: value {} at cell {pos}", f[pos])),
                });
            }
            let after = grid.quadrature(&f);
            if (after - before).abs() > 1e-10 * before {
                return Ok(SuiteResult {
                    name: "positivity",
                    failure: Some(format!("trial {trial}, species {i}: mass {before} became {after}")),
                });
            }
        }
    }
    Ok(SuiteResult {
        name: "positivity",
        failure: None,
    })
}

/// Runs every invariant suite for `config`.
pub fn run_checks(config: &RunConfig, initial: &PlasmaState) -> Result<Vec<SuiteResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.run.seed);
    Ok(vec![
        suite_symmetry(config, initial, &mut rng)?,
        suite_conservation(config, initial, &mut rng)?,
        suite_equilibrium(config, initial)?,
        suite_positivity(initial, &mut rng)?,
    ])
}

pub fn cmd_check(path: &Path) -> u8 {
    let (config, initial) = match load(path) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let results = match run_checks(&config, &initial) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let mut ok = true;
    for r in &results {
        match &r.failure {
            None => println!("suite {}: pass", r.name),
            Some(msg) => {
                ok = false;
                println!("suite {}: FAIL: {msg}", r.name);
            }
        }
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_THRESHOLD
    }
}

/// Kinetic and moment-equation trajectories sampled at the output cadence.
pub struct OracleComparison {
    pub pde: Vec<MomentState>,
    pub ode: Vec<MomentState>,
    pub deviation: TrajectoryDeviation,
}

/// Time step for the moment equations: a small fraction of the fastest
/// relaxation time, never above the output cadence.
pub fn moment_time_step(
    moments: &[SpeciesMoments],
    species: &[SpeciesParams],
    constants: &PhysicalConstants,
    cadence: f64,
) -> Result<f64> {
    let co = compute_coefficients(moments, species, constants)?;
    let s = species.len();
    let fastest = (0..s)
        .map(|i| {
            (0..s)
                .map(|j| 2.0 * co.c(j, i) * species[i].mass / co.t(j, i))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    Ok(if fastest > 0.0 {
        cadence.min(0.01 / fastest)
    } else {
        cadence
    })
}

pub fn oracle_comparison(config: &RunConfig, initial: PlasmaState) -> Result<OracleComparison> {
    let species = config.species_params();
    let provider = provider_for(config, &initial)?;
    let policy = config.step_policy()?;
    let start = MomentState::new(initial.time, initial.moments()?);
    let mut pde = Vec::new();
    run(initial, provider.as_ref(), &policy, |s, e| {
        if e.output {
            pde.push(MomentState::new(s.time, s.moments()?));
        }
        Ok(())
    })?;
    let dt = moment_time_step(&start.species, &species, &config.constants, config.run.output_every)?;
    let ode = integrate_moments(
        &start,
        &species,
        &config.constants,
        config.run.t_end,
        dt,
        config.run.output_every,
    )?;
    let deviation = compare_trajectories(&pde, &ode)?;
    Ok(OracleComparison { pde, ode, deviation })
}

pub fn cmd_oracle(path: &Path) -> u8 {
    let (config, initial) = match load(path) {
        Ok(x) => x,
        Err(code) => return code,
    };
    if let Err(e) = prepare_output(&config).and_then(|_| write_manifest(&config, "# command: oracle")) {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    let cmp = match oracle_comparison(&config, initial) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let csv_path = config.output.path("oracle.csv");
    let mut header = vec!["source".to_string(), "t".to_string()];
    for l in labels(&config) {
        for q in ["n", "u_x", "u_y", "u_z", "T"] {
            header.push(format!("{q}_{l}"));
        }
    }
    let written = CsvWriter::create(&csv_path, &header).and_then(|mut w| {
        for (source, series) in [("pde", &cmp.pde), ("ode", &cmp.ode)] {
            for m in series.iter() {
                let mut v = vec![m.time];
                for s in &m.species {
                    v.extend([
                        s.number_density,
                        s.bulk_velocity[0],
                        s.bulk_velocity[1],
                        s.bulk_velocity[2],
                        s.temperature,
                    ]);
                }
                w.row(&[source], &v)?;
            }
        }
        Ok(())
    });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    for (l, d) in labels(&config).iter().zip(&cmp.deviation.species) {
        println!(
            "species {l}: max relative deviation n {:.3e}  u ({:.3e}, {:.3e}, {:.3e})  T {:.3e}",
            d.density, d.velocity[0], d.velocity[1], d.velocity[2], d.temperature
        );
    }
    let worst = cmp.deviation.max();
    let threshold = config.run.oracle_threshold;
    if worst <= threshold {
        println!("oracle: pass (max deviation {worst:.3e} <= {threshold:.3e})");
        EXIT_OK
    } else {
        println!("oracle: FAIL (max deviation {worst:.3e} > {threshold:.3e})");
        EXIT_THRESHOLD
    }
}
