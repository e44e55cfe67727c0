//! Run configuration: a TOML file with `[grid]`, `[constants]`,
//! `[species.<label>]`, `[run]`, `[output]` and an optional `[check]`
//! section. Every problem is collected with its key path before anything
//! is reported, and unknown keys are errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::coefficients::TruncationReading;
use crate::collision::FluxScheme;
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::integrator::{Scheme, StepPolicy, TimeStep};
use crate::model::{
    init_maxwellian_state, recommended_extent, MaxwellianParams, PhysicalConstants, PlasmaState, SpeciesParams,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesConfig {
    pub params: SpeciesParams,
    pub initial: MaxwellianParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub scheme: Scheme,
    pub dt: TimeStep,
    pub safety: f64,
    pub t_end: f64,
    pub output_every: f64,
    /// Simulation time between snapshots; 0 disables them.
    pub snapshot_every: f64,
    /// Truncation level of the regularised coefficients; 0 disables it.
    pub epsilon_truncation: f64,
    pub seed: u64,
    pub flux: FluxScheme,
    pub truncation_reading: TruncationReading,
    /// Largest accepted relative deviation for the `oracle` command.
    pub oracle_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub prefix: String,
}

impl OutputSection {
    /// `<directory>/<prefix>_<name>`, or `<directory>/<name>` without prefix.
    pub fn path(&self, name: &str) -> PathBuf {
        if self.prefix.is_empty() {
            self.directory.join(name)
        } else {
            self.directory.join(format!("{}_{name}", self.prefix))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckSection {
    /// Test hook: perturb one mixture temperature so the symmetry suite fails.
    pub inject_symmetry_fault: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_per_axis: usize,
    pub extent: f64,
    pub constants: PhysicalConstants,
    pub species: Vec<SpeciesConfig>,
    pub run: RunSection,
    pub output: OutputSection,
    pub check: CheckSection,
}

struct Reader {
    errors: Vec<String>,
}

impl Reader {
    fn fail(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn unknown_keys(&mut self, table: &Table, prefix: &str, known: &[&str]) {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                self.fail(&format!("{prefix}{key}"), "unknown key");
            }
        }
    }

    fn section<'a>(&mut self, root: &'a Table, name: &str, required: bool) -> Option<&'a Table> {
        match root.get(name) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.fail(name, "expected a section");
                None
            }
            None => {
                if required {
                    self.fail(name, "missing section");
                }
                None
            }
        }
    }

    fn number(&mut self, table: &Table, path: &str, key: &str) -> Option<f64> {
        match table.get(key) {
            Some(Value::Float(x)) => Some(*x),
            Some(Value::Integer(x)) => Some(*x as f64),
            Some(_) => {
                self.fail(&format!("{path}.{key}"), "expected a number");
                None
            }
            None => None,
        }
    }

    fn required_number(&mut self, table: &Table, path: &str, key: &str) -> Option<f64> {
        let v = self.number(table, path, key);
        if v.is_none() && !table.contains_key(key) {
            self.fail(&format!("{path}.{key}"), "missing key");
        }
        v
    }

    fn check(&mut self, path: &str, ok: bool, msg: &str) {
        if !ok {
            self.fail(path, msg);
        }
    }

    fn string<'a>(&mut self, table: &'a Table, path: &str, key: &str) -> Option<&'a str> {
        match table.get(key) {
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.fail(&format!("{path}.{key}"), "expected a string");
                None
            }
            None => None,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![format!("syntax: {}", e.message())]))?;
        let mut r = Reader { errors: Vec::new() };
        r.unknown_keys(&root, "", &["grid", "constants", "species", "run", "output", "check"]);

        let empty = Table::new();
        let grid = r.section(&root, "grid", true).unwrap_or(&empty);
        r.unknown_keys(grid, "grid.", &["n_per_axis", "extent"]);
        let n_per_axis = match grid.get("n_per_axis") {
            Some(Value::Integer(n)) if *n >= 8 && n % 2 == 0 => *n as usize,
            Some(Value::Integer(_)) => {
                r.fail("grid.n_per_axis", "must be an even integer >= 8");
                8
            }
            Some(_) => {
                r.fail("grid.n_per_axis", "expected an integer");
                8
            }
            None => {
                r.fail("grid.n_per_axis", "missing key");
                8
            }
        };
        let extent = r.number(grid, "grid", "extent");
        if let Some(l) = extent {
            r.check("grid.extent", l.is_finite() && l > 0.0, "must be positive");
        }

        let cons = r.section(&root, "constants", true).unwrap_or(&empty);
        r.unknown_keys(cons, "constants.", &["coulomb_log", "eps0", "gamma"]);
        let coulomb_log = r.required_number(cons, "constants", "coulomb_log").unwrap_or(1.0);
        r.check(
            "constants.coulomb_log",
            coulomb_log.is_finite() && coulomb_log > 0.0,
            "must be positive",
        );
        let eps0 = r.number(cons, "constants", "eps0").unwrap_or(1.0);
        r.check("constants.eps0", eps0.is_finite() && eps0 > 0.0, "must be positive");
        let gamma = r.required_number(cons, "constants", "gamma").unwrap_or(0.0);
        r.check("constants.gamma", gamma.is_finite(), "must be finite");

        let mut species = Vec::new();
        let sp_root = r.section(&root, "species", true).unwrap_or(&empty);
        if sp_root.is_empty() && root.contains_key("species") {
            r.fail("species", "at least one species is required");
        }
        for (label, value) in sp_root {
            let path = format!("species.{label}");
            let Value::Table(t) = value else {
                r.fail(&path, "expected a section");
                continue;
            };
            r.unknown_keys(t, &format!("{path}."), &["mass", "charge", "n", "u", "T"]);
            let mass = r.required_number(t, &path, "mass").unwrap_or(1.0);
            let charge = r.required_number(t, &path, "charge").unwrap_or(1.0);
            let n = r.required_number(t, &path, "n").unwrap_or(1.0);
            let temp = r.required_number(t, &path, "T").unwrap_or(1.0);
            r.check(
                &format!("{path}.mass"),
                mass.is_finite() && mass > 0.0,
                "must be positive",
            );
            r.check(
                &format!("{path}.charge"),
                charge.is_finite() && charge != 0.0,
                "must be nonzero",
            );
            r.check(&format!("{path}.n"), n.is_finite() && n > 0.0, "must be positive");
            r.check(&format!("{path}.T"), temp.is_finite() && temp > 0.0, "must be positive");
            let mut u = [0.0; 3];
            match t.get("u") {
                Some(Value::Array(a)) if a.len() == 3 => {
                    for (k, x) in a.iter().enumerate() {
                        match x {
                            Value::Float(x) if x.is_finite() => u[k] = *x,
                            Value::Integer(x) => u[k] = *x as f64,
                            _ => r.fail(&format!("{path}.u[{k}]"), "expected a finite number"),
                        }
                    }
                }
                Some(_) => r.fail(&format!("{path}.u"), "expected an array of 3 numbers"),
                None => r.fail(&format!("{path}.u"), "missing key"),
            }
            if let Ok(params) = SpeciesParams::new(label.clone(), mass, charge) {
                species.push(SpeciesConfig {
                    params,
                    initial: MaxwellianParams::new(n, u, temp),
                });
            }
        }

        let run = r.section(&root, "run", true).unwrap_or(&empty);
        r.unknown_keys(
            run,
            "run.",
            &[
                "scheme",
                "dt",
                "safety",
                "t_end",
                "output_every",
                "snapshot_every",
                "epsilon_truncation",
                "seed",
                "flux",
                "truncation_reading",
                "oracle_threshold",
            ],
        );
        let scheme = match r.string(run, "run", "scheme") {
            None => Scheme::default(),
            Some(s) => Scheme::parse(s).unwrap_or_else(|| {
                r.fail(
                    "run.scheme",
                    format!("unknown scheme {s:?}; expected \"explicit-rk4\" or \"semi-implicit-split\""),
                );
                Scheme::default()
            }),
        };
        let dt = match run.get("dt") {
            None => TimeStep::Auto,
            Some(Value::String(s)) if s == "auto" => TimeStep::Auto,
            Some(Value::Float(x)) if *x > 0.0 && x.is_finite() => TimeStep::Fixed(*x),
            Some(Value::Integer(x)) if *x > 0 => TimeStep::Fixed(*x as f64),
            Some(_) => {
                r.fail("run.dt", "must be a positive number or \"auto\"");
                TimeStep::Auto
            }
        };
        let safety = r.number(run, "run", "safety").unwrap_or(0.8);
        r.check("run.safety", safety > 0.0 && safety <= 1.0, "must lie in (0, 1]");
        let t_end = r.required_number(run, "run", "t_end").unwrap_or(0.0);
        r.check("run.t_end", t_end.is_finite() && t_end >= 0.0, "must be nonnegative");
        let default_cadence = if t_end > 0.0 { t_end / 10.0 } else { 1.0 };
        let output_every = r.number(run, "run", "output_every").unwrap_or(default_cadence);
        r.check(
            "run.output_every",
            output_every.is_finite() && output_every > 0.0,
            "must be positive",
        );
        let snapshot_every = r.number(run, "run", "snapshot_every").unwrap_or(0.0);
        r.check(
            "run.snapshot_every",
            snapshot_every.is_finite() && snapshot_every >= 0.0,
            "must be nonnegative",
        );
        let epsilon_truncation = r.number(run, "run", "epsilon_truncation").unwrap_or(0.0);
        r.check(
            "run.epsilon_truncation",
            (0.0..1.0).contains(&epsilon_truncation),
            "must lie in [0, 1)",
        );
        let seed = match run.get("seed") {
            None => 0,
            Some(Value::Integer(s)) if *s >= 0 => *s as u64,
            Some(_) => {
                r.fail("run.seed", "expected a nonnegative integer");
                0
            }
        };
        let flux = match r.string(run, "run", "flux") {
            None | Some("conservative") => FluxScheme::Conservative,
            Some("plain") => FluxScheme::Plain,
            Some(s) => {
                r.fail(
                    "run.flux",
                    format!("unknown flux {s:?}; expected \"conservative\" or \"plain\""),
                );
                FluxScheme::Conservative
            }
        };
        let truncation_reading = match r.string(run, "run", "truncation_reading") {
            None | Some("consistent") => TruncationReading::Consistent,
            Some("literal") => TruncationReading::Literal,
            Some(s) => {
                r.fail(
                    "run.truncation_reading",
                    format!("unknown reading {s:?}; expected \"consistent\" or \"literal\""),
                );
                TruncationReading::Consistent
            }
        };
        let oracle_threshold = r.number(run, "run", "oracle_threshold").unwrap_or(0.01);
        r.check(
            "run.oracle_threshold",
            oracle_threshold.is_finite() && oracle_threshold > 0.0,
            "must be positive",
        );

        let out = r.section(&root, "output", false).unwrap_or(&empty);
        r.unknown_keys(out, "output.", &["directory", "prefix"]);
        let directory = PathBuf::from(r.string(out, "output", "directory").unwrap_or("."));
        let prefix = r.string(out, "output", "prefix").unwrap_or("").to_string();
        r.check(
            "output.prefix",
            !prefix.contains(['/', '\\']),
            "must not contain path separators",
        );

        let chk = r.section(&root, "check", false).unwrap_or(&empty);
        r.unknown_keys(chk, "check.", &["inject_symmetry_fault"]);
        let inject_symmetry_fault = match chk.get("inject_symmetry_fault") {
            None => false,
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                r.fail("check.inject_symmetry_fault", "expected a boolean");
                false
            }
        };

        if !r.errors.is_empty() {
            return Err(Error::Config(r.errors));
        }
        let params: Vec<SpeciesParams> = species.iter().map(|s| s.params.clone()).collect();
        let initial: Vec<MaxwellianParams> = species.iter().map(|s| s.initial).collect();
        let extent = extent.unwrap_or_else(|| recommended_extent(&params, &initial));
        Ok(Self {
            n_per_axis,
            extent,
            constants: PhysicalConstants::new(coulomb_log, eps0, gamma)?,
            species,
            run: RunSection {
                scheme,
                dt,
                safety,
                t_end,
                output_every,
                snapshot_every,
                epsilon_truncation,
                seed,
                flux,
                truncation_reading,
                oracle_threshold,
            },
            output: OutputSection { directory, prefix },
            check: CheckSection { inject_symmetry_fault },
        })
    }

    pub fn grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.n_per_axis, self.extent)
    }

    pub fn species_params(&self) -> Vec<SpeciesParams> {
        self.species.iter().map(|s| s.params.clone()).collect()
    }

    pub fn initial_state(&self) -> Result<PlasmaState> {
        let initial: Vec<MaxwellianParams> = self.species.iter().map(|s| s.initial).collect();
        init_maxwellian_state(&self.grid()?, &self.species_params(), &initial)
    }

    pub fn step_policy(&self) -> Result<StepPolicy> {
        Ok(
            StepPolicy::new(self.run.scheme, self.run.dt, self.run.t_end, self.run.output_every)?
                .with_safety(self.run.safety)?
                .with_flux(self.run.flux),
        )
    }

    /// The configuration with every default filled in, as TOML.
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let f = |x: f64| format!("{x:?}");
        let _ = writeln!(
            s,
            "[grid]\nn_per_axis = {}\nextent = {}\n",
            self.n_per_axis,
            f(self.extent)
        );
        let _ = writeln!(
            s,
            "[constants]\ncoulomb_log = {}\neps0 = {}\ngamma = {}\n",
            f(self.constants.coulomb_log),
            f(self.constants.vacuum_permittivity),
            f(self.constants.gamma)
        );
        for sp in &self.species {
            let u = sp.initial.velocity;
            let _ = writeln!(
                s,
                "[species.{}]\nmass = {}\ncharge = {}\nn = {}\nu = [{}, {}, {}]\nT = {}\n",
                quote_key(&sp.params.label),
                f(sp.params.mass),
                f(sp.params.charge),
                f(sp.initial.density),
                f(u[0]),
                f(u[1]),
                f(u[2]),
                f(sp.initial.temperature)
            );
        }
        let r = &self.run;
        let dt = match r.dt {
            TimeStep::Auto => "\"auto\"".to_string(),
            TimeStep::Fixed(x) => f(x),
        };
        let flux = match r.flux {
            FluxScheme::Conservative => "conservative",
            FluxScheme::Plain => "plain",
        };
        let reading = match r.truncation_reading {
            TruncationReading::Consistent => "consistent",
            TruncationReading::Literal => "literal",
        };
        let _ = writeln!(
            s,
            "[run]\nscheme = \"{}\"\ndt = {dt}\nsafety = {}\nt_end = {}\noutput_every = {}\nsnapshot_every = {}\nepsilon_truncation = {}\nseed = {}\nflux = \"{flux}\"\ntruncation_reading = \"{reading}\"\noracle_threshold = {}\n",
            r.scheme.name(),
            f(r.safety),
            f(r.t_end),
            f(r.output_every),
            f(r.snapshot_every),
            f(r.epsilon_truncation),
            r.seed,
            f(r.oracle_threshold)
        );
        let _ = writeln!(
            s,
            "[output]\ndirectory = {}\nprefix = {}",
            Value::String(self.output.directory.display().to_string()),
            Value::String(self.output.prefix.clone())
        );
        if self.check.inject_symmetry_fault {
            let _ = writeln!(s, "\n[check]\ninject_symmetry_fault = true");
        }
        s
    }
}

fn quote_key(label: &str) -> String {
    if !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        label.to_string()
    } else {
        Value::String(label.to_string()).to_string()
    }
}
