//! The discrete operator and the moment equations against pointwise
//! evaluations of the continuous operator.

use std::f64::consts::PI;

use fpls::coefficients::{compute_coefficients, CoefficientSet};
use fpls::collision::{apply_collision_operator, FluxScheme};
use fpls::grid::VelocityGrid;
use fpls::integrator::{run, Frozen, Scheme, StepPolicy, TimeStep};
use fpls::model::{init_maxwellian_state, MaxwellianParams, PhysicalConstants, PlasmaState, SpeciesParams};
use fpls::moments::SpeciesMoments;
use fpls::oracle::{moment_derivative, MomentState};
use fpls::vec3::{self, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Isotropic Gaussian blob with amplitude `weight`.
#[derive(Clone, Copy)]
struct Blob {
    weight: f64,
    center: Vec3,
    variance: f64,
}

impl Blob {
    fn value(&self, v: Vec3) -> f64 {
        let d2 = vec3::norm2(vec3::sub(v, self.center));
        self.weight * (2.0 * PI * self.variance).powf(-1.5) * (-d2 / (2.0 * self.variance)).exp()
    }

    fn gradient(&self, v: Vec3) -> Vec3 {
        vec3::scale(vec3::sub(v, self.center), -self.value(v) / self.variance)
    }

    fn laplacian(&self, v: Vec3) -> f64 {
        let d2 = vec3::norm2(vec3::sub(v, self.center));
        let s = self.variance;
        (d2 / (s * s) - 3.0 / s) * self.value(v)
    }
}

/// Continuous relaxation term `c (lap f + (m/T) div((v - u) f))` evaluated
/// pointwise for a mixture of blobs.
fn continuous_term(blobs: &[Blob], c: f64, mass: f64, u: Vec3, t: f64, v: Vec3) -> f64 {
    let a = mass / t;
    blobs
        .iter()
        .map(|b| {
            let drift = vec3::dot(vec3::sub(v, u), b.gradient(v));
            c * (b.laplacian(v) + a * (3.0 * b.value(v) + drift))
        })
        .sum()
}

fn random_blobs(rng: &mut ChaCha8Rng, mass: f64) -> Vec<Blob> {
    (0..2)
        .map(|_| Blob {
            weight: rng.gen_range(0.2..1.5),
            center: [
                rng.gen_range(-0.8..0.8),
                rng.gen_range(-0.8..0.8),
                rng.gen_range(-0.8..0.8),
            ],
            variance: rng.gen_range(0.4..1.6) / mass,
        })
        .collect()
}

#[test]
fn moment_derivatives_match_quadrature_of_continuous_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = VelocityGrid::new(72, 18.0).unwrap();
    for trial in 0..4 {
        let species: Vec<SpeciesParams> = (0..2)
            .map(|k| {
                SpeciesParams::new(
                    format!("s{k}"),
                    rng.gen_range(0.6..2.5),
                    if k == 0 { 1.0 } else { -1.3 },
                )
                .unwrap()
            })
            .collect();
        let constants = PhysicalConstants::new(10.0, 1.0, rng.gen_range(-2.0..3.0)).unwrap();
        let blobs: Vec<Vec<Blob>> = species.iter().map(|sp| random_blobs(&mut rng, sp.mass)).collect();

        // Moments of each mixture, in closed form.
        let moments: Vec<SpeciesMoments> = blobs
            .iter()
            .zip(&species)
            .map(|(bs, sp)| {
                let n: f64 = bs.iter().map(|b| b.weight).sum();
                let mut p = vec3::ZERO;
                let mut e = 0.0;
                for b in bs {
                    p = vec3::add(p, vec3::scale(b.center, b.weight));
                    e += b.weight * (3.0 * b.variance + vec3::norm2(b.center));
                }
                let u = vec3::scale(p, 1.0 / n);
                SpeciesMoments::new(sp.mass, n, u, sp.mass * (e / n - vec3::norm2(u)) / 3.0)
            })
            .collect();
        let co = compute_coefficients(&moments, &species, &constants).unwrap();
        let d = moment_derivative(&MomentState::new(0.0, moments.clone()), &species, &constants).unwrap();

        for i in 0..2 {
            let mass = species[i].mass;
            let q = grid.sample(|v| {
                (0..2)
                    .map(|j| continuous_term(&blobs[i], co.c(j, i), mass, co.u(j, i), co.t(j, i), v))
                    .sum()
            });
            let n = moments[i].number_density;
            let rate_scale: f64 = (0..2).map(|j| co.c(j, i) * mass / co.t(j, i)).sum();
            let du: Vec3 = [0, 1, 2].map(|k| grid.quadrature_weighted(&q, |v| v[k]) / n);
            let de = grid.quadrature_weighted(&q, vec3::norm2);
            let u_scale = rate_scale * (vec3::norm(moments[i].bulk_velocity) + 1.0);
            let e_scale =
                rate_scale * moments[i].second_moment(mass) + 6.0 * n * (0..2).map(|j| co.c(j, i)).sum::<f64>();
            let err_u = vec3::norm(vec3::sub(du, d.velocity[i])) / u_scale;
            let err_e = (de - d.second_moment[i]).abs() / e_scale;
            assert!(
                grid.quadrature(&q).abs() < 1e-8 * n * rate_scale,
                "trial {trial}: continuous term is not mass-free"
            );
            assert!(
                err_u < 1e-4,
                "trial {trial} species {i}: velocity rate off by {err_u:e}"
            );
            assert!(
                err_e < 1e-4,
                "trial {trial} species {i}: second-moment rate off by {err_e:e}"
            );
        }
    }
}

fn mixture(n: usize) -> PlasmaState {
    let grid = VelocityGrid::new(n, 7.0).unwrap();
    init_maxwellian_state(
        &grid,
        &[
            SpeciesParams::new("a", 1.0, 1.0).unwrap(),
            SpeciesParams::new("b", 3.0, 1.0).unwrap(),
        ],
        &[
            MaxwellianParams::new(1.0, [0.4, 0.0, 0.1], 1.0),
            MaxwellianParams::new(0.7, [-0.2, 0.3, 0.0], 1.6),
        ],
    )
    .unwrap()
}

/// Largest deviation of the discrete momentum and energy rates from the
/// moment equations, relative to the rate scale.
fn rate_defect(state: &PlasmaState, flux: FluxScheme) -> f64 {
    let constants = PhysicalConstants::new(8.0 * PI, 1.0, 0.0).unwrap();
    let moments = state.moments().unwrap();
    let co = compute_coefficients(&moments, &state.species, &constants).unwrap();
    let d = moment_derivative(&MomentState::new(0.0, moments.clone()), &state.species, &constants).unwrap();
    let rates = apply_collision_operator(state, &co, flux).unwrap();
    let g = &state.grid;
    let mut worst = 0.0f64;
    for (i, r) in rates.iter().enumerate() {
        let n = moments[i].number_density;
        let scale = vec3::norm(d.velocity[i]).max(d.second_moment[i].abs() / n);
        let du: Vec3 = [0, 1, 2].map(|k| g.quadrature_weighted(r, |v| v[k]) / n);
        let de = g.quadrature_weighted(r, vec3::norm2) / n;
        worst = worst.max(vec3::norm(vec3::sub(du, d.velocity[i])) / scale);
        worst = worst.max((de - d.second_moment[i] / n).abs() / scale);
    }
    worst
}

#[test]
fn plain_flux_moment_rates_converge_at_second_order() {
    let e: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| rate_defect(&mixture(n), FluxScheme::Plain))
        .collect();
    let r1 = e[0] / e[1];
    let r2 = e[1] / e[2];
    assert!(
        (2.8..4.8).contains(&r1) && (3.5..4.5).contains(&r2),
        "defects {e:?}, ratios {r1} {r2}"
    );
}

#[test]
fn conservative_flux_moment_rates_match_on_coarse_grids() {
    for n in [16, 32] {
        let d = rate_defect(&mixture(n), FluxScheme::Conservative);
        assert!(d < 1e-9, "n = {n}: {d:e}");
    }
}

/// Runs a frozen-coefficient relaxation with a fixed explicit step.
fn frozen_final(dt: f64) -> PlasmaState {
    let state = mixture(16);
    let co = CoefficientSet::uniform(2, 1.3, [0.1, 0.0, 0.0], 1.2);
    let policy = StepPolicy::new(Scheme::ExplicitRk4, TimeStep::Fixed(dt), 0.4, 0.4).unwrap();
    run(state, &Frozen(co), &policy, |_, _| Ok(())).unwrap().0
}

fn field_distance(a: &PlasmaState, b: &PlasmaState) -> f64 {
    a.distributions
        .iter()
        .zip(&b.distributions)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn explicit_scheme_is_fourth_order_in_time() {
    let reference = frozen_final(0.4 / 256.0);
    let coarse = frozen_final(0.4 / 32.0);
    let fine = frozen_final(0.4 / 64.0);
    let ratio = field_distance(&coarse, &reference) / field_distance(&fine, &reference);
    assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn semi_implicit_scheme_is_first_order_in_time() {
    let run_si = |dt: f64| {
        let policy = StepPolicy::new(Scheme::SemiImplicitSplit, TimeStep::Fixed(dt), 0.4, 0.4).unwrap();
        let co = CoefficientSet::uniform(2, 1.3, [0.1, 0.0, 0.0], 1.2);
        run(mixture(16), &Frozen(co), &policy, |_, _| Ok(())).unwrap().0
    };
    let reference = frozen_final(0.4 / 256.0);
    let ratio = field_distance(&run_si(0.4 / 16.0), &reference) / field_distance(&run_si(0.4 / 32.0), &reference);
    assert!((1.7..2.3).contains(&ratio), "error ratio {ratio}");
}
