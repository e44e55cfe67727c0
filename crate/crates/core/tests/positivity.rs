use fpls::grid::VelocityGrid;
use fpls::integrator::{run, Scheme, SelfConsistent, StepPolicy, TimeStep};
use fpls::model::{init_maxwellian_state, recommended_extent, MaxwellianParams, PhysicalConstants, SpeciesParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random mixtures on coarse grids: every step must keep the fields
/// nonnegative, mass fixed and the pair temperatures positive.
#[test]
fn randomized_runs_stay_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..8 {
        let s = rng.gen_range(2..=3);
        let species: Vec<SpeciesParams> = (0..s)
            .map(|k| SpeciesParams::new(format!("s{k}"), rng.gen_range(0.5..4.0), rng.gen_range(0.5..2.0)).unwrap())
            .collect();
        let params: Vec<MaxwellianParams> = (0..s)
            .map(|_| {
                MaxwellianParams::new(
                    rng.gen_range(0.3..2.0),
                    [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0],
                    rng.gen_range(0.3..2.0),
                )
            })
            .collect();
        let extent = recommended_extent(&species, &params);
        let grid = VelocityGrid::new(12, extent).unwrap();
        let mut state = init_maxwellian_state(&grid, &species, &params).unwrap();
        // Hard edges: zero out a slab of one species.
        for (idx, f) in state.distributions[0].iter_mut().enumerate() {
            if grid.unravel(idx)[0] < 5 {
                *f = 0.0;
            }
        }
        let scheme = if trial % 2 == 0 {
            Scheme::ExplicitRk4
        } else {
            Scheme::SemiImplicitSplit
        };
        let constants = PhysicalConstants::new(10.0, 1.0, rng.gen_range(-3.0..3.0)).unwrap();
        let provider = SelfConsistent { constants };
        let policy = StepPolicy::new(scheme, TimeStep::Auto, 0.5, 0.25).unwrap();
        let masses: Vec<f64> = state.distributions.iter().map(|f| grid.quadrature(f)).collect();
        let (last, summary) = run(state, &provider, &policy, |s, _| {
            for (f, m0) in s.distributions.iter().zip(&masses) {
                assert!(f.iter().all(|&x| x >= 0.0), "trial {trial}: negative value");
                let m = grid.quadrature(f);
                assert!(
                    (m - m0).abs() <= 1e-10 * m0,
                    "trial {trial}: mass drift {}",
                    (m - m0) / m0
                );
            }
            Ok(())
        })
        .unwrap_or_else(|e| panic!("trial {trial} ({}): {e}", scheme.name()));
        assert!(summary.min_pair_temperature > 0.0);
        assert!((last.time - 0.5).abs() < 1e-12);
        assert!(
            summary.clamped_cells as f64 <= 1e-4 * summary.cells_touched as f64,
            "trial {trial}: {summary:?}"
        );
    }
}
