//! Property-based invariants of the spectral toolbox.

use heatlab::besov::{besov_value, random_band_limited, BesovIndex};
use heatlab::cutoffs::{build_cutoffs, heat_multiply, lp_block, verify_partition_of_unity, TransitionProfile};
use heatlab::grid::{Field, Grid};
use proptest::prelude::*;
use std::f64::consts::PI;

fn grid_1d() -> Grid {
    Grid::new(1, 128, 2.0 * PI).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Semigroup law: two short hops equal one long hop.
    #[test]
    fn heat_semigroup_law(s in 1e-4f64..0.5, t in 1e-4f64..0.5, nu in 0.1f64..4.0, seed in 0u64..1000) {
        let grid = grid_1d();
        let mut rng = heatlab::rng::derive(seed, &[1]);
        let u = random_band_limited(grid, 2.0, 40.0, &mut rng);
        let a = heat_multiply(&heat_multiply(&u, s, nu).unwrap(), t, nu).unwrap();
        let b = heat_multiply(&u, s + t, nu).unwrap();
        let scale = u.sup_norm().max(1e-300);
        prop_assert!(a.sub(&b).sup_norm() / scale < 1e-12);
    }

    /// Real input stays real through multiplier operations: the spectrum
    /// keeps Hermitian symmetry.
    #[test]
    fn multipliers_preserve_reality(seed in 0u64..1000, t in 0.0f64..0.2) {
        let grid = grid_1d();
        let cutoffs = build_cutoffs(TransitionProfile::default(), &grid).unwrap();
        let mut rng = heatlab::rng::derive(seed, &[2]);
        let u = random_band_limited(grid, 1.0, 50.0, &mut rng);
        let v = heat_multiply(&u, t, 1.0).unwrap();
        prop_assert!(v.hermitian_defect() < 1e-12);
        let w = lp_block(&u, 3, &cutoffs).unwrap();
        prop_assert!(w.hermitian_defect() < 1e-12);
    }

    /// Distant Littlewood-Paley blocks annihilate each other.
    #[test]
    fn distant_blocks_vanish(seed in 0u64..1000) {
        let grid = grid_1d();
        let cutoffs = build_cutoffs(TransitionProfile::default(), &grid).unwrap();
        let mut rng = heatlab::rng::derive(seed, &[3]);
        let u = random_band_limited(grid, 1.0, 50.0, &mut rng);
        for j in cutoffs.bands() {
            for jp in cutoffs.bands() {
                if (j - jp).abs() >= 2 {
                    let twice = lp_block(&lp_block(&u, j, &cutoffs).unwrap(), jp, &cutoffs).unwrap();
                    prop_assert!(twice.sup_norm() / u.sup_norm().max(1e-300) < 1e-12);
                }
            }
        }
    }

    /// Besov triangle inequality and l^q monotonicity on random fields.
    #[test]
    fn besov_norm_axioms(seed in 0u64..1000, s in -0.5f64..1.5, p in 1.0f64..4.0) {
        let grid = grid_1d();
        let cutoffs = build_cutoffs(TransitionProfile::default(), &grid).unwrap();
        let mut rng = heatlab::rng::derive(seed, &[4]);
        let u = random_band_limited(grid, 2.0, 40.0, &mut rng);
        let v = random_band_limited(grid, 2.0, 40.0, &mut rng);
        let idx = |q: f64| BesovIndex::homogeneous(s, p, q);
        let n_inf = besov_value(&u, &idx(f64::INFINITY), &cutoffs);
        let n_2 = besov_value(&u, &idx(2.0), &cutoffs);
        let n_1 = besov_value(&u, &idx(1.0), &cutoffs);
        prop_assert!(n_inf <= n_2 + 1e-12 && n_2 <= n_1 + 1e-12);
        let lhs = besov_value(&u.add(&v), &idx(1.0), &cutoffs);
        prop_assert!(lhs <= n_1 + besov_value(&v, &idx(1.0), &cutoffs) + 1e-9);
    }

    /// Partition of unity across the admissible grid matrix.
    #[test]
    fn partition_of_unity_grid_matrix(np in prop::sample::select(vec![64usize, 128, 256]),
                                      dim in 1usize..=2) {
        let grid = Grid::new(dim, np, 2.0 * PI).unwrap();
        let cutoffs = build_cutoffs(TransitionProfile::default(), &grid).unwrap();
        prop_assert!(verify_partition_of_unity(&cutoffs, &grid) <= 1e-10);
    }

    /// Mass conservation and L2 contraction of the heat multiplier.
    #[test]
    fn heat_contracts(seed in 0u64..1000, t in 0.0f64..2.0) {
        let grid = grid_1d();
        let mut rng = heatlab::rng::derive(seed, &[5]);
        let u = random_band_limited(grid, 1.0, 50.0, &mut rng)
            .add(&Field::from_fn(grid, |_| 0.7));
        let v = heat_multiply(&u, t, 1.3).unwrap();
        prop_assert!((v.mean() - u.mean()).abs() < 1e-12 * u.mean().abs().max(1.0));
        prop_assert!(v.lp_norm(2.0) <= u.lp_norm(2.0) * (1.0 + 1e-12));
    }
}
