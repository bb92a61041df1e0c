//! Dyadic cutoffs and the Littlewood-Paley / heat-semigroup multipliers.
//!
//! The radial profile `chi` is 1 on [0, 1/2], 0 on [1, inf) and descends
//! through a polynomial smoothstep in between; `phi(rho) = chi(rho/2) -
//! chi(rho)` is the annular band profile. Band `j` filters frequencies
//! around `2^j` via `phi(2^{-j}|xi|)`.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Smoothness-parameterized transition bump for the `chi` profile.
///
/// `order` is the smoothstep order: the transition polynomial has vanishing
/// derivatives up to `order` at both ends, so `chi` is C^order. Order 2 is
/// the quintic smoothstep used throughout the lab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProfile {
    pub order: usize,
}

impl Default for TransitionProfile {
    fn default() -> Self {
        TransitionProfile { order: 2 }
    }
}

impl TransitionProfile {
    /// Smoothstep S(t) on [0,1]: 0 at 0, 1 at 1, C^order at both ends.
    pub fn smoothstep(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match self.order {
            0 => t,
            1 => t * t * (3.0 - 2.0 * t),
            2 => t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
            o => {
                // General form: t^{o+1} * sum_k C(o+k,k) C(2o+1,o-k) (-t)^k.
                let o = o as i64;
                let mut acc = 0.0;
                for k in 0..=o {
                    let c1 = binom(o + k, k);
                    let c2 = binom(2 * o + 1, o - k);
                    acc += c1 * c2 * (-t).powi(k as i32);
                }
                acc * t.powi((o + 1) as i32)
            }
        }
    }
}

fn binom(n: i64, k: i64) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// The (chi, phi) multiplier pair together with the band range the grid can
/// resolve.
#[derive(Debug, Clone)]
pub struct DyadicCutoffs {
    profile: TransitionProfile,
    j_min: i32,
    j_max: i32,
    /// Fault-injection knob for the verification harness: scales `phi`
    /// away from the telescoping identity. 1.0 in every real experiment.
    phi_scale: f64,
}

impl DyadicCutoffs {
    /// Low-frequency profile: 1 on [0, 1/2], 0 on [1, inf), nonincreasing.
    pub fn chi(&self, rho: f64) -> f64 {
        1.0 - self.profile.smoothstep((rho - 0.5) * 2.0)
    }

    /// Band profile `chi(rho/2) - chi(rho)`, supported in [1/2, 2].
    pub fn phi(&self, rho: f64) -> f64 {
        self.phi_scale * (self.chi(rho / 2.0) - self.chi(rho))
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn bands(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    pub fn contains_band(&self, j: i32) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    /// Break the telescoping identity on purpose (negative controls).
    pub fn with_phi_scale(mut self, scale: f64) -> Self {
        self.phi_scale = scale;
        self
    }
}

/// Choose the dyadic band range a grid can host and wrap the profile pair.
///
/// `2^{j_max+1}` stays at or below the per-axis Nyquist frequency and
/// `2^{j_min-1}` at or above the fundamental frequency `2*pi/L`.
pub fn build_cutoffs(profile: TransitionProfile, grid: &Grid) -> Result<DyadicCutoffs> {
    let slack = 1.0 + 1e-12;
    let j_max = (grid.nyquist_frequency() * slack).log2().floor() as i64 - 1;
    let j_min = (grid.fundamental_frequency() / slack).log2().ceil() as i64 + 1;
    let bands = j_max - j_min + 1;
    if bands < 3 {
        return Err(Error::InsufficientSpectralRange { bands });
    }
    Ok(DyadicCutoffs {
        profile,
        j_min: j_min as i32,
        j_max: j_max as i32,
        phi_scale: 1.0,
    })
}

/// Littlewood-Paley block: multiply the spectrum by `phi(2^{-j}|xi|)`.
pub fn lp_block(u: &Field, j: i32, cutoffs: &DyadicCutoffs) -> Result<Field> {
    if !cutoffs.contains_band(j) {
        return Err(Error::BandOutsideResolution {
            j,
            j_min: cutoffs.j_min,
            j_max: cutoffs.j_max,
        });
    }
    Ok(lp_block_unchecked(u, j, cutoffs))
}

/// Same multiplier without the range check. Exact on the lattice for any
/// `j`; used internally for tail bookkeeping outside the resolvable range.
pub fn lp_block_unchecked(u: &Field, j: i32, cutoffs: &DyadicCutoffs) -> Field {
    let scale = (-j as f64).exp2();
    u.apply_radial_multiplier(|rho| cutoffs.phi(scale * rho))
}

/// Low-frequency cutoff: multiply the spectrum by `chi(2^{-k}|xi|)`.
pub fn low_freq(u: &Field, k: i32, cutoffs: &DyadicCutoffs) -> Result<Field> {
    if k > cutoffs.j_max + 1 {
        return Err(Error::BandOutsideResolution {
            j: k,
            j_min: cutoffs.j_min,
            j_max: cutoffs.j_max + 1,
        });
    }
    let scale = (-k as f64).exp2();
    Ok(u.apply_radial_multiplier(|rho| cutoffs.chi(scale * rho)))
}

/// Max deviation of `sum_j phi(2^{-j}|xi|)` from 1 over lattice frequencies
/// in the covered annulus `2^{j_min-1} <= |xi| <= 2^{j_max}`.
///
/// The sum runs over a padded band window so the telescoping identity is
/// tested, not the truncation of the range.
pub fn verify_partition_of_unity(cutoffs: &DyadicCutoffs, grid: &Grid) -> f64 {
    let lo = ((cutoffs.j_min - 1) as f64).exp2();
    let hi = (cutoffs.j_max as f64).exp2();
    let mut worst = 0.0f64;
    for flat in 0..grid.total_points() {
        let rho = grid.freq_norm(flat);
        if rho < lo || rho > hi {
            continue;
        }
        let mut sum = 0.0;
        for j in (cutoffs.j_min - 2)..=(cutoffs.j_max + 2) {
            sum += cutoffs.phi((-j as f64).exp2() * rho);
        }
        worst = worst.max((sum - 1.0).abs());
    }
    worst
}

/// Tail of the partition sum above the covered annulus: max of
/// `sum_{j in range} phi(2^{-j}|xi|)` over lattice frequencies beyond
/// `2^{j_max+1}`. Reported, never a failure; it measures what the
/// truncated band range forgets.
pub fn partition_tail_above(cutoffs: &DyadicCutoffs, grid: &Grid) -> f64 {
    let hi = ((cutoffs.j_max + 1) as f64).exp2();
    let mut worst = 0.0f64;
    for flat in 0..grid.total_points() {
        let rho = grid.freq_norm(flat);
        if rho <= hi {
            continue;
        }
        let sum: f64 = cutoffs
            .bands()
            .map(|j| cutoffs.phi((-j as f64).exp2() * rho))
            .sum();
        worst = worst.max(sum);
    }
    worst
}

/// Exact periodic heat propagation `e^{nu t Laplacian}` as the Fourier
/// multiplier `exp(-nu t |xi|^2)`.
pub fn heat_multiply(u: &Field, t: f64, nu: f64) -> Result<Field> {
    if t < 0.0 {
        return Err(Error::BackwardHeat { t });
    }
    assert!(nu > 0.0, "viscosity must be positive");
    Ok(u.apply_radial_multiplier(|rho| (-nu * t * rho * rho).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn default_setup() -> (Grid, DyadicCutoffs) {
        let grid = Grid::new(1, 256, 2.0 * PI).unwrap();
        let cutoffs = build_cutoffs(TransitionProfile::default(), &grid).unwrap();
        (grid, cutoffs)
    }

    fn mode(grid: Grid, k: i64) -> Field {
        let base = grid.fundamental_frequency();
        Field::from_fn(grid, |x| (base * k as f64 * x[0]).sin())
    }

    #[test]
    fn profile_plateaus() {
        let (_, c) = default_setup();
        assert_eq!(c.chi(0.4), 1.0); // chi == 1 on [0, 1/2]
        assert_eq!(c.chi(1.3), 0.0); // chi == 0 beyond 1
        // phi(1.3) = chi(0.65) - chi(1.3) = chi(0.65)
        assert!((c.phi(1.3) - c.chi(0.65)).abs() < 1e-15);
        // Quintic smoothstep: chi(1.0) = 0 so phi(1.0) = chi(0.5) = 1.
        assert_eq!(c.chi(1.0), 0.0);
        assert!((c.phi(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chi_monotone_and_bounded() {
        let (_, c) = default_setup();
        let mut prev = f64::INFINITY;
        for i in 0..=10_000 {
            let rho = 2.0 * i as f64 / 10_000.0;
            let v = c.chi(rho);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15, "chi must be nonincreasing");
            let p = c.phi(rho);
            assert!((0.0..=1.0 + 1e-15).contains(&p));
            if !(0.5..=2.0).contains(&rho) {
                assert_eq!(p, 0.0, "phi supported in [1/2, 2], got phi({rho}) = {p}");
            }
            prev = v;
        }
    }

    #[test]
    fn telescoping_identity_on_dense_samples() {
        let (_, c) = default_setup();
        // sum_{k=a..b} phi(2^{-k} rho) telescopes to chi(2^{-(b+1)} rho) - chi(2^{-a} rho).
        let (a, b) = (-3i32, 5i32);
        for i in 1..=10_000 {
            let rho = 80.0 * i as f64 / 10_000.0;
            let sum: f64 = (a..=b).map(|k| c.phi((-k as f64).exp2() * rho)).sum();
            let closed =
                c.chi((-(b + 1) as f64).exp2() * rho) - c.chi((-a as f64).exp2() * rho);
            assert!((sum - closed).abs() < 1e-12);
            if rho >= (a as f64).exp2() && rho <= (b as f64).exp2() {
                assert!((sum - 1.0).abs() < 1e-12, "sum != 1 at rho={rho}");
            }
        }
    }

    #[test]
    fn band_range_respects_grid() {
        let (grid, c) = default_setup();
        assert!(((c.j_max() + 1) as f64).exp2() <= grid.nyquist_frequency() * (1.0 + 1e-9));
        assert!(((c.j_min() - 1) as f64).exp2() >= grid.fundamental_frequency() * (1.0 - 1e-9));
        assert!(c.j_max() - c.j_min() + 1 >= 3);
        // L = 2 pi, N = 256: fundamental 1, Nyquist 128 -> bands 1..=6.
        assert_eq!((c.j_min(), c.j_max()), (1, 6));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = Grid::new(1, 8, 2.0 * PI).unwrap();
        match build_cutoffs(TransitionProfile::default(), &grid) {
            Err(Error::InsufficientSpectralRange { .. }) => {}
            other => panic!("expected insufficient spectral range, got {other:?}"),
        }
    }

    #[test]
    fn lp_block_keeps_its_own_band() {
        let (grid, c) = default_setup();
        let j = 3;
        // |xi| = 2^j: phi(1) = 1, the block is the identity on this mode.
        let u = mode(grid, 8);
        let block = lp_block(&u, j, &c).unwrap();
        assert!(block.sub(&u).sup_norm() < 1e-12);
        // |xi| = 2^{j+2}: outside the band support.
        let v = mode(grid, 32);
        let blocked = lp_block(&v, j, &c).unwrap();
        assert!(blocked.sup_norm() < 1e-12);
        // Two modes: only the in-band one survives.
        let w = u.add(&v);
        let kept = lp_block(&w, j, &c).unwrap();
        assert!(kept.sub(&u).sup_norm() < 1e-12);
    }

    #[test]
    fn lp_block_range_check() {
        let (grid, c) = default_setup();
        let u = mode(grid, 8);
        match lp_block(&u, c.j_max() + 1, &c) {
            Err(Error::BandOutsideResolution { .. }) => {}
            other => panic!("expected band range error, got {other:?}"),
        }
    }

    #[test]
    fn low_freq_plateaus() {
        let (grid, c) = default_setup();
        let k = 4;
        // |xi| = 2^{k-2} -> chi(1/4) = 1.
        let u = mode(grid, 4);
        assert!(low_freq(&u, k, &c).unwrap().sub(&u).sup_norm() < 1e-12);
        // |xi| = 2^{k+1} -> chi(2) = 0.
        let v = mode(grid, 32);
        assert!(low_freq(&v, k, &c).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn low_plus_bands_reassembles_band_limited_fields() {
        use rand::{Rng, SeedableRng};
        let (grid, c) = default_setup();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let base = grid.fundamental_frequency();
        // Random band-limited field with modes in [2^k, 2^{j_max}].
        let k = 3;
        let u = Field::from_fn(grid, |x| {
            let _ = x;
            0.0
        });
        let mut u = u;
        for m in 8..=48i64 {
            let amp: f64 = rng.gen_range(-1.0..1.0);
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            let add = Field::from_fn(grid, |x| amp * (base * m as f64 * x[0] + phase).sin());
            u = u.add(&add);
        }
        let mut acc = low_freq(&u, k, &c).unwrap();
        for j in k..=c.j_max() {
            acc = acc.add(&lp_block(&u, j, &c).unwrap());
        }
        let err = acc.sub(&u).sup_norm() / u.sup_norm();
        assert!(err < 1e-12, "telescoping identity broke: {err}");
    }

    #[test]
    fn partition_of_unity_deviation_small() {
        let (grid, c) = default_setup();
        assert!(verify_partition_of_unity(&c, &grid) <= 1e-10);
        // phi(0) = 0: the origin contributes nothing (excluded from window).
        assert_eq!(c.phi(0.0), 0.0);
        // Above 2^{j_max+1} the in-range sum decays to zero; report as tail.
        let tail = partition_tail_above(&c, &grid);
        assert!(tail <= 1.0);
    }

    #[test]
    fn broken_profile_is_detected() {
        let (grid, c) = default_setup();
        let broken = c.with_phi_scale(0.9);
        assert!(verify_partition_of_unity(&broken, &grid) > 0.05);
    }

    #[test]
    fn heat_multiplier_diagonalizes_modes() {
        let (grid, _) = default_setup();
        let u = mode(grid, 8); // |xi| = 8
        let t = 0.03;
        let nu = 1.7;
        let v = heat_multiply(&u, t, nu).unwrap();
        let expected = u.scale((-nu * t * 64.0).exp());
        assert!(v.sub(&expected).sup_norm() < 1e-13);
        // t = 0 is the identity.
        let id = heat_multiply(&u, 0.0, nu).unwrap();
        assert!(id.sub(&u).sup_norm() < 1e-13);
        // Negative time is rejected.
        assert!(matches!(
            heat_multiply(&u, -1.0, nu),
            Err(Error::BackwardHeat { .. })
        ));
    }

    #[test]
    fn heat_preserves_mass_and_contracts_l2() {
        let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
        let u = Field::from_fn(grid, |x| (x[0]).sin() + 0.5 * (3.0 * x[1]).cos() + 2.0);
        let v = heat_multiply(&u, 0.4, 1.0).unwrap();
        assert!((v.mean() - u.mean()).abs() < 1e-13);
        assert!(v.lp_norm(2.0) <= u.lp_norm(2.0) + 1e-13);
    }

    #[test]
    fn heat_semigroup_law() {
        let grid = Grid::new(1, 128, 2.0 * PI).unwrap();
        let u = Field::from_fn(grid, |x| (5.0 * x[0]).sin() + 0.3 * (11.0 * x[0]).cos());
        let a = heat_multiply(&heat_multiply(&u, 0.2, 1.3).unwrap(), 0.5, 1.3).unwrap();
        let b = heat_multiply(&u, 0.7, 1.3).unwrap();
        let rel = a.sub(&b).sup_norm() / b.sup_norm().max(1e-300);
        assert!(rel < 1e-12);
    }

    #[test]
    fn heat_spike_matches_gaussian_kernel() {
        // Dirac-like spike: sup norm follows (4 pi nu t)^{-n/2} * ||u||_1
        // while the kernel is well separated from the box boundary.
        let grid = Grid::new(1, 512, 40.0).unwrap();
        let h = grid.spacing();
        let mut samples = vec![0.0; grid.total_points()];
        samples[256] = 1.0 / h; // unit L1 mass
        let u = Field::from_samples(grid, samples).unwrap();
        let t = 0.5;
        let v = heat_multiply(&u, t, 1.0).unwrap();
        let predicted = (4.0 * PI * t).powf(-0.5);
        let measured = v.sup_norm() / u.lp_norm(1.0);
        assert!(
            (measured / predicted - 1.0).abs() < 0.02,
            "kernel sup {measured} vs {predicted}"
        );
    }

    #[test]
    fn distant_blocks_are_orthogonal() {
        let (grid, c) = default_setup();
        let u = Field::from_fn(grid, |x| {
            (7.0 * x[0]).sin() + (19.0 * x[0]).cos() + 0.2 * (41.0 * x[0]).sin()
        });
        for j in c.bands() {
            for jp in c.bands() {
                if (j - jp).abs() >= 2 {
                    let a = lp_block(&u, j, &c).unwrap();
                    let b = lp_block(&a, jp, &c).unwrap();
                    let rel = b.sup_norm() / u.sup_norm();
                    assert!(rel < 1e-12, "bands {j},{jp} overlap: {rel}");
                }
            }
        }
    }

    #[test]
    fn block_decay_p2_is_sharp() {
        let (grid, c) = default_setup();
        let u = Field::from_fn(grid, |x| {
            (9.0 * x[0]).sin() + 0.7 * (12.0 * x[0]).cos() + 0.4 * (15.0 * x[0]).sin()
        });
        let j = 3; // band [4, 16]
        let block = lp_block(&u, j, &c).unwrap();
        let n0 = block.lp_norm(2.0);
        let nu = 0.8;
        for &t in &[0.01, 0.1, 0.5, 2.0] {
            let decayed = heat_multiply(&block, t, nu).unwrap();
            let bound = (-nu * t * (2f64.powi(2 * j)) / 4.0).exp() * n0;
            assert!(
                decayed.lp_norm(2.0) <= bound * (1.0 + 1e-9),
                "p=2 block decay violated at t={t}"
            );
        }
    }
}
