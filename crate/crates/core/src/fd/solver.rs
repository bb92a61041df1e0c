//! Implicit Euler stepping with matrix-free CG (Thomas in 1D), plus the
//! comparison-principle and self-adjointness experiments.

use super::mask::{CellFlag, DomainMask, MaskKind};
use crate::error::{Error, Result};

/// Time step, viscosity and linear-solve controls.
#[derive(Debug, Clone, Copy)]
pub struct FdSolverConfig {
    pub dt: f64,
    pub nu: f64,
    /// Relative residual tolerance of the symmetric iterative solve.
    pub tol: f64,
    pub max_iter: usize,
}

impl FdSolverConfig {
    pub fn new(dt: f64, nu: f64) -> Self {
        FdSolverConfig {
            dt,
            nu,
            tol: 1e-12,
            max_iter: 20_000,
        }
    }
}

/// Snapshots of the masked solve at realized sample times (full-lattice
/// buffers, zero outside the interior).
#[derive(Debug, Clone)]
pub struct FdSolution {
    pub nu: f64,
    pub dt: f64,
    pub sample_times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
}

struct InteriorSystem<'a> {
    mask: &'a DomainMask,
    /// lattice flat index per unknown
    points: Vec<usize>,
    /// unknown index per lattice point (usize::MAX outside)
    index: Vec<usize>,
    /// nu dt / h^2
    r: f64,
    two_dim: f64,
}

impl<'a> InteriorSystem<'a> {
    fn new(mask: &'a DomainMask, config: &FdSolverConfig) -> Self {
        let total = mask.lattice.total_points();
        let mut points = Vec::new();
        let mut index = vec![usize::MAX; total];
        for flat in 0..total {
            if mask.flag(flat) == CellFlag::Interior {
                index[flat] = points.len();
                points.push(flat);
            }
        }
        let h = mask.lattice.spacing();
        InteriorSystem {
            mask,
            points,
            index,
            r: config.nu * config.dt / (h * h),
            two_dim: 2.0 * mask.lattice.dim() as f64,
        }
    }

    /// y = (I + nu dt A) x with A the Dirichlet lattice Laplacian.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (u, &flat) in self.points.iter().enumerate() {
            let mut acc = (1.0 + self.r * self.two_dim) * x[u];
            for nb in self.mask.neighbors(flat) {
                let j = self.index[nb];
                if j != usize::MAX {
                    acc -= self.r * x[j];
                }
            }
            y[u] = acc;
        }
    }

    fn solve(&self, b: &[f64], x: &mut [f64], config: &FdSolverConfig) -> Result<()> {
        if self.mask.lattice.dim() == 1 {
            self.solve_thomas(b, x);
            return Ok(());
        }
        self.solve_cg(b, x, config)
    }

    /// Direct tridiagonal solve; interior unknowns are contiguous in 1D
    /// box geometry, and the 1D annulus/ball cases decompose into runs.
    fn solve_thomas(&self, b: &[f64], x: &mut [f64]) {
        let n = self.points.len();
        let diag = 1.0 + 2.0 * self.r;
        let off = -self.r;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut start = 0usize;
        while start < n {
            // Find the contiguous run of lattice-adjacent unknowns.
            let mut end = start;
            while end + 1 < n && self.points[end + 1] == self.points[end] + 1 {
                end += 1;
            }
            c[start] = off / diag;
            d[start] = b[start] / diag;
            for i in start + 1..=end {
                let m = diag - off * c[i - 1];
                c[i] = off / m;
                d[i] = (b[i] - off * d[i - 1]) / m;
            }
            x[end] = d[end];
            for i in (start..end).rev() {
                x[i] = d[i] - c[i] * x[i + 1];
            }
            start = end + 1;
        }
    }

    fn solve_cg(&self, b: &[f64], x: &mut [f64], config: &FdSolverConfig) -> Result<()> {
        let n = b.len();
        let mut r = vec![0.0; n];
        let mut ap = vec![0.0; n];
        self.apply(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let mut p = r.clone();
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let mut rs = r.iter().map(|v| v * v).sum::<f64>();
        for iter in 0..config.max_iter {
            if rs.sqrt() <= config.tol * b_norm {
                return Ok(());
            }
            self.apply(&p, &mut ap);
            let alpha = rs / p.iter().zip(ap.iter()).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rs_next = r.iter().map(|v| v * v).sum::<f64>();
            let beta = rs_next / rs;
            rs = rs_next;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            if iter == config.max_iter - 1 {
                break;
            }
        }
        if rs.sqrt() <= config.tol * b_norm {
            Ok(())
        } else {
            Err(Error::SolverDiverged {
                residual: rs.sqrt() / b_norm,
                iterations: config.max_iter,
            })
        }
    }
}

fn check_support(mask: &DomainMask, u0: &[f64]) -> Result<()> {
    if u0.len() != mask.lattice.total_points() {
        return Err(Error::IncompatibleSampling("u0 length mismatch".into()));
    }
    for (flat, &v) in u0.iter().enumerate() {
        if mask.flag(flat) != CellFlag::Interior && v != 0.0 {
            return Err(Error::IncompatibleSampling(
                "initial data must vanish on Dirichlet and exterior cells".into(),
            ));
        }
    }
    Ok(())
}

fn run_solve(
    mask: &DomainMask,
    config: &FdSolverConfig,
    u0: &[f64],
    forcing: Option<&[f64]>,
    horizon: f64,
    mut observe: impl FnMut(usize, f64, &[f64]),
) -> Result<()> {
    check_support(mask, u0)?;
    if !(config.dt > 0.0 && config.nu > 0.0) {
        return Err(Error::InvalidGrid("dt and nu must be positive".into()));
    }
    if config.tol >= 1e-8 {
        return Err(Error::InvalidGrid("linear solve tolerance must be < 1e-8".into()));
    }
    let system = InteriorSystem::new(mask, config);
    let n = system.points.len();
    let mut u: Vec<f64> = system.points.iter().map(|&flat| u0[flat]).collect();
    let f: Option<Vec<f64>> =
        forcing.map(|f| system.points.iter().map(|&flat| f[flat]).collect());
    let steps = (horizon / config.dt).round().max(1.0) as usize;
    let mut b = vec![0.0; n];
    let mut full = u0.to_vec();
    observe(0, 0.0, &full);
    for step in 1..=steps {
        for i in 0..n {
            b[i] = u[i] + config.dt * f.as_ref().map_or(0.0, |f| f[i]);
        }
        system.solve(&b, &mut u, config)?;
        let t = step as f64 * config.dt;
        for (i, &flat) in system.points.iter().enumerate() {
            full[flat] = u[i];
        }
        observe(step, t, &full);
    }
    Ok(())
}

/// Implicit Euler solve with snapshots at (approximately) the requested
/// sample times; realized times are step multiples.
pub fn fd_solve(
    mask: &DomainMask,
    config: &FdSolverConfig,
    u0: &[f64],
    forcing: Option<&[f64]>,
    horizon: f64,
    sample_times: &[f64],
) -> Result<FdSolution> {
    let steps = (horizon / config.dt).round().max(1.0) as usize;
    let mut wanted: Vec<usize> = sample_times
        .iter()
        .map(|&t| ((t / config.dt).round() as usize).min(steps))
        .collect();
    wanted.sort_unstable();
    wanted.dedup();
    let mut solution = FdSolution {
        nu: config.nu,
        dt: config.dt,
        sample_times: Vec::new(),
        snapshots: Vec::new(),
    };
    run_solve(mask, config, u0, forcing, horizon, |step, t, full| {
        if wanted.binary_search(&step).is_ok() {
            solution.sample_times.push(t);
            solution.snapshots.push(full.to_vec());
        }
    })?;
    Ok(solution)
}

/// Dense solve storing every step; for short audit runs.
pub fn fd_solve_dense(
    mask: &DomainMask,
    config: &FdSolverConfig,
    u0: &[f64],
    forcing: Option<&[f64]>,
    horizon: f64,
) -> Result<FdSolution> {
    let mut solution = FdSolution {
        nu: config.nu,
        dt: config.dt,
        sample_times: Vec::new(),
        snapshots: Vec::new(),
    };
    run_solve(mask, config, u0, forcing, horizon, |_, t, full| {
        solution.sample_times.push(t);
        solution.snapshots.push(full.to_vec());
    })?;
    Ok(solution)
}

/// Discrete comparison principle: the masked Dirichlet solution, extended
/// by zero, is dominated by the obstacle-free box solution with the same
/// data. Returns the max over samples and cells of `eta - eta_bar`.
pub fn subsolution_check(
    mask: &DomainMask,
    config: &FdSolverConfig,
    u0: &[f64],
    horizon: f64,
    samples: &[f64],
) -> Result<f64> {
    let min = u0.iter().copied().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        return Err(Error::NegativeData { min });
    }
    let masked = fd_solve(mask, config, u0, None, horizon, samples)?;
    let box_mask = super::mask::build_mask(MaskKind::Box, mask.lattice)?;
    // The data vanish on the obstacle already, so they are admissible for
    // the obstacle-free problem as a zero extension.
    let free = fd_solve(&box_mask, config, u0, None, horizon, samples)?;
    let mut violation = f64::NEG_INFINITY;
    for (a, b) in masked.snapshots.iter().zip(free.snapshots.iter()) {
        for (x, y) in a.iter().zip(b.iter()) {
            violation = violation.max(x - y);
        }
    }
    Ok(violation)
}

/// Self-adjointness of the implicit-Euler Dirichlet propagator:
/// `<eta(t), zeta_0>` vs `<eta_0, zeta(t)>`, as a relative gap.
pub fn duality_identity_check(
    mask: &DomainMask,
    config: &FdSolverConfig,
    eta0: &[f64],
    zeta0: &[f64],
    t: f64,
) -> Result<f64> {
    let eta = fd_solve(mask, config, eta0, None, t, &[t])?;
    let zeta = fd_solve(mask, config, zeta0, None, t, &[t])?;
    let cell = mask.lattice.cell_volume();
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>() * cell
    };
    let forward = dot(eta.snapshots.last().unwrap(), zeta0);
    let backward = dot(eta0, zeta.snapshots.last().unwrap());
    Ok((forward - backward).abs() / forward.abs().max(1e-30))
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::mask::{build_mask, Lattice, MaskKind};
    use crate::rng;
    use rand::Rng;
    use std::f64::consts::PI;

    fn interval_mask(n: usize) -> DomainMask {
        let lattice = Lattice::new(1, n, 1.0 / (n - 1) as f64).unwrap();
        build_mask(MaskKind::Box, lattice).unwrap()
    }

    fn eigen_data(mask: &DomainMask) -> Vec<f64> {
        (0..mask.lattice.total_points())
            .map(|flat| {
                if mask.flag(flat) == CellFlag::Interior {
                    (PI * mask.lattice.coords(flat)[0]).sin()
                } else {
                    0.0
                }
            })
            .collect()
    }

    #[test]
    fn first_eigenfunction_decay_rate() {
        let mask = interval_mask(200);
        let nu = 1.0;
        let config = FdSolverConfig::new(1e-4, nu);
        let u0 = eigen_data(&mask);
        let t_end = 0.2;
        let sol = fd_solve(&mask, &config, &u0, None, t_end, &[t_end / 2.0, t_end]).unwrap();
        let n1 = mask.domain_lp(&sol.snapshots[0], 2.0);
        let n2 = mask.domain_lp(&sol.snapshots[1], 2.0);
        let rate = -(n2 / n1).ln() / (sol.sample_times[1] - sol.sample_times[0]);
        let target = nu * PI * PI;
        assert!(
            (rate / target - 1.0).abs() < 0.02,
            "decay rate {rate} vs {target}"
        );
    }

    #[test]
    fn maximum_principle_nonnegativity() {
        let mask = interval_mask(200);
        let config = FdSolverConfig::new(1e-3, 1.0);
        let mut rng = rng::derive(1, &[0]);
        let u0: Vec<f64> = (0..mask.lattice.total_points())
            .map(|flat| {
                if mask.flag(flat) == CellFlag::Interior {
                    rng.gen_range(0.0..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let sol = fd_solve(&mask, &config, &u0, None, 0.05, &[0.01, 0.03, 0.05]).unwrap();
        for snap in &sol.snapshots {
            let min = snap.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-12, "negativity {min}");
        }
    }

    #[test]
    fn steady_state_with_unit_forcing() {
        let mask = interval_mask(200);
        let nu = 1.0;
        let config = FdSolverConfig::new(2e-4, nu);
        let u0 = vec![0.0; mask.lattice.total_points()];
        let f: Vec<f64> = (0..mask.lattice.total_points())
            .map(|flat| {
                if mask.flag(flat) == CellFlag::Interior {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let t_end = 5.0 / (nu * PI * PI);
        let sol = fd_solve(&mask, &config, &u0, Some(&f), t_end, &[t_end]).unwrap();
        let snap = sol.snapshots.last().unwrap();
        let mut worst = 0.0f64;
        for flat in 0..mask.lattice.total_points() {
            let x = mask.lattice.coords(flat)[0];
            let exact = x * (1.0 - x) / (2.0 * nu);
            worst = worst.max((snap[flat] - exact).abs());
        }
        // Steady state x(1-x)/(2 nu) has sup 1/8.
        assert!(worst / 0.125 < 0.01, "steady error {worst}");
    }

    #[test]
    fn data_support_is_validated() {
        let mask = interval_mask(64);
        let config = FdSolverConfig::new(1e-3, 1.0);
        let mut u0 = vec![0.0; 64];
        u0[0] = 1.0; // Dirichlet endpoint
        assert!(matches!(
            fd_solve(&mask, &config, &u0, None, 0.01, &[0.01]),
            Err(Error::IncompatibleSampling(_))
        ));
    }

    #[test]
    fn subsolution_no_obstacle_is_identity() {
        let mask = interval_mask(100);
        let config = FdSolverConfig::new(1e-3, 1.0);
        let u0 = eigen_data(&mask);
        let v = subsolution_check(&mask, &config, &u0, 0.05, &[0.02, 0.05]).unwrap();
        assert!(v.abs() < 1e-13, "box vs box must agree, got {v}");
    }

    #[test]
    fn subsolution_with_obstacle() {
        let lattice = Lattice::new(2, 64, 0.1).unwrap();
        let mask = build_mask(MaskKind::BoxMinusBall { radius: 0.7 }, lattice).unwrap();
        let config = FdSolverConfig::new(1e-3, 1.0);
        let (c, _) = mask.obstacle.unwrap();
        let u0: Vec<f64> = (0..lattice.total_points())
            .map(|flat| {
                if mask.flag(flat) != CellFlag::Interior {
                    return 0.0;
                }
                let x = lattice.coords(flat);
                let d2 = (x[0] - c[0] - 1.5).powi(2) + (x[1] - c[1]).powi(2);
                (-(d2) / 0.1).exp()
            })
            .collect();
        let v = subsolution_check(&mask, &config, &u0, 0.2, &[0.05, 0.1, 0.2]).unwrap();
        assert!(v <= 1e-10, "comparison violated by {v}");
        // Negative data are rejected.
        let neg: Vec<f64> = u0.iter().map(|&v| -v).collect();
        assert!(matches!(
            subsolution_check(&mask, &config, &neg, 0.1, &[0.1]),
            Err(Error::NegativeData { .. })
        ));
    }

    #[test]
    fn duality_identity_symmetric_and_random() {
        let mask = interval_mask(128);
        let config = FdSolverConfig::new(1e-3, 1.0);
        let mut rng = rng::derive(2, &[7]);
        let random_data = |rng: &mut rand_chacha::ChaCha12Rng, mask: &DomainMask| -> Vec<f64> {
            (0..mask.lattice.total_points())
                .map(|flat| {
                    if mask.flag(flat) == CellFlag::Interior {
                        rng.gen_range(-1.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let eta0 = random_data(&mut rng, &mask);
        // zeta0 = eta0: trivially symmetric.
        let gap = duality_identity_check(&mask, &config, &eta0, &eta0, 0.05).unwrap();
        assert!(gap <= 1e-12, "self pairing gap {gap}");
        let zeta0 = random_data(&mut rng, &mask);
        let gap = duality_identity_check(&mask, &config, &eta0, &zeta0, 0.05).unwrap();
        assert!(gap <= 1e-10, "random pairing gap {gap}");
    }

    #[test]
    fn duality_identity_3d_exterior() {
        let lattice = Lattice::new(3, 24, 0.5).unwrap();
        let mask = build_mask(MaskKind::BoxMinusBall { radius: 1.2 }, lattice).unwrap();
        let config = FdSolverConfig::new(5e-3, 1.0);
        let mut rng = rng::derive(3, &[1]);
        let data = |rng: &mut rand_chacha::ChaCha12Rng| -> Vec<f64> {
            (0..lattice.total_points())
                .map(|flat| {
                    if mask.flag(flat) == CellFlag::Interior {
                        rng.gen_range(-1.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let eta0 = data(&mut rng);
        let zeta0 = data(&mut rng);
        let gap = duality_identity_check(&mask, &config, &eta0, &zeta0, 0.05).unwrap();
        assert!(gap <= 1e-9, "3d pairing gap {gap}");
    }
}
