//! Partition of unity subordinate to a ball cover of the obstacle layer,
//! and the localization bookkeeping audit.

use super::mask::{CellFlag, DomainMask};
use crate::cutoffs::TransitionProfile;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Weights restricted to a lattice bounding box.
#[derive(Debug, Clone)]
pub struct Patch {
    pub lo: [usize; 3],
    pub size: [usize; 3],
    pub values: Vec<f64>,
}

impl Patch {
    pub fn value_at(&self, idx: [usize; 3], dim: usize) -> f64 {
        let mut flat = 0usize;
        for a in 0..dim {
            if idx[a] < self.lo[a] || idx[a] >= self.lo[a] + self.size[a] {
                return 0.0;
            }
            flat = flat * self.size[a] + (idx[a] - self.lo[a]);
        }
        self.values[flat]
    }
}

/// Far-field weight plus ball weights summing to one on the domain, with
/// companions equal to 1 on the corresponding supports.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub lambda: f64,
    pub centers: Vec<[f64; 3]>,
    /// Full-lattice far-field weight eta^0.
    pub eta0: Vec<f64>,
    /// Ball weights eta^ell, sparse.
    pub balls: Vec<Patch>,
    /// Companions: 1 on the support of the matching ball weight.
    pub companions: Vec<Patch>,
    /// Companion of eta^0: 1 on supp grad eta^0, supported in K.
    pub companion0: Vec<f64>,
}

fn smooth_ramp(t: f64) -> f64 {
    TransitionProfile::default().smoothstep(t.clamp(0.0, 1.0))
}

/// Centers on the obstacle surface with nearest-neighbor spacing at most
/// `lambda / 2`.
fn surface_centers(dim: usize, center: [f64; 3], r: f64, lambda: f64) -> Vec<[f64; 3]> {
    let spacing = lambda / 2.0;
    match dim {
        1 => vec![
            [center[0] - r, 0.0, 0.0],
            [center[0] + r, 0.0, 0.0],
        ],
        2 => {
            let count = ((2.0 * PI * r / spacing).ceil() as usize).max(8);
            (0..count)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / count as f64;
                    [center[0] + r * a.cos(), center[1] + r * a.sin(), 0.0]
                })
                .collect()
        }
        _ => {
            // Fibonacci sphere; oversample so gaps stay below spacing.
            let count = ((4.0 * PI * r * r / (spacing * spacing) * 2.0).ceil() as usize).max(32);
            let golden = PI * (3.0 - 5.0f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    [
                        center[0] + r * rho * a.cos(),
                        center[1] + r * rho * a.sin(),
                        center[2] + r * z,
                    ]
                })
                .collect()
        }
    }
}

/// Build the subordinate partition: raw bumps on surface balls of radius
/// `lambda`, a far-field ramp reaching 1 at distance `2 lambda` from the
/// obstacle, all normalized to sum to one on the domain.
pub fn build_partition(mask: &DomainMask, lambda: f64) -> Result<PartitionOfUnity> {
    let lattice = mask.lattice;
    let h = lattice.spacing();
    if lambda < 4.0 * h {
        return Err(Error::UnresolvableBump {
            lambda,
            min_lambda: 4.0 * h,
        });
    }
    let dim = lattice.dim();
    let total = lattice.total_points();

    let Some((center, r)) = mask.obstacle else {
        // No obstacle: eta^0 is identically 1 and the cover is empty.
        return Ok(PartitionOfUnity {
            lambda,
            centers: Vec::new(),
            eta0: (0..total)
                .map(|flat| {
                    if mask.flag(flat) == CellFlag::Exterior {
                        0.0
                    } else {
                        1.0
                    }
                })
                .collect(),
            balls: Vec::new(),
            companions: Vec::new(),
            companion0: vec![0.0; total],
        });
    };

    let centers = surface_centers(dim, center, r, lambda);
    let bump = |rho: f64| 1.0 - smooth_ramp((rho - 0.5) * 2.0); // 1 on [0,1/2], 0 past 1
    let dist = |flat: usize, c: &[f64; 3]| -> f64 {
        let x = lattice.coords(flat);
        let mut d2 = 0.0;
        for a in 0..dim {
            d2 += (x[a] - c[a]) * (x[a] - c[a]);
        }
        d2.sqrt()
    };

    // Raw far-field weight: 0 within lambda/2 of the surface, 1 from
    // lambda outward, so the handover to the ball cover happens where w0
    // is order one (a quotient of two vanishing weights would develop a
    // steep internal layer). Built from |distance| so the weights stay
    // smooth across the staircase boundary.
    let w0: Vec<f64> = (0..total)
        .map(|flat| {
            let d = mask.obstacle_distance(&lattice.coords(flat)).abs();
            smooth_ramp((d - 0.5 * lambda) / (0.5 * lambda))
        })
        .collect();

    // Patches: bounding boxes of radius lambda (2 lambda for companions).
    let patch_for = |c: &[f64; 3], radius: f64, f: &dyn Fn(f64) -> f64| -> Patch {
        let mut lo = [0usize; 3];
        let mut size = [1usize; 3];
        for a in 0..dim {
            let lo_f = ((c[a] - radius) / h).floor().max(0.0) as usize;
            let hi_f = (((c[a] + radius) / h).ceil() as usize).min(lattice.points_per_axis() - 1);
            lo[a] = lo_f;
            size[a] = hi_f - lo_f + 1;
        }
        let mut values = Vec::with_capacity(size[..dim].iter().product());
        let mut idx = lo;
        loop {
            let flat = lattice.ravel(idx);
            values.push(f(dist(flat, c)));
            // Advance the index odometer.
            let mut a = dim;
            loop {
                if a == 0 {
                    break;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < lo[a] + size[a] {
                    break;
                }
                idx[a] = lo[a];
                if a == 0 {
                    return Patch { lo, size, values };
                }
            }
            if idx == lo {
                break;
            }
        }
        Patch { lo, size, values }
    };

    let raw_balls: Vec<Patch> = centers
        .iter()
        .map(|c| patch_for(c, lambda, &|d| bump(d / lambda)))
        .collect();

    // Normalize: eta^ell = w_ell / sum, eta^0 = w0 / sum on the domain.
    let mut sum = w0.clone();
    for ball in &raw_balls {
        let mut idx = ball.lo;
        let mut i = 0usize;
        'outer: loop {
            sum[lattice.ravel(idx)] += ball.values[i];
            i += 1;
            let mut a = dim;
            loop {
                if a == 0 {
                    break 'outer;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < ball.lo[a] + ball.size[a] {
                    break;
                }
                idx[a] = ball.lo[a];
                if a == 0 {
                    break 'outer;
                }
            }
        }
    }
    for s in sum.iter() {
        if *s <= 0.0 {
            return Err(Error::DegenerateInput(
                "ball cover leaves a lattice cell unweighted".into(),
            ));
        }
    }

    let eta0: Vec<f64> = (0..total).map(|flat| w0[flat] / sum[flat]).collect();
    let mut balls = raw_balls.clone();
    for ball in &mut balls {
        let mut idx = ball.lo;
        let mut i = 0usize;
        'outer: loop {
            let flat = lattice.ravel(idx);
            ball.values[i] /= sum[flat];
            i += 1;
            let mut a = dim;
            loop {
                if a == 0 {
                    break 'outer;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < ball.lo[a] + ball.size[a] {
                    break;
                }
                idx[a] = ball.lo[a];
                if a == 0 {
                    break 'outer;
                }
            }
        }
    }

    // Companions: plateau 1 out to lambda, ramp off by 2 lambda.
    let companions: Vec<Patch> = centers
        .iter()
        .map(|c| patch_for(c, 2.0 * lambda, &|d| 1.0 - smooth_ramp(d / lambda - 1.0)))
        .collect();
    // Companion of eta^0: 1 where grad eta^0 lives (the shell d in
    // [lambda/2, 2 lambda]), fading into K.
    let companion0: Vec<f64> = (0..total)
        .map(|flat| {
            if mask.flag(flat) == CellFlag::Exterior {
                return 0.0;
            }
            let d = mask.obstacle_distance(&lattice.coords(flat));
            1.0 - smooth_ramp(d / (2.0 * lambda) - 1.0)
        })
        .collect();

    Ok(PartitionOfUnity {
        lambda,
        centers,
        eta0,
        balls,
        companions,
        companion0,
    })
}

impl PartitionOfUnity {
    /// Max deviation of the weight sum from 1 over the domain.
    pub fn sum_deviation(&self, mask: &DomainMask) -> f64 {
        let lattice = mask.lattice;
        let dim = lattice.dim();
        let mut worst = 0.0f64;
        for flat in 0..lattice.total_points() {
            if mask.flag(flat) == CellFlag::Exterior {
                continue;
            }
            let idx = lattice.unravel(flat);
            let mut s = self.eta0[flat];
            for ball in &self.balls {
                s += ball.value_at(idx, dim);
            }
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// All weights in [0, 1]?
    pub fn range_ok(&self, mask: &DomainMask) -> bool {
        let ok = |v: f64| (-1e-12..=1.0 + 1e-12).contains(&v);
        self.eta0.iter().all(|&v| ok(v))
            && self.balls.iter().all(|b| b.values.iter().all(|&v| ok(v)))
            && mask.lattice.total_points() == self.eta0.len()
    }

    /// Companions equal 1 on the support of their ball weight?
    pub fn companions_cover(&self, mask: &DomainMask) -> bool {
        let dim = mask.lattice.dim();
        for (ball, comp) in self.balls.iter().zip(self.companions.iter()) {
            let mut idx = ball.lo;
            let mut i = 0usize;
            'outer: loop {
                if ball.values[i] > 1e-12 {
                    let mut global = [0usize; 3];
                    global[..dim].copy_from_slice(&idx[..dim]);
                    if (comp.value_at(global, dim) - 1.0).abs() > 1e-9 {
                        return false;
                    }
                }
                i += 1;
                let mut a = dim;
                loop {
                    if a == 0 {
                        break 'outer;
                    }
                    a -= 1;
                    idx[a] += 1;
                    if idx[a] < ball.lo[a] + ball.size[a] {
                        break;
                    }
                    idx[a] = ball.lo[a];
                    if a == 0 {
                        break 'outer;
                    }
                }
            }
        }
        true
    }

    /// Largest central-difference gradient sup over ball weights.
    pub fn max_ball_gradient(&self, mask: &DomainMask) -> f64 {
        self.max_ball_derivative(mask, 1)
    }

    /// Largest second-difference sup over ball weights.
    pub fn max_ball_hessian(&self, mask: &DomainMask) -> f64 {
        self.max_ball_derivative(mask, 2)
    }

    fn max_ball_derivative(&self, mask: &DomainMask, order: usize) -> f64 {
        let lattice = mask.lattice;
        let dim = lattice.dim();
        let h = lattice.spacing();
        let n = lattice.points_per_axis();
        let mut worst = 0.0f64;
        for ball in &self.balls {
            let mut idx = ball.lo;
            'outer: loop {
                let mut grad2 = 0.0;
                for a in 0..dim {
                    if idx[a] == 0 || idx[a] + 1 >= n {
                        continue;
                    }
                    let mut plus = idx;
                    plus[a] += 1;
                    let mut minus = idx;
                    minus[a] -= 1;
                    let vp = ball.value_at(plus, dim);
                    let vm = ball.value_at(minus, dim);
                    let v0 = ball.value_at(idx, dim);
                    let d = match order {
                        1 => (vp - vm) / (2.0 * h),
                        _ => (vp - 2.0 * v0 + vm) / (h * h),
                    };
                    grad2 += d * d;
                }
                worst = worst.max(grad2.sqrt());
                let mut a = dim;
                loop {
                    if a == 0 {
                        break 'outer;
                    }
                    a -= 1;
                    idx[a] += 1;
                    if idx[a] < ball.lo[a] + ball.size[a] {
                        break;
                    }
                    idx[a] = ball.lo[a];
                    if a == 0 {
                        break 'outer;
                    }
                }
            }
        }
        worst
    }
}

/// Residual and commutator bookkeeping of the localized equation
/// `U_t - nu Lap U = eta f - 2 nu grad(eta).grad(u) - nu u Lap(eta)`
/// measured on one implicit-Euler step.
#[derive(Debug, Clone, Copy)]
pub struct LocalizationAudit {
    /// Sup of the difference between the discrete left and right sides.
    pub residual_sup: f64,
    /// `|| grad(eta) . grad(u) ||_inf` (the first commutator term).
    pub grad_term_sup: f64,
    /// `|| u Lap(eta) ||_inf` (the second commutator term).
    pub lap_term_sup: f64,
}

/// Audit the localized PDE for weight field `eta` between two consecutive
/// dense snapshots. The time difference uses the solver's own stencil, so
/// what remains is the spatial commutator error, second order in h.
pub fn localization_audit(
    mask: &DomainMask,
    eta: &[f64],
    u_prev: &[f64],
    u_next: &[f64],
    dt: f64,
    nu: f64,
    forcing: Option<&[f64]>,
) -> LocalizationAudit {
    let lattice = mask.lattice;
    let dim = lattice.dim();
    let h = lattice.spacing();
    let n = lattice.points_per_axis();
    let lap = |v: &[f64], flat: usize, idx: [usize; 3]| -> f64 {
        let mut acc = 0.0;
        for a in 0..dim {
            let mut plus = idx;
            let mut minus = idx;
            let vp = if idx[a] + 1 < n {
                plus[a] += 1;
                v[lattice.ravel(plus)]
            } else {
                0.0
            };
            let vm = if idx[a] > 0 {
                minus[a] -= 1;
                v[lattice.ravel(minus)]
            } else {
                0.0
            };
            acc += vp - 2.0 * v[flat] + vm;
        }
        acc / (h * h)
    };
    let grad_dot = |a_field: &[f64], b_field: &[f64], idx: [usize; 3]| -> f64 {
        let mut acc = 0.0;
        for a in 0..dim {
            if idx[a] == 0 || idx[a] + 1 >= n {
                continue;
            }
            let mut plus = idx;
            plus[a] += 1;
            let mut minus = idx;
            minus[a] -= 1;
            let da = (a_field[lattice.ravel(plus)] - a_field[lattice.ravel(minus)]) / (2.0 * h);
            let db = (b_field[lattice.ravel(plus)] - b_field[lattice.ravel(minus)]) / (2.0 * h);
            acc += da * db;
        }
        acc
    };

    let localized_prev: Vec<f64> = eta.iter().zip(u_prev.iter()).map(|(e, u)| e * u).collect();
    let localized_next: Vec<f64> = eta.iter().zip(u_next.iter()).map(|(e, u)| e * u).collect();

    let mut residual_sup = 0.0f64;
    let mut grad_term_sup = 0.0f64;
    let mut lap_term_sup = 0.0f64;
    for flat in 0..lattice.total_points() {
        if mask.flag(flat) != CellFlag::Interior {
            continue;
        }
        let idx = lattice.unravel(flat);
        // Skip cells whose stencil touches the lattice frame.
        if (0..dim).any(|a| idx[a] == 0 || idx[a] + 1 >= n) {
            continue;
        }
        let lhs = (localized_next[flat] - localized_prev[flat]) / dt
            - nu * lap(&localized_next, flat, idx);
        let grad_term = grad_dot(eta, u_next, idx);
        let lap_term = u_next[flat] * lap(eta, flat, idx);
        let rhs = eta[flat] * forcing.map_or(0.0, |f| f[flat])
            - 2.0 * nu * grad_term
            - nu * lap_term;
        residual_sup = residual_sup.max((lhs - rhs).abs());
        grad_term_sup = grad_term_sup.max(grad_term.abs());
        lap_term_sup = lap_term_sup.max(lap_term.abs());
    }
    LocalizationAudit {
        residual_sup,
        grad_term_sup,
        lap_term_sup,
    }
}
