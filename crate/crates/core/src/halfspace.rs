//! Dirichlet heat flow on a slab by symmetrization: antisymmetric
//! extension, whole-torus solve, restriction.
//!
//! The half-space becomes the slab `x_n in (0, L/2)` of the torus, so the
//! odd reflection enforces homogeneous Dirichlet planes at both `x_n = 0`
//! and `x_n = L/2`. The normal direction is the last axis.

use crate::besov::BesovIndex;
use crate::cutoffs::DyadicCutoffs;
use crate::error::{Error, Result};
use crate::grid::{lp_norm_weighted, Field, Grid};
use crate::heat::{maxreg_report, solve_whole, Forcing, HeatProblem, HeatSolution, MaxRegReport, TimeGrid};
use std::sync::Arc;

/// Field on the half-slab `x_n in [0, L/2]`, stored in zero-extension
/// layout: a full-torus sample buffer whose planes beyond `N/2` are zero.
#[derive(Debug, Clone)]
pub struct SlabField {
    grid: Grid,
    values: Vec<f64>,
}

fn normal_axis(grid: &Grid) -> usize {
    grid.dimension() - 1
}

impl SlabField {
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let axis = normal_axis(&grid);
        let half = grid.points_per_axis() / 2;
        let values = (0..grid.total_points())
            .map(|flat| {
                let idx = grid.unravel(flat);
                if idx[axis] <= half {
                    f(&grid.coords(flat))
                } else {
                    0.0
                }
            })
            .collect();
        SlabField { grid, values }
    }

    /// Restrict a full-torus field to the slab (zero-extension layout).
    pub fn restrict(field: &Field) -> Self {
        let grid = *field.grid();
        let axis = normal_axis(&grid);
        let half = grid.points_per_axis() / 2;
        let values = field
            .samples()
            .iter()
            .enumerate()
            .map(|(flat, &v)| {
                if grid.unravel(flat)[axis] <= half {
                    v
                } else {
                    0.0
                }
            })
            .collect();
        SlabField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Zero extension onto the full torus.
    pub fn zero_extend(&self) -> Field {
        Field::from_samples(self.grid, self.values.clone()).expect("sizes match")
    }

    /// Sup of |u| on the two Dirichlet planes.
    pub fn trace_sup(&self) -> f64 {
        let axis = normal_axis(&self.grid);
        let half = self.grid.points_per_axis() / 2;
        let mut worst = 0.0f64;
        for (flat, &v) in self.values.iter().enumerate() {
            let i_n = self.grid.unravel(flat)[axis];
            if i_n == 0 || i_n == half {
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    /// Slab `L_p` norm with trapezoidal weights on the boundary planes, so
    /// `||extension||_p = 2^{1/p} ||u||_p` holds exactly for both parities.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let axis = normal_axis(&self.grid);
        let half = self.grid.points_per_axis() / 2;
        if p.is_infinite() {
            return self
                .values
                .iter()
                .enumerate()
                .filter(|(flat, _)| self.grid.unravel(*flat)[axis] <= half)
                .fold(0.0f64, |m, (_, &v)| m.max(v.abs()));
        }
        let weighted: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(flat, &v)| {
                let i_n = self.grid.unravel(flat)[axis];
                if i_n > half {
                    0.0
                } else if i_n == 0 || i_n == half {
                    v.abs() * (0.5f64).powf(1.0 / p)
                } else {
                    v
                }
            })
            .collect();
        lp_norm_weighted(&weighted, p, self.grid.cell_volume())
    }
}

/// Antisymmetric (odd) periodic extension; the Dirichlet planes are forced
/// to zero, which is where an incompatible trace shows up as a jump.
pub fn antisym_extend(u: &SlabField) -> Field {
    reflect(u, -1.0)
}

/// Symmetric (even) periodic extension.
pub fn sym_extend(u: &SlabField) -> Field {
    reflect(u, 1.0)
}

fn reflect(u: &SlabField, sign: f64) -> Field {
    let grid = u.grid;
    let n = grid.points_per_axis();
    let half = n / 2;
    let axis = normal_axis(&grid);
    let mut out = vec![0.0; grid.total_points()];
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut idx = grid.unravel(flat);
        let i_n = idx[axis];
        if i_n <= half {
            *slot = u.values[flat];
        } else {
            idx[axis] = n - i_n;
            *slot = sign * u.values[grid.ravel(idx)];
        }
    }
    if sign < 0.0 {
        // Odd parity pins both planes to zero.
        for flat in 0..out.len() {
            let i_n = grid.unravel(flat)[axis];
            if i_n == 0 || i_n == half {
                out[flat] = 0.0;
            }
        }
    }
    Field::from_samples(grid, out).expect("sizes match")
}

/// Max deviation from odd parity across the reflection planes.
pub fn odd_defect(field: &Field) -> f64 {
    parity_defect(field, -1.0)
}

/// Max deviation from even parity across the reflection planes.
pub fn even_defect(field: &Field) -> f64 {
    parity_defect(field, 1.0)
}

fn parity_defect(field: &Field, sign: f64) -> f64 {
    let grid = *field.grid();
    let n = grid.points_per_axis();
    let axis = normal_axis(&grid);
    let s = field.samples();
    let mut worst = 0.0f64;
    for flat in 0..s.len() {
        let mut idx = grid.unravel(flat);
        idx[axis] = (n - idx[axis]) % n;
        let mirror = grid.ravel(idx);
        worst = worst.max((s[flat] - sign * s[mirror]).abs());
    }
    worst
}

/// Forcing given on the slab.
#[derive(Clone)]
pub enum SlabForcing {
    None,
    ClosedForm(Arc<dyn Fn(f64) -> SlabField + Send + Sync>),
}

/// Output of the reflection solver: the full antisymmetric torus solution
/// plus slab bookkeeping.
#[derive(Debug, Clone)]
pub struct HalfSolution {
    pub torus: HeatSolution,
    /// Sup over instants and both planes of |u|.
    pub boundary_residual: f64,
    /// Sup of the initial trace; nonzero means the data sat outside the
    /// compatible window and the report is flagged.
    pub initial_trace: f64,
}

impl HalfSolution {
    pub fn slab_field(&self, i: usize) -> SlabField {
        SlabField::restrict(&self.torus.fields[i])
    }

    pub fn non_compatible_trace(&self) -> bool {
        self.initial_trace > 1e-12
    }
}

/// Solve the slab Dirichlet problem by antisymmetric reflection.
///
/// The Besov window `-1 + 1/p < s < 1/p` of the trace theory is recorded
/// by the caller on the report; raw data violating compatibility are
/// allowed and flagged.
pub fn solve_half(
    u0: &SlabField,
    forcing: &SlabForcing,
    nu: f64,
    horizon: f64,
    times: &TimeGrid,
) -> Result<HalfSolution> {
    let initial_trace = u0.trace_sup();
    let torus_forcing = match forcing {
        SlabForcing::None => Forcing::None,
        SlabForcing::ClosedForm(gen) => {
            let gen = gen.clone();
            Forcing::ClosedForm(Arc::new(move |t: f64| antisym_extend(&gen(t))))
        }
    };
    let problem = HeatProblem {
        nu,
        horizon,
        u0: antisym_extend(u0),
        forcing: torus_forcing,
    };
    let torus = solve_whole(&problem, times)?;
    let mut boundary_residual = 0.0f64;
    for field in &torus.fields {
        boundary_residual = boundary_residual.max(SlabField::restrict(field).trace_sup());
    }
    Ok(HalfSolution {
        torus,
        boundary_residual,
        initial_trace,
    })
}

/// The four parity bullets of the symmetrization argument, as measured
/// deviations relative to each field's sup.
#[derive(Debug, Clone, Copy)]
pub struct ParityAudit {
    /// `u_t` coincides with the antisymmetric extension: odd defect.
    pub ut_odd: f64,
    /// Tangential Hessian stays odd (0 when n = 1: no tangential axes).
    pub tangential_odd: f64,
    /// Mixed derivatives `grad_{x'} d_{x_n} u` are even.
    pub mixed_even: f64,
    /// `d^2_{x_n} u` computed spectrally vs. `(u_t - f)/nu - Lap_{x'} u`.
    pub normal_two_way: f64,
}

impl ParityAudit {
    pub fn check(&self, tol: f64) -> Result<()> {
        let checks = [
            ("u_t parity", self.ut_odd),
            ("tangential Hessian parity", self.tangential_odd),
            ("mixed derivative parity", self.mixed_even),
            ("normal second derivative", self.normal_two_way),
        ];
        for (name, dev) in checks {
            if dev > tol {
                return Err(Error::ParityBroken {
                    derivative: name.into(),
                    deviation: dev,
                });
            }
        }
        Ok(())
    }
}

/// Audit the parity bookkeeping of a reflection solution at one sample
/// instant.
pub fn parity_audit(solution: &HalfSolution, instant: usize) -> ParityAudit {
    let field = &solution.torus.fields[instant];
    let ut = &solution.torus.ut_fields[instant];
    let grid = *field.grid();
    let dim = grid.dimension();
    let axis = normal_axis(&grid);
    let nu = solution.torus.nu;

    let scale = |f: &Field| f.sup_norm().max(1e-300);
    let ut_odd = odd_defect(ut) / scale(ut);

    let mut tangential_odd = 0.0f64;
    let mut mixed_even = 0.0f64;
    let mut lap_tang = Field::zeros(grid);
    for a in 0..dim {
        for b in a..dim {
            if a == axis || b == axis {
                continue;
            }
            let dd = field.apply_multiplier(|xi| -xi[a] * xi[b]);
            tangential_odd = tangential_odd.max(odd_defect(&dd) / scale(&dd));
            if a == b {
                lap_tang = lap_tang.add(&dd);
            }
        }
    }
    for a in 0..dim {
        if a == axis {
            continue;
        }
        let mixed = field.apply_multiplier(|xi| -xi[a] * xi[axis]);
        mixed_even = mixed_even.max(even_defect(&mixed) / scale(&mixed));
    }

    let spectral = field.apply_multiplier(|xi| -xi[axis] * xi[axis]);
    let mut from_equation = ut.scale(1.0 / nu).sub(&lap_tang);
    if let Some(fs) = &solution.torus.forcing_fields {
        from_equation = from_equation.sub(&fs[instant].scale(1.0 / nu));
    }
    let normal_two_way = spectral.sub(&from_equation).sup_norm() / scale(&spectral);

    ParityAudit {
        ut_odd,
        tangential_odd,
        mixed_even,
        normal_two_way,
    }
}

/// Maximal-regularity report on the slab plus the extension-vs-slab
/// Lebesgue comparison.
#[derive(Debug, Clone, Copy)]
pub struct HalfMaxRegReport {
    pub base: MaxRegReport,
    /// `||extension||_p / ||u||_{p, slab}`; equals `2^{1/p}` exactly for
    /// lattice quadrature once the trace vanishes.
    pub lp_extension_ratio: f64,
    pub boundary_residual: f64,
    /// Whether (s, p) sits in the trace-compatible window.
    pub in_window: bool,
    pub non_compatible_trace: bool,
}

/// Assemble slab norms as in the whole-space report: the slab restriction
/// is zero-extended onto the torus and measured there.
pub fn maxreg_report_half(
    solution: &HalfSolution,
    idx: &BesovIndex,
    cutoffs: &DyadicCutoffs,
) -> Result<HalfMaxRegReport> {
    let restrict_all = |fields: &[Field]| -> Vec<Field> {
        fields
            .iter()
            .map(|f| SlabField::restrict(f).zero_extend())
            .collect()
    };
    let slab_solution = HeatSolution {
        nu: solution.torus.nu,
        times: solution.torus.times.clone(),
        fields: restrict_all(&solution.torus.fields),
        ut_fields: restrict_all(&solution.torus.ut_fields),
        forcing_fields: solution
            .torus
            .forcing_fields
            .as_ref()
            .map(|fs| restrict_all(fs)),
    };
    let base = maxreg_report(&slab_solution, idx, cutoffs)?;

    let mut ratio_worst = 1.0f64;
    if idx.p.is_finite() {
        for field in &solution.torus.fields {
            let slab = SlabField::restrict(field);
            let slab_norm = slab.lp_norm(idx.p);
            if slab_norm > 1e-300 {
                ratio_worst = ratio_worst.max(field.lp_norm(idx.p) / slab_norm);
            }
        }
    }
    Ok(HalfMaxRegReport {
        base,
        lp_extension_ratio: ratio_worst,
        boundary_residual: solution.boundary_residual,
        in_window: idx.in_trace_window(),
        non_compatible_trace: solution.non_compatible_trace(),
    })
}
