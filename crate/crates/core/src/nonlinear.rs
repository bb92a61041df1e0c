//! Semilinear heat solver on the torus with named nonlinearities,
//! blow-up detection and small-data global-existence experiments.
//!
//! Time stepping is an exponential Heun scheme: the linear symbol
//! (diffusion plus the constant second-order perturbation) is applied
//! exactly in frequency space, the nonlinearity by explicit stages with
//! 2/3 dealiasing on quadratic products.

use crate::besov::{besov_value, BesovIndex};
use crate::cutoffs::DyadicCutoffs;
use crate::error::{Error, Result};
use crate::families::Family;
use crate::grid::{Field, Grid};
use crate::heat::TimeGrid;
use num_complex::Complex64;

/// First-order transport nonlinearity `f1(u) . grad u`.
#[derive(Debug, Clone, PartialEq)]
pub enum Transport {
    None,
    /// `-u_0 d_{x1} u` componentwise: the viscous Burgers convection.
    Burgers,
    /// Constant matrix rows `B_k`: `(f1 . grad u)_k = sum_a B[k][a] d_a u_k`.
    ConstMatrix(Vec<[f64; 3]>),
}

/// The system `u_t - nu Lap u + P . Hess u = f0(u) + f1(u) . grad u`.
#[derive(Debug, Clone)]
pub struct NonlinearSpec {
    pub f0: Option<Family>,
    pub f1: Transport,
    /// Per-component constant matrices contracting the Hessian.
    pub p_tensors: Option<Vec<[[f64; 3]; 3]>>,
    pub nu: f64,
    pub components: usize,
}

impl NonlinearSpec {
    pub fn diffusion(nu: f64) -> Self {
        NonlinearSpec {
            f0: None,
            f1: Transport::None,
            p_tensors: None,
            nu,
            components: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::HypothesisViolated("nu must be positive".into()));
        }
        if self.components == 0 {
            return Err(Error::HypothesisViolated("need at least one component".into()));
        }
        if let Some(f0) = &self.f0 {
            // f0(0) = 0 and df0(0) = 0 for every named family.
            if f0.eval(0.0) != 0.0 || f0.derivative(0.0) != 0.0 {
                return Err(Error::HypothesisViolated(
                    "nonlinearity must vanish to second order at zero".into(),
                ));
            }
        }
        if let Some(ps) = &self.p_tensors {
            if ps.len() != self.components {
                return Err(Error::HypothesisViolated(
                    "one P matrix per component required".into(),
                ));
            }
        }
        Ok(())
    }

    /// Operator-norm surrogate for the multiplier smallness of P: the max
    /// over lattice frequencies of `|P_k(xi, xi)| / |xi|^2`. The linear
    /// symbol stays dissipative iff this is below nu.
    pub fn p_smallness(&self, grid: &Grid) -> f64 {
        let Some(ps) = &self.p_tensors else {
            return 0.0;
        };
        let mut worst = 0.0f64;
        for flat in 0..grid.total_points() {
            let xi = grid.wavevector(flat);
            let xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            if xi2 == 0.0 {
                continue;
            }
            for p in ps {
                let mut q = 0.0;
                for a in 0..grid.dimension() {
                    for b in 0..grid.dimension() {
                        q += p[a][b] * xi[a] * xi[b];
                    }
                }
                worst = worst.max(q.abs() / xi2);
            }
        }
        worst
    }
}

/// Outcome of a semilinear run.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Horizon reached with a plateaued X-norm.
    Global,
    /// Horizon reached but the X-norm was still moving.
    HorizonReached,
    Blowup { t_star: f64, bracket: (f64, f64) },
}

#[derive(Debug, Clone)]
pub struct RunVerdict {
    pub outcome: Outcome,
    /// Sup-norm trajectory at realized instants.
    pub sup_trajectory: Vec<f64>,
    /// max_t ||u(t)||_inf / ||u_0||_inf.
    pub peak_ratio: f64,
}

impl RunVerdict {
    pub fn is_blowup(&self) -> bool {
        matches!(self.outcome, Outcome::Blowup { .. })
    }
}

/// Time-sampled semilinear solution; `fields[i][k]` is component k at
/// instant i, and `ut` is reconstructed from the equation.
#[derive(Debug, Clone)]
pub struct SemilinearSolution {
    pub nu: f64,
    pub times: Vec<f64>,
    pub fields: Vec<Vec<Field>>,
    pub ut: Vec<Vec<Field>>,
}

/// Sup-norm threshold of the blow-up detector.
pub const BLOWUP_SUP: f64 = 1e6;
/// Doubling within one step only counts once the field is order one.
const DOUBLING_FLOOR: f64 = 1.0;

struct Stepper {
    grid: Grid,
    spec: NonlinearSpec,
    /// 2/3-rule dealias mask per spectral index.
    dealias: Vec<f64>,
    /// Linear symbol per component and spectral index.
    symbols: Vec<Vec<f64>>,
}

impl Stepper {
    fn new(grid: Grid, spec: &NonlinearSpec) -> Self {
        let n = grid.points_per_axis() as i64;
        let cutoff = n / 3;
        let dealias: Vec<f64> = (0..grid.total_points())
            .map(|flat| {
                let idx = grid.unravel(flat);
                let keep = (0..grid.dimension())
                    .all(|a| grid.freq_index(idx[a]).abs() <= cutoff);
                if keep {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let symbols: Vec<Vec<f64>> = (0..spec.components)
            .map(|k| {
                (0..grid.total_points())
                    .map(|flat| {
                        let xi = grid.wavevector(flat);
                        let xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                        let mut sym = -spec.nu * xi2;
                        if let Some(ps) = &spec.p_tensors {
                            for a in 0..grid.dimension() {
                                for b in 0..grid.dimension() {
                                    sym += ps[k][a][b] * xi[a] * xi[b];
                                }
                            }
                        }
                        sym
                    })
                    .collect()
            })
            .collect();
        Stepper {
            grid,
            spec: spec.clone(),
            dealias,
            symbols,
        }
    }

    fn truncate(&self, spec_buf: &mut [Complex64]) {
        for (c, &m) in spec_buf.iter_mut().zip(self.dealias.iter()) {
            *c *= m;
        }
    }

    fn to_field(&self, mut spec_buf: Vec<Complex64>) -> Field {
        self.truncate(&mut spec_buf);
        Field::from_spectrum(self.grid, spec_buf).expect("sizes match")
    }

    /// Nonlinear right side `f0(u) + f1(u) . grad u`, dealised.
    fn nonlinearity(&self, comps: &[Field]) -> Vec<Field> {
        let r = comps.len();
        let truncated: Vec<Field> = comps
            .iter()
            .map(|f| self.to_field(f.spectrum().to_vec()))
            .collect();
        let mut out: Vec<Vec<f64>> = vec![vec![0.0; self.grid.total_points()]; r];

        if let Some(f0) = &self.spec.f0 {
            match f0 {
                Family::Power { m, coeff } => {
                    // Vector form |u|^{m-1} u with the Euclidean magnitude.
                    for i in 0..self.grid.total_points() {
                        let mut mag2 = 0.0;
                        for f in &truncated {
                            let v = f.samples()[i];
                            mag2 += v * v;
                        }
                        let scale = coeff * mag2.sqrt().powi(*m as i32 - 1);
                        for (k, f) in truncated.iter().enumerate() {
                            out[k][i] += scale * f.samples()[i];
                        }
                    }
                }
                _ => {
                    for (k, f) in truncated.iter().enumerate() {
                        for (o, &v) in out[k].iter_mut().zip(f.samples().iter()) {
                            *o += f0.eval(v);
                        }
                    }
                }
            }
        }

        match &self.spec.f1 {
            Transport::None => {}
            Transport::Burgers => {
                let advect = &truncated[0];
                for (k, f) in truncated.iter().enumerate() {
                    let grad = self.to_field(f.derivative(0).spectrum().to_vec());
                    for i in 0..self.grid.total_points() {
                        out[k][i] -= advect.samples()[i] * grad.samples()[i];
                    }
                }
            }
            Transport::ConstMatrix(rows) => {
                for (k, f) in truncated.iter().enumerate() {
                    for a in 0..self.grid.dimension() {
                        let coeff = rows[k][a];
                        if coeff == 0.0 {
                            continue;
                        }
                        let grad = f.derivative(a);
                        for i in 0..self.grid.total_points() {
                            out[k][i] += coeff * grad.samples()[i];
                        }
                    }
                }
            }
        }

        out.into_iter()
            .map(|samples| {
                let f = Field::from_samples(self.grid, samples).expect("sizes match");
                self.to_field(f.spectrum().to_vec())
            })
            .collect()
    }

    /// `u_t = (linear symbol) u + N(u)` at a sample instant.
    fn time_derivative(&self, comps: &[Field], nonlin: &[Field]) -> Vec<Field> {
        comps
            .iter()
            .zip(nonlin.iter())
            .enumerate()
            .map(|(k, (u, n))| {
                let lin: Vec<Complex64> = u
                    .spectrum()
                    .iter()
                    .zip(self.symbols[k].iter())
                    .map(|(&c, &s)| c * s)
                    .collect();
                Field::from_spectrum(self.grid, lin)
                    .expect("sizes match")
                    .add(n)
            })
            .collect()
    }

    /// One exponential Heun step of size dt.
    fn step(&self, comps: &[Field], dt: f64) -> Vec<Field> {
        let n0 = self.nonlinearity(comps);
        let propagate = |k: usize, u: &Field, add: Option<(&Field, f64)>| -> Field {
            let spec: Vec<Complex64> = u
                .spectrum()
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let e = (dt * self.symbols[k][i]).exp();
                    let mut v = c * e;
                    if let Some((g, w)) = add {
                        v += g.spectrum()[i] * (w * e);
                    }
                    v
                })
                .collect();
            Field::from_spectrum(self.grid, spec).expect("sizes match")
        };
        // Predictor: v = E (u + dt N(u)).
        let stage: Vec<Field> = comps
            .iter()
            .enumerate()
            .map(|(k, u)| propagate(k, u, Some((&n0[k], dt))))
            .collect();
        let n1 = self.nonlinearity(&stage);
        // Corrector: E u + dt/2 (E N(u) + N(v)).
        comps
            .iter()
            .enumerate()
            .map(|(k, u)| {
                let half = propagate(k, u, Some((&n0[k], 0.5 * dt)));
                let spec: Vec<Complex64> = half
                    .spectrum()
                    .iter()
                    .zip(n1[k].spectrum().iter())
                    .map(|(&a, &b)| a + b * (0.5 * dt))
                    .collect();
                Field::from_spectrum(self.grid, spec).expect("sizes match")
            })
            .collect()
    }
}

fn sup_over(comps: &[Field]) -> f64 {
    comps.iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
}

/// Run the semilinear system on the instants of `times` (the time grid is
/// both the stepping and the sampling grid).
pub fn solve_semilinear(
    spec: &NonlinearSpec,
    u0: &[Field],
    times: &TimeGrid,
) -> Result<(SemilinearSolution, RunVerdict)> {
    spec.validate()?;
    if u0.len() != spec.components {
        return Err(Error::IncompatibleSampling(format!(
            "expected {} components, got {}",
            spec.components,
            u0.len()
        )));
    }
    let grid = *u0[0].grid();
    if u0.iter().any(|f| *f.grid() != grid) {
        return Err(Error::IncompatibleSampling("component grids differ".into()));
    }
    let stepper = Stepper::new(grid, spec);
    let mut current: Vec<Field> = u0.to_vec();
    let sup0 = sup_over(&current).max(1e-300);

    let mut solution = SemilinearSolution {
        nu: spec.nu,
        times: vec![0.0],
        fields: vec![current.clone()],
        ut: vec![stepper.time_derivative(&current, &stepper.nonlinearity(&current))],
    };
    let mut sup_trajectory = vec![sup_over(&current)];
    let mut blowup: Option<(f64, (f64, f64))> = None;

    let instants = times.instants();
    for i in 1..instants.len() {
        let dt = instants[i] - instants[i - 1];
        let next = stepper.step(&current, dt);
        let sup_prev = sup_over(&current);
        let sup_next = sup_over(&next);
        let finite = next
            .iter()
            .all(|f| f.samples().iter().all(|v| v.is_finite()));
        if !finite
            || sup_next > BLOWUP_SUP
            || (sup_prev >= DOUBLING_FLOOR && sup_next >= 2.0 * sup_prev)
        {
            // Riccati-style extrapolation refines the crossing.
            let t_star = if finite && sup_next > 0.0 {
                instants[i] + 1.0 / sup_next
            } else {
                instants[i]
            };
            blowup = Some((t_star, (instants[i - 1], t_star.max(instants[i]))));
            if finite {
                sup_trajectory.push(sup_next);
                solution.times.push(instants[i]);
                let n = stepper.nonlinearity(&next);
                solution.ut.push(stepper.time_derivative(&next, &n));
                solution.fields.push(next);
            }
            break;
        }
        sup_trajectory.push(sup_next);
        solution.times.push(instants[i]);
        let n = stepper.nonlinearity(&next);
        solution.ut.push(stepper.time_derivative(&next, &n));
        solution.fields.push(next.clone());
        current = next;
    }

    let peak = sup_trajectory.iter().copied().fold(0.0f64, f64::max);
    let verdict = RunVerdict {
        outcome: match blowup {
            Some((t_star, bracket)) => Outcome::Blowup { t_star, bracket },
            None => Outcome::HorizonReached,
        },
        sup_trajectory,
        peak_ratio: peak / sup0,
    };
    Ok((solution, verdict))
}

/// The pair of Besov indices entering the solution space: the norm is the
/// max over present indices, plus the cumulative L1 norm two derivatives
/// higher.
#[derive(Debug, Clone, Copy)]
pub struct XIndices {
    pub primary: BesovIndex,
    pub secondary: Option<BesovIndex>,
}

/// X-norm trajectory: running sup part + cumulative smoothing part.
///
/// The cumulative part carries the viscosity weight (the maximal
/// regularity left side controls `nu Hess u` in L1), which is what makes
/// the smallness threshold scale linearly in nu.
#[derive(Debug, Clone)]
pub struct XTrajectory {
    pub times: Vec<f64>,
    /// Running sup of the entry norm.
    pub sup_part: Vec<f64>,
    /// Cumulative nu-weighted L1-in-time of the (+2)-regularity norm;
    /// nondecreasing.
    pub cum_part: Vec<f64>,
    /// X(t) = sup part + cumulative part.
    pub x: Vec<f64>,
    /// Per-index sup/cum split, for the estimate-chain audit.
    pub sup_primary: f64,
    pub cum_primary: f64,
    pub sup_secondary: f64,
    pub cum_secondary: f64,
    /// False when the indices sit outside the theorem windows; the
    /// computation proceeds regardless.
    pub hypothesis_ok: bool,
}

impl XTrajectory {
    pub fn total(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Relative increment of X over the trailing decade of time.
    pub fn plateau_increment(&self) -> f64 {
        let t_end = *self.times.last().unwrap();
        let x_end = self.total();
        if x_end <= 0.0 {
            return 0.0;
        }
        let x_early = self
            .times
            .iter()
            .zip(self.x.iter())
            .take_while(|(t, _)| **t <= t_end / 10.0)
            .map(|(_, x)| *x)
            .last()
            .unwrap_or(0.0);
        (x_end - x_early) / x_end
    }
}

fn vector_norm(comps: &[Field], idx: &BesovIndex, cutoffs: &DyadicCutoffs) -> f64 {
    comps.iter().map(|f| besov_value(f, idx, cutoffs)).sum()
}

/// Compute the X-norm trajectory of a semilinear solution.
pub fn x_norm(
    solution: &SemilinearSolution,
    indices: &XIndices,
    cutoffs: &DyadicCutoffs,
) -> XTrajectory {
    let dim = solution.fields[0][0].grid().dimension() as f64;
    let window_ok = |idx: &BesovIndex| -> bool {
        // th:non uses s = 0, p = n; th:nonbis needs s in (0, 1/p).
        if idx.s == 0.0 {
            (idx.p - dim).abs() < 1e-9 || idx.p > 1.0
        } else {
            idx.s > 0.0 && idx.s < 1.0 / idx.p
        }
    };
    let hypothesis_ok =
        window_ok(&indices.primary) && indices.secondary.as_ref().map_or(true, window_ok);

    let mut sup_running = 0.0f64;
    let mut sup_part = Vec::new();
    let mut cum_part = vec![0.0f64];
    let mut sup_primary = 0.0f64;
    let mut sup_secondary = 0.0f64;
    let mut cum_primary = 0.0;
    let mut cum_secondary = 0.0;
    let mut prev_smooth = (0.0, 0.0);
    for (i, comps) in solution.fields.iter().enumerate() {
        let e1 = vector_norm(comps, &indices.primary, cutoffs);
        let e2 = indices
            .secondary
            .map(|idx| vector_norm(comps, &idx, cutoffs))
            .unwrap_or(0.0);
        sup_primary = sup_primary.max(e1);
        sup_secondary = sup_secondary.max(e2);
        sup_running = sup_running.max(e1.max(e2));
        sup_part.push(sup_running);

        let s1 = vector_norm(comps, &indices.primary.shift(2.0), cutoffs);
        let s2 = indices
            .secondary
            .map(|idx| vector_norm(comps, &idx.shift(2.0), cutoffs))
            .unwrap_or(0.0);
        if i > 0 {
            let dt = solution.times[i] - solution.times[i - 1];
            cum_primary += 0.5 * (prev_smooth.0 + s1) * dt * solution.nu;
            cum_secondary += 0.5 * (prev_smooth.1 + s2) * dt * solution.nu;
            let combined = cum_primary.max(cum_secondary);
            cum_part.push(combined);
        }
        prev_smooth = (s1, s2);
    }
    let x: Vec<f64> = sup_part
        .iter()
        .zip(cum_part.iter())
        .map(|(s, c)| s + c)
        .collect();
    XTrajectory {
        times: solution.times.clone(),
        sup_part,
        cum_part,
        x,
        sup_primary,
        cum_primary,
        sup_secondary,
        cum_secondary,
        hypothesis_ok,
    }
}

/// Upgrade a horizon verdict to Global when the X-norm has plateaued
/// (relative increment below 1e-3 over the trailing decade).
pub fn classify_global(verdict: &RunVerdict, trajectory: &XTrajectory) -> Outcome {
    match verdict.outcome {
        Outcome::Blowup { t_star, bracket } => Outcome::Blowup { t_star, bracket },
        _ => {
            if trajectory.plateau_increment() < 1e-3 {
                Outcome::Global
            } else {
                Outcome::HorizonReached
            }
        }
    }
}

/// Result of the smallness-threshold bisection.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    /// (largest global amplitude, smallest failing amplitude); `None`
    /// when no positive amplitude survives (mean-carrying data under a
    /// quadratic nonlinearity).
    pub bracket: Option<(f64, f64)>,
    pub probes: usize,
    pub budget_exhausted: bool,
}

impl ThresholdResult {
    pub fn width(&self) -> Option<f64> {
        self.bracket.map(|(lo, hi)| (hi - lo) / hi)
    }

    pub fn midpoint(&self) -> Option<f64> {
        self.bracket.map(|(lo, hi)| 0.5 * (lo + hi))
    }
}

/// Bisection over the data amplitude: the run counts as safely global
/// when it reaches the horizon, plateaus, and its X-norm stays below
/// `2 x linear_envelope x` (entry norm of the data).
pub fn threshold_search(
    spec: &NonlinearSpec,
    shape: &[Field],
    indices: &XIndices,
    cutoffs: &DyadicCutoffs,
    times: &TimeGrid,
    linear_envelope: f64,
    budget: usize,
) -> Result<ThresholdResult> {
    spec.validate()?;
    let entry_norm = {
        let e1 = vector_norm(shape, &indices.primary, cutoffs);
        let e2 = indices
            .secondary
            .map(|idx| vector_norm(shape, &idx, cutoffs))
            .unwrap_or(0.0);
        e1.max(e2)
    };
    if entry_norm <= 0.0 {
        return Err(Error::DegenerateInput("zero shape".into()));
    }
    let probes = std::cell::Cell::new(0usize);
    let global_ok = |amp: f64| -> Result<bool> {
        probes.set(probes.get() + 1);
        let data: Vec<Field> = shape.iter().map(|f| f.scale(amp)).collect();
        let (solution, verdict) = solve_semilinear(spec, &data, times)?;
        if verdict.is_blowup() {
            return Ok(false);
        }
        let traj = x_norm(&solution, indices, cutoffs);
        let ok = matches!(classify_global(&verdict, &traj), Outcome::Global)
            && traj.total() <= 2.0 * linear_envelope * amp * entry_norm;
        Ok(ok)
    };

    let mut lo = 0.0f64;
    let mut hi = f64::NAN;
    let mut amp = 1.0;
    // Phase 1: find one passing and one failing amplitude.
    while probes.get() < budget {
        if global_ok(amp)? {
            lo = amp;
            amp *= 2.0;
            if amp > 1e12 {
                return Err(Error::BudgetExhausted(
                    "no failing amplitude below 1e12".into(),
                ));
            }
        } else {
            hi = amp;
            break;
        }
    }
    if hi.is_nan() {
        return Err(Error::BudgetExhausted("bracketing phase ran out".into()));
    }
    if lo == 0.0 {
        // Nothing passed yet; shrink until something does or give up.
        let mut probe = hi / 2.0;
        while probes.get() < budget && probe > 1e-8 {
            if global_ok(probe)? {
                lo = probe;
                break;
            }
            hi = probe;
            probe /= 2.0;
        }
        if lo == 0.0 {
            return Ok(ThresholdResult {
                bracket: None,
                probes: probes.get(),
                budget_exhausted: probes.get() >= budget,
            });
        }
    }
    // Phase 2: bisect to 5% width.
    while (hi - lo) / hi > 0.05 && probes.get() < budget {
        let mid = 0.5 * (lo + hi);
        if global_ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        bracket: Some((lo, hi)),
        probes: probes.get(),
        budget_exhausted: (hi - lo) / hi > 0.05,
    })
}

/// One row of the nonlinear estimate-chain audit.
#[derive(Debug, Clone)]
pub struct ChainRow {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Evaluate both sides of the bounding chain on a computed solution:
/// the transport term against X^2, the zero-order nonlinearity against
/// X^2 in each index, and the two interpolation embeddings of the
/// L1/L_{m-1}-in-time sup norms.
pub fn estimate_chain_audit(
    solution: &SemilinearSolution,
    spec: &NonlinearSpec,
    indices: &XIndices,
    cutoffs: &DyadicCutoffs,
) -> Result<Vec<ChainRow>> {
    let sup0 = sup_over(&solution.fields[0]);
    if sup0 == 0.0 {
        return Err(Error::DegenerateInput("zero solution".into()));
    }
    let grid = *solution.fields[0][0].grid();
    let stepper = Stepper::new(grid, spec);
    let traj = x_norm(solution, indices, cutoffs);
    let x_total = traj.total();
    let mut rows = Vec::new();
    let zero_primary = BesovIndex { s: 0.0, ..indices.primary };

    let trapz = |values: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 1..values.len() {
            acc += 0.5 * (values[i] + values[i - 1])
                * (solution.times[i] - solution.times[i - 1]);
        }
        acc
    };

    if spec.f1 != Transport::None {
        let vals: Vec<f64> = solution
            .fields
            .iter()
            .map(|comps| {
                let full = stepper.nonlinearity(comps);
                // Isolate the transport part by subtracting f0.
                let f0_part: Vec<Field> = if spec.f0.is_some() {
                    let only_f0 = NonlinearSpec {
                        f1: Transport::None,
                        ..spec.clone()
                    };
                    Stepper::new(grid, &only_f0).nonlinearity(comps)
                } else {
                    comps.iter().map(|f| Field::zeros(*f.grid())).collect()
                };
                full.iter()
                    .zip(f0_part.iter())
                    .map(|(a, b)| besov_value(&a.sub(b), &zero_primary, cutoffs))
                    .sum::<f64>()
            })
            .collect();
        let lhs = trapz(&vals);
        rows.push(ChainRow {
            name: "transport-vs-x2",
            lhs,
            rhs: x_total * x_total,
            ratio: lhs / (x_total * x_total),
        });
    }

    if spec.f0.is_some() {
        let only_f0 = NonlinearSpec {
            f1: Transport::None,
            ..spec.clone()
        };
        let f0_stepper = Stepper::new(grid, &only_f0);
        let mut primary_vals = Vec::new();
        let mut secondary_vals = Vec::new();
        for comps in &solution.fields {
            let f0_fields = f0_stepper.nonlinearity(comps);
            primary_vals.push(
                f0_fields
                    .iter()
                    .map(|f| besov_value(f, &zero_primary, cutoffs))
                    .sum::<f64>(),
            );
            if let Some(sec) = indices.secondary {
                let zero_sec = BesovIndex { s: 0.0, ..sec };
                secondary_vals.push(
                    f0_fields
                        .iter()
                        .map(|f| besov_value(f, &zero_sec, cutoffs))
                        .sum::<f64>(),
                );
            }
        }
        let lhs = trapz(&primary_vals);
        rows.push(ChainRow {
            name: "f0-primary-vs-x2",
            lhs,
            rhs: x_total * x_total,
            ratio: lhs / (x_total * x_total),
        });
        if !secondary_vals.is_empty() {
            let lhs = trapz(&secondary_vals);
            rows.push(ChainRow {
                name: "f0-secondary-vs-x2",
                lhs,
                rhs: x_total * x_total,
                ratio: lhs / (x_total * x_total),
            });
        }

        // Interpolated time-integrability of the sup norm.
        let m = spec.f0.as_ref().unwrap().growth_order();
        let sups: Vec<f64> = solution
            .fields
            .iter()
            .map(|comps| sup_over(comps))
            .collect();
        if m >= 2 {
            let powered: Vec<f64> = sups
                .iter()
                .map(|s| s.powi(m as i32 - 1))
                .collect();
            let lhs = trapz(&powered).powf(1.0 / (m as f64 - 1.0));
            let rhs = traj.sup_primary.max(traj.cum_primary);
            rows.push(ChainRow {
                name: "sup-l_m-1-interpolation",
                lhs,
                rhs,
                ratio: lhs / rhs.max(1e-300),
            });
        }
        let lhs = trapz(&sups);
        let rhs = if indices.secondary.is_some() {
            traj.cum_primary.max(traj.cum_secondary)
        } else {
            traj.cum_primary
        };
        rows.push(ChainRow {
            name: "sup-l1-embedding",
            lhs,
            rhs,
            ratio: lhs / rhs.max(1e-300),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoffs::{build_cutoffs, TransitionProfile};
    use crate::halfspace::odd_defect;
    use std::f64::consts::PI;

    fn setup(n: usize) -> (Grid, DyadicCutoffs) {
        let grid = Grid::new(1, n, 2.0 * PI).unwrap();
        let c = build_cutoffs(TransitionProfile::default(), &grid).unwrap();
        (grid, c)
    }

    #[test]
    fn riccati_blowup_time() {
        let (grid, _) = setup(64);
        for &a in &[0.5f64, 1.0, 2.0] {
            let spec = NonlinearSpec {
                f0: Some(Family::Quadratic { coeff: 1.0 }),
                ..NonlinearSpec::diffusion(1.0)
            };
            let horizon = 1.4 / a;
            let times = TimeGrid::hybrid(horizon, 4096);
            let u0 = Field::from_fn(grid, |_| a);
            let (_, verdict) = solve_semilinear(&spec, &[u0], &times).unwrap();
            match verdict.outcome {
                Outcome::Blowup { t_star, .. } => {
                    let exact = 1.0 / a;
                    assert!(
                        (t_star / exact - 1.0).abs() < 0.1,
                        "a={a}: t* {t_star} vs {exact}"
                    );
                }
                other => panic!("a={a}: expected blow-up, got {other:?}"),
            }
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let (grid, _) = setup(64);
        let spec = NonlinearSpec {
            f0: Some(Family::Quadratic { coeff: 1.0 }),
            f1: Transport::Burgers,
            ..NonlinearSpec::diffusion(1.0)
        };
        let times = TimeGrid::hybrid(1.0, 64);
        let (solution, verdict) = solve_semilinear(&spec, &[Field::zeros(grid)], &times).unwrap();
        assert!(!verdict.is_blowup());
        for comps in &solution.fields {
            assert_eq!(comps[0].sup_norm(), 0.0);
        }
    }

    #[test]
    fn small_burgers_decays_and_stays_odd() {
        let (grid, _) = setup(128);
        let spec = NonlinearSpec {
            f1: Transport::Burgers,
            ..NonlinearSpec::diffusion(1.0)
        };
        let u0 = Field::from_fn(grid, |x| 0.1 * x[0].sin() + 0.05 * (3.0 * x[0]).sin());
        let times = TimeGrid::hybrid(10.0, 256);
        let (solution, verdict) = solve_semilinear(&spec, &[u0], &times).unwrap();
        assert!(!verdict.is_blowup());
        let last = &solution.fields.last().unwrap()[0];
        assert!(last.sup_norm() < 0.1 * (-5.0f64).exp() * 10.0);
        // Dealiased convolution preserves odd parity.
        for comps in &solution.fields {
            let defect = odd_defect(&comps[0]) / comps[0].sup_norm().max(1e-300);
            assert!(defect < 1e-10, "parity defect {defect}");
        }
    }

    #[test]
    fn damped_cubic_never_fires_detector() {
        let (grid, _) = setup(64);
        let spec = NonlinearSpec {
            f0: Some(Family::Power { m: 3, coeff: -1.0 }),
            ..NonlinearSpec::diffusion(0.5)
        };
        let u0 = Field::from_fn(grid, |x| 2.0 * x[0].sin() + 1.0);
        let times = TimeGrid::hybrid(5.0, 512);
        let (_, verdict) = solve_semilinear(&spec, &[u0], &times).unwrap();
        assert!(!verdict.is_blowup(), "damped run misclassified: {:?}", verdict.outcome);
    }

    #[test]
    fn linear_run_matches_heat_multiplier() {
        let (grid, _) = setup(128);
        let spec = NonlinearSpec::diffusion(0.8);
        let u0 = Field::from_fn(grid, |x| (4.0 * x[0]).sin());
        let times = TimeGrid::hybrid(1.0, 64);
        let (solution, _) = solve_semilinear(&spec, &[u0.clone()], &times).unwrap();
        for (i, &t) in solution.times.iter().enumerate() {
            let exact = crate::cutoffs::heat_multiply(&u0, t, 0.8).unwrap();
            let err = solution.fields[i][0].sub(&exact).sup_norm();
            assert!(err < 1e-12, "linear exactness lost at t={t}");
        }
    }

    #[test]
    fn nu_rescaling_covariance_nonlinear() {
        // w(t) = u(t/nu)/nu solves the nu = 1 Burgers problem; with
        // covariantly scaled steps the discrete paths match too.
        let (grid, _) = setup(128);
        let nu = 2.0;
        let u0 = Field::from_fn(grid, |x| 0.2 * x[0].sin());
        let spec_nu = NonlinearSpec {
            f1: Transport::Burgers,
            ..NonlinearSpec::diffusion(nu)
        };
        let spec_one = NonlinearSpec {
            f1: Transport::Burgers,
            ..NonlinearSpec::diffusion(1.0)
        };
        let t_end = 1.0;
        let times_nu = TimeGrid::hybrid(t_end, 128);
        let times_one = TimeGrid::hybrid(nu * t_end, 128);
        let (sol_nu, _) = solve_semilinear(&spec_nu, &[u0.clone()], &times_nu).unwrap();
        let (sol_one, _) =
            solve_semilinear(&spec_one, &[u0.scale(1.0 / nu)], &times_one).unwrap();
        for i in 0..sol_nu.times.len() {
            let diff = sol_one.fields[i][0]
                .sub(&sol_nu.fields[i][0].scale(1.0 / nu))
                .sup_norm();
            let scale = sol_nu.fields[i][0].sup_norm().max(1e-300) / nu;
            assert!(diff / scale < 1e-8, "covariance broke at instant {i}");
        }
    }

    #[test]
    fn p_smallness_surrogate() {
        let (grid, _) = setup(64);
        let mut p = [[0.0; 3]; 3];
        p[0][0] = 0.25;
        let spec = NonlinearSpec {
            p_tensors: Some(vec![p]),
            ..NonlinearSpec::diffusion(1.0)
        };
        let eta = spec.p_smallness(&grid);
        assert!((eta - 0.25).abs() < 1e-12);
        // Dissipative stepping still contracts a single mode.
        let u0 = Field::from_fn(grid, |x| (3.0 * x[0]).sin());
        let times = TimeGrid::hybrid(0.5, 32);
        let (solution, _) = solve_semilinear(&spec, &[u0.clone()], &times).unwrap();
        let expected = u0.scale((-(1.0 - 0.25) * 9.0 * 0.5f64).exp());
        let err = solution.fields.last().unwrap()[0].sub(&expected).sup_norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn x_norm_zero_solution() {
        let (grid, c) = setup(64);
        let spec = NonlinearSpec::diffusion(1.0);
        let times = TimeGrid::hybrid(1.0, 32);
        let (solution, _) = solve_semilinear(&spec, &[Field::zeros(grid)], &times).unwrap();
        let indices = XIndices {
            primary: BesovIndex::homogeneous(0.0, 1.0, 1.0),
            secondary: None,
        };
        let traj = x_norm(&solution, &indices, &c);
        assert!(traj.total() == 0.0);
        assert!(traj.cum_part.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn x_norm_cumulative_nondecreasing() {
        let (grid, c) = setup(128);
        let spec = NonlinearSpec {
            f1: Transport::Burgers,
            ..NonlinearSpec::diffusion(1.0)
        };
        let u0 = Field::from_fn(grid, |x| 0.05 * x[0].sin());
        let times = TimeGrid::hybrid(5.0, 128);
        let (solution, _) = solve_semilinear(&spec, &[u0], &times).unwrap();
        let indices = XIndices {
            primary: BesovIndex::homogeneous(0.0, 1.0, 1.0),
            secondary: None,
        };
        let traj = x_norm(&solution, &indices, &c);
        assert!(traj.cum_part.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(traj.hypothesis_ok);
    }

    #[test]
    fn constant_shape_has_no_positive_threshold() {
        let (grid, c) = setup(64);
        let spec = NonlinearSpec {
            f0: Some(Family::Quadratic { coeff: 1.0 }),
            ..NonlinearSpec::diffusion(1.0)
        };
        let shape = Field::from_fn(grid, |_| 1.0);
        let indices = XIndices {
            primary: BesovIndex::nonhomogeneous(0.0, 1.0, 1.0),
            secondary: None,
        };
        let times = TimeGrid::hybrid(20.0, 256);
        let result =
            threshold_search(&spec, &[shape], &indices, &c, &times, 10.0, 60).unwrap();
        assert!(
            result.bracket.is_none(),
            "mean-carrying quadratic data must always blow up: {result:?}"
        );
    }

    #[test]
    fn burgers_threshold_bracket() {
        let (grid, c) = setup(128);
        let spec = NonlinearSpec {
            f1: Transport::Burgers,
            ..NonlinearSpec::diffusion(1.0)
        };
        // Mid-band shape: |xi| = 4 sits inside the covered annulus, so the
        // entry norm is honest (a bare sin x falls below j_min).
        let shape = Field::from_fn(grid, |x| (4.0 * x[0]).sin());
        let indices = XIndices {
            primary: BesovIndex::homogeneous(0.0, 1.0, 1.0),
            secondary: None,
        };
        let times = TimeGrid::hybrid(25.0, 384);
        let result =
            threshold_search(&spec, &[shape], &indices, &c, &times, 4.0, 40).unwrap();
        let (lo, hi) = result.bracket.expect("positive threshold expected");
        assert!(lo > 0.0 && hi > lo);
        assert!((hi - lo) / hi <= 0.05, "bracket too wide: [{lo}, {hi}]");
    }

    #[test]
    fn estimate_chain_rows_finite() {
        let (grid, c) = setup(128);
        let spec = NonlinearSpec {
            f0: Some(Family::Power { m: 3, coeff: 1.0 }),
            f1: Transport::Burgers,
            ..NonlinearSpec::diffusion(1.0)
        };
        let u0 = Field::from_fn(grid, |x| 0.05 * x[0].sin());
        let times = TimeGrid::hybrid(5.0, 128);
        let (solution, _) = solve_semilinear(&spec, &[u0], &times).unwrap();
        let indices = XIndices {
            primary: BesovIndex::homogeneous(0.0, 1.0, 1.0),
            secondary: None,
        };
        let rows = estimate_chain_audit(&solution, &spec, &indices, &c).unwrap();
        assert!(rows.len() >= 3);
        for row in &rows {
            assert!(
                row.lhs.is_finite() && row.rhs > 0.0 && row.ratio.is_finite(),
                "bad row {row:?}"
            );
        }
    }
}
