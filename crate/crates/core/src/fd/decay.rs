//! Decay-rate fits (exponential for bounded domains, algebraic for the
//! exterior proxy) and the absorption-integral criterion.

use super::mask::DomainMask;
use super::solver::FdSolution;
use crate::error::{Error, Result};

/// A fitted decay law over a time window.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub window: (f64, f64),
    /// Semilog rate (exponential fits) or log-log slope (algebraic fits).
    pub slope: f64,
    pub r_squared: f64,
    /// The exponent or rate the theory predicts for this geometry.
    pub target: f64,
}

/// Least squares y = a + b x; returns (b, R^2).
fn regress(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Semilog fit of `||u(t)||_p` on `[T/2, T]` for a bounded geometry; the
/// rate is compared against `target` (nu times the principal Dirichlet
/// eigenvalue when it is known).
pub fn exp_decay_fit(
    mask: &DomainMask,
    solution: &FdSolution,
    p: f64,
    target: f64,
) -> Result<DecayFit> {
    if !mask.is_bounded_kind() {
        return Err(Error::HypothesisViolated(
            "exponential decay fit needs a bounded mask kind".into(),
        ));
    }
    let t_end = *solution.sample_times.last().ok_or_else(|| {
        Error::DegenerateInput("empty solution".into())
    })?;
    let window = (t_end / 2.0, t_end);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, snap) in solution.sample_times.iter().zip(solution.snapshots.iter()) {
        if t >= window.0 && t <= window.1 {
            let norm = mask.domain_lp(snap, p);
            if norm > 0.0 {
                xs.push(t);
                ys.push(norm.ln());
            }
        }
    }
    if xs.len() < 4 {
        return Err(Error::FarFieldHorizonExhausted { t_far: t_end });
    }
    let (slope, r2) = regress(&xs, &ys);
    if r2 < 0.99 {
        return Err(Error::FitWindowUnreliable { r_squared: r2 });
    }
    Ok(DecayFit {
        window,
        slope: -slope,
        r_squared: r2,
        target,
    })
}

/// Log-log slope of `||u(t)||_{L_a(K)}` for `L_b` data on the window
/// `[t_start, T_far]` with `T_far` the pre-reflection horizon. The target
/// exponent is `-(n/2)(1/b - 1/a)`.
///
/// Exterior masks must start at `t >= 1`; the whole-box control (no
/// obstacle) may fit from earlier since no boundary layer is involved.
pub fn algebraic_decay_fit(
    mask: &DomainMask,
    solution: &FdSolution,
    from_b: f64,
    to_a: f64,
    t_start: f64,
) -> Result<DecayFit> {
    if mask.obstacle.is_some() && t_start < 1.0 {
        return Err(Error::HypothesisViolated(
            "exterior algebraic fits start at t >= 1".into(),
        ));
    }
    let t_far = mask.pre_reflection_horizon(solution.nu);
    if t_far <= t_start {
        return Err(Error::FarFieldHorizonExhausted { t_far });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, snap) in solution.sample_times.iter().zip(solution.snapshots.iter()) {
        if t >= t_start && t <= t_far {
            let norm = mask.k_lp(snap, to_a);
            if norm > 0.0 {
                xs.push(t.ln());
                ys.push(norm.ln());
            }
        }
    }
    if xs.len() < 4 {
        return Err(Error::FarFieldHorizonExhausted { t_far });
    }
    let (slope, r2) = regress(&xs, &ys);
    let n = mask.lattice.dim() as f64;
    let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
    Ok(DecayFit {
        window: (t_start, t_far),
        slope,
        r_squared: r2,
        target: -(n / 2.0) * (inv(from_b) - inv(to_a)),
    })
}

/// Result of the absorption-integral criterion `int_1^T t^{-alpha} dt`
/// with `alpha = (n/2)(1/p - eps)`.
#[derive(Debug, Clone, Copy)]
pub struct AbsorptionCheck {
    pub exponent: f64,
    pub value: f64,
    pub closed_form: f64,
    /// Relative gap between quadrature and antiderivative.
    pub rel_gap: f64,
    /// True exactly when the exponent exceeds 1 (equivalently p < n/2 for
    /// small eps): the integral stays bounded as T grows.
    pub converges: bool,
    /// The T -> infinity limit when it exists.
    pub limit: Option<f64>,
}

pub fn absorption_integral(n: usize, p: f64, eps: f64, t_end: f64) -> Result<AbsorptionCheck> {
    if !(eps > 0.0 && eps < 1.0 / p) {
        return Err(Error::HypothesisViolated(format!(
            "eps must lie in (0, 1/p); got eps={eps}, p={p}"
        )));
    }
    if t_end <= 1.0 {
        return Err(Error::DegenerateInput("need T > 1".into()));
    }
    let alpha = n as f64 / 2.0 * (1.0 / p - eps);
    // Composite Simpson after t = e^s: integrand e^{(1-alpha) s}.
    let m = 20_000usize;
    let s_end = t_end.ln();
    let g = |s: f64| ((1.0 - alpha) * s).exp();
    let mut acc = g(0.0) + g(s_end);
    for i in 1..m {
        let s = s_end * i as f64 / m as f64;
        acc += if i % 2 == 1 { 4.0 * g(s) } else { 2.0 * g(s) };
    }
    let value = acc * s_end / (3.0 * m as f64);
    let closed_form = if (alpha - 1.0).abs() < 1e-12 {
        s_end
    } else {
        (t_end.powf(1.0 - alpha) - 1.0) / (1.0 - alpha)
    };
    let rel_gap = (value - closed_form).abs() / closed_form.abs().max(1e-300);
    let converges = alpha > 1.0;
    Ok(AbsorptionCheck {
        exponent: alpha,
        value,
        closed_form,
        rel_gap,
        converges,
        limit: converges.then(|| 1.0 / (alpha - 1.0)),
    })
}
