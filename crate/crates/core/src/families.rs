//! Named nonlinearity families shared by the composition-estimate checks
//! and the semilinear solver.
//!
//! Every family satisfies `f(0) = 0` and `df(0) = 0` by construction.

/// A scalar C^1 nonlinearity with power-type growth `|df(w)| <= K |w|^{m-1}`
/// on bounded sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `f(u) = coeff * u^2`.
    Quadratic { coeff: f64 },
    /// Flame-front nonlinearity `f(u) = k * u^2 (u - u_star)`.
    Flame { k: f64, u_star: f64 },
    /// `f(u) = coeff * |u|^{m-1} u` with integer `m >= 2`.
    Power { m: u32, coeff: f64 },
}

impl Family {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Family::Quadratic { coeff } => coeff * u * u,
            Family::Flame { k, u_star } => k * u * u * (u - u_star),
            Family::Power { m, coeff } => coeff * u.abs().powi(m as i32 - 1) * u,
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            Family::Quadratic { coeff } => 2.0 * coeff * u,
            Family::Flame { k, u_star } => k * (3.0 * u * u - 2.0 * u_star * u),
            Family::Power { m, coeff } => coeff * m as f64 * u.abs().powi(m as i32 - 1),
        }
    }

    /// Growth order `m` in `|df(w)| <= K |w|^{m-1}`.
    pub fn growth_order(&self) -> u32 {
        match *self {
            Family::Quadratic { .. } => 2,
            Family::Flame { .. } => 2,
            Family::Power { m, .. } => m,
        }
    }

    /// Growth constant valid for `|w| <= radius`.
    ///
    /// Quadratic and power families admit a global constant; the flame
    /// family is cubic so its order-2 constant depends on the range.
    pub fn growth_constant(&self, radius: f64) -> f64 {
        match *self {
            Family::Quadratic { coeff } => 2.0 * coeff.abs(),
            Family::Flame { k, u_star } => k.abs() * (3.0 * radius + 2.0 * u_star.abs()),
            Family::Power { m, coeff } => m as f64 * coeff.abs(),
        }
    }

    /// Nominal constant `K` as written in the family definition; the
    /// composition-estimate denominator uses this one.
    pub fn nominal_k(&self) -> f64 {
        match *self {
            Family::Quadratic { coeff } => coeff.abs(),
            Family::Flame { k, .. } => k.abs(),
            Family::Power { coeff, .. } => coeff.abs(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_at_zero() {
        let families = [
            Family::Quadratic { coeff: 1.0 },
            Family::Flame { k: 2.0, u_star: 0.7 },
            Family::Power { m: 3, coeff: -1.0 },
        ];
        for f in families {
            assert_eq!(f.eval(0.0), 0.0);
            assert_eq!(f.derivative(0.0), 0.0);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let families = [
            Family::Quadratic { coeff: 0.5 },
            Family::Flame { k: 1.5, u_star: -0.3 },
            Family::Power { m: 4, coeff: 2.0 },
        ];
        let eps = 1e-6;
        for f in families {
            for &u in &[-1.3, -0.2, 0.4, 2.0] {
                let fd = (f.eval(u + eps) - f.eval(u - eps)) / (2.0 * eps);
                assert!((fd - f.derivative(u)).abs() < 1e-5, "{f:?} at {u}");
            }
        }
    }

    #[test]
    fn growth_bound_holds_on_range() {
        let families = [
            Family::Quadratic { coeff: 1.0 },
            Family::Flame { k: 1.0, u_star: 0.5 },
            Family::Power { m: 3, coeff: 1.0 },
        ];
        for f in families {
            let radius = 2.0;
            let k = f.growth_constant(radius);
            let m = f.growth_order() as i32;
            for i in -200..=200 {
                let u = radius * i as f64 / 200.0;
                assert!(
                    f.derivative(u).abs() <= k * u.abs().powi(m - 1) + 1e-12,
                    "{f:?} growth violated at {u}"
                );
            }
        }
    }
}
