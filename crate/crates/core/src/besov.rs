//! Besov (semi-)norms from Littlewood-Paley blocks, the finite-difference
//! characterization, and empirical checks of the product, composition,
//! duality and interpolation estimates.

use crate::cutoffs::{low_freq, lp_block_unchecked, DyadicCutoffs};
use crate::error::{Error, Result};
use crate::families::Family;
use crate::grid::{Field, Grid};
use crate::rng;
use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;

/// Besov space index (s, p, q) plus the homogeneous/nonhomogeneous flavor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    /// Regularity.
    pub s: f64,
    /// Integrability, in [1, inf].
    pub p: f64,
    /// Band summation index, in [1, inf].
    pub q: f64,
    pub flavor: Flavor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Homogeneous,
    Nonhomogeneous,
}

impl BesovIndex {
    pub fn homogeneous(s: f64, p: f64, q: f64) -> Self {
        BesovIndex {
            s,
            p,
            q,
            flavor: Flavor::Homogeneous,
        }
    }

    pub fn nonhomogeneous(s: f64, p: f64, q: f64) -> Self {
        BesovIndex {
            s,
            p,
            q,
            flavor: Flavor::Nonhomogeneous,
        }
    }

    /// Conjugate integrability exponent.
    pub fn p_conjugate(&self) -> f64 {
        conjugate(self.p)
    }

    /// Trace-compatible window `-1 + 1/p < s < 1/p` used by the half-space
    /// and bounded-domain theorems.
    pub fn in_trace_window(&self) -> bool {
        let inv_p = if self.p.is_infinite() { 0.0 } else { 1.0 / self.p };
        -1.0 + inv_p < self.s && self.s < inv_p
    }

    pub fn shift(&self, ds: f64) -> Self {
        BesovIndex { s: self.s + ds, ..*self }
    }
}

pub fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Per-band breakdown of a Besov norm evaluation.
#[derive(Debug, Clone)]
pub struct NormReport {
    /// The norm: q-sum (or sup) of the in-range band terms, plus the
    /// low-frequency term for the nonhomogeneous flavor.
    pub value: f64,
    /// In-range terms `j -> 2^{js} ||Delta_j u||_p`.
    pub band_terms: BTreeMap<i32, f64>,
    /// q-combined contribution of lattice-resolvable bands outside the
    /// range; what the truncated dyadic sum forgets.
    pub tail_estimate: f64,
    /// `||S_0 u||_p` for the nonhomogeneous flavor.
    pub low_freq_term: Option<f64>,
    pub flavor: Flavor,
    /// Set when the tail dominates (> 5% of the value).
    pub unreliable: bool,
}

impl NormReport {
    pub fn to_json(&self) -> serde_json::Value {
        let bands: serde_json::Map<String, serde_json::Value> = self
            .band_terms
            .iter()
            .map(|(j, t)| (j.to_string(), serde_json::json!(t)))
            .collect();
        serde_json::json!({
            "value": self.value,
            "bands": bands,
            "tail": self.tail_estimate,
            "flavor": match self.flavor {
                Flavor::Homogeneous => "homogeneous",
                Flavor::Nonhomogeneous => "nonhomogeneous",
            },
        })
    }
}

/// Discrete Lebesgue norm; lattice quadrature for finite p, lattice sup
/// for p = inf.
pub fn lebesgue_norm(u: &Field, p: f64) -> f64 {
    u.lp_norm(p)
}

fn lq_combine(terms: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        terms.fold(0.0f64, f64::max)
    } else if q == 1.0 {
        terms.sum()
    } else {
        terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn band_term(u: &Field, j: i32, s: f64, p: f64, cutoffs: &DyadicCutoffs) -> f64 {
    (j as f64 * s).exp2() * lp_block_unchecked(u, j, cutoffs).lp_norm(p)
}

/// Besov norm of a field from its Littlewood-Paley blocks.
///
/// Homogeneous flavor sums bands over the resolvable range
/// `[j_min, j_max]`; nonhomogeneous sums `j >= 0` and adds `||S_0 u||_p`.
/// Bands outside the range that still carry lattice frequencies are
/// evaluated exactly and reported as `tail_estimate`, never silently
/// dropped.
pub fn besov_norm(u: &Field, idx: &BesovIndex, cutoffs: &DyadicCutoffs) -> NormReport {
    let grid = u.grid();
    let xi_min = grid.fundamental_frequency();
    let xi_max = grid.max_frequency();
    let (range_lo, range_hi) = match idx.flavor {
        Flavor::Homogeneous => (cutoffs.j_min(), cutoffs.j_max()),
        Flavor::Nonhomogeneous => (0.min(cutoffs.j_min()), cutoffs.j_max()),
    };
    let mut band_terms = BTreeMap::new();
    for j in range_lo..=range_hi {
        if idx.flavor == Flavor::Nonhomogeneous && j < 0 {
            continue;
        }
        band_terms.insert(j, band_term(u, j, idx.s, idx.p, cutoffs));
    }

    let mut tail_terms = Vec::new();
    if idx.flavor == Flavor::Homogeneous {
        // Bands below the range: band j touches (2^{j-1}, 2^{j+1}), so it
        // carries lattice content only while 2^{j+1} > xi_min.
        let mut j = range_lo - 1;
        while ((j + 1) as f64).exp2() > xi_min * (1.0 - 1e-12) {
            tail_terms.push(band_term(u, j, idx.s, idx.p, cutoffs));
            j -= 1;
        }
    }
    // Bands above the range, up to the lattice diagonal.
    let mut j = range_hi + 1;
    while ((j - 1) as f64).exp2() < xi_max * (1.0 + 1e-12) {
        tail_terms.push(band_term(u, j, idx.s, idx.p, cutoffs));
        j += 1;
    }
    let tail_estimate = lq_combine(tail_terms.into_iter(), idx.q);

    let low_freq_term = match idx.flavor {
        Flavor::Homogeneous => None,
        Flavor::Nonhomogeneous => Some(
            low_freq(u, 0, cutoffs)
                .expect("k = 0 is always admissible")
                .lp_norm(idx.p),
        ),
    };
    let value =
        lq_combine(band_terms.values().copied(), idx.q) + low_freq_term.unwrap_or(0.0);
    NormReport {
        value,
        band_terms,
        tail_estimate,
        low_freq_term,
        flavor: idx.flavor,
        unreliable: tail_estimate > 0.05 * value,
    }
}

/// Shorthand: the norm value only.
pub fn besov_value(u: &Field, idx: &BesovIndex, cutoffs: &DyadicCutoffs) -> f64 {
    besov_norm(u, idx, cutoffs).value
}

/// Seed for the stratified subsampling estimator, fixed once for the whole
/// laboratory.
pub const FD_SAMPLING_SEED: u64 = 0x5EED;
/// Dense double sums are used up to this many lattice points.
pub const FD_DENSE_LIMIT: usize = 1 << 16;
/// Pair budget of the subsampled estimator.
pub const FD_SAMPLE_PAIRS: usize = 1 << 20;

/// Finite-difference seminorm evaluation together with the subsampling
/// spread when the estimator was used.
#[derive(Debug, Clone, Copy)]
pub struct FdSeminorm {
    pub value: f64,
    /// Relative half-spread of two independent half-budget estimates;
    /// `None` for the dense evaluation.
    pub sampling_spread: Option<f64>,
}

/// Finite-difference Besov seminorm for `0 < s < 1` and finite `p, q`:
/// the double lattice sum of `|u(y) - u(x)|^p / |y-x|^{n+sp}` with the
/// torus metric, dense up to [`FD_DENSE_LIMIT`] points and stratified
/// subsampling beyond.
pub fn fd_seminorm(u: &Field, idx: &BesovIndex) -> Result<f64> {
    fd_seminorm_stats(u, idx).map(|r| r.value)
}

pub fn fd_seminorm_stats(u: &Field, idx: &BesovIndex) -> Result<FdSeminorm> {
    if !(idx.s > 0.0 && idx.s < 1.0) {
        return Err(Error::FdCharacterizationOutOfRange { s: idx.s });
    }
    if idx.p.is_infinite() || idx.q.is_infinite() {
        return Err(Error::HypothesisViolated(
            "finite-difference characterization needs finite p and q".into(),
        ));
    }
    let grid = *u.grid();
    if grid.total_points() <= FD_DENSE_LIMIT {
        Ok(FdSeminorm {
            value: fd_dense(u, idx),
            sampling_spread: None,
        })
    } else {
        Ok(fd_sampled(u, idx))
    }
}

fn torus_dist(grid: &Grid, a: [usize; 3], b: [usize; 3]) -> f64 {
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let mut acc = 0.0;
    for axis in 0..grid.dimension() {
        let d = a[axis].abs_diff(b[axis]);
        let d = d.min(n - d) as f64 * h;
        acc += d * d;
    }
    acc.sqrt()
}

fn pow_abs(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.abs()
    } else if p == 2.0 {
        v * v
    } else {
        v.abs().powf(p)
    }
}

fn fd_dense(u: &Field, idx: &BesovIndex) -> f64 {
    let grid = *u.grid();
    let total = grid.total_points();
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let hn = grid.cell_volume();
    let dim = grid.dimension();
    let samples = u.samples();
    let exponent = dim as f64 + idx.s * idx.p;
    // Weight per displacement (independent of x): h^n / |d|^{n+sp}.
    let origin = [0usize; 3];
    let weights: Vec<f64> = (0..total)
        .map(|flat| {
            if flat == 0 {
                0.0
            } else {
                let d = grid.unravel(flat);
                hn / torus_dist(&grid, d, origin).powf(exponent)
            }
        })
        .collect();
    let _ = h;
    let mut outer = 0.0;
    let unravel: Vec<[usize; 3]> = (0..total).map(|f| grid.unravel(f)).collect();
    for (x, &ux) in samples.iter().enumerate() {
        let xi = unravel[x];
        let mut inner = 0.0;
        for (d, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let di = unravel[d];
            let mut yi = [0usize; 3];
            for axis in 0..dim {
                yi[axis] = (xi[axis] + di[axis]) % n;
            }
            let uy = samples[grid.ravel(yi)];
            inner += pow_abs(uy - ux, idx.p) * w;
        }
        outer += inner.powf(idx.q / idx.p);
    }
    (outer * hn).powf(1.0 / idx.q)
}

fn fd_sampled(u: &Field, idx: &BesovIndex) -> FdSeminorm {
    let grid = *u.grid();
    let total = grid.total_points();
    let volume = grid.volume();
    let dim = grid.dimension() as f64;
    let exponent = dim + idx.s * idx.p;
    let samples = u.samples();
    let strata = 1024usize;
    let per_x = (FD_SAMPLE_PAIRS / strata).max(2);
    let mut rng = rng::derive(FD_SAMPLING_SEED, &[total as u64]);
    let stratum = total / strata;
    let mut halves = [0.0f64, 0.0];
    let mut outer = 0.0;
    for s_idx in 0..strata {
        let x = s_idx * stratum + rng.gen_range(0..stratum.max(1));
        let xi = grid.unravel(x);
        let ux = samples[x];
        let mut inner_halves = [0.0f64, 0.0];
        let mut counts = [0usize, 0];
        for k in 0..per_x {
            let y = rng.gen_range(0..total);
            if y == x {
                continue;
            }
            let g = pow_abs(samples[y] - ux, idx.p)
                / torus_dist(&grid, grid.unravel(y), xi).powf(exponent);
            inner_halves[k % 2] += g;
            counts[k % 2] += 1;
        }
        let inner: f64 = volume * (inner_halves[0] + inner_halves[1])
            / (counts[0] + counts[1]).max(1) as f64;
        outer += inner.powf(idx.q / idx.p);
        for half in 0..2 {
            let i = volume * inner_halves[half] / counts[half].max(1) as f64;
            halves[half] += i.powf(idx.q / idx.p);
        }
    }
    let cell = volume / strata as f64;
    let value = (outer * cell).powf(1.0 / idx.q);
    let v0 = (halves[0] * cell).powf(1.0 / idx.q);
    let v1 = (halves[1] * cell).powf(1.0 / idx.q);
    FdSeminorm {
        value,
        sampling_spread: Some((v0 - v1).abs() / value.max(1e-300)),
    }
}

/// The four product laws of the a priori estimates toolbox.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductLaw {
    /// `s > 0`: `||uv|| <~ ||u||_inf ||v|| + ||v||_inf ||u||`.
    Symmetric,
    /// `s > 0, t > 0`: high-low splitting against `b^{-t}_{inf,q}`.
    HighLow { t: f64 },
    /// `t > 0, s > -n/p'`: the three-term variant.
    Triple { t: f64 },
    /// `q > 1, 1 - n/q <= s <= 1`: `||uv||_{b^0_{q,1}} <~
    /// ||u||_{b^s_{n,1}} ||v||_{b^{1-s}_{q,1}}` (n = dimension).
    CriticalDual,
}

/// Ratio LHS/RHS of the selected product inequality, with all norms taken
/// in the flavor of `idx`. A zero RHS against a nonzero LHS is the
/// structural failure signal.
pub fn product_estimate_check(
    u: &Field,
    v: &Field,
    idx: &BesovIndex,
    law: ProductLaw,
    cutoffs: &DyadicCutoffs,
) -> Result<f64> {
    let n = u.grid().dimension() as f64;
    match law {
        ProductLaw::Symmetric => {
            if idx.s <= 0.0 {
                return Err(Error::HypothesisViolated("law 1 needs s > 0".into()));
            }
        }
        ProductLaw::HighLow { t } => {
            if idx.s <= 0.0 || t <= 0.0 {
                return Err(Error::HypothesisViolated("law 2 needs s > 0 and t > 0".into()));
            }
        }
        ProductLaw::Triple { t } => {
            let p_conj = idx.p_conjugate();
            let bound = if p_conj.is_infinite() { 0.0 } else { -n / p_conj };
            if t <= 0.0 || idx.s <= bound {
                return Err(Error::HypothesisViolated(
                    "law 3 needs t > 0 and s > -n/p'".into(),
                ));
            }
        }
        ProductLaw::CriticalDual => {
            let q = idx.p;
            if !(q > 1.0) || idx.s < 1.0 - n / q - 1e-12 || idx.s > 1.0 + 1e-12 {
                return Err(Error::HypothesisViolated(
                    "law 4 needs q > 1 and 1 - n/q <= s <= 1".into(),
                ));
            }
        }
    }

    let product = u.mul_pointwise(v);
    let norm = |w: &Field, i: &BesovIndex| besov_value(w, i, cutoffs);
    let (lhs, rhs) = match law {
        ProductLaw::Symmetric => {
            let lhs = norm(&product, idx);
            let rhs = u.sup_norm() * norm(v, idx) + v.sup_norm() * norm(u, idx);
            (lhs, rhs)
        }
        ProductLaw::HighLow { t } => {
            let lhs = norm(&product, idx);
            let low = BesovIndex { s: -t, p: f64::INFINITY, ..*idx };
            let high = BesovIndex { s: idx.s + t, q: f64::INFINITY, ..*idx };
            let rhs = u.sup_norm() * norm(v, idx) + norm(v, &low) * norm(u, &high);
            (lhs, rhs)
        }
        ProductLaw::Triple { t } => {
            let lhs = norm(&product, idx);
            let p_conj = idx.p_conjugate();
            let crit = BesovIndex {
                s: if p_conj.is_infinite() { 0.0 } else { n / p_conj },
                p: p_conj,
                q: f64::INFINITY,
                flavor: idx.flavor,
            };
            let low = BesovIndex { s: -t, p: f64::INFINITY, ..*idx };
            let high = BesovIndex { s: idx.s + t, q: f64::INFINITY, ..*idx };
            let rhs = u.sup_norm() * norm(v, idx)
                + norm(u, &crit) * norm(v, idx)
                + norm(v, &low) * norm(u, &high);
            (lhs, rhs)
        }
        ProductLaw::CriticalDual => {
            let q = idx.p;
            let zero = BesovIndex { s: 0.0, p: q, q: 1.0, flavor: idx.flavor };
            let left = BesovIndex { s: idx.s, p: n, q: 1.0, flavor: idx.flavor };
            let right = BesovIndex { s: 1.0 - idx.s, p: q, q: 1.0, flavor: idx.flavor };
            (norm(&product, &zero), norm(u, &left) * norm(v, &right))
        }
    };

    if rhs <= 0.0 {
        if lhs > 1e-12 {
            return Err(Error::InequalityViolated(format!(
                "product law {law:?}: RHS = 0 with LHS = {lhs:.3e}"
            )));
        }
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// Composition estimate through the finite-difference seminorm: the ratio
/// `||f(u)|| / (K ||u||_inf^{m-1} ||u||)` with both seminorms evaluated by
/// [`fd_seminorm`] (the characterization the mean-value proof runs on).
pub fn composition_estimate_check(
    family: &Family,
    u: &Field,
    idx: &BesovIndex,
) -> Result<f64> {
    let sup = u.sup_norm();
    if sup == 0.0 {
        return Err(Error::DegenerateInput("u is identically zero".into()));
    }
    let denom_semi = fd_seminorm(u, idx)?;
    if denom_semi == 0.0 {
        return Err(Error::DegenerateInput(
            "constant field: both seminorms vanish".into(),
        ));
    }
    let fu = u.map(|v| family.eval(v));
    let num = fd_seminorm(&fu, idx)?;
    let m = family.growth_order() as i32;
    let k = family.nominal_k();
    Ok(num / (k * sup.powi(m - 1) * denom_semi))
}

/// Pointwise mean-value domination for the quadratic family:
/// max over lattice pairs of `|u^2(y) - u^2(x)| / (2 ||u||_inf |u(y)-u(x)|)`.
pub fn quadratic_pointwise_domination(u: &Field) -> f64 {
    let sup = u.sup_norm();
    if sup == 0.0 {
        return 0.0;
    }
    let s = u.samples();
    let mut worst = 0.0f64;
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let diff = (s[j] - s[i]).abs();
            if diff < 1e-14 {
                continue;
            }
            let num = (s[j] * s[j] - s[i] * s[i]).abs();
            worst = worst.max(num / (2.0 * sup * diff));
        }
    }
    worst
}

/// Duality pairing ratio `|<u, v>| / (||u||_{B^s_{p,1}} ||v||_{B^{-s}_{p',inf}})`
/// with homogeneous norms.
pub fn duality_pairing_check(
    u: &Field,
    v: &Field,
    s: f64,
    p: f64,
    cutoffs: &DyadicCutoffs,
) -> Result<f64> {
    if p.is_infinite() {
        return Err(Error::HypothesisViolated("duality check needs finite p".into()));
    }
    let num = u.pair(v).abs();
    let left = BesovIndex::homogeneous(s, p, 1.0);
    let right = BesovIndex::homogeneous(-s, conjugate(p), f64::INFINITY);
    let den = besov_value(u, &left, cutoffs) * besov_value(v, &right, cutoffs);
    if den == 0.0 {
        if num > 1e-12 {
            return Err(Error::InequalityViolated(
                "duality pairing: zero norms against nonzero pairing".into(),
            ));
        }
        return Err(Error::DegenerateInput("zero denominator".into()));
    }
    Ok(num / den)
}

/// Interpolation inequality ratio
/// `||u||_{B^{1+s}} / (||u||_{B^{2+s}}^{1/2} ||u||_{B^{s}}^{1/2})`
/// in the nonhomogeneous flavor with third index 1.
pub fn interpolation_check(u: &Field, s: f64, p: f64, cutoffs: &DyadicCutoffs) -> Result<f64> {
    let mid = BesovIndex::nonhomogeneous(1.0 + s, p, 1.0);
    let hi = BesovIndex::nonhomogeneous(2.0 + s, p, 1.0);
    let lo = BesovIndex::nonhomogeneous(s, p, 1.0);
    let den = (besov_value(u, &hi, cutoffs) * besov_value(u, &lo, cutoffs)).sqrt();
    if den == 0.0 {
        return Err(Error::DegenerateInput("zero field".into()));
    }
    Ok(besov_value(u, &mid, cutoffs) / den)
}

/// Axis-aligned lattice sub-box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubBox {
    pub lo: [usize; 3],
    pub size: [usize; 3],
}

impl SubBox {
    pub fn contains(&self, idx: [usize; 3], dim: usize) -> bool {
        (0..dim).all(|a| idx[a] >= self.lo[a] && idx[a] < self.lo[a] + self.size[a])
    }

    /// Shrink by `margin` cells on every side.
    pub fn shrunk(&self, margin: usize, dim: usize) -> SubBox {
        let mut out = *self;
        for a in 0..dim {
            out.lo[a] += margin;
            out.size[a] = self.size[a].saturating_sub(2 * margin);
        }
        out
    }
}

/// Ratio of homogeneous to nonhomogeneous norm for a field compactly
/// supported in `sub_box`. The support must keep a margin of at least
/// four cells from the sub-box boundary.
pub fn extension_by_zero_check(
    u: &Field,
    sub_box: &SubBox,
    idx: &BesovIndex,
    cutoffs: &DyadicCutoffs,
) -> Result<f64> {
    let grid = u.grid();
    let dim = grid.dimension();
    let inner = sub_box.shrunk(4, dim);
    let sup = u.sup_norm();
    let mut support_ok = true;
    for (flat, &v) in u.samples().iter().enumerate() {
        if v.abs() > 1e-13 * sup.max(1e-300) && !inner.contains(grid.unravel(flat), dim) {
            support_ok = false;
            break;
        }
    }
    if !support_ok {
        return Err(Error::MarginViolated {
            required: 4.0 * grid.spacing(),
            found: 0.0,
        });
    }
    if sup == 0.0 {
        return Err(Error::DegenerateInput("zero field".into()));
    }
    let hom = BesovIndex { flavor: Flavor::Homogeneous, ..*idx };
    let non = BesovIndex { flavor: Flavor::Nonhomogeneous, ..*idx };
    let denom = besov_value(u, &non, cutoffs);
    if denom == 0.0 {
        return Err(Error::DegenerateInput("zero nonhomogeneous norm".into()));
    }
    Ok(besov_value(u, &hom, cutoffs) / denom)
}

/// Random real field with spectrum supported in `lo <= |xi| <= hi`,
/// Hermitian-symmetrized so the cached spectrum matches the samples.
pub fn random_band_limited(
    grid: Grid,
    lo: f64,
    hi: f64,
    rng: &mut impl Rng,
) -> Field {
    let total = grid.total_points();
    let mut spec = vec![Complex64::default(); total];
    for (flat, c) in spec.iter_mut().enumerate() {
        let rho = grid.freq_norm(flat);
        if rho >= lo && rho <= hi {
            *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    // Hermitian part keeps the annulus support and makes the field real.
    let n = grid.points_per_axis();
    let mut sym = vec![Complex64::default(); total];
    for flat in 0..total {
        let idx = grid.unravel(flat);
        let mut neg = [0usize; 3];
        for axis in 0..grid.dimension() {
            neg[axis] = (n - idx[axis]) % n;
        }
        let mirror = grid.ravel(neg);
        sym[flat] = 0.5 * (spec[flat] + spec[mirror].conj());
    }
    Field::from_spectrum(grid, sym).expect("sizes match")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoffs::{build_cutoffs, lp_block, TransitionProfile};
    use std::f64::consts::PI;

    fn setup_1d(n: usize) -> (Grid, DyadicCutoffs) {
        let grid = Grid::new(1, n, 2.0 * PI).unwrap();
        let c = build_cutoffs(TransitionProfile::default(), &grid).unwrap();
        (grid, c)
    }

    fn mode(grid: Grid, k: i64, phase: f64) -> Field {
        let base = grid.fundamental_frequency();
        Field::from_fn(grid, |x| (base * k as f64 * x[0] + phase).sin())
    }

    #[test]
    fn single_block_norm_is_one_term() {
        let (grid, c) = setup_1d(256);
        let j = 3;
        let u = mode(grid, 8, 0.3); // |xi| = 8 = 2^3, a pure band-j field
        for &q in &[1.0, 2.0, f64::INFINITY] {
            let idx = BesovIndex::homogeneous(0.7, 2.0, q);
            let report = besov_norm(&u, &idx, &c);
            let expected = (j as f64 * 0.7).exp2() * u.lp_norm(2.0);
            assert!((report.value - expected).abs() < 1e-10 * expected);
            assert!(report.tail_estimate < 1e-12);
            assert!(!report.unreliable);
        }
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let (grid, c) = setup_1d(64);
        let u = Field::zeros(grid);
        let idx = BesovIndex::homogeneous(0.5, 2.0, 1.0);
        assert_eq!(besov_norm(&u, &idx, &c).value, 0.0);
    }

    #[test]
    fn nonhomogeneous_adds_low_frequency_term() {
        let (grid, c) = setup_1d(64);
        let u = Field::from_fn(grid, |_| 2.5);
        let idx = BesovIndex::nonhomogeneous(0.5, 2.0, 1.0);
        let report = besov_norm(&u, &idx, &c);
        // A constant lives entirely in S_0.
        let expected = 2.5 * grid.volume().sqrt();
        assert!((report.value - expected).abs() < 1e-10);
        assert!(report.low_freq_term.is_some());
        // The homogeneous seminorm of a constant vanishes.
        let hom = BesovIndex::homogeneous(0.5, 2.0, 1.0);
        assert!(besov_norm(&u, &hom, &c).value < 1e-12);
    }

    #[test]
    fn q_monotonicity_is_exact() {
        use rand::SeedableRng;
        let (grid, c) = setup_1d(128);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..5 {
            let u = random_band_limited(grid, 2.0, 30.0, &mut rng);
            let v = |q: f64| {
                besov_value(&u, &BesovIndex::homogeneous(0.4, 3.0, q), &c)
            };
            let (n_inf, n2, n1) = (v(f64::INFINITY), v(2.0), v(1.0));
            assert!(n_inf <= n2 + 1e-12 && n2 <= n1 + 1e-12, "{n_inf} {n2} {n1}");
        }
    }

    #[test]
    fn triangle_inequality() {
        use rand::SeedableRng;
        let (grid, c) = setup_1d(128);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(6);
        for &flavor in &[Flavor::Homogeneous, Flavor::Nonhomogeneous] {
            for &q in &[1.0, 2.0, f64::INFINITY] {
                let u = random_band_limited(grid, 1.0, 40.0, &mut rng);
                let v = random_band_limited(grid, 1.0, 40.0, &mut rng);
                let idx = BesovIndex { s: 0.3, p: 2.0, q, flavor };
                let lhs = besov_value(&u.add(&v), &idx, &c);
                let rhs =
                    besov_value(&u, &idx, &c) + besov_value(&v, &idx, &c);
                assert!(lhs <= rhs + 1e-9, "triangle broke: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn dyadic_dilation_scaling() {
        // u(2x) lives on the refined torus (same N, half period) so the
        // dilation does not wrap onto itself; that reproduces the R^n
        // change of variables exactly up to band-range truncation.
        let (grid, c) = setup_1d(256);
        let grid2 = Grid::new(1, 256, PI).unwrap();
        let c2 = build_cutoffs(TransitionProfile::default(), &grid2).unwrap();
        let profile = |x: f64| (8.0 * x).sin() + 0.6 * (12.0 * x).cos();
        let u = Field::from_fn(grid, |x| profile(x[0]));
        let u2 = Field::from_fn(grid2, |x| profile(2.0 * x[0]));
        for &(s, p) in &[(0.5, 2.0), (0.25, 3.0), (0.8, 1.0)] {
            let idx = BesovIndex::homogeneous(s, p, 1.0);
            let ratio = besov_value(&u2, &idx, &c2) / besov_value(&u, &idx, &c);
            let predicted = (s - 1.0 / p).exp2();
            assert!(
                (ratio / predicted - 1.0).abs() < 0.02,
                "dilation scaling {ratio} vs {predicted} at (s,p)=({s},{p})"
            );
        }
    }

    #[test]
    fn fd_seminorm_domain_checks() {
        let (grid, _) = setup_1d(64);
        let u = mode(grid, 3, 0.0);
        let bad = BesovIndex::homogeneous(1.5, 2.0, 2.0);
        assert!(matches!(
            fd_seminorm(&u, &bad),
            Err(Error::FdCharacterizationOutOfRange { .. })
        ));
        let zero = Field::zeros(grid);
        let idx = BesovIndex::homogeneous(0.5, 2.0, 2.0);
        assert_eq!(fd_seminorm(&zero, &idx).unwrap(), 0.0);
        let constant = Field::from_fn(grid, |_| 4.2);
        assert_eq!(fd_seminorm(&constant, &idx).unwrap(), 0.0);
    }

    #[test]
    fn fd_seminorm_matches_naive_oracle() {
        // Independent oracle: direct O(P^2) loop written from the integral.
        let (grid, _) = setup_1d(256);
        let u = mode(grid, 1, 0.0); // sin x
        let idx = BesovIndex::homogeneous(0.5, 2.0, 2.0);
        let value = fd_seminorm(&u, &idx).unwrap();
        let s = u.samples();
        let h = grid.spacing();
        let l = grid.period();
        let mut outer = 0.0;
        for x in 0..s.len() {
            let mut inner = 0.0;
            for y in 0..s.len() {
                if x == y {
                    continue;
                }
                let mut d = (x as f64 - y as f64).abs() * h;
                d = d.min(l - d);
                inner += (s[y] - s[x]).powi(2) / d.powf(1.0 + 0.5 * 2.0) * h;
            }
            outer += inner * h; // q = p = 2 so the exponent is 1
        }
        let oracle = outer.sqrt();
        assert!(
            (value - oracle).abs() <= 1e-10 * oracle,
            "dense {value} vs oracle {oracle}"
        );
    }

    #[test]
    fn fd_subsampling_is_deterministic_and_close_to_dense() {
        let grid = Grid::new(2, 64, 2.0 * PI).unwrap(); // 4096 points: dense
        let base = grid.fundamental_frequency();
        let u = Field::from_fn(grid, |x| {
            (3.0 * base * x[0]).sin() * (2.0 * base * x[1]).cos()
        });
        let idx = BesovIndex::homogeneous(0.5, 2.0, 2.0);
        let dense = fd_dense(&u, &idx);
        let sampled_a = fd_sampled(&u, &idx);
        let sampled_b = fd_sampled(&u, &idx);
        assert_eq!(sampled_a.value, sampled_b.value, "estimator must be deterministic");
        let rel = (sampled_a.value - dense).abs() / dense;
        assert!(rel < 0.08, "sampled {:.6} vs dense {dense:.6}", sampled_a.value);
        assert!(sampled_a.sampling_spread.unwrap() < 0.1);
    }

    #[test]
    fn product_law1_constant_factor() {
        let (grid, c) = setup_1d(128);
        let u = mode(grid, 8, 0.1).add(&mode(grid, 20, 0.7));
        let one = Field::from_fn(grid, |_| 1.0);
        let idx = BesovIndex::nonhomogeneous(0.5, 2.0, 1.0);
        let ratio = product_estimate_check(&u, &one, &idx, ProductLaw::Symmetric, &c).unwrap();
        assert!(ratio <= 1.0 + 1e-9, "ratio {ratio}");
    }

    #[test]
    fn product_law_hypotheses_enforced() {
        let (grid, c) = setup_1d(128);
        let u = mode(grid, 8, 0.0);
        let idx = BesovIndex::homogeneous(-0.5, 2.0, 1.0);
        assert!(matches!(
            product_estimate_check(&u, &u, &idx, ProductLaw::Symmetric, &c),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn composition_square_bounded_by_two() {
        let (grid, _) = setup_1d(256);
        let u = mode(grid, 1, 0.0); // sin x
        let idx = BesovIndex::homogeneous(0.5, 2.0, 2.0);
        let family = Family::Quadratic { coeff: 1.0 };
        let ratio = composition_estimate_check(&family, &u, &idx).unwrap();
        assert!(ratio <= 2.0 * (1.0 + 1e-9), "composition ratio {ratio}");
        // Degenerate input is rejected.
        let constant = Field::from_fn(grid, |_| 1.0);
        assert!(matches!(
            composition_estimate_check(&family, &constant, &idx),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn quadratic_domination_on_small_grid() {
        let (grid, _) = setup_1d(64);
        let u = mode(grid, 3, 0.4);
        assert!(quadratic_pointwise_domination(&u) <= 1.0 + 1e-12);
    }

    #[test]
    fn duality_single_band_is_one() {
        let (grid, c) = setup_1d(256);
        let u = mode(grid, 8, 0.0);
        let ratio = duality_pairing_check(&u, &u, 0.0, 2.0, &c).unwrap();
        assert!((ratio - 1.0).abs() < 1e-10, "duality ratio {ratio}");
    }

    #[test]
    fn duality_disjoint_spectra_pair_to_zero() {
        let (grid, c) = setup_1d(256);
        let u = mode(grid, 4, 0.0);
        let v = mode(grid, 32, 0.2);
        let ratio = duality_pairing_check(&u, &v, 1.0 / 3.0, 3.0, &c).unwrap();
        assert!(ratio < 1e-12);
    }

    #[test]
    fn interpolation_single_band_is_one() {
        let (grid, c) = setup_1d(256);
        let u = mode(grid, 16, 0.0); // band 4, well above S_0
        let ratio = interpolation_check(&u, 0.3, 2.0, &c).unwrap();
        assert!((ratio - 1.0).abs() < 1e-9, "interpolation ratio {ratio}");
    }

    #[test]
    fn interpolation_two_bands_below_one() {
        let (grid, c) = setup_1d(256);
        let u = mode(grid, 4, 0.0).add(&mode(grid, 64, 0.0));
        let ratio = interpolation_check(&u, 0.3, 2.0, &c).unwrap();
        assert!(ratio <= 1.0 + 1e-9, "two-band ratio {ratio}");
    }

    #[test]
    fn extension_by_zero_needs_margin() {
        let (grid, c) = setup_1d(256);
        let h = grid.spacing();
        let sub = SubBox { lo: [64, 0, 0], size: [64, 1, 1] };
        let center = (64.0 + 32.0) * h;
        let tight = Field::from_fn(grid, |x| {
            let d = (x[0] - center).abs() / (32.0 * h);
            if d < 1.0 { (1.0 - d * d).powi(2) } else { 0.0 }
        });
        let idx = BesovIndex::homogeneous(0.25, 2.0, 1.0);
        assert!(matches!(
            extension_by_zero_check(&tight, &sub, &idx, &c),
            Err(Error::MarginViolated { .. })
        ));
        let bump = Field::from_fn(grid, |x| {
            let d = (x[0] - center).abs() / (20.0 * h);
            if d < 1.0 { (1.0 - d * d).powi(2) } else { 0.0 }
        });
        let ratio = extension_by_zero_check(&bump, &sub, &idx, &c).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
    }

    #[test]
    fn lp_block_and_norm_agree_on_band_sum() {
        // Cross-check: the homogeneous q=1 norm equals the sum over bands of
        // weighted block norms computed through the public lp_block.
        let (grid, c) = setup_1d(128);
        let u = mode(grid, 4, 0.0).add(&mode(grid, 16, 0.5));
        let idx = BesovIndex::homogeneous(0.5, 2.0, 1.0);
        let report = besov_norm(&u, &idx, &c);
        let mut total = 0.0;
        for j in c.bands() {
            total += (j as f64 * 0.5).exp2() * lp_block(&u, j, &c).unwrap().lp_norm(2.0);
        }
        assert!((report.value - total).abs() < 1e-12 * total.max(1.0));
    }

    #[test]
    fn norm_report_serializes_stably() {
        let (grid, c) = setup_1d(64);
        let u = mode(grid, 4, 0.0);
        let idx = BesovIndex::homogeneous(0.5, 2.0, 1.0);
        let json = besov_norm(&u, &idx, &c).to_json();
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.contains("\"value\""));
        assert!(text.contains("\"bands\""));
        assert!(text.contains("\"flavor\":\"homogeneous\""));
    }
}
