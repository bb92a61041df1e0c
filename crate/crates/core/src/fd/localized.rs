//! L1-in-time Besov norms localized to the compact set K: restrict,
//! damp with a fixed margin bump, zero-extend onto an auxiliary torus and
//! measure there.

use super::mask::{CellFlag, DomainMask};
use crate::besov::{besov_value, BesovIndex};
use crate::cutoffs::{build_cutoffs, TransitionProfile};
use crate::error::{Error, Result};
use crate::fd::solver::FdSolution;
use crate::grid::{Field, Grid};

/// Time series of localized norms and its cumulative integral.
#[derive(Debug, Clone)]
pub struct LocalizedSeries {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Cumulative trapezoid of the norms; nondecreasing.
    pub cumulative: Vec<f64>,
    /// Whether s sits in the window (-1 + 1/p, 1/p - 2/n).
    pub s_in_window: bool,
}

impl LocalizedSeries {
    /// Cumulative integral at time t (linear interpolation).
    pub fn cumulative_at(&self, t: f64) -> f64 {
        if self.times.is_empty() {
            return 0.0;
        }
        if t <= self.times[0] {
            return self.cumulative[0];
        }
        for i in 1..self.times.len() {
            if t <= self.times[i] {
                let w = (t - self.times[i - 1]) / (self.times[i] - self.times[i - 1]);
                return self.cumulative[i - 1] + w * (self.cumulative[i] - self.cumulative[i - 1]);
            }
        }
        *self.cumulative.last().unwrap()
    }

    /// Saturation check for the T-uniform claim: cumulative(2T)/cumulative(T).
    pub fn saturation_ratio(&self, t_half: f64) -> f64 {
        let at_t = self.cumulative_at(t_half);
        let at_2t = self.cumulative_at(2.0 * t_half);
        if at_t <= 0.0 {
            return f64::INFINITY;
        }
        at_2t / at_t
    }
}

/// Hypothesis gate of the T-uniform lower-order estimate: dimension at
/// least 3 and `1 < p < n/2`.
pub fn vitesse_gate(n: usize, p: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::DimensionExcluded {
            n,
            reason: "the T-uniform localized bound needs n >= 3".into(),
        });
    }
    if !(p > 1.0 && p < n as f64 / 2.0) {
        return Err(Error::HypothesisViolated(format!(
            "need 1 < p < n/2; got p = {p}, n = {n}"
        )));
    }
    Ok(())
}

/// The localized `B^s_{p,1}(K)` norm series of an FD solution.
///
/// `aux_points` is the per-axis size of the auxiliary power-of-two torus;
/// it must exceed the K side by a comfortable margin so the zero
/// extension does not wrap.
pub fn localized_norm_series(
    mask: &DomainMask,
    solution: &FdSolution,
    s: f64,
    p: f64,
    aux_points: usize,
) -> Result<LocalizedSeries> {
    let lattice = mask.lattice;
    let dim = lattice.dim();
    let h = lattice.spacing();
    let sides = mask.k_box.sides(dim);
    let max_side = (0..dim).map(|a| sides[a]).max().unwrap();
    if aux_points < max_side + 8 {
        return Err(Error::InvalidGrid(format!(
            "aux torus of {aux_points} points cannot host K of side {max_side} with margin"
        )));
    }
    let aux_grid = Grid::new(dim, aux_points, aux_points as f64 * h)?;
    let cutoffs = build_cutoffs(TransitionProfile::default(), &aux_grid)?;
    let idx = BesovIndex::homogeneous(s, p, 1.0);

    // Fixed margin bump on K: radial plateau over the inner 60%, smooth
    // falloff to the K boundary. Part of the frozen configuration.
    let profile = TransitionProfile::default();
    let mut k_center = [0.0f64; 3];
    let mut k_half = [0.0f64; 3];
    for a in 0..dim {
        k_center[a] = (mask.k_box.lo[a] + mask.k_box.hi[a]) as f64 / 2.0;
        k_half[a] = (mask.k_box.hi[a] - mask.k_box.lo[a]) as f64 / 2.0;
    }
    let bump = |idx_lattice: [usize; 3]| -> f64 {
        let mut rho: f64 = 0.0;
        for a in 0..dim {
            let rel = (idx_lattice[a] as f64 - k_center[a]).abs() / k_half[a].max(1.0);
            rho = rho.max(rel);
        }
        1.0 - profile.smoothstep(((rho - 0.6) / 0.4).clamp(0.0, 1.0))
    };

    let offset: Vec<usize> = (0..dim)
        .map(|a| (aux_points - sides[a]) / 2)
        .collect();
    let embed = |snapshot: &[f64]| -> Field {
        let mut samples = vec![0.0f64; aux_grid.total_points()];
        for flat in 0..lattice.total_points() {
            if mask.flag(flat) == CellFlag::Exterior {
                continue;
            }
            let li = lattice.unravel(flat);
            if !mask.k_box.contains(li, dim) {
                continue;
            }
            let mut gi = [0usize; 3];
            for a in 0..dim {
                gi[a] = li[a] - mask.k_box.lo[a] + offset[a];
            }
            samples[aux_grid.ravel(gi)] = snapshot[flat] * bump(li);
        }
        Field::from_samples(aux_grid, samples).expect("sizes match")
    };

    let norms: Vec<f64> = solution
        .snapshots
        .iter()
        .map(|snap| besov_value(&embed(snap), &idx, &cutoffs))
        .collect();
    let times = solution.sample_times.clone();
    let mut cumulative = vec![0.0; norms.len()];
    for i in 1..norms.len() {
        cumulative[i] = cumulative[i - 1]
            + 0.5 * (norms[i] + norms[i - 1]) * (times[i] - times[i - 1]);
    }
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let s_in_window = -1.0 + inv_p < s && s < inv_p - 2.0 / dim as f64;
    Ok(LocalizedSeries {
        times,
        norms,
        cumulative,
        s_in_window,
    })
}
