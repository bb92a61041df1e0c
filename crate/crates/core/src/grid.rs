//! Periodic sampling lattices and real-valued fields with cached spectra.
//!
//! A [`Grid`] is the discrete stand-in for `R^n`: a torus `[0, L)^n` sampled
//! at `N` points per axis. A [`Field`] carries real samples in row-major
//! lattice order plus a lazily computed Fourier spectrum. Fields are
//! immutable after construction; every operation returns a new field, so
//! parameter sweeps can run in parallel without shared mutable state.

use crate::error::{Error, Result};
use crate::fft;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

/// Periodic lattice: `N^n` points on the torus of period `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dimension: usize,
    points_per_axis: usize,
    period: f64,
}

impl Grid {
    /// Power-of-two lattice, the default for every dyadic experiment.
    pub fn new(dimension: usize, points_per_axis: usize, period: f64) -> Result<Self> {
        if !points_per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points_per_axis {points_per_axis} is not a power of two"
            )));
        }
        Self::new_composite(dimension, points_per_axis, period)
    }

    /// Lattice with any even `N >= 8`. The FFT backend handles mixed radix;
    /// evenness keeps the Nyquist bookkeeping and slab reflections exact.
    pub fn new_composite(dimension: usize, points_per_axis: usize, period: f64) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::InvalidGrid(format!("dimension {dimension} not in 1..=3")));
        }
        if points_per_axis < 8 || points_per_axis % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points_per_axis {points_per_axis} must be even and >= 8"
            )));
        }
        if !(period > 0.0) {
            return Err(Error::InvalidGrid(format!("period {period} must be positive")));
        }
        Ok(Grid {
            dimension,
            points_per_axis,
            period,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Lattice spacing `h = L/N`.
    pub fn spacing(&self) -> f64 {
        self.period / self.points_per_axis as f64
    }

    pub fn total_points(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    /// Quadrature weight `h^n` of one lattice cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    pub fn volume(&self) -> f64 {
        self.period.powi(self.dimension as i32)
    }

    /// Smallest nonzero physical frequency `2*pi/L`.
    pub fn fundamental_frequency(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Per-axis Nyquist frequency `pi*N/L`.
    pub fn nyquist_frequency(&self) -> f64 {
        PI * self.points_per_axis as f64 / self.period
    }

    /// Largest |xi| on the lattice (Nyquist along every axis).
    pub fn max_frequency(&self) -> f64 {
        self.nyquist_frequency() * (self.dimension as f64).sqrt()
    }

    pub(crate) fn dims(&self) -> Vec<usize> {
        vec![self.points_per_axis; self.dimension]
    }

    /// Integer frequency along one axis for lattice index `i`, in
    /// `[-N/2, N/2)`.
    #[inline]
    pub fn freq_index(&self, i: usize) -> i64 {
        let n = self.points_per_axis as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Decompose a flat row-major index into per-axis indices.
    #[inline]
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let n = self.points_per_axis;
        let mut idx = [0usize; 3];
        for axis in (0..self.dimension).rev() {
            idx[axis] = flat % n;
            flat /= n;
        }
        idx
    }

    /// Flat index from per-axis indices (axes beyond `dimension` ignored).
    #[inline]
    pub fn ravel(&self, idx: [usize; 3]) -> usize {
        let n = self.points_per_axis;
        let mut flat = 0usize;
        for axis in 0..self.dimension {
            flat = flat * n + idx[axis];
        }
        flat
    }

    /// Physical coordinates of lattice point `flat`.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dimension {
            x[axis] = idx[axis] as f64 * h;
        }
        x
    }

    /// Physical wavevector of spectral index `flat`.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let base = self.fundamental_frequency();
        let mut xi = [0.0; 3];
        for axis in 0..self.dimension {
            xi[axis] = base * self.freq_index(idx[axis]) as f64;
        }
        xi
    }

    /// |xi| of spectral index `flat`.
    #[inline]
    pub fn freq_norm(&self, flat: usize) -> f64 {
        let xi = self.wavevector(flat);
        (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
    }
}

/// Real field sampled on a [`Grid`], with a cached spectrum.
///
/// The spectrum holds coefficients `c_k` of `u(x) = sum_k c_k e^{i xi_k.x}`.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    samples: Arc<Vec<f64>>,
    spectrum: OnceLock<Arc<Vec<Complex64>>>,
}

impl Field {
    pub fn from_samples(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.total_points() {
            return Err(Error::InvalidGrid(format!(
                "sample count {} does not match lattice size {}",
                samples.len(),
                grid.total_points()
            )));
        }
        Ok(Field {
            grid,
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            samples: Arc::new(vec![0.0; grid.total_points()]),
            spectrum: OnceLock::new(),
        }
    }

    /// Sample a closure of physical coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let samples = (0..grid.total_points())
            .map(|i| f(&grid.coords(i)))
            .collect();
        Field {
            grid,
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    /// Build a field from mode coefficients. The imaginary residue after the
    /// inverse transform is dropped; callers are expected to hand in
    /// Hermitian-symmetric data (all lab multipliers preserve it).
    pub fn from_spectrum(grid: Grid, mut spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.total_points() {
            return Err(Error::InvalidGrid("spectrum length mismatch".into()));
        }
        let cache = Arc::new(spectrum.clone());
        fft::inverse(&mut spectrum, &grid.dims());
        let samples: Vec<f64> = spectrum.iter().map(|c| c.re).collect();
        let field = Field {
            grid,
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        };
        let _ = field.spectrum.set(cache);
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Mode coefficients, computed on first use and cached.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut buf: Vec<Complex64> = self
                .samples
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            fft::forward(&mut buf, &self.grid.dims());
            Arc::new(buf)
        })
    }

    /// Apply a real multiplier `m(xi)` in frequency space.
    pub fn apply_multiplier(&self, m: impl Fn(&[f64; 3]) -> f64) -> Field {
        let spec = self.spectrum();
        let out: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(i, &c)| c * m(&self.grid.wavevector(i)))
            .collect();
        Field::from_spectrum(self.grid, out).expect("multiplier preserves size")
    }

    /// Apply a radial real multiplier `m(|xi|)` in frequency space.
    pub fn apply_radial_multiplier(&self, m: impl Fn(f64) -> f64) -> Field {
        let spec = self.spectrum();
        let out: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(i, &c)| c * m(self.grid.freq_norm(i)))
            .collect();
        Field::from_spectrum(self.grid, out).expect("multiplier preserves size")
    }

    /// Lattice quadrature of the field: `sum u(x) h^n`.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Mean value over the torus.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Discrete `L_p` norm: `(sum |u|^p h^n)^{1/p}`, lattice sup for `p = inf`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_weighted(&self.samples, p, self.grid.cell_volume())
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let samples: Vec<f64> = self
            .samples
            .iter()
            .zip(other.samples.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field {
            grid: self.grid,
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        let samples: Vec<f64> = self.samples.iter().map(|&v| f(v)).collect();
        Field {
            grid: self.grid,
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn mul_pointwise(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a * b)
    }

    /// L2 pairing `integral(u v)` by lattice quadrature.
    pub fn pair(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.samples
            .iter()
            .zip(other.samples.iter())
            .map(|(&a, &b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    /// Partial derivative `d/dx_axis` as a spectral multiplier.
    pub fn derivative(&self, axis: usize) -> Field {
        assert!(axis < self.grid.dimension());
        let spec = self.spectrum();
        let out: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let xi = self.grid.wavevector(i)[axis];
                c * Complex64::new(0.0, xi)
            })
            .collect();
        Field::from_spectrum(self.grid, out).expect("derivative preserves size")
    }

    /// Spectral Laplacian.
    pub fn laplacian(&self) -> Field {
        self.apply_multiplier(|xi| -(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]))
    }

    /// Largest relative deviation from Hermitian symmetry of the spectrum.
    /// Real fields stay below 1e-12.
    pub fn hermitian_defect(&self) -> f64 {
        let spec = self.spectrum();
        let n = self.grid.points_per_axis();
        let scale = spec.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1e-300);
        let mut worst = 0.0f64;
        for (i, &c) in spec.iter().enumerate() {
            let idx = self.grid.unravel(i);
            let mut neg = [0usize; 3];
            for axis in 0..self.grid.dimension() {
                neg[axis] = (n - idx[axis]) % n;
            }
            let j = self.grid.ravel(neg);
            worst = worst.max((c - spec[j].conj()).norm() / scale);
        }
        worst
    }
}

/// `L_p` norm of a raw sample buffer with cell weight `w`.
pub fn lp_norm_weighted(samples: &[f64], p: f64, w: f64) -> f64 {
    assert!(p >= 1.0, "p must be >= 1");
    if p.is_infinite() {
        samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    } else if p == 1.0 {
        samples.iter().map(|v| v.abs()).sum::<f64>() * w
    } else if p == 2.0 {
        (samples.iter().map(|v| v * v).sum::<f64>() * w).sqrt()
    } else {
        (samples.iter().map(|v| v.abs().powf(p)).sum::<f64>() * w).powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(grid: Grid, k: [i64; 3]) -> Field {
        let base = grid.fundamental_frequency();
        Field::from_fn(grid, |x| {
            let phase: f64 = (0..3).map(|a| base * k[a] as f64 * x[a]).sum();
            phase.cos()
        })
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(0, 16, 1.0).is_err());
        assert!(Grid::new(4, 16, 1.0).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
        assert!(Grid::new_composite(1, 12, 1.0).is_ok());
        assert!(Grid::new_composite(1, 13, 1.0).is_err());
        assert!(Grid::new(1, 4, 1.0).is_err());
        assert!(Grid::new(1, 16, 0.0).is_err());
        assert!(Grid::new(2, 64, 2.0 * PI).is_ok());
    }

    #[test]
    fn round_trip_hits_machine_precision() {
        let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
        let u = Field::from_fn(grid, |x| (3.0 * x[0]).sin() * (2.0 * x[1]).cos() + 0.25);
        let spec = u.spectrum().to_vec();
        let back = Field::from_spectrum(grid, spec).unwrap();
        let scale = u.sup_norm();
        for (a, b) in u.samples().iter().zip(back.samples().iter()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn real_fields_have_hermitian_spectra() {
        let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
        let u = Field::from_fn(grid, |x| (x[0] - 1.0).exp() * (2.0 * x[1]).sin());
        assert!(u.hermitian_defect() < 1e-12);
    }

    #[test]
    fn single_mode_lands_on_one_coefficient() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let u = wave(grid, [5, 0, 0]);
        let spec = u.spectrum();
        for (i, c) in spec.iter().enumerate() {
            let k = grid.freq_index(grid.unravel(i)[0]);
            if k.abs() == 5 {
                assert!((c.re - 0.5).abs() < 1e-12 && c.im.abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lp_norms_match_closed_forms() {
        let grid = Grid::new(2, 16, 4.0).unwrap();
        let c = Field::from_fn(grid, |_| -3.0);
        // |c| * V^{1/2} for p = 2 on a box of volume 16.
        assert!((c.lp_norm(2.0) - 3.0 * 4.0).abs() < 1e-12);
        assert!((c.lp_norm(f64::INFINITY) - 3.0).abs() < 1e-15);
        assert!((c.lp_norm(1.0) - 3.0 * 16.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_l1_matches_analytic_integral() {
        // Standard Gaussian profile on a large 1D box: L1 norm ~ sqrt(2 pi).
        let grid = Grid::new(1, 512, 40.0).unwrap();
        let u = Field::from_fn(grid, |x| {
            let d = x[0] - 20.0;
            (-0.5 * d * d).exp()
        });
        let expected = (2.0 * PI).sqrt();
        assert!(
            (u.lp_norm(1.0) - expected).abs() < 1e-6,
            "lattice quadrature {} vs analytic {}",
            u.lp_norm(1.0),
            expected
        );
    }

    #[test]
    fn spectral_derivative_matches_analytic() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let u = Field::from_fn(grid, |x| (3.0 * x[0]).sin());
        let du = u.derivative(0);
        let exact = Field::from_fn(grid, |x| 3.0 * (3.0 * x[0]).cos());
        let err = du.sub(&exact).sup_norm();
        assert!(err < 1e-11, "derivative error {err}");
    }
}
