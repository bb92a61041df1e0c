//! Independent reference solvers used to cross-check the implementation
//! paths: a naive sine-series slab solver (no shared FFT code) and Bessel
//! cross-product eigenvalues for the annulus.

use heatlab::halfspace::SlabField;
use std::f64::consts::PI;

/// Solve the slab Dirichlet heat problem by a sine series in the normal
/// axis and a naive Fourier sum in the tangential axis. Everything is
/// straight trigonometric summation, independent of the reflection/FFT
/// path it checks.
///
/// Returns slab-layout sample buffers at the requested times.
pub fn sine_slab_solve(u0: &SlabField, nu: f64, times: &[f64]) -> Vec<Vec<f64>> {
    let grid = *u0.grid();
    let n = grid.points_per_axis();
    let half = n / 2;
    let dim = grid.dimension();
    let base = grid.fundamental_frequency();
    let values = u0.values();

    match dim {
        1 => {
            let m_max = half - 1;
            let mut coeff = vec![0.0f64; m_max + 1];
            for (m, slot) in coeff.iter_mut().enumerate().skip(1) {
                let mut acc = 0.0;
                for k in 1..half {
                    acc += values[k] * (PI * (m * k) as f64 / half as f64).sin();
                }
                *slot = 2.0 / half as f64 * acc;
            }
            times
                .iter()
                .map(|&t| {
                    let mut out = vec![0.0f64; grid.total_points()];
                    for (k, slot) in out.iter_mut().enumerate().take(half).skip(1) {
                        let mut acc = 0.0;
                        for (m, &c) in coeff.iter().enumerate().skip(1) {
                            let xi = base * m as f64;
                            acc += c
                                * (-nu * t * xi * xi).exp()
                                * (PI * (m * k) as f64 / half as f64).sin();
                        }
                        *slot = acc;
                    }
                    out
                })
                .collect()
        }
        2 => {
            // Tangential axis 0, normal axis 1; coefficients by naive
            // DFT x DST-I.
            let m_max = half - 1;
            let mut re = vec![vec![0.0f64; m_max + 1]; n];
            let mut im = vec![vec![0.0f64; m_max + 1]; n];
            let mut dst = vec![vec![0.0f64; m_max + 1]; n];
            for (i, row) in dst.iter_mut().enumerate() {
                for (m, slot) in row.iter_mut().enumerate().skip(1) {
                    let mut line = 0.0;
                    for j in 1..half {
                        line += values[grid.ravel([i, j, 0])]
                            * (PI * (m * j) as f64 / half as f64).sin();
                    }
                    *slot = 2.0 / half as f64 * line;
                }
            }
            for kp in 0..n {
                for m in 1..=m_max {
                    let mut acc_re = 0.0;
                    let mut acc_im = 0.0;
                    for (i, row) in dst.iter().enumerate() {
                        let phase = -2.0 * PI * ((kp * i) % n) as f64 / n as f64;
                        acc_re += row[m] * phase.cos();
                        acc_im += row[m] * phase.sin();
                    }
                    re[kp][m] = acc_re / n as f64;
                    im[kp][m] = acc_im / n as f64;
                }
            }
            times
                .iter()
                .map(|&t| {
                    let mut out = vec![0.0f64; grid.total_points()];
                    for i in 0..n {
                        for j in 1..half {
                            let mut acc = 0.0;
                            for kp in 0..n {
                                let k_signed = if kp < n / 2 {
                                    kp as i64
                                } else {
                                    kp as i64 - n as i64
                                };
                                let xi_t = base * k_signed as f64;
                                let phase = 2.0 * PI * ((kp * i) % n) as f64 / n as f64;
                                let (sin_p, cos_p) = phase.sin_cos();
                                for m in 1..=m_max {
                                    if re[kp][m] == 0.0 && im[kp][m] == 0.0 {
                                        continue;
                                    }
                                    let xi_n = base * m as f64;
                                    let decay =
                                        (-nu * t * (xi_t * xi_t + xi_n * xi_n)).exp();
                                    acc += decay
                                        * (re[kp][m] * cos_p - im[kp][m] * sin_p)
                                        * (PI * (m * j) as f64 / half as f64).sin();
                                }
                            }
                            out[grid.ravel([i, j, 0])] = acc;
                        }
                    }
                    out
                })
                .collect()
        }
        _ => panic!("sine oracle implemented for dimensions 1 and 2"),
    }
}

/// Bessel J0 by the classic rational approximations (&~1e-7 absolute).
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let p1 = 57568490574.0
            + y * (-13362590354.0
                + y * (651619640.7
                    + y * (-11214424.18 + y * (77392.33017 + y * (-184.9052456)))));
        let p2 = 57568490411.0
            + y * (1029532985.0
                + y * (9494680.718 + y * (59272.64853 + y * (267.8532712 + y))));
        p1 / p2
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 0.785398164;
        let p1 = 1.0
            + y * (-0.1098628627e-2
                + y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
        let p2 = -0.1562499995e-1
            + y * (0.1430488765e-3
                + y * (-0.6911147651e-5 + y * (0.7621095161e-6 + y * (-0.934935152e-7))));
        (2.0 / (PI * ax)).sqrt() * (xx.cos() * p1 - z * xx.sin() * p2)
    }
}

/// Bessel Y0, same family of approximations; x > 0.
pub fn bessel_y0(x: f64) -> f64 {
    if x < 8.0 {
        let y = x * x;
        let p1 = -2957821389.0
            + y * (7062834065.0
                + y * (-512359803.6
                    + y * (10879881.29 + y * (-86327.92757 + y * 228.4622733))));
        let p2 = 40076544269.0
            + y * (745249964.8
                + y * (7189466.438 + y * (47447.26470 + y * (226.1030244 + y))));
        p1 / p2 + 0.636619772 * bessel_j0(x) * x.ln()
    } else {
        let z = 8.0 / x;
        let y = z * z;
        let xx = x - 0.785398164;
        let p1 = 1.0
            + y * (-0.1098628627e-2
                + y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
        let p2 = -0.1562499995e-1
            + y * (0.1430488765e-3
                + y * (-0.6911147651e-5 + y * (0.7621095161e-6 + y * (-0.934935152e-7))));
        (2.0 / (PI * x)).sqrt() * (xx.sin() * p1 + z * xx.cos() * p2)
    }
}

/// Smallest positive zero of the annulus cross product
/// `J0(k r0) Y0(k r1) - J0(k r1) Y0(k r0)`; its square is the principal
/// Dirichlet eigenvalue of the annulus with radii r0 < r1.
pub fn annulus_principal_eigenvalue(r0: f64, r1: f64) -> f64 {
    let f = |k: f64| bessel_j0(k * r0) * bessel_y0(k * r1) - bessel_j0(k * r1) * bessel_y0(k * r0);
    // The first root sits a little above pi / (r1 - r0).
    let guess = PI / (r1 - r0);
    let mut lo = 0.5 * guess;
    let mut hi = guess;
    while f(lo) * f(hi) > 0.0 {
        hi *= 1.1;
        assert!(hi < 10.0 * guess, "failed to bracket the annulus eigenvalue");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    k * k
}
