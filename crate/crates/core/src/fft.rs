//! Thin n-dimensional FFT layer over `rustfft`.
//!
//! Transforms act in place on row-major complex buffers. Plans are cached
//! per (length, direction) in thread-local storage since the lab reuses a
//! handful of grid sizes thousands of times.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, inverse))
            .or_insert_with(|| {
                let dir = if inverse {
                    FftDirection::Inverse
                } else {
                    FftDirection::Forward
                };
                FftPlanner::new().plan_fft(len, dir)
            })
            .clone()
    })
}

/// In-place transform along every axis of a row-major buffer with the given
/// per-axis lengths. Forward output is left unnormalized; [`forward`] and
/// [`inverse`] wrap this with the lab's normalization convention.
fn transform(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    debug_assert_eq!(data.len(), dims.iter().product::<usize>());
    let rank = dims.len();
    for axis in 0..rank {
        let len = dims[axis];
        let fft = plan(len, inverse);
        let stride: usize = dims[axis + 1..].iter().product();
        let outer: usize = dims[..axis].iter().product();
        let block = stride * len;
        let mut line = vec![Complex64::default(); len];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * block + s;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Forward DFT normalized so the output holds mode coefficients `c_k` with
/// `u(x) = sum_k c_k exp(i xi_k . x)`.
pub fn forward(data: &mut [Complex64], dims: &[usize]) {
    transform(data, dims, false);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Inverse of [`forward`]: plain exponential sum, no scaling.
pub fn inverse(data: &mut [Complex64], dims: &[usize]) {
    transform(data, dims, true);
}
