//! Multidimensional complex FFT on cubic row-major arrays.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

use crate::exec;

/// Forward or inverse transform of every axis of an `n^dim` array in place.
/// The inverse is unnormalized, matching rustfft.
pub fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let mut planner = FftPlanner::<f64>::new();
    let plan: Arc<dyn Fft<f64>> = planner.plan_fft(n, direction);
    let total = data.len();
    let lines = total / n;
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        // line l: outer block index and inner offset
        let line_start = |l: usize| {
            let inner = l % stride;
            let outer = l / stride;
            outer * stride * n + inner
        };
        let transformed: Vec<Vec<Complex64>> = {
            let data_ref: &[Complex64] = data;
            exec::map_range(lines, |l| {
                let start = line_start(l);
                let mut buf: Vec<Complex64> = (0..n).map(|j| data_ref[start + j * stride]).collect();
                plan.process(&mut buf);
                buf
            })
        };
        for (l, buf) in transformed.into_iter().enumerate() {
            let start = line_start(l);
            for (j, v) in buf.into_iter().enumerate() {
                data[start + j * stride] = v;
            }
        }
    }
}

/// Signed frequency index for position `j` of an `n`-point transform.
pub fn signed_frequency(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let n = 8;
        let orig: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = orig.clone();
        fft_nd(&mut data, n, 2, FftDirection::Forward);
        fft_nd(&mut data, n, 2, FftDirection::Inverse);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_dft_3d() {
        let n = 4;
        let dim = 3;
        let orig: Vec<Complex64> = (0..64).map(|i| Complex64::new(i as f64 % 5.0, 0.0)).collect();
        let mut data = orig.clone();
        fft_nd(&mut data, n, dim, FftDirection::Forward);
        let idx = |f: usize| [f / 16, (f / 4) % 4, f % 4];
        for k in [0usize, 5, 17, 63] {
            let kk = idx(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in orig.iter().enumerate() {
                let jj = idx(j);
                let phase: f64 = (0..3).map(|a| (kk[a] * jj[a]) as f64).sum::<f64>();
                acc += v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * phase / n as f64);
            }
            assert!((acc - data[k]).norm() < 1e-10);
        }
    }
}
