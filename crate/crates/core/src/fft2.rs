//! 2D transforms between real samples and Fourier coefficients on square
//! power-of-two grids, with cached plans.
//!
//! Conventions: samples are row-major `s[i * n + j]` with grid point
//! `x = (2*pi*i/n, 2*pi*j/n)`. The forward transform returns a full-plane
//! coefficient array `c[p * n + q]` normalized by `1/n^2`, so a real field
//! `f(x) = sum_k c(k) exp(i k.x)` has `c(k)` stored at `p = k1 mod n`,
//! `q = k2 mod n` with `k` ranging over `(-n/2, n/2]^2`. The synthesis
//! direction accepts a target grid at least as fine as the source, which is
//! how band-limited fields are evaluated on oversampled grids without ever
//! materializing a full-plane padded spectrum.
//!
//! Internally both directions run a real<->half-complex pass along the rows
//! (k2 axis) and a complex pass along the columns, so the work and memory
//! are about half of a complex 2D FFT.

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static C2C: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> = RefCell::new(HashMap::new());
    static R2C: RefCell<HashMap<usize, Arc<dyn RealToComplex<f64>>>> = RefCell::new(HashMap::new());
    static C2R: RefCell<HashMap<usize, Arc<dyn ComplexToReal<f64>>>> = RefCell::new(HashMap::new());
    // Reused work buffers, keyed by length. The transforms here churn
    // through multi-hundred-megabyte intermediates; recycling them keeps
    // the kernel out of the hot path.
    static POOL: RefCell<HashMap<usize, Vec<Vec<Complex64>>>> = RefCell::new(HashMap::new());
}

fn take_buf(len: usize) -> Vec<Complex64> {
    let recycled = POOL.with(|p| p.borrow_mut().get_mut(&len).and_then(|s| s.pop()));
    match recycled {
        Some(mut v) => {
            v.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            v
        }
        None => vec![Complex64::new(0.0, 0.0); len],
    }
}

fn put_buf(v: Vec<Complex64>) {
    let len = v.len();
    // Buffers beyond ~256 MB are dropped rather than held: the largest
    // grids appear exactly when the engine's own working set peaks.
    if len > 16_000_000 {
        return;
    }
    POOL.with(|p| {
        let mut p = p.borrow_mut();
        let stack = p.entry(len).or_default();
        if stack.len() < 2 {
            stack.push(v);
        }
    });
}

fn c2c_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    C2C.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

fn r2c_plan(n: usize) -> Arc<dyn RealToComplex<f64>> {
    R2C.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| RealFftPlanner::new().plan_fft_forward(n))
            .clone()
    })
}

fn c2r_plan(n: usize) -> Arc<dyn ComplexToReal<f64>> {
    C2R.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| RealFftPlanner::new().plan_fft_inverse(n))
            .clone()
    })
}

/// Wavevector component for row/column index `p` on a grid of size `n`,
/// mapped into (-n/2, n/2].
#[inline]
pub fn wavenumber(p: usize, n: usize) -> i64 {
    let p = p as i64;
    let n = n as i64;
    if p <= n / 2 {
        p
    } else {
        p - n
    }
}

/// Row/column index for wavevector component `k` on a grid of size `n`.
#[inline]
pub fn index_of(k: i64, n: usize) -> usize {
    let n = n as i64;
    k.rem_euclid(n) as usize
}

/// Blocked transpose of a `rows x cols` row-major array into `cols x rows`.
fn transpose(src: &[Complex64], rows: usize, cols: usize, dst: &mut [Complex64]) {
    const B: usize = 64;
    for ib in (0..rows).step_by(B) {
        for jb in (0..cols).step_by(B) {
            for i in ib..(ib + B).min(rows) {
                for j in jb..(jb + B).min(cols) {
                    dst[j * rows + i] = src[i * cols + j];
                }
            }
        }
    }
}

/// Namespace for the 2D transforms used throughout the crate.
pub struct Fft2;

impl Fft2 {
    /// Physical samples -> full-plane Fourier coefficients (1/n^2 normalized).
    pub fn forward(n: usize, samples: &[f64]) -> Vec<Complex64> {
        assert!(n.is_power_of_two() && n >= 4, "grid size must be a power of two >= 4");
        assert_eq!(samples.len(), n * n);
        let half = n / 2 + 1;
        let r2c = r2c_plan(n);
        let mut scratch = r2c.make_scratch_vec();
        let mut row_in = vec![0.0f64; n];

        // Row pass: real -> half-complex along k2.
        let mut h = take_buf(n * half);
        for i in 0..n {
            row_in.copy_from_slice(&samples[i * n..(i + 1) * n]);
            r2c.process_with_scratch(&mut row_in, &mut h[i * half..(i + 1) * half], &mut scratch)
                .expect("r2c");
        }

        // Column pass: forward c2c along k1 for each retained k2.
        let mut ht = take_buf(n * half);
        transpose(&h, n, half, &mut ht);
        put_buf(h);
        let fft = c2c_plan(n, false);
        let mut cscratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for q in 0..half {
            fft.process_with_scratch(&mut ht[q * n..(q + 1) * n], &mut cscratch);
        }

        // Expand to the full plane using Hermitian symmetry, normalizing.
        let norm = 1.0 / (n * n) as f64;
        let mut full = vec![Complex64::new(0.0, 0.0); n * n];
        for p in 0..n {
            for q in 0..half {
                full[p * n + q] = ht[q * n + p] * norm;
            }
            let p_conj = (n - p) % n;
            for q in half..n {
                let q_conj = n - q; // in 1..n/2
                full[p * n + q] = ht[q_conj * n + p_conj].conj() * norm;
            }
        }
        put_buf(ht);
        full
    }

    /// Synthesize physical samples on an `out_n` grid from full-plane
    /// coefficients given on a (possibly coarser) `src_n` grid. Modes of the
    /// source must fit strictly inside the target Nyquist box; with
    /// `out_n = src_n` this is the plain inverse transform.
    pub fn synthesize(src_n: usize, coeffs: &[Complex64], out_n: usize) -> Vec<f64> {
        assert!(src_n.is_power_of_two() && out_n.is_power_of_two());
        assert!(out_n >= src_n, "synthesis target must be at least the source grid");
        assert_eq!(coeffs.len(), src_n * src_n);
        let half = out_n / 2 + 1;

        // Scatter the k2 >= 0 half of the source into the padded half-plane,
        // column-major (k2-index major) so the k1 pass is contiguous.
        let mut ht = take_buf(half * out_n);
        for p in 0..src_n {
            let k1 = wavenumber(p, src_n);
            let tp = index_of(k1, out_n);
            for q in 0..=src_n / 2 {
                ht[q * out_n + tp] = coeffs[p * src_n + q];
            }
        }

        // Column pass: inverse c2c along k1.
        let fft = c2c_plan(out_n, true);
        let mut cscratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for q in 0..half {
            fft.process_with_scratch(&mut ht[q * out_n..(q + 1) * out_n], &mut cscratch);
        }

        // Row pass: half-complex -> real along k2. The DC and Nyquist columns
        // must be exactly real; any residual imaginary part there is
        // Hermitian-symmetry round-off and is dropped.
        let mut h = take_buf(half * out_n);
        transpose(&ht, half, out_n, &mut h);
        put_buf(ht);
        let c2r = c2r_plan(out_n);
        let mut scratch = c2r.make_scratch_vec();
        let mut out = vec![0.0f64; out_n * out_n];
        for i in 0..out_n {
            let row = &mut h[i * half..(i + 1) * half];
            row[0].im = 0.0;
            row[half - 1].im = 0.0;
            c2r.process_with_scratch(row, &mut out[i * out_n..(i + 1) * out_n], &mut scratch)
                .expect("c2r");
        }
        put_buf(h);
        out
    }

    /// Plain inverse transform on the source grid.
    pub fn inverse(n: usize, coeffs: &[Complex64]) -> Vec<f64> {
        Self::synthesize(n, coeffs, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_grid(n: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let h = 2.0 * std::f64::consts::PI / n as f64;
        (0..n * n)
            .map(|t| f((t / n) as f64 * h, (t % n) as f64 * h))
            .collect()
    }

    #[test]
    fn roundtrip() {
        let n = 64;
        let samples = sample_grid(n, |x, y| (3.0 * x).cos() + 0.5 * (x + 4.0 * y).sin() - 2.0 * (7.0 * y).cos());
        let spec = Fft2::forward(n, &samples);
        let back = Fft2::inverse(n, &spec);
        let err = samples.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        assert!(err < 1e-12, "roundtrip error {err}");
    }

    #[test]
    fn single_mode_coefficients() {
        let n = 64;
        let samples = sample_grid(n, |x, y| (3.0 * x + 4.0 * y).cos());
        let spec = Fft2::forward(n, &samples);
        let at = |k1: i64, k2: i64| spec[index_of(k1, n) * n + index_of(k2, n)];
        assert!((at(3, 4) - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        assert!((at(-3, -4) - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        assert!(at(0, 0).norm() < 1e-13);
        // Negative k2 representative of a different mode pair.
        let samples = sample_grid(n, |x, y| (3.0 * x - 4.0 * y).sin());
        let spec = Fft2::forward(n, &samples);
        let at = |k1: i64, k2: i64| spec[index_of(k1, n) * n + index_of(k2, n)];
        assert!((at(3, -4) - Complex64::new(0.0, -0.5)).norm() < 1e-13);
        assert!((at(-3, 4) - Complex64::new(0.0, 0.5)).norm() < 1e-13);
    }

    #[test]
    fn padded_synthesis_matches_fine_sampling() {
        let n = 32;
        let m = 128;
        let coarse = sample_grid(n, |x, y| (5.0 * x).cos() * (2.0 * y).sin() + (x - y).cos());
        let spec = Fft2::forward(n, &coarse);
        let fine = Fft2::synthesize(n, &spec, m);
        let expect = sample_grid(m, |x, y| (5.0 * x).cos() * (2.0 * y).sin() + (x - y).cos());
        let err = fine.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        assert!(err < 1e-12, "padded synthesis error {err}");
    }
}
