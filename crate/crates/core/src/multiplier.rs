//! Fourier multiplier calculus: fractional Laplacians, Riesz transforms, the
//! odd Riesz pair behind the stress decomposition, sharp Littlewood-Paley
//! projections, and Helmholtz gradient-part extraction.
//!
//! All singular symbols assign 0 to the zero mode; stress and solution
//! fields are kept mean-free throughout.

use crate::error::{Error, Result};
use crate::field::{SpectralField, TorusField};
use num_complex::Complex64;

/// The two wave directions of the construction: `XI1 = (3/5, 4/5)` needs
/// carrier frequencies divisible by 5; `XI2 = (1, 0)` does not.
pub const XI1: (f64, f64) = (0.6, 0.8);
pub const XI2: (f64, f64) = (1.0, 0.0);

/// `v` rotated by +90 degrees.
pub fn perp(v: (f64, f64)) -> (f64, f64) {
    (-v.1, v.0)
}

/// A Fourier multiplier: symbol over integer wavevectors plus the value
/// taken at the zero mode.
pub struct MultiplierSpec {
    pub name: &'static str,
    symbol: Box<dyn Fn((i64, i64)) -> Complex64 + Send + Sync>,
    pub zero_mode: Complex64,
}

impl MultiplierSpec {
    pub fn new(
        name: &'static str,
        symbol: impl Fn((i64, i64)) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { name, symbol: Box::new(symbol), zero_mode: Complex64::new(0.0, 0.0) }
    }

    pub fn eval(&self, k: (i64, i64)) -> Complex64 {
        if k == (0, 0) {
            self.zero_mode
        } else {
            (self.symbol)(k)
        }
    }

    /// `symbol(-k) == conj(symbol(k))`, the condition for real output on
    /// real input, checked over a box of modes.
    pub fn is_hermitian(&self, kmax: i64) -> bool {
        for k1 in -kmax..=kmax {
            for k2 in -kmax..=kmax {
                let a = self.eval((k1, k2));
                let b = self.eval((-k1, -k2)).conj();
                if (a - b).norm() > 1e-13 * (1.0 + a.norm()) {
                    return false;
                }
            }
        }
        true
    }

    /// Apply to a spectral field in place.
    pub fn apply_spectral(&self, field: &mut SpectralField) -> Result<()> {
        let n = field.n();
        for p in 0..n {
            for q in 0..n {
                let k = (crate::fft2::wavenumber(p, n), crate::fft2::wavenumber(q, n));
                let m = self.eval(k);
                if !m.re.is_finite() || !m.im.is_finite() {
                    return Err(Error::Symbol(format!(
                        "{} evaluates non-finite at k=({},{})",
                        self.name, k.0, k.1
                    )));
                }
                let idx = p * n + q;
                // Touch only active modes so FFT round-off at dead modes
                // cannot be amplified by large symbols.
                let c = field.coeffs()[idx];
                if c != Complex64::new(0.0, 0.0) {
                    field.coeffs_mut()[idx] = m * c;
                }
            }
        }
        if self.zero_mode == Complex64::new(0.0, 0.0) {
            field.mean_zero = true;
        }
        Ok(())
    }

    /// Apply to a physical field, returning a physical field on the same grid.
    pub fn apply(&self, field: &TorusField) -> Result<TorusField> {
        let mut spec = field.to_spectral();
        self.apply_spectral(&mut spec)?;
        spec.to_samples_on(field.n())
    }
}

fn knorm(k: (i64, i64)) -> f64 {
    (((k.0 * k.0 + k.1 * k.1) as f64).sqrt()) as f64
}

/// `Lambda^s = (-Delta)^(s/2)`, symbol `|k|^s`.
pub fn lambda_pow(s: f64) -> MultiplierSpec {
    MultiplierSpec::new("lambda_pow", move |k| Complex64::new(knorm(k).powf(s), 0.0))
}

/// Riesz transform `R_j = d_j Lambda^{-1}`, symbol `i k_j / |k|`.
pub fn riesz(j: usize) -> MultiplierSpec {
    MultiplierSpec::new("riesz", move |k| {
        let kj = if j == 0 { k.0 } else { k.1 } as f64;
        Complex64::new(0.0, kj / knorm(k))
    })
}

/// Odd Riesz symbol `R_1^o`: `25 (k2^2 - k1^2) / (12 |k|^2)`.
pub fn riesz_odd_symbol_1(k: (i64, i64)) -> f64 {
    let (k1, k2) = (k.0 as f64, k.1 as f64);
    25.0 * (k2 * k2 - k1 * k1) / (12.0 * (k1 * k1 + k2 * k2))
}

/// Odd Riesz symbol `R_2^o`: `7 (k2^2 - k1^2) / (12 |k|^2) + 4 k1 k2 / |k|^2`.
pub fn riesz_odd_symbol_2(k: (i64, i64)) -> f64 {
    let (k1, k2) = (k.0 as f64, k.1 as f64);
    let kk = k1 * k1 + k2 * k2;
    7.0 * (k2 * k2 - k1 * k1) / (12.0 * kk) + 4.0 * k1 * k2 / kk
}

/// The odd Riesz pair, indexed 1 or 2 to match the wave directions.
pub fn riesz_odd(j: usize) -> MultiplierSpec {
    assert!(j == 1 || j == 2);
    MultiplierSpec::new("riesz_odd", move |k| {
        let v = if j == 1 { riesz_odd_symbol_1(k) } else { riesz_odd_symbol_2(k) };
        Complex64::new(v, 0.0)
    })
}

/// Partial derivative `d_j`, symbol `i k_j`.
pub fn deriv(j: usize) -> MultiplierSpec {
    MultiplierSpec::new("deriv", move |k| {
        let kj = if j == 0 { k.0 } else { k.1 } as f64;
        Complex64::new(0.0, kj)
    })
}

/// Residual of the algebraic stress decomposition at one wavevector:
/// `sum_j (xi_j^perp . k)(xi_j . k) m_j(k) - |k|^2`, which vanishes
/// identically for the odd Riesz pair.
pub fn alg_identity_residual(k: (i64, i64)) -> f64 {
    let kf = (k.0 as f64, k.1 as f64);
    let dot = |a: (f64, f64), b: (f64, f64)| a.0 * b.0 + a.1 * b.1;
    let mut acc = 0.0;
    for (xi, m) in [
        (XI1, riesz_odd_symbol_1(k)),
        (XI2, riesz_odd_symbol_2(k)),
    ] {
        acc += dot(perp(xi), kf) * dot(xi, kf) * m;
    }
    acc - dot(kf, kf)
}

/// Sharp Euclidean low-pass `P_{<= r}`: zero all modes with |k| > r.
pub fn lowpass_spectral(field: &mut SpectralField, r: f64) -> f64 {
    let n = field.n();
    let r2 = r * r;
    let total = field.energy();
    let mut dropped = 0.0;
    for p in 0..n {
        let k1 = crate::fft2::wavenumber(p, n);
        for q in 0..n {
            let k2 = crate::fft2::wavenumber(q, n);
            if (k1 * k1 + k2 * k2) as f64 > r2 {
                let idx = p * n + q;
                let c = field.coeffs()[idx];
                if c != Complex64::new(0.0, 0.0) {
                    dropped += c.norm_sqr();
                    field.coeffs_mut()[idx] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
    let cur = field.band_limit();
    field.set_band_limit(Some(cur.map_or(r, |b| b.min(r))));
    if total > 0.0 {
        dropped / total
    } else {
        0.0
    }
}

/// Sharp low-pass on a physical field; the result stays on the input grid.
pub fn lowpass(field: &TorusField, r: f64) -> Result<TorusField> {
    if r < 1.0 {
        return Err(Error::Params(format!("lowpass radius {r} < 1")));
    }
    let mut spec = field.to_spectral();
    lowpass_spectral(&mut spec, r);
    spec.to_samples_on(field.n())
}

/// Complement `P_{> r} = id - P_{<= r}` on a spectral field.
pub fn highpass_spectral(field: &mut SpectralField, r: f64) {
    let n = field.n();
    let r2 = r * r;
    for p in 0..n {
        let k1 = crate::fft2::wavenumber(p, n);
        for q in 0..n {
            let k2 = crate::fft2::wavenumber(q, n);
            if (k1 * k1 + k2 * k2) as f64 <= r2 {
                field.coeffs_mut()[p * n + q] = Complex64::new(0.0, 0.0);
            }
        }
    }
    field.mean_zero = true;
}

/// A two-component spectral vector field.
pub struct SpectralVector {
    pub x: SpectralField,
    pub y: SpectralField,
}

impl SpectralVector {
    pub fn n(&self) -> usize {
        self.x.n()
    }

    /// Divergence `d1 vx + d2 vy`.
    pub fn divergence(&self) -> SpectralField {
        let mut dx = self.x.clone();
        dx.apply_symbol(|k| Complex64::new(0.0, k.0 as f64), Complex64::new(0.0, 0.0));
        let mut dy = self.y.clone();
        dy.apply_symbol(|k| Complex64::new(0.0, k.1 as f64), Complex64::new(0.0, 0.0));
        dx.add_scaled(&dy, 1.0);
        dx
    }

    /// Helmholtz gradient-part potential `inv(Delta) div v`: the unique
    /// mean-free phi with `grad(phi)` the gradient part of `v`.
    pub fn gradient_potential(&self) -> SpectralField {
        let n = self.n();
        let mut phi = SpectralField::zeros(n, self.x.band_limit());
        for p in 0..n {
            let k1 = crate::fft2::wavenumber(p, n);
            for q in 0..n {
                let k2 = crate::fft2::wavenumber(q, n);
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                let idx = p * n + q;
                let vx = self.x.coeffs()[idx];
                let vy = self.y.coeffs()[idx];
                if vx == Complex64::new(0.0, 0.0) && vy == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let ik_dot = Complex64::new(0.0, k1 as f64) * vx + Complex64::new(0.0, k2 as f64) * vy;
                let val = -ik_dot / ((k1 * k1 + k2 * k2) as f64);
                phi.coeffs_mut()[idx] = val;
            }
        }
        phi.mean_zero = true;
        phi
    }

    /// L2 norm of the curl part `v - grad(phi)`, the component discarded by
    /// gradient-part extraction.
    pub fn curl_part_l2(&self) -> f64 {
        let phi = self.gradient_potential();
        let mut gx = phi.clone();
        gx.apply_symbol(|k| Complex64::new(0.0, k.0 as f64), Complex64::new(0.0, 0.0));
        let mut gy = phi;
        gy.apply_symbol(|k| Complex64::new(0.0, k.1 as f64), Complex64::new(0.0, 0.0));
        gx.add_scaled(&self.x, -1.0);
        gy.add_scaled(&self.y, -1.0);
        (gx.energy() + gy.energy()).sqrt()
            * 2.0
            * std::f64::consts::PI
    }

    pub fn l2(&self) -> f64 {
        (self.x.energy() + self.y.energy()).sqrt() * 2.0 * std::f64::consts::PI
    }

    pub fn add_scaled(&mut self, other: &SpectralVector, factor: f64) {
        self.x.add_scaled(&other.x, factor);
        self.y.add_scaled(&other.y, factor);
    }
}

/// `grad_perp(phi) = (-d2 phi, d1 phi)` as a spectral vector.
pub fn grad_perp(phi: &SpectralField) -> SpectralVector {
    let mut x = phi.clone();
    x.apply_symbol(|k| Complex64::new(0.0, -(k.1 as f64)), Complex64::new(0.0, 0.0));
    let mut y = phi.clone();
    y.apply_symbol(|k| Complex64::new(0.0, k.0 as f64), Complex64::new(0.0, 0.0));
    SpectralVector { x, y }
}

/// `grad(phi)` as a spectral vector.
pub fn grad(phi: &SpectralField) -> SpectralVector {
    let mut x = phi.clone();
    x.apply_symbol(|k| Complex64::new(0.0, k.0 as f64), Complex64::new(0.0, 0.0));
    let mut y = phi.clone();
    y.apply_symbol(|k| Complex64::new(0.0, k.1 as f64), Complex64::new(0.0, 0.0));
    SpectralVector { x, y }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TorusField;

    #[test]
    fn lambda_on_eigenfunction() {
        // Lambda cos(3x + 4y) = 5 cos(3x + 4y).
        let f = TorusField::cosine((3, 4), 1.0);
        let g = lambda_pow(1.0).apply(&f).unwrap();
        let expect = f.scaled(5.0);
        let err = g
            .samples()
            .iter()
            .zip(expect.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn odd_riesz_on_cos_x1() {
        // R_1^o cos(x1) = -(25/12) cos(x1); R_2^o cos(x1) = -(7/12) cos(x1).
        let f = TorusField::cosine((1, 0), 1.0);
        let g1 = riesz_odd(1).apply(&f).unwrap();
        let g2 = riesz_odd(2).apply(&f).unwrap();
        let e1 = f.scaled(-25.0 / 12.0);
        let e2 = f.scaled(-7.0 / 12.0);
        for (g, e) in [(&g1, &e1), (&g2, &e2)] {
            let err = g
                .samples()
                .iter()
                .zip(e.samples())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(err < 1e-13);
        }
    }

    #[test]
    fn inv_laplace_divergence_example() {
        // v = (cos x1, 0): div v = -sin x1, inv(Delta) div v = sin x1.
        let vx = TorusField::cosine((1, 0), 1.0).to_spectral();
        let vy = SpectralField::zeros(vx.n(), Some(0.0));
        let v = SpectralVector { x: vx, y: vy };
        let phi = v.gradient_potential();
        let got = phi.to_samples_on(32).unwrap();
        let expect = TorusField::from_fn(32, Some(1.0), |x, _| x.sin()).unwrap();
        let err = got
            .samples()
            .iter()
            .zip(expect.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn algebraic_identity_hand_check() {
        // At k = (1,1) the j=1 term vanishes and the j=2 term gives |k|^2.
        let k = (1i64, 1i64);
        assert!(riesz_odd_symbol_1(k).abs() < 1e-15);
        let dot = |a: (f64, f64), b: (f64, f64)| a.0 * b.0 + a.1 * b.1;
        let t2 = dot(perp(XI2), (1.0, 1.0)) * dot(XI2, (1.0, 1.0)) * riesz_odd_symbol_2(k);
        assert!((t2 - 2.0).abs() < 1e-14);
        assert!(alg_identity_residual(k).abs() < 1e-14);
    }

    #[test]
    fn lowpass_sharp_and_idempotent() {
        let f = TorusField::from_fn(64, None, |x, _| x.cos() + (10.0 * x).cos()).unwrap();
        let once = lowpass(&f, 5.0).unwrap();
        let expect = TorusField::from_fn(64, Some(1.0), |x, _| x.cos()).unwrap();
        let err = once
            .samples()
            .iter()
            .zip(expect.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-13);
        let twice = lowpass(&once, 5.0).unwrap();
        let err2 = twice
            .samples()
            .iter()
            .zip(once.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err2 < 1e-14);
    }

    #[test]
    fn odd_symbols_give_real_output() {
        let f = TorusField::from_fn(64, None, |x, y| (3.0 * x).cos() * (2.0 * y).sin() + (x + y).sin())
            .unwrap();
        for m in [riesz(0), riesz(1), riesz_odd(1), riesz_odd(2), lambda_pow(0.5), lambda_pow(-1.0)]
        {
            assert!(m.is_hermitian(6), "{} not Hermitian-compatible", m.name);
            let mut spec = f.to_spectral();
            m.apply_spectral(&mut spec).unwrap();
            assert!(spec.hermitian_defect() < 1e-12, "{} broke symmetry", m.name);
        }
    }
}
