//! Scalar fields on the torus `T^2 = [0, 2pi)^2` in their two guises:
//! real samples on a uniform grid (`TorusField`) and full-plane Fourier
//! coefficients (`SpectralField`).
//!
//! Every field carries a declared band limit: a radius `B` such that all
//! active modes satisfy `|k| <= B`. Grids are sized per field: the minimal
//! lossless grid keeps `B` strictly under Nyquist, while norm evaluation
//! oversamples to at least three samples per shortest wavelength.

use crate::error::{Error, Result};
use crate::fft2::{index_of, wavenumber, Fft2};
use num_complex::Complex64;

/// Smallest power-of-two grid that holds modes `|k| <= band` strictly below
/// Nyquist (so index `n/2` is never an active mode).
pub fn min_grid_for_band(band: f64) -> usize {
    let need = 2 * (band.floor().max(0.0) as usize) + 2;
    need.max(32).next_power_of_two()
}

/// Power-of-two grid giving at least three samples per shortest wavelength,
/// used when fields are sampled for sup-norm evaluation.
pub fn eval_grid_for_band(band: f64, cap: usize) -> usize {
    let need = (3.0 * (band + 1.0)).ceil() as usize;
    let n = need.max(32).next_power_of_two();
    n.clamp(min_grid_for_band(band), cap.max(min_grid_for_band(band)))
}

/// Real scalar field as samples on an `n x n` grid, sample `(i, j)` at
/// `x = (2*pi*i/n, 2*pi*j/n)`, row-major.
#[derive(Clone)]
pub struct TorusField {
    n: usize,
    samples: Vec<f64>,
    band_limit: Option<f64>,
}

/// Complex Fourier coefficients on the full `n x n` index plane with
/// wavevectors in `(-n/2, n/2]^2`; real fields keep Hermitian symmetry.
#[derive(Clone)]
pub struct SpectralField {
    n: usize,
    coeffs: Vec<Complex64>,
    band_limit: Option<f64>,
    pub mean_zero: bool,
}

impl TorusField {
    pub fn new(n: usize, samples: Vec<f64>, band_limit: Option<f64>) -> Result<Self> {
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::Grid(format!("grid size {n} is not a power of two >= 4")));
        }
        if samples.len() != n * n {
            return Err(Error::Grid(format!("sample count {} != {n}x{n}", samples.len())));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("field samples".into()));
        }
        if let Some(b) = band_limit {
            if !(b >= 0.0) || b > (n / 2 - 1) as f64 {
                return Err(Error::Grid(format!("band limit {b} does not fit grid {n}")));
            }
        }
        Ok(Self { n, samples, band_limit })
    }

    /// Zero field on the minimal grid for the given band.
    pub fn zeros(band: f64) -> Self {
        let n = min_grid_for_band(band);
        Self { n, samples: vec![0.0; n * n], band_limit: Some(band) }
    }

    /// Sample a closure over the grid.
    pub fn from_fn(n: usize, band_limit: Option<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let samples: Vec<f64> = (0..n * n)
            .map(|t| f((t / n) as f64 * h, (t % n) as f64 * h))
            .collect();
        Self::new(n, samples, band_limit)
    }

    /// `a*cos(k.x)` on the minimal grid for `|k|`.
    pub fn cosine(k: (i64, i64), amplitude: f64) -> Self {
        let band = ((k.0 * k.0 + k.1 * k.1) as f64).sqrt();
        let n = min_grid_for_band(band);
        Self::from_fn(n, Some(band), |x, y| {
            amplitude * (k.0 as f64 * x + k.1 as f64 * y).cos()
        })
        .expect("cosine field")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn band_limit(&self) -> Option<f64> {
        self.band_limit
    }

    pub fn set_band_limit(&mut self, band: Option<f64>) {
        self.band_limit = band;
    }

    /// Largest representable |k| component on this grid.
    pub fn nyquist_band(&self) -> f64 {
        (self.n / 2 - 1) as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, &s| m.max(s.abs()))
    }

    /// Mean over the grid (the k = 0 coefficient).
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / (self.n * self.n) as f64
    }

    /// Forward transform.
    pub fn to_spectral(&self) -> SpectralField {
        let coeffs = Fft2::forward(self.n, &self.samples);
        SpectralField {
            n: self.n,
            coeffs,
            band_limit: self.band_limit,
            mean_zero: false,
        }
    }

    /// Pointwise binary combination; grids must match.
    pub fn zip_with(&self, other: &TorusField, f: impl Fn(f64, f64) -> f64) -> Result<TorusField> {
        if self.n != other.n {
            return Err(Error::Grid(format!("grid mismatch {} vs {}", self.n, other.n)));
        }
        let samples: Vec<f64> = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let band = match (self.band_limit, other.band_limit) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        TorusField::new(self.n, samples, band)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<TorusField> {
        let samples: Vec<f64> = self.samples.iter().map(|&a| f(a)).collect();
        // A nonlinear pointwise map can excite any representable frequency.
        TorusField::new(self.n, samples, None)
    }

    pub fn scaled(&self, factor: f64) -> TorusField {
        let samples: Vec<f64> = self.samples.iter().map(|&a| a * factor).collect();
        TorusField { n: self.n, samples, band_limit: self.band_limit }
    }
}

impl SpectralField {
    pub fn zeros(n: usize, band_limit: Option<f64>) -> Self {
        Self {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); n * n],
            band_limit,
            mean_zero: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn band_limit(&self) -> Option<f64> {
        self.band_limit
    }

    pub fn set_band_limit(&mut self, band: Option<f64>) {
        self.band_limit = band;
    }

    pub fn at(&self, k: (i64, i64)) -> Complex64 {
        self.coeffs[index_of(k.0, self.n) * self.n + index_of(k.1, self.n)]
    }

    pub fn set(&mut self, k: (i64, i64), v: Complex64) {
        let idx = index_of(k.0, self.n) * self.n + index_of(k.1, self.n);
        self.coeffs[idx] = v;
    }

    /// Iterate `(k, c)` over all stored modes.
    pub fn for_each_mode(&self, mut f: impl FnMut((i64, i64), Complex64)) {
        for p in 0..self.n {
            let k1 = wavenumber(p, self.n);
            for q in 0..self.n {
                let c = self.coeffs[p * self.n + q];
                if c != Complex64::new(0.0, 0.0) {
                    f((k1, wavenumber(q, self.n)), c);
                }
            }
        }
    }

    /// Apply `c(k) -> m(k) * c(k)` in place; `zero_mode` replaces the action
    /// at k = 0 (multiplier value times the current coefficient).
    pub fn apply_symbol(&mut self, symbol: impl Fn((i64, i64)) -> Complex64, zero_mode: Complex64) {
        for p in 0..self.n {
            let k1 = wavenumber(p, self.n);
            for q in 0..self.n {
                let k2 = wavenumber(q, self.n);
                let idx = p * self.n + q;
                if k1 == 0 && k2 == 0 {
                    self.coeffs[idx] *= zero_mode;
                } else {
                    self.coeffs[idx] *= symbol((k1, k2));
                }
            }
        }
    }

    /// Synthesize samples on a grid of size `out_n >= n`.
    pub fn to_samples_on(&self, out_n: usize) -> Result<TorusField> {
        if out_n < self.n {
            return Err(Error::Grid(format!(
                "synthesis target {out_n} below source grid {}",
                self.n
            )));
        }
        let samples = Fft2::synthesize(self.n, &self.coeffs, out_n);
        TorusField::new(out_n, samples, self.band_limit)
    }

    /// Synthesize on the minimal lossless grid for the declared band.
    pub fn to_samples(&self) -> Result<TorusField> {
        let n = match self.band_limit {
            Some(b) => min_grid_for_band(b).max(32),
            None => self.n,
        };
        if n >= self.n {
            self.to_samples_on(n)
        } else {
            self.truncated(n)?.to_samples_on(n)
        }
    }

    /// Copy onto a larger grid (pure zero padding in mode space).
    pub fn padded(&self, out_n: usize) -> Result<SpectralField> {
        if out_n < self.n {
            return Err(Error::Grid(format!("pad target {out_n} below {}", self.n)));
        }
        if out_n == self.n {
            return Ok(self.clone());
        }
        let mut out = SpectralField::zeros(out_n, self.band_limit);
        out.mean_zero = self.mean_zero;
        for p in 0..self.n {
            let k1 = wavenumber(p, self.n);
            let tp = index_of(k1, out_n);
            for q in 0..self.n {
                let c = self.coeffs[p * self.n + q];
                if c != Complex64::new(0.0, 0.0) {
                    out.coeffs[tp * out_n + index_of(wavenumber(q, self.n), out_n)] = c;
                }
            }
        }
        Ok(out)
    }

    /// Copy onto a smaller grid; modes outside the target box must carry no
    /// energy beyond `drop_tol` relative to the field's L2 norm.
    pub fn truncated(&self, out_n: usize) -> Result<SpectralField> {
        if out_n >= self.n {
            return self.padded(out_n);
        }
        let keep = (out_n / 2 - 1) as i64;
        let total = self.energy();
        let mut dropped = 0.0;
        let mut out = SpectralField::zeros(out_n, self.band_limit);
        out.mean_zero = self.mean_zero;
        for p in 0..self.n {
            let k1 = wavenumber(p, self.n);
            for q in 0..self.n {
                let k2 = wavenumber(q, self.n);
                let c = self.coeffs[p * self.n + q];
                if k1.abs() <= keep && k2.abs() <= keep {
                    out.coeffs[index_of(k1, out_n) * out_n + index_of(k2, out_n)] = c;
                } else {
                    dropped += c.norm_sqr();
                }
            }
        }
        if total > 0.0 && dropped / total > 1e-20 {
            return Err(Error::Grid(format!(
                "truncation to {out_n} would drop relative energy {:.3e}",
                dropped / total
            )));
        }
        Ok(out)
    }

    /// Sum of |c(k)|^2 (equals the mean square of the samples by Parseval).
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// L2 norm over the torus with the Lebesgue measure: `sqrt(4 pi^2 sum |c|^2)`.
    pub fn l2(&self) -> f64 {
        (self.energy() * 4.0 * std::f64::consts::PI * std::f64::consts::PI).sqrt()
    }

    /// Relative spectral energy strictly outside `|k| > r`.
    pub fn energy_fraction_above(&self, r: f64) -> f64 {
        let total = self.energy();
        if total == 0.0 {
            return 0.0;
        }
        let r2 = r * r;
        let mut above = 0.0;
        for p in 0..self.n {
            let k1 = wavenumber(p, self.n);
            for q in 0..self.n {
                let k2 = wavenumber(q, self.n);
                if (k1 * k1 + k2 * k2) as f64 > r2 {
                    above += self.coeffs[p * self.n + q].norm_sqr();
                }
            }
        }
        above / total
    }

    /// Magnitude of the worst Hermitian-symmetry violation, relative to the
    /// largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let mut max_c: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for p in 0..self.n {
            for q in 0..self.n {
                let c = self.coeffs[p * self.n + q];
                max_c = max_c.max(c.norm());
                let pc = (self.n - p) % self.n;
                let qc = (self.n - q) % self.n;
                defect = defect.max((c - self.coeffs[pc * self.n + qc].conj()).norm());
            }
        }
        if max_c == 0.0 {
            0.0
        } else {
            defect / max_c
        }
    }

    /// Zero the k = 0 coefficient and flag the field as mean-free.
    pub fn remove_mean(&mut self) {
        self.coeffs[0] = Complex64::new(0.0, 0.0);
        self.mean_zero = true;
    }

    /// `self += factor * other`; other may live on a coarser grid.
    pub fn add_scaled(&mut self, other: &SpectralField, factor: f64) {
        assert!(other.n <= self.n, "operand grid exceeds target");
        for p in 0..other.n {
            let k1 = wavenumber(p, other.n);
            let tp = index_of(k1, self.n);
            for q in 0..other.n {
                let c = other.coeffs[p * other.n + q];
                if c != Complex64::new(0.0, 0.0) {
                    let idx = tp * self.n + index_of(wavenumber(q, other.n), self.n);
                    self.coeffs[idx] += factor * c;
                }
            }
        }
        self.band_limit = match (self.band_limit, other.band_limit) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }

    /// `self(k) += factor * other(k - shift)` for every mode of `other`:
    /// the spectral form of multiplying by `exp(i shift.x)` and adding.
    pub fn add_shifted(&mut self, other: &SpectralField, shift: (i64, i64), factor: Complex64) {
        let ny = (self.n / 2 - 1) as i64;
        for p in 0..other.n {
            let k1 = wavenumber(p, other.n) + shift.0;
            for q in 0..other.n {
                let c = other.coeffs[p * other.n + q];
                if c != Complex64::new(0.0, 0.0) {
                    let k2 = wavenumber(q, other.n) + shift.1;
                    assert!(
                        k1.abs() <= ny && k2.abs() <= ny,
                        "shifted mode ({k1},{k2}) outside grid {}",
                        self.n
                    );
                    self.coeffs[index_of(k1, self.n) * self.n + index_of(k2, self.n)] += factor * c;
                }
            }
        }
    }

    /// Parseval inner product `integral(f*g) = 4 pi^2 sum c_f(k) conj(c_g(k))`
    /// for real fields; operands may live on different grids.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let (small, big) = if self.n <= other.n { (self, other) } else { (other, self) };
        let mut acc = 0.0;
        for p in 0..small.n {
            let k1 = wavenumber(p, small.n);
            for q in 0..small.n {
                let c = small.coeffs[p * small.n + q];
                if c != Complex64::new(0.0, 0.0) {
                    let d = big.coeffs
                        [index_of(k1, big.n) * big.n + index_of(wavenumber(q, small.n), big.n)];
                    acc += (c * d.conj()).re;
                }
            }
        }
        acc * 4.0 * std::f64::consts::PI * std::f64::consts::PI
    }
}

/// Weighted sum of spectral fields of possibly different grid sizes,
/// carried on the largest grid present.
pub fn combine(terms: &[(&SpectralField, f64)]) -> SpectralField {
    let n = terms.iter().map(|(f, _)| f.n()).max().unwrap_or(32);
    let mut acc = SpectralField::zeros(n, None);
    let mut band: Option<f64> = Some(0.0);
    for &(f, w) in terms {
        acc.add_scaled(f, w);
        band = match (band, f.band_limit()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    acc.set_band_limit(band);
    acc.mean_zero = terms.iter().all(|(f, _)| f.mean_zero);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizing() {
        assert_eq!(min_grid_for_band(5.0), 32);
        assert_eq!(min_grid_for_band(15.0), 32);
        assert_eq!(min_grid_for_band(15.5), 32);
        assert_eq!(min_grid_for_band(100.0), 256);
        assert_eq!(eval_grid_for_band(100.0, 8192), 512);
        assert_eq!(eval_grid_for_band(1998.0, 8192), 8192);
        // Capped evaluation still holds the band losslessly.
        assert_eq!(eval_grid_for_band(1998.0, 4096), 4096);
    }

    #[test]
    fn constant_field_transform() {
        let f = TorusField::from_fn(32, Some(0.0), |_, _| 1.0).unwrap();
        let spec = f.to_spectral();
        assert!((spec.at((0, 0)) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(spec.energy_fraction_above(0.5) < 1e-28);
    }

    #[test]
    fn parseval() {
        let f = TorusField::from_fn(64, None, |x, y| {
            (3.0 * x).cos() + 0.25 * (x + 7.0 * y).sin()
        })
        .unwrap();
        let spec = f.to_spectral();
        let mean_sq: f64 =
            f.samples().iter().map(|s| s * s).sum::<f64>() / (f.n() * f.n()) as f64;
        assert!((spec.energy() - mean_sq).abs() < 1e-14 * mean_sq.max(1.0));
        // cos amplitude 1 contributes 1/2, sin amplitude 1/4 contributes 1/32.
        assert!((spec.energy() - (0.5 + 0.03125 / 1.0)).abs() < 1e-13);
    }

    #[test]
    fn shift_is_modulation() {
        // a(x)*cos(K.x) built by shifts matches direct sampling.
        let mut spec = SpectralField::zeros(64, Some(3.0));
        spec.set((0, 0), Complex64::new(1.0, 0.0));
        spec.set((2, 1), Complex64::new(0.25, 0.0));
        spec.set((-2, -1), Complex64::new(0.25, 0.0));
        let kc = (10i64, 0i64);
        let mut out = SpectralField::zeros(64, Some(13.0));
        out.add_shifted(&spec, kc, Complex64::new(0.5, 0.0));
        out.add_shifted(&spec, (-kc.0, -kc.1), Complex64::new(0.5, 0.0));
        let got = out.to_samples_on(64).unwrap();
        let expect = TorusField::from_fn(64, None, |x, y| {
            (1.0 + 0.5 * (2.0 * x + y).cos()) * (10.0 * x).cos()
        })
        .unwrap();
        let err = got
            .samples()
            .iter()
            .zip(expect.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-13, "modulation error {err}");
        assert!(out.hermitian_defect() < 1e-15);
    }
}
