//! The three norms the iteration tracks: the sup norm, the stress norm
//! `||G||_X = ||G||_inf + ||R_1^o G||_inf + ||R_2^o G||_inf`, and a
//! dyadic-block Holder proxy
//! `||f||_{C^s} = ||P_{<=1} f||_inf + max_j 2^{js} ||Delta_j f||_inf`
//! with sharp annuli `2^j <= |k| < 2^{j+1}`.
//!
//! Sup norms of spectral data are evaluated by sampling on an oversampled
//! grid (at least three samples per shortest wavelength, capped by the
//! configured maximal grid).

use crate::error::{Error, Result};
use crate::fft2::wavenumber;
use crate::field::{eval_grid_for_band, min_grid_for_band, SpectralField, TorusField};
use crate::multiplier::{riesz_odd_symbol_1, riesz_odd_symbol_2};
use num_complex::Complex64;

/// Default cap for norm-evaluation grids.
pub const DEFAULT_EVAL_CAP: usize = 8192;

/// Band actually carrying energy, bounded by the declared band limit.
fn effective_band(f: &SpectralField) -> f64 {
    let nyq = (f.n() / 2 - 1) as f64;
    f.band_limit().map_or(nyq, |b| b.min(nyq))
}

/// Sup norm of a spectral field, sampled on its oversampled grid.
pub fn sup_norm(f: &SpectralField, eval_cap: usize) -> Result<f64> {
    let band = effective_band(f);
    let m = eval_grid_for_band(band, eval_cap);
    let src = if m >= f.n() { f.clone() } else { f.truncated(m)? };
    Ok(src.to_samples_on(m.max(src.n()))?.max_abs())
}

fn require_mean_zero(f: &SpectralField, what: &str) -> Result<()> {
    let zero = f.at((0, 0)).norm();
    let scale = f.energy().sqrt();
    if zero > 1e-10 * scale.max(1e-300) && zero > 1e-14 {
        return Err(Error::Params(format!(
            "{what} requires a mean-zero field (|c(0)| = {zero:.3e})"
        )));
    }
    Ok(())
}

/// The three sup norms making up the X norm.
#[derive(Debug, Clone, Copy)]
pub struct XNorm {
    pub plain: f64,
    pub riesz_odd_1: f64,
    pub riesz_odd_2: f64,
}

impl XNorm {
    pub fn total(&self) -> f64 {
        self.plain + self.riesz_odd_1 + self.riesz_odd_2
    }
}

/// `||f||_X`, split into its three parts.
pub fn x_norm_parts(f: &SpectralField, eval_cap: usize) -> Result<XNorm> {
    require_mean_zero(f, "X norm")?;
    let plain = sup_norm(f, eval_cap)?;
    let mut r1 = f.clone();
    r1.apply_symbol(
        |k| Complex64::new(riesz_odd_symbol_1(k), 0.0),
        Complex64::new(0.0, 0.0),
    );
    let riesz_odd_1 = sup_norm(&r1, eval_cap)?;
    drop(r1);
    let mut r2 = f.clone();
    r2.apply_symbol(
        |k| Complex64::new(riesz_odd_symbol_2(k), 0.0),
        Complex64::new(0.0, 0.0),
    );
    let riesz_odd_2 = sup_norm(&r2, eval_cap)?;
    Ok(XNorm { plain, riesz_odd_1, riesz_odd_2 })
}

pub fn x_norm(f: &SpectralField, eval_cap: usize) -> Result<f64> {
    Ok(x_norm_parts(f, eval_cap)?.total())
}

/// Sup norms of the low block `P_{<=1}` and of each dyadic annulus.
/// Computing the profile once serves every Holder exponent.
pub struct DyadicProfile {
    pub low_sup: f64,
    /// `(j, ||Delta_j f||_inf)` for the non-empty blocks.
    pub blocks: Vec<(u32, f64)>,
}

pub fn dyadic_profile(f: &SpectralField, eval_cap: usize) -> Result<DyadicProfile> {
    require_mean_zero(f, "Holder norm")?;
    let band = effective_band(f);
    let jmax = if band >= 1.0 { band.log2().floor() as u32 } else { 0 };

    // Bucket modes into P_{<=1} plus annuli 2^j <= |k| < 2^{j+1} in one pass.
    let mut low = SpectralField::zeros(32, Some(1.0));
    let mut blocks: Vec<SpectralField> = (0..=jmax)
        .map(|j| {
            let b = (2.0f64.powi(j as i32 + 1) - 1.0).min(band);
            SpectralField::zeros(min_grid_for_band(b), Some(b))
        })
        .collect();
    let n = f.n();
    for p in 0..n {
        let k1 = wavenumber(p, n);
        for q in 0..n {
            let c = f.coeffs()[p * n + q];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let k2 = wavenumber(q, n);
            let kk = ((k1 * k1 + k2 * k2) as f64).sqrt();
            if kk <= 1.0 {
                if k1 != 0 || k2 != 0 {
                    low.set((k1, k2), c);
                }
                if kk < 1.0 {
                    continue;
                }
            }
            if kk >= 1.0 {
                let j = kk.log2().floor() as u32;
                if (j as usize) < blocks.len() {
                    blocks[j as usize].set((k1, k2), c);
                }
            }
        }
    }
    let low_sup = sup_norm(&low, eval_cap)?;
    let mut out = Vec::new();
    for (j, b) in blocks.into_iter().enumerate() {
        if b.energy() > 0.0 {
            out.push((j as u32, sup_norm(&b, eval_cap)?));
        }
    }
    Ok(DyadicProfile { low_sup, blocks: out })
}

impl DyadicProfile {
    /// Combine the profile into the Holder-norm proxy at exponent `s >= 0`.
    pub fn holder(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(Error::Params(format!("Holder exponent {s} < 0")));
        }
        let peak = self
            .blocks
            .iter()
            .map(|&(j, sup)| 2.0f64.powf(j as f64 * s) * sup)
            .fold(0.0f64, f64::max);
        Ok(self.low_sup + peak)
    }
}

/// `||f||_{C^s}` via the dyadic proxy.
pub fn holder_norm(f: &SpectralField, s: f64, eval_cap: usize) -> Result<f64> {
    dyadic_profile(f, eval_cap)?.holder(s)
}

/// Norm dispatch used by the CLI.
pub enum NormKind {
    Sup,
    X,
    Holder(f64),
}

pub fn norm(field: &TorusField, kind: NormKind, eval_cap: usize) -> Result<f64> {
    match kind {
        NormKind::Sup => Ok(field.max_abs()),
        NormKind::X => x_norm(&field.to_spectral(), eval_cap),
        NormKind::Holder(s) => holder_norm(&field.to_spectral(), s, eval_cap),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TorusField;

    #[test]
    fn sup_of_cosine() {
        let f = TorusField::cosine((1, 0), 1.0);
        assert!((norm(&f, NormKind::Sup, 512).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_norm_of_cos_x1() {
        // 1 + 25/12 + 7/12 = 11/3.
        let f = TorusField::cosine((1, 0), 1.0).to_spectral();
        let x = x_norm(&f, 512).unwrap();
        assert!((x - 11.0 / 3.0).abs() < 1e-10, "got {x}");
    }

    #[test]
    fn holder_of_single_block() {
        // cos(lambda x) with dyadic lambda sits in exactly one block.
        for lam in [4i64, 32, 64] {
            let f = TorusField::cosine((lam, 0), 1.0).to_spectral();
            for s in [0.3, 0.6, 1.0, 2.0] {
                let h = holder_norm(&f, s, 2048).unwrap();
                let lam_s = (lam as f64).powf(s);
                assert!(
                    h >= lam_s / 2.0 && h <= 2.0 * lam_s,
                    "lambda={lam} s={s}: {h} vs {lam_s}"
                );
            }
        }
    }

    #[test]
    fn x_norm_rejects_nonzero_mean() {
        let f = TorusField::from_fn(32, Some(1.0), |x, _| 1.0 + x.cos())
            .unwrap()
            .to_spectral();
        assert!(x_norm(&f, 512).is_err());
    }
}
