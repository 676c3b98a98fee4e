//! Exact products of band-limited fields: zero-padded pointwise products
//! (no aliasing at any retained mode), carrier modulation by spectral
//! shifts, and a brute-force convolution oracle for cross-checks.

use crate::error::{Error, Result};
use crate::field::{min_grid_for_band, SpectralField, TorusField};
use num_complex::Complex64;
use std::collections::HashMap;

/// Largest padded grid a product is allowed to request.
const MAX_PRODUCT_GRID: usize = 1 << 15;

fn band_of(f: &SpectralField) -> f64 {
    let nyq = (f.n() / 2 - 1) as f64;
    f.band_limit().map_or(nyq, |b| b.min(nyq))
}

/// Samples of a spectral field on an arbitrary power-of-two grid, truncating
/// (losslessly, by band) when the target is coarser than the source.
pub fn sampled_on(f: &SpectralField, m: usize) -> Result<TorusField> {
    if m >= f.n() {
        f.to_samples_on(m)
    } else {
        f.truncated(m)?.to_samples_on(m)
    }
}

/// Exact product of two band-limited fields, computed on a zero-padded grid
/// that keeps the combined band strictly under Nyquist.
pub fn dealiased_product_spec(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    let band = band_of(f) + band_of(g);
    let m = min_grid_for_band(band);
    if m > MAX_PRODUCT_GRID {
        return Err(Error::Grid(format!(
            "product band {band:.1} needs grid {m} > {MAX_PRODUCT_GRID}"
        )));
    }
    let fa = sampled_on(f, m)?;
    let gb = sampled_on(g, m)?;
    let prod = fa.zip_with(&gb, |a, b| a * b)?;
    let mut spec = prod.to_spectral();
    spec.set_band_limit(Some(band));
    Ok(spec)
}

/// Physical-side entry point; the result lives on the padded grid.
pub fn dealiased_product(f: &TorusField, g: &TorusField) -> Result<TorusField> {
    let spec = dealiased_product_spec(&f.to_spectral(), &g.to_spectral())?;
    let band = spec.band_limit().unwrap_or(0.0);
    let out = spec.to_samples_on(min_grid_for_band(band))?;
    Ok(out)
}

/// Carrier phase for modulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Cos,
    Sin,
}

/// `env(x) * cos(K.x)` or `env(x) * sin(K.x)` built by exact spectral
/// shifts: `cos` adds half the envelope spectrum at `+K` and `-K`,
/// `sin` the same with `-i/2` and `+i/2`.
pub fn modulated(env: &SpectralField, carrier: (i64, i64), phase: Phase) -> SpectralField {
    let eband = band_of(env);
    let band = eband + (((carrier.0 * carrier.0 + carrier.1 * carrier.1) as f64).sqrt());
    let m = min_grid_for_band(band).max(env.n());
    let mut out = SpectralField::zeros(m, Some(band));
    // Transform round-off outside the declared band would shift past the
    // target Nyquist box; drop it here rather than carry it around.
    let mut env = env.clone();
    crate::multiplier::lowpass_spectral(&mut env, eband);
    let (fp, fm) = match phase {
        Phase::Cos => (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)),
        Phase::Sin => (Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5)),
    };
    out.add_shifted(&env, carrier, fp);
    out.add_shifted(&env, (-carrier.0, -carrier.1), fm);
    out.mean_zero = env.mean_zero && carrier != (0, 0);
    out
}

/// Direct discrete convolution over the integer lattice:
/// `h(k) = sum_{k1 + k2 = k} f(k1) g(k2)`, the oracle dealiased products
/// are checked against. Quadratic in the number of active modes.
pub fn convolution_oracle(
    f: &SpectralField,
    g: &SpectralField,
) -> HashMap<(i64, i64), Complex64> {
    let mut fs = Vec::new();
    f.for_each_mode(|k, c| fs.push((k, c)));
    let mut gs = Vec::new();
    g.for_each_mode(|k, c| gs.push((k, c)));
    let mut out: HashMap<(i64, i64), Complex64> = HashMap::new();
    for &(kf, cf) in &fs {
        for &(kg, cg) in &gs {
            *out.entry((kf.0 + kg.0, kf.1 + kg.1))
                .or_insert(Complex64::new(0.0, 0.0)) += cf * cg;
        }
    }
    out
}
