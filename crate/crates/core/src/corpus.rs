//! Seeded random band-limited fields, shared by the bound probes and the
//! test suites. ChaCha-based so a corpus is reproducible from its seed.

use crate::field::{min_grid_for_band, SpectralField};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random real mean-zero field with spectrum filling `1 <= |k| <= band`,
/// coefficients uniform in the unit square, Hermitian by construction.
pub fn random_band_limited(band: f64, seed: u64) -> SpectralField {
    random_band_limited_on(band, seed, min_grid_for_band(band))
}

/// Same, carried on a caller-chosen grid.
pub fn random_band_limited_on(band: f64, seed: u64, n: usize) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(n, Some(band));
    let bmax = band.floor() as i64;
    for k1 in -bmax..=bmax {
        for k2 in -bmax..=bmax {
            if (k1, k2) <= (0, 0) {
                continue; // one representative per conjugate pair
            }
            if ((k1 * k1 + k2 * k2) as f64) > band * band {
                continue;
            }
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            f.set((k1, k2), c);
            f.set((-k1, -k2), c.conj());
        }
    }
    f.mean_zero = true;
    f
}

/// Random field normalized to unit sup norm on its own grid.
pub fn random_unit_sup(band: f64, seed: u64) -> SpectralField {
    let f = random_band_limited(band, seed);
    let sup = f
        .to_samples_on(f.n())
        .expect("synthesis")
        .max_abs();
    let mut out = SpectralField::zeros(f.n(), f.band_limit());
    out.add_scaled(&f, 1.0 / sup);
    out.mean_zero = true;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_hermitian() {
        let a = random_band_limited(6.0, 42);
        let b = random_band_limited(6.0, 42);
        for p in 0..a.n() {
            for q in 0..a.n() {
                assert_eq!(a.coeffs()[p * a.n() + q], b.coeffs()[p * a.n() + q]);
            }
        }
        assert!(a.hermitian_defect() < 1e-15);
        assert!(a.energy_fraction_above(6.0) == 0.0);
    }
}
