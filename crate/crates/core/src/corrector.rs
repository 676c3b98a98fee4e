//! Corrector operators for the action of `Lambda = (-Delta)^{1/2}` on a
//! modulated plane wave `g(x) = a(x) cos(K.x)` with integer carrier `K`:
//!
//! ```text
//! Lambda g = |K| g + (xi . grad a) sin(K.x) + T1[a] cos(K.x) + T2[a] sin(K.x)
//! T1_hat[a](k) = ( (|K+k| + |K-k|)/2 - |K| )             a_hat(k)
//! T2_hat[a](k) = i ( (|K+k| - |K-k|)/2 - xi.k )          a_hat(k)
//! ```
//!
//! with `xi = K/|K|`. The decomposition is an identity of trigonometric
//! polynomials, so the two evaluation routes must agree to round-off for
//! every admissible envelope, not merely approximately.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::product::{modulated, Phase};
use num_complex::Complex64;

/// Integer carrier `K = lambda * xi` with `|xi| = 1`.
#[derive(Clone, Copy, Debug)]
pub struct Carrier {
    pub vec: (i64, i64),
    pub lambda: f64,
    pub xi: (f64, f64),
}

impl Carrier {
    pub fn new(vec: (i64, i64)) -> Result<Self> {
        if vec == (0, 0) {
            return Err(Error::Params("zero carrier".into()));
        }
        let lambda = ((vec.0 * vec.0 + vec.1 * vec.1) as f64).sqrt();
        Ok(Self { vec, lambda, xi: (vec.0 as f64 / lambda, vec.1 as f64 / lambda) })
    }

    /// `lambda * xi_1` demands carriers divisible by 5; reject rather than
    /// round.
    pub fn along_xi1(lambda: i64) -> Result<Self> {
        if lambda % 5 != 0 {
            return Err(Error::Params(format!(
                "carrier frequency {lambda} along (3/5, 4/5) must be a multiple of 5"
            )));
        }
        Self::new((3 * lambda / 5, 4 * lambda / 5))
    }

    pub fn along_xi2(lambda: i64) -> Result<Self> {
        Self::new((lambda, 0))
    }
}

/// Envelope band `r` within the operator-bound hypothesis `10 <= r <= lambda/2`?
pub fn hypothesis_ok(r: f64, lambda: f64) -> bool {
    10.0 <= r && r <= 0.5 * lambda
}

/// A modulated wave `a(x) cos(K.x)`: envelope plus carrier, with the
/// hypothesis flag recorded rather than enforced.
pub struct ModulatedWave {
    pub envelope: SpectralField,
    pub carrier: Carrier,
    pub in_hypothesis: bool,
}

impl ModulatedWave {
    pub fn new(envelope: SpectralField, carrier: Carrier) -> Self {
        let r = envelope
            .band_limit()
            .unwrap_or((envelope.n() / 2 - 1) as f64);
        let in_hypothesis = hypothesis_ok(r, carrier.lambda);
        Self { envelope, carrier, in_hypothesis }
    }

    pub fn to_field(&self) -> SpectralField {
        modulated(&self.envelope, self.carrier.vec, Phase::Cos)
    }
}

fn kmag(k: (f64, f64)) -> f64 {
    (k.0 * k.0 + k.1 * k.1).sqrt()
}

/// Even real symbol of `T1`: `(|K+k| + |K-k|)/2 - |K|`.
pub fn t1_symbol(carrier: Carrier, k: (i64, i64)) -> f64 {
    let (c1, c2) = (carrier.vec.0 as f64, carrier.vec.1 as f64);
    let plus = kmag((c1 + k.0 as f64, c2 + k.1 as f64));
    let minus = kmag((c1 - k.0 as f64, c2 - k.1 as f64));
    0.5 * (plus + minus) - carrier.lambda
}

/// Odd real part of the `T2` symbol: `(|K+k| - |K-k|)/2 - xi.k`; the
/// operator multiplies by `i` times this.
pub fn t2_symbol(carrier: Carrier, k: (i64, i64)) -> f64 {
    let (c1, c2) = (carrier.vec.0 as f64, carrier.vec.1 as f64);
    let plus = kmag((c1 + k.0 as f64, c2 + k.1 as f64));
    let minus = kmag((c1 - k.0 as f64, c2 - k.1 as f64));
    0.5 * (plus - minus) - (carrier.xi.0 * k.0 as f64 + carrier.xi.1 * k.1 as f64)
}

/// `T1[a]` on the envelope's grid.
pub fn t1(a: &SpectralField, carrier: Carrier) -> SpectralField {
    let mut out = a.clone();
    out.apply_symbol(
        move |k| Complex64::new(t1_symbol(carrier, k), 0.0),
        // T1 at k = 0 is lambda - lambda = 0 only through the generic
        // formula; keep the symbol's own value there.
        Complex64::new(t1_symbol(carrier, (0, 0)), 0.0),
    );
    out
}

/// `T2[a]` on the envelope's grid (purely imaginary odd symbol).
pub fn t2(a: &SpectralField, carrier: Carrier) -> SpectralField {
    let mut out = a.clone();
    out.apply_symbol(
        move |k| Complex64::new(0.0, t2_symbol(carrier, k)),
        Complex64::new(0.0, t2_symbol(carrier, (0, 0))),
    );
    out
}

/// `xi . grad a` on the envelope's grid.
pub fn dir_deriv(a: &SpectralField, xi: (f64, f64)) -> SpectralField {
    let mut out = a.clone();
    out.apply_symbol(
        move |k| Complex64::new(0.0, xi.0 * k.0 as f64 + xi.1 * k.1 as f64),
        Complex64::new(0.0, 0.0),
    );
    out
}

/// Both routes to `Lambda(a cos(K.x))` and their relative sup disagreement:
/// the direct multiplier on the product versus the four-term decomposition
/// `lambda g + (xi.grad a) sin + T1[a] cos + T2[a] sin`.
pub struct LeibnizCheck {
    pub direct: SpectralField,
    pub decomposed: SpectralField,
    pub rel_sup_error: f64,
}

pub fn lambda_modulated(a: &SpectralField, carrier: Carrier) -> Result<LeibnizCheck> {
    let g = modulated(a, carrier.vec, Phase::Cos);
    let mut direct = g.clone();
    crate::multiplier::lambda_pow(1.0).apply_spectral(&mut direct)?;

    let mut decomposed = modulated(a, carrier.vec, Phase::Cos);
    for c in decomposed.coeffs_mut() {
        *c *= carrier.lambda;
    }
    decomposed.add_scaled(&modulated(&dir_deriv(a, carrier.xi), carrier.vec, Phase::Sin), 1.0);
    decomposed.add_scaled(&modulated(&t1(a, carrier), carrier.vec, Phase::Cos), 1.0);
    decomposed.add_scaled(&modulated(&t2(a, carrier), carrier.vec, Phase::Sin), 1.0);

    let mut diff = direct.clone();
    diff.add_scaled(&decomposed, -1.0);
    let sup_direct = direct.to_samples()?.max_abs();
    let rel_sup_error = if sup_direct == 0.0 {
        0.0
    } else {
        diff.to_samples()?.max_abs() / sup_direct
    };
    Ok(LeibnizCheck { direct, decomposed, rel_sup_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::random_band_limited;
    use crate::field::{SpectralField, TorusField};

    #[test]
    fn t1_vanishes_on_constants() {
        let mut c = SpectralField::zeros(32, Some(0.0));
        c.set((0, 0), Complex64::new(3.0, 0.0));
        let carrier = Carrier::along_xi2(100).unwrap();
        let out = t1(&c, carrier);
        assert!(out.energy() < 1e-28);
    }

    #[test]
    fn t1_symbol_worked_example() {
        // lambda = 100, xi = (1,0), k = (3,4):
        // (sqrt(10625) + sqrt(9425))/2 - 100 = 0.080039917589754...
        let carrier = Carrier::along_xi2(100).unwrap();
        let v = t1_symbol(carrier, (3, 4));
        assert!((v - 0.08003991758975417).abs() < 1e-13, "got {v}");
        let a = TorusField::cosine((3, 4), 1.0).to_spectral();
        let out = t1(&a, carrier);
        assert!((out.at((3, 4)).re - 0.5 * v).abs() < 1e-12);
    }

    #[test]
    fn t2_symbol_worked_example() {
        // Same carrier: (sqrt(10625) - sqrt(9425))/2 - 3 = -0.00239927714824...
        let carrier = Carrier::along_xi2(100).unwrap();
        let v = t2_symbol(carrier, (3, 4));
        assert!((v - (-0.002399277148240424)).abs() < 1e-13, "got {v}");
    }

    #[test]
    fn t2_vanishes_on_collinear_frequencies() {
        // Modes parallel to xi with |k| < lambda: (|K+k| - |K-k|)/2 = xi.k.
        let carrier = Carrier::along_xi2(64).unwrap();
        for t in [1i64, 5, 20, 31] {
            assert!(t2_symbol(carrier, (t, 0)).abs() < 1e-12);
            assert!(t2_symbol(carrier, (-t, 0)).abs() < 1e-12);
        }
        let carrier = Carrier::along_xi1(25).unwrap();
        // k = m*(3,4)/5 integer requires m divisible by 5.
        assert!(t2_symbol(carrier, (3, 4)).abs() < 1e-12);
        assert!(t2_symbol(carrier, (6, 8)).abs() < 1e-12);
    }

    #[test]
    fn symbol_parity() {
        let carrier = Carrier::along_xi1(40).unwrap();
        for k in [(3i64, -2i64), (7, 1), (0, 5)] {
            assert!((t1_symbol(carrier, k) - t1_symbol(carrier, (-k.0, -k.1))).abs() < 1e-12);
            assert!((t2_symbol(carrier, k) + t2_symbol(carrier, (-k.0, -k.1))).abs() < 1e-12);
        }
    }

    #[test]
    fn leibniz_decomposition_is_exact() {
        // Constant envelope: Lambda cos(K.x) = lambda cos(K.x).
        let mut c = SpectralField::zeros(32, Some(0.0));
        c.set((0, 0), Complex64::new(1.0, 0.0));
        let carrier = Carrier::along_xi2(64).unwrap();
        let check = lambda_modulated(&c, carrier).unwrap();
        assert!(check.rel_sup_error < 1e-13);
        assert!((check.direct.at((64, 0)).re - 32.0).abs() < 1e-10);

        // Random envelopes, both directions, including the xi_1 carrier.
        for (seed, carrier) in [
            (1u64, Carrier::along_xi2(64).unwrap()),
            (2, Carrier::along_xi1(65).unwrap()),
            (3, Carrier::along_xi1(100).unwrap()),
        ] {
            let a = random_band_limited(12.0, seed);
            let check = lambda_modulated(&a, carrier).unwrap();
            assert!(
                check.rel_sup_error < 1e-12,
                "seed {seed}: rel err {}",
                check.rel_sup_error
            );
        }
    }

    #[test]
    fn carrier_integrality_enforced() {
        assert!(Carrier::along_xi1(12).is_err());
        assert!(Carrier::along_xi1(15).is_ok());
    }

    #[test]
    fn hypothesis_flagging() {
        assert!(hypothesis_ok(10.0, 64.0));
        assert!(!hypothesis_ok(9.0, 64.0));
        assert!(!hypothesis_ok(40.0, 64.0));
        let a = random_band_limited(40.0, 9);
        let w = ModulatedWave::new(a, Carrier::along_xi2(64).unwrap());
        assert!(!w.in_hypothesis);
    }
}
