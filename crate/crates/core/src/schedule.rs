//! Parameter schedule of the iteration: double-exponential frequencies
//! `lambda_n = ceil(lambda0^(b^n))`, amplitudes `delta_n = lambda_n^(-beta)`,
//! intermediate cutoffs `r_{n+1} = sqrt(lambda_n lambda_{n+1})`, and the
//! admissibility window tying `b`, `beta`, `alpha`, `gamma` together.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ParamSchedule {
    pub lambda0: i64,
    pub b: f64,
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub nu: f64,
    pub c0: f64,
    /// Number of (A, B) half-step pairs to run.
    pub stages: usize,
}

impl ParamSchedule {
    /// `lambda_n = ceil(lambda0^(b^n))`.
    pub fn lambda(&self, n: usize) -> i64 {
        let exp = self.b.powi(n as i32);
        (self.lambda0 as f64).powf(exp).ceil() as i64
    }

    /// `delta_n = lambda_n^(-beta)`.
    pub fn delta(&self, n: usize) -> f64 {
        (self.lambda(n) as f64).powf(-self.beta)
    }

    /// Cutoff used by the half-step from n-1 to n: `sqrt(lambda_{n-1} lambda_n)`.
    pub fn r(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Params("r is defined from stage 1 on".into()));
        }
        Ok(((self.lambda(n - 1) * self.lambda(n)) as f64).sqrt())
    }

    pub fn half_steps(&self) -> usize {
        2 * self.stages
    }

    /// Largest half-step index whose stage-band `12 lambda_n` still fits a
    /// grid of the given cap (band must stay under Nyquist).
    pub fn max_feasible_half_step(&self, grid_cap: usize) -> usize {
        let max_band = (grid_cap / 2 - 1) as f64;
        let mut n = 0;
        while 12.0 * self.lambda(n + 1) as f64 <= max_band {
            n += 1;
            if n > 64 {
                break;
            }
        }
        n
    }

    /// Schedule triple for one half-step target index.
    pub fn triple(&self, n: usize) -> Result<(i64, f64, f64)> {
        Ok((self.lambda(n), self.delta(n), self.r(n)?))
    }
}

/// One inequality of the admissibility check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub satisfied: bool,
    /// Positive slack when satisfied, negative deficit when violated.
    pub margin: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamVerdict {
    pub valid: bool,
    pub window_low: f64,
    pub window_high: f64,
    pub checks: Vec<CheckLine>,
}

impl ParamVerdict {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<34} {}  margin {:+.6}  ({})\n",
                c.name,
                if c.satisfied { "ok " } else { "BAD" },
                c.margin,
                c.detail
            ));
        }
        out.push_str(&format!(
            "beta window: ({:.6}, {:.6}){}\n",
            self.window_low,
            self.window_high,
            if self.window_low >= self.window_high { "  -- empty window" } else { "" }
        ));
        out.push_str(if self.valid { "verdict: valid\n" } else { "verdict: invalid\n" });
        out
    }
}

/// Evaluate every admissibility inequality with its numeric slack.
pub fn validate_params(p: &ParamSchedule) -> ParamVerdict {
    let mut checks = Vec::new();
    let mut push = |name: &str, satisfied: bool, margin: f64, detail: String| {
        checks.push(CheckLine { name: name.into(), satisfied, margin, detail });
    };

    push(
        "lambda0 >= 8",
        p.lambda0 >= 8,
        (p.lambda0 - 8) as f64,
        format!("lambda0 = {}", p.lambda0),
    );
    push("b > 1", p.b > 1.0, p.b - 1.0, format!("b = {}", p.b));
    push(
        "0 < beta < 1/2",
        p.beta > 0.0 && p.beta < 0.5,
        p.beta.min(0.5 - p.beta),
        format!("beta = {}", p.beta),
    );
    push(
        "1/2 <= alpha < 3/4",
        (0.5..0.75).contains(&p.alpha),
        (p.alpha - 0.5).min(0.75 - p.alpha),
        format!("alpha = {}", p.alpha),
    );
    push(
        "0 < gamma < 2 - alpha",
        p.gamma > 0.0 && p.gamma < 2.0 - p.alpha,
        p.gamma.min(2.0 - p.alpha - p.gamma),
        format!("gamma = {}, 2 - alpha = {}", p.gamma, 2.0 - p.alpha),
    );
    push("nu >= 0", p.nu >= 0.0, p.nu, format!("nu = {}", p.nu));
    push("c0 >= 2", p.c0 >= 2.0, p.c0 - 2.0, format!("c0 = {}", p.c0));

    // The window (2 alpha - 1) b < beta < min{ (2b/(2b-1))(3/2 - gamma),
    //                                          (b^2 - 2 + 2 alpha)/(b (2b-1)) }.
    let low = (2.0 * p.alpha - 1.0) * p.b;
    let up1 = (2.0 * p.b / (2.0 * p.b - 1.0)) * (1.5 - p.gamma);
    let up2 = (p.b * p.b - 2.0 + 2.0 * p.alpha) / (p.b * (2.0 * p.b - 1.0));
    let high = up1.min(up2);
    push(
        "beta > (2 alpha - 1) b",
        p.beta > low,
        p.beta - low,
        format!("lower bound {low:.6}"),
    );
    push(
        "beta < window upper bound",
        p.beta < high,
        high - p.beta,
        format!("min({up1:.6}, {up2:.6}) = {high:.6}"),
    );
    push(
        "window non-empty",
        low < high,
        high - low,
        format!("({low:.6}, {high:.6})"),
    );

    // alpha < 1/2 + beta / (2b), the increment-regularity constraint.
    let alpha_cap = 0.5 + p.beta / (2.0 * p.b);
    push(
        "alpha < 1/2 + beta/(2b)",
        p.alpha < alpha_cap,
        alpha_cap - p.alpha,
        format!("cap {alpha_cap:.6}"),
    );

    let valid = checks.iter().all(|c| c.satisfied);
    ParamVerdict { valid, window_low: low, window_high: high, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule(lambda0: i64, b: f64, beta: f64, alpha: f64, gamma: f64) -> ParamSchedule {
        ParamSchedule { lambda0, b, beta, alpha, gamma, nu: 0.0, c0: 2.0, stages: 2 }
    }

    #[test]
    fn lambda_delta_r_worked_examples() {
        let p = schedule(12, 1.2, 0.4, 0.5, 1.0);
        assert_eq!(p.lambda(0), 12);
        assert_eq!(p.lambda(1), 20); // 12^1.2 = 19.73
        assert_eq!(p.lambda(2), 36); // 12^1.44 = 35.82
        assert!((p.delta(1) - 0.30171).abs() < 1e-4); // 20^-0.4
        assert!((p.r(2).unwrap() - 720.0f64.sqrt()).abs() < 1e-12); // sqrt(20*36) = 26.83
        assert!((p.r(2).unwrap() - 26.8328).abs() < 1e-3);
    }

    #[test]
    fn window_example_near_critical() {
        // alpha = 0.5, b = 1.01, beta = 0.01, gamma = 1: valid with upper
        // bound (1.01^2 - 1)/(1.01 * 1.02) = 0.0195...
        let v = validate_params(&schedule(12, 1.01, 0.01, 0.5, 1.0));
        assert!(v.valid, "{}", v.render());
        assert!(v.window_low.abs() < 1e-12);
        assert!((v.window_high - 0.019511).abs() < 1e-5, "{}", v.window_high);
    }

    #[test]
    fn window_example_reference() {
        // alpha = 0.6, b = 1.2, beta = 0.3, gamma = 1: 0.24 < 0.3 < 0.381.
        let v = validate_params(&schedule(12, 1.2, 0.3, 0.6, 1.0));
        assert!(v.valid, "{}", v.render());
        assert!((v.window_low - 0.24).abs() < 1e-12);
        assert!((v.window_high - 0.64 / 1.68).abs() < 1e-12);
    }

    #[test]
    fn window_empty_at_alpha_three_quarters() {
        // alpha = 0.75 with b near 1: the window (0.505, 0.50485) is empty,
        // matching the open bound alpha < 3/4.
        let v = validate_params(&schedule(12, 1.01, 0.2, 0.75, 1.0));
        assert!(!v.valid);
        assert!(v.window_low >= v.window_high, "{}", v.render());
        assert!((v.window_low - 0.505).abs() < 1e-12);
        assert!((v.window_high - 0.504851).abs() < 1e-5);
    }

    #[test]
    fn schedule_monotone() {
        let p = schedule(12, 1.2, 0.3, 0.6, 1.0);
        for n in 0..5 {
            assert!(p.lambda(n + 1) > p.lambda(n));
            assert!(p.delta(n + 1) < p.delta(n));
            if n >= 1 {
                let r = p.r(n).unwrap();
                assert!(r > p.lambda(n - 1) as f64 && r < p.lambda(n) as f64);
            }
        }
    }

    #[test]
    fn feasibility_cap() {
        let p = schedule(12, 1.2, 0.3, 0.6, 1.0);
        // 12 * lambda_4 = 2076 needs band <= cap/2 - 1.
        assert!(p.max_feasible_half_step(8192) >= 4);
        assert!(p.max_feasible_half_step(512) < 4);
    }
}
