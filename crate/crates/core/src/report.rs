//! Per-half-step reports and the decay table. The JSON layout is part of
//! the external interface: every numeric field must be present and finite,
//! which the serializer enforces (serde_json refuses non-finite floats).

use serde::{Deserialize, Serialize};

/// Norm breakdown of one half-step. The `J*` entries are the norms of the
/// contributions as they enter the stress update, i.e. including their
/// parity-dependent factor of +-2, so the triangle inequality
/// `Gt_X <= GD_X + GN_X + GR0_X + JNO_X + sum(JO_X)` holds as stated.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormBlock {
    pub gt_x: f64,
    pub gd_x: f64,
    pub gn_x: f64,
    pub gr0_x: f64,
    pub jno_x: f64,
    pub jo_x: [f64; 6],
    pub g_x: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckBlock {
    pub ok: bool,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InductiveBlock {
    pub iter1: CheckBlock,
    pub iter2: CheckBlock,
    pub iter3: CheckBlock,
    pub iter4: CheckBlock,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderBlock {
    pub pi_alpha: f64,
    pub mu_alpha: f64,
    pub g_2am1: f64,
}

/// Fractions of the new `delta` consumed per component, next to the
/// asymptotic budgets the estimates aim for (1/3, 1/3, 1/24, 1/24, 1/3).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BudgetBlock {
    pub gd: f64,
    pub gn: f64,
    pub gr0: f64,
    pub jno: f64,
    pub jo_total: f64,
}

/// One half-step report; `stage` is the index of the state the step
/// produced (1-based over half-steps), `parity` is "A" or "B".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub parity: String,
    pub lambda: i64,
    pub delta: f64,
    pub r: f64,
    pub norms: NormBlock,
    pub inductive: InductiveBlock,
    pub curl_discarded: f64,
    pub m_sup: f64,
    pub mu_sup: f64,
    pub holder: HolderBlock,
    pub budget: BudgetBlock,
    /// Constants `||G||_{C^s} / (lambda^s delta)` at s = beta, 1, 2.
    pub iter3_constants: [f64; 3],
    /// Relative disagreement of the direct and component-wise stress
    /// assemblies.
    pub assembly_rel_err: f64,
    /// Relative spectral energy discarded by the hard band projections.
    pub band_discarded: f64,
    /// Normalizer used in the amplitude radicand: max(delta_n, |Gt_n|_X).
    pub delta_normalizer: f64,
    /// Envelope cutoff inside the operator-bound hypothesis 10 <= r <= lambda_c/2.
    pub r_in_hypothesis: bool,
    /// Pointwise minimum of the amplitude radicand.
    pub radicand_min: f64,
}

/// Report written at initialization (stage 0): only the fields that exist
/// before any half-step has run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InitReport {
    pub stage: usize,
    pub lambda: i64,
    pub delta: f64,
    pub gt_x: f64,
    pub g_x: f64,
    pub mu_sup: f64,
    pub pi_amp: f64,
    pub mu_amp: f64,
    pub kappa: f64,
    /// Cancellation residuals of the calibration probe per candidate kappa.
    pub kappa_residuals: Vec<(f64, f64)>,
    pub iter2_margin: f64,
    pub iter4_margin: f64,
}

/// One row of the decay table.
#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub n: usize,
    pub lambda: i64,
    pub delta: f64,
    pub gt_x: f64,
    /// `||Gt_{n}||_X / ||Gt_{n-1}||_X`; 1.0 for the first row.
    pub ratio: f64,
    /// `delta_n / delta_{n-1}`; 1.0 for the first row.
    pub delta_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    pub strictly_decreasing: bool,
}

impl DecayTable {
    pub fn render(&self) -> String {
        let mut out = String::from(
            "  n   lambda      delta        |Gt|_X       ratio     delta-ratio\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:>3} {:>8} {:>12.6} {:>12.6e} {:>10.4} {:>12.4}\n",
                r.n, r.lambda, r.delta, r.gt_x, r.ratio, r.delta_ratio
            ));
        }
        out.push_str(&format!(
            "strictly decreasing: {}\n",
            if self.strictly_decreasing { "yes" } else { "no" }
        ));
        out
    }
}

/// Build the decay table from the initial stress norm and the per-step
/// reports.
pub fn decay_table(init_gt_x: f64, init_lambda: i64, init_delta: f64, reports: &[StageReport]) -> DecayTable {
    let mut rows = vec![DecayRow {
        n: 0,
        lambda: init_lambda,
        delta: init_delta,
        gt_x: init_gt_x,
        ratio: 1.0,
        delta_ratio: 1.0,
    }];
    let mut prev_gt = init_gt_x;
    let mut prev_delta = init_delta;
    for rep in reports {
        rows.push(DecayRow {
            n: rep.stage,
            lambda: rep.lambda,
            delta: rep.delta,
            gt_x: rep.norms.gt_x,
            ratio: if prev_gt > 0.0 { rep.norms.gt_x / prev_gt } else { f64::INFINITY },
            delta_ratio: rep.delta / prev_delta,
        });
        prev_gt = rep.norms.gt_x;
        prev_delta = rep.delta;
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].gt_x < w[0].gt_x);
    DecayTable { rows, strictly_decreasing }
}
