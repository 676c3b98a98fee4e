use sqg_stationary::engine::{half_step, init_state, EngineCfg};
use sqg_stationary::schedule::ParamSchedule;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lambda0: i64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(12);
    let halves: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);
    let pi_mode = args.get(3).map(|s| {
        let p: Vec<i64> = s.split(',').map(|t| t.parse().unwrap()).collect();
        (p[0], p[1])
    }).unwrap_or((1, 0));
    let mu_mode = args.get(4).map(|s| {
        let p: Vec<i64> = s.split(',').map(|t| t.parse().unwrap()).collect();
        (p[0], p[1])
    }).unwrap_or((1, 1));
    let ratio: f64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(1.0);

    let params = ParamSchedule {
        lambda0, b: 1.2, beta: 0.3, alpha: 0.6, gamma: 1.0, nu: 0.0, c0: 2.0,
        stages: halves.div_ceil(2),
    };
    let mut cfg = EngineCfg::defaults(params);
    cfg.pi_mode = pi_mode;
    cfg.mu_mode = mu_mode;
    cfg.pi_amp = ratio;
    cfg.mu_amp = 1.0;
    let (mut state, init) = init_state(&cfg).unwrap();
    println!("lambda0={lambda0} modes pi={pi_mode:?} mu={mu_mode:?} ratio={ratio}");
    println!("n=0: |Gt|_X = {:.5}  (delta0 = {:.5}, |G|_X = {:.3e}, kappa = {})",
             init.gt_x, init.delta, init.g_x, init.kappa);
    let mut prev = init.gt_x;
    for _ in 0..halves {
        let t0 = Instant::now();
        let (next, rep) = half_step(state, &cfg).unwrap();
        println!(
            "n={}: |Gt|_X={:.5} ratio={:.3} (delta={:.4} d-ratio={:.3}) | D={:.4} N={:.4} R0={:.4} NO={:.4} JO={:.4} | M={:.3} rad={:.2} asm={:.1e} [{:?}]",
            rep.stage, rep.norms.gt_x, rep.norms.gt_x / prev, rep.delta,
            rep.delta / prev_delta(&cfg, rep.stage), rep.norms.gd_x, rep.norms.gn_x,
            rep.norms.gr0_x, rep.norms.jno_x, rep.norms.jo_x.iter().sum::<f64>(),
            rep.m_sup, rep.radicand_min, rep.assembly_rel_err, t0.elapsed()
        );
        prev = rep.norms.gt_x;
        state = next;
    }
}

fn prev_delta(cfg: &EngineCfg, stage: usize) -> f64 {
    cfg.params.delta(stage - 1)
}
