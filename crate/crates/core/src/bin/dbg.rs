use sqg_stationary::engine::{init_state, EngineCfg};
use sqg_stationary::schedule::ParamSchedule;
fn main() {
    let params = ParamSchedule { lambda0: 12, b: 1.2, beta: 0.3, alpha: 0.6, gamma: 1.0, nu: 0.0, c0: 2.0, stages: 2 };
    let cfg = EngineCfg::defaults(params);
    match init_state(&cfg) {
        Ok((_, rep)) => println!("init ok gt_x={} kappa={}", rep.gt_x, rep.kappa),
        Err(e) => println!("init err: {e}"),
    }
}
