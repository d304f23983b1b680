//! Step responses of one chamber under the pressure controller, with and
//! without integral action.

use sumbrella::step_response::pid_step_report;
use sumbrella::Config;

pub fn run_example() -> anyhow::Result<()> {
    let cfg = Config::default();
    println!("target  rise_s  overshoot%  settle_s  sse_kPa");
    for target in [5.0, 10.0, 25.0, 40.0] {
        let r = pid_step_report(target, &cfg)?;
        println!(
            "{:6.1}  {:6.2}  {:10.2}  {:8.2}  {:7.3}",
            target, r.rise_time_s, r.overshoot_pct, r.settling_time_s, r.steady_state_error_kpa
        );
    }

    let mut p_only = cfg.clone();
    p_only.pneumatics.ki = 0.0;
    let r = pid_step_report(25.0, &p_only)?;
    println!("P only at 25 kPa: final {:.3} kPa, error {:.3} kPa", r.final_kpa, r.steady_state_error_kpa);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
