//! Pressure sweeps through the bistable modules and the soft versus stiff
//! leaf pose.

use sumbrella::config::PlantConfig;
use sumbrella::plant::{leaf_pose, pop_state, winch_torque};

fn sweep(cfg: &PlantConfig, peak: f64) -> Vec<(f64, bool)> {
    let up = (0..=100).map(|i| peak * i as f64 / 100.0);
    let down = (0..=100).rev().map(|i| peak * i as f64 / 100.0);
    let mut popped = false;
    let mut flips = Vec::new();
    for p in up.chain(down) {
        let next = pop_state(p, popped, cfg);
        if next != popped {
            flips.push((p, next));
        }
        popped = next;
    }
    flips
}

pub fn run_example() {
    let cfg = PlantConfig::default();
    println!("0 -> 25 -> 0 kPa: {:?}", sweep(&cfg, 25.0));
    println!("0 -> 12 -> 0 kPa: {:?}", sweep(&cfg, 12.0));

    println!("x_norm  curl(soft) curl(stiff)  elev(soft) elev(stiff)");
    for i in 0..=4 {
        let x = i as f64 / 4.0;
        let (s, h) = (leaf_pose(x, false, &cfg), leaf_pose(x, true, &cfg));
        println!("{x:6.2}  {:10.3} {:11.3}  {:10.3} {:11.3}", s.curl_rad, h.curl_rad, s.elevation_rad, h.elevation_rad);
    }

    for x in [0.0, 500.0, 950.0, 965.0, 975.0, 1000.0] {
        println!("torque at {x:6.1} ticks: {:6.1}", winch_torque(x, cfg.x_stall, &cfg));
    }
}

fn main() {
    run_example();
}
