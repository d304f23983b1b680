//! Runs a bundled scenario and prints the mode timeline and the final leaf
//! state.
//!
//! ```sh
//! cargo run --example run_scenario -- confined_avoidance.json
//! ```

use sumbrella::scenario;
use sumbrella::sim;
use sumbrella::Config;

pub fn run_example(name: &str) -> anyhow::Result<()> {
    let sc = scenario::bundled(name).ok_or_else(|| anyhow::anyhow!("no bundled scenario `{name}`"))?;
    let out = sim::run(&sc, &Config::default())?;

    println!("{name}: {} ticks, {} frames on the wire", out.rows.len(), out.wire.len());
    for (tick, mode) in sim::mode_changes(&out.rows) {
        println!("  t = {:>6.2} s  {mode}", tick as f64 * sc.dt());
    }
    let last = out.rows.last().expect("nonempty run");
    for (i, leaf) in last.leaves.iter().enumerate() {
        println!(
            "  leaf {i}: {:5.1} kPa popped={:<5} winch={:6.1} curl={:.2} elev={:.2}",
            leaf.pressure_kpa, leaf.popped, leaf.winch_pos, leaf.curl_rad, leaf.elev_rad
        );
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "approach_and_retreat.json".into());
    run_example(&name)
}
