//! Drives the cable controller against the winch model: pull-up homing,
//! release back to zero, then a wave.

use sumbrella::cable::{cable_step, CableCommand, CableMode, CableState, WaveParams};
use sumbrella::config::{CableConfig, PlantConfig};
use sumbrella::plant::winch_step;
use sumbrella::LeafSet;

const DT: f64 = 0.02;

pub fn run_example() {
    let cable_cfg = CableConfig::default();
    let plant_cfg = PlantConfig::default();
    let stall = [1000.0, 900.0, 1100.0];
    let mut winch = [0.0; 3];
    let mut torque = [0.0; 3];
    let mut state = CableState::default();

    let mut drive = |state: &mut CableState, cmd: Option<CableCommand>, ticks: usize| {
        for k in 0..ticks {
            let cmds = if k == 0 { cmd.clone().into_iter().collect() } else { Vec::new() };
            let out = cable_step(state, &cmds, &torque, DT, &cable_cfg);
            *state = out.state;
            for leaf in 0..3 {
                (winch[leaf], torque[leaf]) = winch_step(winch[leaf], out.velocity[leaf], stall[leaf], DT, &plant_cfg);
            }
        }
        winch
    };

    drive(&mut state, Some(CableCommand::PullUp(LeafSet::ALL)), 120);
    println!("homed: modes={:?} recorded={:?}", state.modes, state.recorded);

    let after = drive(&mut state, Some(CableCommand::Release(LeafSet::ALL)), 120);
    println!("released: winch={after:?} settled={}", state.modes.iter().all(|m| *m == CableMode::Settled));

    let wave = WaveParams::default();
    drive(&mut state, Some(CableCommand::Wave { leaves: LeafSet::ALL, params: wave }), 1);
    for _ in 0..8 {
        let w = drive(&mut state, None, 25);
        println!("t={:4.2}s winch={:?}", state.wave_clock, w.map(|x| x.round()));
    }
}

fn main() {
    run_example();
}
