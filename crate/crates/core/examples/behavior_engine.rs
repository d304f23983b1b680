//! Steps the behavior engine by hand: a stable summary with one person, then
//! a crowd, then a held override. Telemetry is faked so every entry phase
//! confirms immediately.

use sumbrella::behavior::{self, apply_override, BehaviorState, ButtonEvent, OverrideLatch, Preset, SubsystemTelemetry};
use sumbrella::cable::CableMode;
use sumbrella::config::BehaviorConfig;
use sumbrella::perception::{PerceptionSummary, StablePerceptionSummary};
use sumbrella::LeafSet;

fn stable(persons: u32, sectors: LeafSet) -> StablePerceptionSummary {
    StablePerceptionSummary {
        summary: PerceptionSummary {
            persons_within: persons,
            min_person_distance: (persons > 0).then_some(1.2),
            obstacle_sectors: sectors,
            rejected: 0,
        },
        frames_stable: 5,
    }
}

pub fn run_example() {
    let cfg = BehaviorConfig::default();
    let mut tlm = SubsystemTelemetry::default();
    tlm.cable.modes = [CableMode::Settled; 3];

    let mut state = BehaviorState::settled_neutral();
    let mut latch = OverrideLatch::default();
    let inputs = [
        ("one person", Some(stable(1, LeafSet::EMPTY)), None),
        ("", None, None),
        ("crowd", Some(stable(3, LeafSet::EMPTY)), None),
        ("", None, None),
        ("obstacle behind-left", Some(stable(0, LeafSet::single(2))), None),
        ("", None, None),
        ("press waving", None, Some(ButtonEvent::Press(Preset::Waving))),
        ("", None, None),
        ("release", None, Some(ButtonEvent::Release)),
    ];
    for (label, summary, button) in inputs {
        if let Some(b) = button {
            latch = apply_override(latch, b);
        }
        let (next, cmds) = behavior::step(&state, latch, summary.as_ref(), &tlm, &cfg);
        state = next;
        // Pretend the pneumatics reached whatever was asked.
        for (leaf, t) in cmds.pneumatic_targets.iter().enumerate() {
            if let Some(t) = t {
                tlm.pneumatic.measured_kpa[leaf] = *t;
            }
        }
        println!(
            "{label:<22} mode={:<18} targets={:?} cable={:?}",
            state.mode.to_string(),
            cmds.pneumatic_targets,
            cmds.cable
        );
    }
}

fn main() {
    run_example();
}
