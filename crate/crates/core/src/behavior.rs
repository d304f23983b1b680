//! Central behavior state machine.
//!
//! The engine picks a target mode from the latest stable perception summary,
//! or from the wearer's override latch when one is held, and walks the
//! mode's entry sequence: a short list of command phases for the pneumatic
//! and cable subsystems. A phase is issued once the previous one is
//! confirmed by telemetry, or once the phase timeout expires.
//!
//! [`step`] is a pure function of its arguments.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cable::{CableCommand, CableMode, CableTelemetry};
use crate::config::BehaviorConfig;
use crate::leaf::{LeafSet, PerLeaf, NUM_LEAVES};
use crate::perception::{PerceptionSummary, StablePerceptionSummary};
use crate::pneumatics::PneumaticTelemetry;

/// Shapes the wearer can lock in with the wired controller.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Welcoming,
    Withdrawal,
    Waving,
}

impl Preset {
    pub fn mode(self) -> Mode {
        match self {
            Preset::Welcoming => Mode::Welcoming,
            Preset::Withdrawal => Mode::Withdrawal,
            Preset::Waving => Mode::Waving,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Preset::Welcoming => "welcoming",
            Preset::Withdrawal => "withdrawal",
            Preset::Waving => "waving",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Released and inflated, the same posture as withdrawal.
    #[default]
    Neutral,
    Welcoming,
    Withdrawal,
    Waving,
    /// Leaves in the set are lifted out of the way; never empty.
    Avoidance(LeafSet),
    OverrideHeld(Preset),
}

impl Mode {
    /// The posture this mode drives the leaves into.
    pub fn posture(self) -> Mode {
        match self {
            Mode::OverrideHeld(p) => p.mode(),
            m => m,
        }
    }
}

/// `neutral`, `avoidance[0|2]`, `override[waving]`, ...
impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Neutral => f.write_str("neutral"),
            Mode::Welcoming => f.write_str("welcoming"),
            Mode::Withdrawal => f.write_str("withdrawal"),
            Mode::Waving => f.write_str("waving"),
            Mode::Avoidance(s) => write!(f, "avoidance[{s}]"),
            Mode::OverrideHeld(p) => write!(f, "override[{}]", p.as_str()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EntryPhase {
    #[default]
    PneumaticPhase,
    CablePhase,
    Settled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OverrideLatch {
    pub active: bool,
    /// Only meaningful while `active`.
    pub preset: Preset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ButtonEvent {
    Press(Preset),
    Release,
}

pub fn apply_override(latch: OverrideLatch, event: ButtonEvent) -> OverrideLatch {
    match event {
        ButtonEvent::Press(preset) => OverrideLatch { active: true, preset },
        ButtonEvent::Release => OverrideLatch { active: false, ..latch },
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Ordering {
    PneumaticFirst,
    CableFirst,
    #[default]
    Simultaneous,
}

/// Commands for one tick. `None` targets leave that leaf's setpoint alone.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommandSet {
    pub pneumatic_targets: PerLeaf<Option<f64>>,
    pub cable: Vec<CableCommand>,
    pub ordering: Ordering,
}

impl CommandSet {
    pub fn is_empty(&self) -> bool {
        self.pneumatic_targets.iter().all(Option::is_none) && self.cable.is_empty()
    }

    fn targets(leaves: LeafSet, kpa: f64, ordering: Ordering) -> CommandSet {
        CommandSet {
            pneumatic_targets: std::array::from_fn(|i| leaves.contains(i).then_some(kpa)),
            cable: Vec::new(),
            ordering,
        }
    }

    fn cable(cmds: Vec<CableCommand>, ordering: Ordering) -> CommandSet {
        CommandSet { pneumatic_targets: [None; NUM_LEAVES], cable: cmds, ordering }
    }

    fn phase_kind(&self) -> EntryPhase {
        if self.cable.is_empty() { EntryPhase::PneumaticPhase } else { EntryPhase::CablePhase }
    }
}

/// Ordered command phases that move the leaves into `mode`'s posture.
pub fn entry_sequence(mode: Mode, cfg: &BehaviorConfig) -> Vec<CommandSet> {
    use Ordering::*;
    match mode.posture() {
        Mode::Welcoming => vec![
            CommandSet::targets(LeafSet::ALL, 0.0, PneumaticFirst),
            CommandSet::cable(vec![CableCommand::PullUp(LeafSet::ALL)], PneumaticFirst),
        ],
        Mode::Neutral | Mode::Withdrawal => vec![
            CommandSet::cable(vec![CableCommand::Release(LeafSet::ALL)], CableFirst),
            CommandSet::targets(LeafSet::ALL, cfg.p_inflate_kpa, CableFirst),
        ],
        Mode::Waving => vec![
            CommandSet::targets(LeafSet::ALL, 0.0, PneumaticFirst),
            CommandSet::cable(vec![CableCommand::Wave { leaves: LeafSet::ALL, params: cfg.wave }], PneumaticFirst),
        ],
        Mode::Avoidance(lifted) => {
            let mut cable = vec![CableCommand::PullUp(lifted)];
            let others = lifted.complement();
            if !others.is_empty() {
                cable.push(CableCommand::Hold(others));
            }
            vec![CommandSet::targets(lifted, 0.0, PneumaticFirst), CommandSet::cable(cable, PneumaticFirst)]
        }
        Mode::OverrideHeld(_) => unreachable!("posture() never returns an override"),
    }
}

/// Latest telemetry from both subsystems, as decoded off the serial links.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SubsystemTelemetry {
    pub pneumatic: PneumaticTelemetry,
    pub cable: CableTelemetry,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DebounceCounters {
    /// Mode the latest stable summary asks for.
    pub candidate: Mode,
    /// Consecutive agreeing frames behind that summary.
    pub frames: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BehaviorState {
    pub mode: Mode,
    pub entry_phase: EntryPhase,
    /// Phases of the current entry sequence issued so far.
    pub issued: usize,
    /// Control ticks since the last phase was issued.
    pub phase_ticks: u32,
    /// Set when some phase of the current entry sequence was advanced by timeout.
    pub timed_out: bool,
    pub debounce: DebounceCounters,
}

impl BehaviorState {
    /// Neutral with its entry sequence still to be issued.
    pub fn boot() -> BehaviorState {
        BehaviorState::default()
    }

    /// Neutral with its entry sequence already complete.
    pub fn settled_neutral() -> BehaviorState {
        BehaviorState { entry_phase: EntryPhase::Settled, issued: 2, ..BehaviorState::default() }
    }
}

/// Mode chosen by perception alone. Obstacles take priority over people.
pub fn policy(summary: &PerceptionSummary, cfg: &BehaviorConfig) -> Mode {
    if !summary.obstacle_sectors.is_empty() {
        Mode::Avoidance(summary.obstacle_sectors)
    } else if summary.persons_within >= cfg.multi_person_threshold {
        Mode::Withdrawal
    } else if summary.persons_within == 1 {
        Mode::Welcoming
    } else {
        Mode::Neutral
    }
}

fn phase_confirmed(phase: &CommandSet, t: &SubsystemTelemetry, cfg: &BehaviorConfig) -> bool {
    let pressures_ok = phase
        .pneumatic_targets
        .iter()
        .zip(t.pneumatic.measured_kpa)
        .all(|(target, measured)| target.is_none_or(|p| (measured - p).abs() <= cfg.confirm_tolerance_kpa));
    let cable_ok = phase.cable.iter().all(|cmd| match *cmd {
        CableCommand::PullUp(s) => s.iter().all(|l| t.cable.modes[l] == CableMode::Settled),
        CableCommand::Release(s) => s.iter().all(|l| {
            t.cable.position[l] == 0.0 && matches!(t.cable.modes[l], CableMode::Settled | CableMode::Idle)
        }),
        CableCommand::Hold(_) | CableCommand::Wave { .. } => true,
    });
    pressures_ok && cable_ok
}

/// Advances the engine by one control tick.
///
/// `summary` is `Some` only on ticks where perception delivered a stable
/// summary; otherwise the perception-driven target is carried over.
pub fn step(
    state: &BehaviorState,
    latch: OverrideLatch,
    summary: Option<&StablePerceptionSummary>,
    telemetry: &SubsystemTelemetry,
    cfg: &BehaviorConfig,
) -> (BehaviorState, CommandSet) {
    let mut s = state.clone();

    if let Some(stable) = summary.filter(|st| st.frames_stable >= cfg.debounce_frames) {
        s.debounce = DebounceCounters { candidate: policy(&stable.summary, cfg), frames: stable.frames_stable };
    }
    let target = if latch.active { Mode::OverrideHeld(latch.preset) } else { s.debounce.candidate };
    if target != s.mode {
        s.mode = target;
        s.issued = 0;
        s.phase_ticks = 0;
        s.timed_out = false;
    }

    let sequence = entry_sequence(s.mode, cfg);
    let mut commands = CommandSet::default();
    if s.issued == 0 {
        commands = sequence[0].clone();
        s.issued = 1;
        s.phase_ticks = 0;
    } else if s.issued < sequence.len() {
        s.phase_ticks += 1;
        let timeout_ticks = (cfg.phase_timeout_s / cfg.control_dt_s).round() as u32;
        let confirmed = phase_confirmed(&sequence[s.issued - 1], telemetry, cfg);
        if confirmed || s.phase_ticks >= timeout_ticks {
            s.timed_out |= !confirmed;
            commands = sequence[s.issued].clone();
            s.issued += 1;
            s.phase_ticks = 0;
        }
    }
    s.entry_phase =
        if s.issued >= sequence.len() { EntryPhase::Settled } else { sequence[s.issued - 1].phase_kind() };
    (s, commands)
}
