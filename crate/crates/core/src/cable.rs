//! Cable-drive subsystem: a devolved per-leaf winch state machine.
//!
//! Pull-up winds a leaf until the tendon torque crosses a threshold and
//! records that position as the leaf's travel. Release unwinds back to zero
//! using the recorded travel. Waving tracks a sine setpoint between the two
//! with a proportional law.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::CableConfig;
use crate::leaf::{LeafSet, PerLeaf, NUM_LEAVES};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveParams {
    /// Fraction of the recorded displacement per leaf, `[0, 1]`.
    pub amplitude: PerLeaf<f64>,
    pub frequency_hz: f64,
    /// Phase offset per leaf, radians.
    pub phase_rad: PerLeaf<f64>,
}

impl WaveParams {
    pub fn validate(&self, f_max: f64) -> Result<(), String> {
        if let Some(a) = self.amplitude.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(format!("amplitude {a} outside [0, 1]"));
        }
        if !(self.frequency_hz > 0.0 && self.frequency_hz <= f_max) {
            return Err(format!("frequency {} Hz outside (0, {f_max}]", self.frequency_hz));
        }
        if self.phase_rad.iter().any(|p| !p.is_finite()) {
            return Err("non-finite phase".to_string());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CableCommand {
    Hold(LeafSet),
    PullUp(LeafSet),
    Release(LeafSet),
    Wave { leaves: LeafSet, params: WaveParams },
}

impl CableCommand {
    pub fn leaves(&self) -> LeafSet {
        match *self {
            CableCommand::Hold(s) | CableCommand::PullUp(s) | CableCommand::Release(s) => s,
            CableCommand::Wave { leaves, .. } => leaves,
        }
    }
}

/// Per-leaf mode. Discriminants are the wire encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CableMode {
    #[default]
    Idle = 0,
    Winding = 1,
    Unwinding = 2,
    Waving = 3,
    Settled = 4,
}

impl CableMode {
    pub fn from_wire(v: u8) -> Option<CableMode> {
        Some(match v {
            0 => CableMode::Idle,
            1 => CableMode::Winding,
            2 => CableMode::Unwinding,
            3 => CableMode::Waving,
            4 => CableMode::Settled,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CableState {
    pub modes: PerLeaf<CableMode>,
    /// Winch odometry, ticks.
    pub position: PerLeaf<f64>,
    /// Travel recorded by the last successful pull-up.
    pub recorded: PerLeaf<Option<f64>>,
    pub wave_clock: f64,
    pub wave: Option<WaveParams>,
    /// Leaves homing before they start waving.
    pub pending_wave: LeafSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CableDiagnostic {
    ReleaseUnhomed { leaf: usize },
    InvalidWave(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CableTelemetry {
    pub modes: PerLeaf<CableMode>,
    pub position: PerLeaf<f64>,
    pub torque: PerLeaf<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CableOutput {
    pub state: CableState,
    /// Winch velocity commands, ticks/s.
    pub velocity: PerLeaf<f64>,
    pub diagnostics: Vec<CableDiagnostic>,
}

pub fn wave_setpoint(t: f64, params: &WaveParams, displacement: f64, leaf: usize) -> f64 {
    let half = displacement / 2.0;
    let phase = 2.0 * PI * params.frequency_hz * t + params.phase_rad[leaf];
    (half + half * params.amplitude[leaf] * phase.sin()).clamp(0.0, displacement)
}

pub fn track(setpoint: f64, position: f64, cfg: &CableConfig) -> f64 {
    (cfg.kp * (setpoint - position)).clamp(-cfg.v_max, cfg.v_max)
}

fn apply_command(state: &mut CableState, command: &CableCommand, cfg: &CableConfig, diags: &mut Vec<CableDiagnostic>) {
    match *command {
        CableCommand::Hold(leaves) => {
            for leaf in leaves.iter() {
                state.modes[leaf] =
                    if state.recorded[leaf].is_some() { CableMode::Settled } else { CableMode::Idle };
            }
            state.pending_wave = state.pending_wave.difference(leaves);
        }
        CableCommand::PullUp(leaves) => {
            for leaf in leaves.iter() {
                state.modes[leaf] = CableMode::Winding;
            }
            state.pending_wave = state.pending_wave.difference(leaves);
        }
        CableCommand::Release(leaves) => {
            for leaf in leaves.iter() {
                if state.recorded[leaf].is_some() {
                    state.modes[leaf] = CableMode::Unwinding;
                    state.pending_wave.remove(leaf);
                } else {
                    diags.push(CableDiagnostic::ReleaseUnhomed { leaf });
                }
            }
        }
        CableCommand::Wave { leaves, params } => {
            if let Err(reason) = params.validate(cfg.f_max) {
                diags.push(CableDiagnostic::InvalidWave(reason));
                return;
            }
            state.wave = Some(params);
            state.wave_clock = 0.0;
            for leaf in leaves.iter() {
                if state.recorded[leaf].is_some() {
                    state.modes[leaf] = CableMode::Waving;
                } else {
                    // Unhomed leaves home first, then join the wave.
                    state.modes[leaf] = CableMode::Winding;
                    state.pending_wave.insert(leaf);
                }
            }
        }
    }
}

/// One control tick of the cable drive. Commands received this tick are
/// applied in order before the leaves move.
pub fn cable_step(
    state: &CableState,
    commands: &[CableCommand],
    torque: &PerLeaf<f64>,
    dt: f64,
    cfg: &CableConfig,
) -> CableOutput {
    debug_assert!(dt > 0.0);
    let mut next = state.clone();
    let mut diagnostics = Vec::new();
    for cmd in commands {
        apply_command(&mut next, cmd, cfg, &mut diagnostics);
    }

    let mut velocity = [0.0; NUM_LEAVES];
    for leaf in 0..NUM_LEAVES {
        match next.modes[leaf] {
            CableMode::Winding => {
                if torque[leaf] >= cfg.torque_threshold {
                    next.recorded[leaf] = Some(next.position[leaf]);
                    next.modes[leaf] = if next.pending_wave.contains(leaf) {
                        next.pending_wave.remove(leaf);
                        CableMode::Waving
                    } else {
                        CableMode::Settled
                    };
                } else {
                    velocity[leaf] = cfg.wind_rate;
                    next.position[leaf] += cfg.wind_rate * dt;
                }
            }
            CableMode::Unwinding => {
                velocity[leaf] = -cfg.wind_rate;
                next.position[leaf] = (next.position[leaf] - cfg.wind_rate * dt).max(0.0);
                if next.position[leaf] == 0.0 {
                    next.modes[leaf] = CableMode::Settled;
                }
            }
            CableMode::Waving => {
                let (Some(params), Some(d)) = (next.wave, next.recorded[leaf]) else {
                    next.modes[leaf] = CableMode::Idle;
                    continue;
                };
                let sp = wave_setpoint(next.wave_clock, &params, d, leaf);
                let v = track(sp, next.position[leaf], cfg);
                velocity[leaf] = v;
                next.position[leaf] = (next.position[leaf] + v * dt).max(0.0);
            }
            CableMode::Idle | CableMode::Settled => {}
        }
    }
    if next.modes.contains(&CableMode::Waving) || !next.pending_wave.is_empty() {
        next.wave_clock += dt;
    }
    CableOutput { state: next, velocity, diagnostics }
}

impl CableState {
    pub fn telemetry(&self, torque: &PerLeaf<f64>) -> CableTelemetry {
        CableTelemetry { modes: self.modes, position: self.position, torque: *torque }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 0.02;

    fn cfg() -> CableConfig {
        CableConfig::default()
    }

    /// A plant that does nothing until the tendon goes taut at `stall`.
    fn stall_torque(x: f64, stall: f64) -> f64 {
        if x >= stall { 500.0 } else { 0.0 }
    }

    fn home(state: &mut CableState, leaves: LeafSet, stall: f64) {
        let mut cmd = Some(CableCommand::PullUp(leaves));
        for _ in 0..1000 {
            let torque = state.position.map(|x| stall_torque(x, stall));
            *state = cable_step(state, cmd.take().as_slice(), &torque, DT, &cfg()).state;
            if leaves.iter().all(|l| state.modes[l] == CableMode::Settled) {
                return;
            }
        }
        panic!("homing did not finish");
    }

    #[test]
    fn pull_up_records_stall_within_one_tick() {
        let mut s = CableState::default();
        home(&mut s, LeafSet::ALL, 1000.0);
        let travel = cfg().wind_rate * DT;
        for leaf in 0..3 {
            let d = s.recorded[leaf].unwrap();
            assert!((d - 1000.0).abs() <= travel, "{d}");
            assert_eq!(s.modes[leaf], CableMode::Settled);
        }
    }

    #[test]
    fn release_returns_to_zero() {
        let mut s = CableState::default();
        home(&mut s, LeafSet::ALL, 1000.0);
        let mut cmd = Some(CableCommand::Release(LeafSet::ALL));
        for _ in 0..200 {
            s = cable_step(&s, cmd.take().as_slice(), &[0.0; 3], DT, &cfg()).state;
        }
        assert_eq!(s.position, [0.0; 3]);
        assert_eq!(s.modes, [CableMode::Settled; 3]);
    }

    #[test]
    fn hold_freezes_position() {
        let mut s = CableState::default();
        s.position = [300.0, 10.0, 0.0];
        s.modes = [CableMode::Winding, CableMode::Unwinding, CableMode::Idle];
        s.recorded = [None, Some(500.0), None];
        let out = cable_step(&s, &[CableCommand::Hold(LeafSet::ALL)], &[999.0; 3], DT, &cfg());
        assert_eq!(out.state.position, s.position);
        assert_eq!(out.velocity, [0.0; 3]);
    }

    #[test]
    fn release_on_unhomed_leaf_is_rejected_per_leaf() {
        let mut s = CableState::default();
        home(&mut s, LeafSet::single(1), 800.0);
        let out = cable_step(&s, &[CableCommand::Release(LeafSet::ALL)], &[0.0; 3], DT, &cfg());
        assert_eq!(
            out.diagnostics,
            vec![CableDiagnostic::ReleaseUnhomed { leaf: 0 }, CableDiagnostic::ReleaseUnhomed { leaf: 2 }]
        );
        assert_eq!(out.state.modes[1], CableMode::Unwinding);
        assert_eq!(out.state.modes[0], CableMode::Idle);
    }

    #[test]
    fn commands_leave_other_leaves_untouched() {
        let mut s = CableState::default();
        home(&mut s, LeafSet::ALL, 640.0);
        let before = s.clone();
        let out = cable_step(&s, &[CableCommand::Release(LeafSet::single(2))], &[0.0; 3], DT, &cfg());
        for leaf in 0..2 {
            assert_eq!(out.state.modes[leaf], before.modes[leaf]);
            assert_eq!(out.state.position[leaf], before.position[leaf]);
            assert_eq!(out.state.recorded[leaf], before.recorded[leaf]);
        }
    }

    #[test]
    fn wave_setpoint_examples() {
        let p = WaveParams { amplitude: [1.0; 3], frequency_hz: 0.5, phase_rad: [0.0; 3] };
        assert_eq!(wave_setpoint(0.0, &p, 1000.0, 0), 500.0);
        // sin(2*pi*0.5*0.5) = sin(pi/2) = 1.
        assert!((wave_setpoint(0.5, &p, 1000.0, 0) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn track_examples() {
        let c = cfg();
        assert_eq!(track(400.0, 400.0, &c), 0.0);
        assert_eq!(track(1000.0, 0.0, &c), 2000.0);
        assert_eq!(track(0.0, 100.0, &c), -500.0);
    }

    #[test]
    fn wave_on_unhomed_leaf_homes_first() {
        let mut s = CableState::default();
        let params = WaveParams::default();
        let mut cmd = Some(CableCommand::Wave { leaves: LeafSet::ALL, params });
        let mut saw_waving = false;
        for _ in 0..400 {
            let torque = s.position.map(|x| stall_torque(x, 1000.0));
            s = cable_step(&s, cmd.take().as_slice(), &torque, DT, &cfg()).state;
            if s.modes == [CableMode::Waving; 3] {
                saw_waving = true;
            }
        }
        assert!(saw_waving);
        assert!(s.recorded.iter().all(|r| r.is_some()));
        assert!(s.pending_wave.is_empty());
    }

    #[test]
    fn invalid_wave_is_rejected() {
        let s = CableState::default();
        let params = WaveParams { frequency_hz: 5.0, ..WaveParams::default() };
        let out = cable_step(&s, &[CableCommand::Wave { leaves: LeafSet::ALL, params }], &[0.0; 3], DT, &cfg());
        assert!(matches!(out.diagnostics[..], [CableDiagnostic::InvalidWave(_)]));
        assert_eq!(out.state, s);
    }
}
