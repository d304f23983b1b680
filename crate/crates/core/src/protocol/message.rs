//! Message catalogue and payload layouts.
//!
//! Multi-byte integers inside payloads are little-endian. Physical values are
//! carried as scaled integers:
//!
//! | quantity        | wire unit          |
//! |-----------------|--------------------|
//! | pressure        | u16 deci-kPa       |
//! | wave amplitude  | u8, 0..255 -> 0..1 |
//! | wave frequency  | u16 centi-Hz       |
//! | wave phase      | u16 milli-radians  |
//! | pump duty       | u8, 0..255 -> 0..1 |
//! | winch position  | i32 ticks          |
//! | tendon torque   | u16 deci-units     |

use std::f64::consts::TAU;

use crate::cable::{CableCommand, CableMode, CableTelemetry, WaveParams};
use crate::leaf::{LeafSet, PerLeaf, NUM_LEAVES};
use crate::pneumatics::{PneumaticTelemetry, Route};

pub const CMD_CABLE_SET_MODE: u8 = 0x01;
pub const CMD_CABLE_WAVE_PARAMS: u8 = 0x02;
pub const CMD_PNEU_TARGETS: u8 = 0x03;
pub const TLM_CABLE_STATUS: u8 = 0x11;
pub const TLM_PNEU_STATUS: u8 = 0x12;
pub const HEARTBEAT: u8 = 0x20;
pub const ACK: u8 = 0x21;

/// Cable mode codes carried by `CmdCableSetMode`.
pub const MODE_HOLD: u8 = 0;
pub const MODE_PULL_UP: u8 = 1;
pub const MODE_RELEASE: u8 = 2;
pub const MODE_WAVE: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CableLeafStatus {
    pub mode: u8,
    pub position: i32,
    pub torque: u16,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PneuLeafStatus {
    pub pressure_deci_kpa: u16,
    pub route: u8,
    pub duty: u8,
}

/// A wire-level message. Fields hold the exact integers that go on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Message {
    CmdCableSetMode { leaf_mask: u8, mode: u8 },
    CmdCableWaveParams { amplitude: [u8; NUM_LEAVES], frequency_centi_hz: u16, phase_milli_rad: [u16; NUM_LEAVES] },
    TlmCableStatus { leaves: [CableLeafStatus; NUM_LEAVES] },
    CmdPneuTargets { targets_deci_kpa: [u16; NUM_LEAVES] },
    TlmPneuStatus { leaves: [PneuLeafStatus; NUM_LEAVES] },
    Heartbeat { seq: u16 },
    Ack { acked_type: u8, seq: u16 },
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum InvalidMessage {
    #[error("leaf mask {0:#04x} outside 1..=7")]
    LeafMask(u8),
    #[error("cable mode {0} outside 0..=3")]
    CableMode(u8),
    #[error("cable status mode {0} outside 0..=4")]
    CableStatusMode(u8),
    #[error("valve route {0} outside 0..=2")]
    Route(u8),
    #[error("{what} = {value} does not fit its wire field")]
    OutOfRange { what: &'static str, value: f64 },
}

impl Message {
    pub fn type_id(&self) -> u8 {
        match self {
            Message::CmdCableSetMode { .. } => CMD_CABLE_SET_MODE,
            Message::CmdCableWaveParams { .. } => CMD_CABLE_WAVE_PARAMS,
            Message::TlmCableStatus { .. } => TLM_CABLE_STATUS,
            Message::CmdPneuTargets { .. } => CMD_PNEU_TARGETS,
            Message::TlmPneuStatus { .. } => TLM_PNEU_STATUS,
            Message::Heartbeat { .. } => HEARTBEAT,
            Message::Ack { .. } => ACK,
        }
    }

    /// Payload length for a known type id.
    pub fn payload_len(type_id: u8) -> Option<usize> {
        Some(match type_id {
            CMD_CABLE_SET_MODE => 2,
            CMD_CABLE_WAVE_PARAMS => 3 + 2 + 6,
            TLM_CABLE_STATUS => 3 * 7,
            CMD_PNEU_TARGETS => 6,
            TLM_PNEU_STATUS => 3 * 4,
            HEARTBEAT => 2,
            ACK => 3,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), InvalidMessage> {
        match *self {
            Message::CmdCableSetMode { leaf_mask, mode } => {
                if !(1..=7).contains(&leaf_mask) {
                    return Err(InvalidMessage::LeafMask(leaf_mask));
                }
                if mode > MODE_WAVE {
                    return Err(InvalidMessage::CableMode(mode));
                }
            }
            Message::TlmCableStatus { leaves } => {
                if let Some(l) = leaves.iter().find(|l| CableMode::from_wire(l.mode).is_none()) {
                    return Err(InvalidMessage::CableStatusMode(l.mode));
                }
            }
            Message::TlmPneuStatus { leaves } => {
                if let Some(l) = leaves.iter().find(|l| Route::from_wire(l.route).is_none()) {
                    return Err(InvalidMessage::Route(l.route));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub(crate) fn write_payload(&self, out: &mut Vec<u8>) {
        match *self {
            Message::CmdCableSetMode { leaf_mask, mode } => out.extend([leaf_mask, mode]),
            Message::CmdCableWaveParams { amplitude, frequency_centi_hz, phase_milli_rad } => {
                out.extend(amplitude);
                out.extend(frequency_centi_hz.to_le_bytes());
                for p in phase_milli_rad {
                    out.extend(p.to_le_bytes());
                }
            }
            Message::TlmCableStatus { leaves } => {
                for l in leaves {
                    out.push(l.mode);
                    out.extend(l.position.to_le_bytes());
                    out.extend(l.torque.to_le_bytes());
                }
            }
            Message::CmdPneuTargets { targets_deci_kpa } => {
                for t in targets_deci_kpa {
                    out.extend(t.to_le_bytes());
                }
            }
            Message::TlmPneuStatus { leaves } => {
                for l in leaves {
                    out.extend(l.pressure_deci_kpa.to_le_bytes());
                    out.push(l.route);
                    out.push(l.duty);
                }
            }
            Message::Heartbeat { seq } => out.extend(seq.to_le_bytes()),
            Message::Ack { acked_type, seq } => {
                out.push(acked_type);
                out.extend(seq.to_le_bytes());
            }
        }
    }

    /// Parses a payload whose length has already been checked against
    /// [`Message::payload_len`].
    pub(crate) fn read_payload(type_id: u8, p: &[u8]) -> Option<Message> {
        let u16_at = |i: usize| u16::from_le_bytes([p[i], p[i + 1]]);
        let msg = match type_id {
            CMD_CABLE_SET_MODE => Message::CmdCableSetMode { leaf_mask: p[0], mode: p[1] },
            CMD_CABLE_WAVE_PARAMS => Message::CmdCableWaveParams {
                amplitude: [p[0], p[1], p[2]],
                frequency_centi_hz: u16_at(3),
                phase_milli_rad: [u16_at(5), u16_at(7), u16_at(9)],
            },
            TLM_CABLE_STATUS => Message::TlmCableStatus {
                leaves: std::array::from_fn(|i| {
                    let b = &p[i * 7..];
                    CableLeafStatus {
                        mode: b[0],
                        position: i32::from_le_bytes([b[1], b[2], b[3], b[4]]),
                        torque: u16::from_le_bytes([b[5], b[6]]),
                    }
                }),
            },
            CMD_PNEU_TARGETS => Message::CmdPneuTargets { targets_deci_kpa: [u16_at(0), u16_at(2), u16_at(4)] },
            TLM_PNEU_STATUS => Message::TlmPneuStatus {
                leaves: std::array::from_fn(|i| PneuLeafStatus {
                    pressure_deci_kpa: u16_at(i * 4),
                    route: p[i * 4 + 2],
                    duty: p[i * 4 + 3],
                }),
            },
            HEARTBEAT => Message::Heartbeat { seq: u16_at(0) },
            ACK => Message::Ack { acked_type: p[0], seq: u16_at(1) },
            _ => return None,
        };
        Some(msg)
    }
}

fn scale_u16(what: &'static str, value: f64, scale: f64) -> Result<u16, InvalidMessage> {
    let raw = (value * scale).round();
    if raw.is_finite() && (0.0..=u16::MAX as f64).contains(&raw) {
        Ok(raw as u16)
    } else {
        Err(InvalidMessage::OutOfRange { what, value })
    }
}

fn unit_to_u8(what: &'static str, value: f64) -> Result<u8, InvalidMessage> {
    if (0.0..=1.0).contains(&value) {
        Ok((value * 255.0).round() as u8)
    } else {
        Err(InvalidMessage::OutOfRange { what, value })
    }
}

/// Conversions between subsystem types and wire messages.
impl Message {
    pub fn pneu_targets(targets_kpa: &PerLeaf<f64>) -> Result<Message, InvalidMessage> {
        let mut t = [0u16; NUM_LEAVES];
        for (slot, &kpa) in t.iter_mut().zip(targets_kpa) {
            *slot = scale_u16("target kPa", kpa, 10.0)?;
        }
        Ok(Message::CmdPneuTargets { targets_deci_kpa: t })
    }

    pub fn wave_params(params: &WaveParams) -> Result<Message, InvalidMessage> {
        let mut amplitude = [0u8; NUM_LEAVES];
        let mut phase = [0u16; NUM_LEAVES];
        for leaf in 0..NUM_LEAVES {
            amplitude[leaf] = unit_to_u8("amplitude", params.amplitude[leaf])?;
            phase[leaf] = scale_u16("phase rad", params.phase_rad[leaf].rem_euclid(TAU), 1000.0)?;
        }
        Ok(Message::CmdCableWaveParams {
            amplitude,
            frequency_centi_hz: scale_u16("frequency Hz", params.frequency_hz, 100.0)?,
            phase_milli_rad: phase,
        })
    }

    /// Frames needed to carry a cable command. Wave sends its parameters first.
    pub fn cable_command(cmd: &CableCommand) -> Result<Vec<Message>, InvalidMessage> {
        let leaf_mask = cmd.leaves().mask();
        let set = |mode| Message::CmdCableSetMode { leaf_mask, mode };
        let msgs = match cmd {
            CableCommand::Hold(_) => vec![set(MODE_HOLD)],
            CableCommand::PullUp(_) => vec![set(MODE_PULL_UP)],
            CableCommand::Release(_) => vec![set(MODE_RELEASE)],
            CableCommand::Wave { params, .. } => vec![Message::wave_params(params)?, set(MODE_WAVE)],
        };
        for m in &msgs {
            m.validate()?;
        }
        Ok(msgs)
    }

    pub fn cable_status(t: &CableTelemetry) -> Message {
        Message::TlmCableStatus {
            leaves: std::array::from_fn(|i| CableLeafStatus {
                mode: t.modes[i] as u8,
                position: t.position[i].round().clamp(i32::MIN as f64, i32::MAX as f64) as i32,
                torque: (t.torque[i] * 10.0).round().clamp(0.0, u16::MAX as f64) as u16,
            }),
        }
    }

    pub fn pneu_status(t: &PneumaticTelemetry) -> Message {
        Message::TlmPneuStatus {
            leaves: std::array::from_fn(|i| PneuLeafStatus {
                pressure_deci_kpa: (t.measured_kpa[i] * 10.0).round().clamp(0.0, u16::MAX as f64) as u16,
                route: t.routes[i] as u8,
                duty: (t.pump_duty[i].clamp(0.0, 1.0) * 255.0).round() as u8,
            }),
        }
    }
}

/// Decodes a wave parameter message back into physical units.
pub fn wave_params_from_wire(amplitude: [u8; NUM_LEAVES], frequency_centi_hz: u16, phase_milli_rad: [u16; NUM_LEAVES]) -> WaveParams {
    WaveParams {
        amplitude: amplitude.map(|a| a as f64 / 255.0),
        frequency_hz: frequency_centi_hz as f64 / 100.0,
        phase_rad: phase_milli_rad.map(|p| p as f64 / 1000.0),
    }
}

/// Converts a set-mode message into a cable command, using `wave` for mode 3.
pub fn cable_command_from_wire(leaf_mask: u8, mode: u8, wave: WaveParams) -> Option<CableCommand> {
    let leaves = LeafSet::from_mask(leaf_mask).filter(|s| !s.is_empty())?;
    Some(match mode {
        MODE_HOLD => CableCommand::Hold(leaves),
        MODE_PULL_UP => CableCommand::PullUp(leaves),
        MODE_RELEASE => CableCommand::Release(leaves),
        MODE_WAVE => CableCommand::Wave { leaves, params: wave },
        _ => return None,
    })
}

pub fn cable_telemetry_from_wire(leaves: &[CableLeafStatus; NUM_LEAVES]) -> CableTelemetry {
    CableTelemetry {
        modes: leaves.map(|l| CableMode::from_wire(l.mode).unwrap_or_default()),
        position: leaves.map(|l| l.position as f64),
        torque: leaves.map(|l| l.torque as f64 / 10.0),
    }
}

pub fn pneu_telemetry_from_wire(leaves: &[PneuLeafStatus; NUM_LEAVES]) -> PneumaticTelemetry {
    let pump_duty = leaves.map(|l| l.duty as f64 / 255.0);
    let routes = leaves.map(|l| Route::from_wire(l.route).unwrap_or_default());
    PneumaticTelemetry {
        measured_kpa: leaves.map(|l| l.pressure_deci_kpa as f64 / 10.0),
        routes,
        pump_duty,
        exhaust_duty: if routes.contains(&Route::Exhaust) { 1.0 } else { 0.0 },
        target_clamped: [false; NUM_LEAVES],
    }
}
