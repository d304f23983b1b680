//! The deterministic run loop.
//!
//! Each tick, in order: scene events, perception, behavior engine, command
//! links, subsystem controllers, plant, telemetry links, trace row. Every
//! command and telemetry message crosses an in-memory serial link as framed
//! bytes; [`RunOptions::bypass_codec`] hands the messages across directly
//! instead, which must not change the trace.
//!
//! A stable perception summary produced on tick `k` reaches the behavior
//! engine on tick `k + 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::behavior::{self, apply_override, BehaviorState, ButtonEvent, OverrideLatch, SubsystemTelemetry};
use crate::cable::{cable_step, CableCommand, CableDiagnostic, CableState, WaveParams};
use crate::config::{Config, ConfigError};
use crate::leaf::{PerLeaf, NUM_LEAVES};
use crate::perception::{summarize, Debouncer, Detection, PerceptionSummary, StablePerceptionSummary, TimedFrame};
use crate::plant::{Plant, PlantFault, PlantInputs};
use crate::pneumatics::{pneu_step, PneumaticState};
use crate::protocol::{
    cable_command_from_wire, cable_telemetry_from_wire, encode, pneu_telemetry_from_wire, wave_params_from_wire,
    DecodeError, Decoder, Message,
};
use crate::scenario::{EventKind, Meta, Scenario};
use crate::trace::{LeafRow, TraceRow};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Skip the byte encoding on every link. Messages are still built and
    /// validated, so only the framing is bypassed.
    pub bypass_codec: bool,
    /// Replaces the scenario's seed.
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Link {
    ToCable,
    ToPneumatics,
    FromCable,
    FromPneumatics,
}

/// One message as it crossed a link. `bytes` is empty when bypassing.
#[derive(Clone, Debug, PartialEq)]
pub struct WireRecord {
    pub tick: u64,
    pub link: Link,
    pub message: Message,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunDiagnostics {
    pub cable: Vec<(u64, CableDiagnostic)>,
    pub decode_errors: Vec<(Link, DecodeError)>,
    /// Commands that could not be put on the wire, with the reason.
    pub refused: Vec<(u64, String)>,
    pub acks: u64,
    pub rejected_detections: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<TraceRow>,
    pub wire: Vec<WireRecord>,
    pub diagnostics: RunDiagnostics,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Carries the rows emitted before the fault.
    #[error("simulation aborted: {fault}")]
    Fault { fault: PlantFault, rows: Vec<TraceRow> },
}

pub fn run(scenario: &Scenario, config: &Config) -> Result<RunOutput, RunError> {
    run_with(scenario, config, RunOptions::default())
}

pub fn run_with(scenario: &Scenario, config: &Config, opts: RunOptions) -> Result<RunOutput, RunError> {
    Sim::new(scenario, config, opts)?.run(Feed::Synthetic)
}

/// Runs `duration_s` of recorded detections in place of the synthetic scene.
pub fn replay(frames: &[TimedFrame], duration_s: f64, config: &Config, opts: RunOptions) -> Result<RunOutput, RunError> {
    let scenario = Scenario {
        meta: Meta { tick_hz: 50, perception_hz: 10, duration_s, seed: 0 },
        events: Vec::new(),
        config_overrides: Default::default(),
    };
    Sim::new(&scenario, config, opts)?.run(Feed::Replay(frames))
}

/// `(tick, mode)` for the first row and every row where the mode changes.
pub fn mode_changes(rows: &[TraceRow]) -> Vec<(u64, &str)> {
    let mut out: Vec<(u64, &str)> = Vec::new();
    for r in rows {
        if out.last().is_none_or(|(_, m)| *m != r.fsm_mode) {
            out.push((r.tick, &r.fsm_mode));
        }
    }
    out
}

enum Feed<'a> {
    Synthetic,
    Replay(&'a [TimedFrame]),
}

struct Entity {
    id: String,
    detection: Detection,
}

struct Channel {
    link: Link,
    decoder: Decoder,
}

impl Channel {
    fn new(link: Link) -> Channel {
        Channel { link, decoder: Decoder::new() }
    }

    fn carry(&mut self, tick: u64, messages: Vec<Message>, bypass: bool, out: &mut RunOutput) -> Vec<Message> {
        let mut delivered = Vec::with_capacity(messages.len());
        for m in messages {
            if let Err(e) = m.validate() {
                out.diagnostics.refused.push((tick, e.to_string()));
                continue;
            }
            if bypass {
                out.wire.push(WireRecord { tick, link: self.link, message: m, bytes: Vec::new() });
                delivered.push(m);
                continue;
            }
            let bytes = encode(&m).expect("validated message encodes");
            let decoded = self.decoder.feed(&bytes);
            out.diagnostics.decode_errors.extend(decoded.errors.into_iter().map(|e| (self.link, e)));
            delivered.extend(decoded.messages);
            out.wire.push(WireRecord { tick, link: self.link, message: m, bytes });
        }
        delivered
    }
}

struct Sim<'s> {
    scenario: &'s Scenario,
    cfg: Config,
    opts: RunOptions,
    dt: f64,
    rng: ChaCha8Rng,

    scene: Vec<Entity>,
    latch: OverrideLatch,
    debouncer: Debouncer,
    last_summary: PerceptionSummary,
    pending_stable: Option<StablePerceptionSummary>,
    behavior: BehaviorState,
    telemetry: SubsystemTelemetry,
    central_targets: PerLeaf<f64>,

    pneu_targets: PerLeaf<f64>,
    pneu: PneumaticState,
    pump_duty: PerLeaf<f64>,
    cable: CableState,
    wave: WaveParams,
    plant: Plant,

    to_cable: Channel,
    to_pneu: Channel,
    from_cable: Channel,
    from_pneu: Channel,
    seq: u16,
}

impl<'s> Sim<'s> {
    fn new(scenario: &'s Scenario, base: &Config, opts: RunOptions) -> Result<Sim<'s>, RunError> {
        let mut cfg = scenario.config(base)?;
        let dt = scenario.dt();
        cfg.behavior.control_dt_s = dt;
        let seed = opts.seed.unwrap_or(scenario.meta.seed);
        Ok(Sim {
            scenario,
            opts,
            dt,
            rng: ChaCha8Rng::seed_from_u64(seed),
            scene: Vec::new(),
            latch: OverrideLatch::default(),
            debouncer: Debouncer::new(cfg.behavior.debounce_frames),
            last_summary: PerceptionSummary::default(),
            pending_stable: None,
            behavior: BehaviorState::boot(),
            telemetry: SubsystemTelemetry::default(),
            central_targets: [0.0; NUM_LEAVES],
            pneu_targets: [0.0; NUM_LEAVES],
            pneu: PneumaticState::default(),
            pump_duty: [0.0; NUM_LEAVES],
            cable: CableState::default(),
            wave: WaveParams::default(),
            plant: Plant::new(&cfg.plant, seed),
            to_cable: Channel::new(Link::ToCable),
            to_pneu: Channel::new(Link::ToPneumatics),
            from_cable: Channel::new(Link::FromCable),
            from_pneu: Channel::new(Link::FromPneumatics),
            seq: 0,
            cfg,
        })
    }

    fn run(mut self, feed: Feed<'_>) -> Result<RunOutput, RunError> {
        let ticks = self.scenario.ticks();
        let mut out = RunOutput {
            rows: Vec::with_capacity(ticks as usize),
            wire: Vec::new(),
            diagnostics: RunDiagnostics::default(),
        };
        let mut next_event = 0;
        let mut next_frame = 0;
        for tick in 0..ticks {
            let events = &self.scenario.events;
            while next_event < events.len() && self.scenario.tick_of(events[next_event].t) <= tick {
                self.apply_event(&events[next_event].kind);
                next_event += 1;
            }

            let delivered = self.pending_stable.take();
            match feed {
                Feed::Synthetic => {
                    if tick % self.scenario.perception_period() == 0 {
                        let frame = self.synthesize_frame();
                        self.perceive(&frame, &mut out);
                    }
                }
                Feed::Replay(frames) => {
                    while next_frame < frames.len() && self.scenario.tick_of(frames[next_frame].t) <= tick {
                        self.perceive(&frames[next_frame].detections, &mut out);
                        next_frame += 1;
                    }
                }
            }

            let (state, commands) =
                behavior::step(&self.behavior, self.latch, delivered.as_ref(), &self.telemetry, &self.cfg.behavior);
            self.behavior = state;

            let mut to_pneu = Vec::new();
            if commands.pneumatic_targets.iter().any(Option::is_some) {
                for (slot, t) in self.central_targets.iter_mut().zip(commands.pneumatic_targets) {
                    if let Some(t) = t {
                        *slot = t;
                    }
                }
                match Message::pneu_targets(&self.central_targets) {
                    Ok(m) => to_pneu.push(m),
                    Err(e) => out.diagnostics.refused.push((tick, e.to_string())),
                }
            }
            let mut to_cable = Vec::new();
            for cmd in &commands.cable {
                match Message::cable_command(cmd) {
                    Ok(ms) => to_cable.extend(ms),
                    Err(e) => out.diagnostics.refused.push((tick, e.to_string())),
                }
            }
            if tick % self.scenario.meta.tick_hz as u64 == 0 {
                to_pneu.push(Message::Heartbeat { seq: self.seq });
                to_cable.push(Message::Heartbeat { seq: self.seq });
                self.seq = self.seq.wrapping_add(1);
            }

            let bypass = self.opts.bypass_codec;
            let at_pneu = self.to_pneu.carry(tick, to_pneu, bypass, &mut out);
            let at_cable = self.to_cable.carry(tick, to_cable, bypass, &mut out);
            let (pneu_replies, cable_commands, cable_replies) = self.receive(&at_pneu, &at_cable);

            let pneu = pneu_step(&self.pneu, &self.pneu_targets, &self.plant.pressure_kpa, self.dt, &self.cfg.pneumatics);
            self.pneu = pneu.state;
            self.pump_duty = pneu.pump_duty;
            let cable = cable_step(&self.cable, &cable_commands, &self.plant.torque, self.dt, &self.cfg.cable);
            self.cable = cable.state;
            out.diagnostics.cable.extend(cable.diagnostics.into_iter().map(|d| (tick, d)));

            let inputs = PlantInputs {
                routes: pneu.routes,
                pump_duty: pneu.pump_duty,
                exhaust_duty: pneu.exhaust_duty,
                winch_velocity: cable.velocity,
            };
            if let Err(fault) = self.plant.step(&inputs, self.dt, &self.cfg.plant) {
                return Err(RunError::Fault { fault, rows: out.rows });
            }

            let mut pneu_tlm = pneu.telemetry;
            pneu_tlm.measured_kpa = self.plant.pressure_kpa;
            let mut from_pneu = pneu_replies;
            from_pneu.push(Message::pneu_status(&pneu_tlm));
            let mut from_cable = cable_replies;
            from_cable.push(Message::cable_status(&self.cable.telemetry(&self.plant.torque)));
            for m in self.from_pneu.carry(tick, from_pneu, bypass, &mut out) {
                self.central_receive(m, &mut out);
            }
            for m in self.from_cable.carry(tick, from_cable, bypass, &mut out) {
                self.central_receive(m, &mut out);
            }

            out.rows.push(self.row(tick));
        }
        Ok(out)
    }

    fn apply_event(&mut self, kind: &EventKind) {
        let confidence = self.cfg.perception.synthetic_confidence;
        match kind {
            EventKind::SpawnPerson { id, dist_m, bearing_rad } => self.scene.push(Entity {
                id: id.clone(),
                detection: Detection::person(*dist_m, *bearing_rad, confidence),
            }),
            EventKind::SpawnObstacle { id, dist_m, bearing_rad } => self.scene.push(Entity {
                id: id.clone(),
                detection: Detection::object(*dist_m, *bearing_rad, confidence),
            }),
            EventKind::MovePerson { id, dist_m, bearing_rad } => {
                if let Some(e) = self.scene.iter_mut().find(|e| &e.id == id) {
                    e.detection.distance_m = *dist_m;
                    e.detection.bearing_rad = *bearing_rad;
                }
            }
            EventKind::RemovePerson { id } | EventKind::RemoveObstacle { id } => self.scene.retain(|e| &e.id != id),
            EventKind::PressOverride { preset } => self.latch = apply_override(self.latch, ButtonEvent::Press(*preset)),
            EventKind::ReleaseOverride => self.latch = apply_override(self.latch, ButtonEvent::Release),
        }
    }

    fn synthesize_frame(&mut self) -> Vec<Detection> {
        let dropout = self.cfg.perception.synthetic_dropout;
        let mut frame = Vec::with_capacity(self.scene.len());
        for e in &self.scene {
            let roll: f64 = self.rng.gen();
            if roll >= dropout {
                frame.push(e.detection);
            }
        }
        frame
    }

    fn perceive(&mut self, frame: &[Detection], out: &mut RunOutput) {
        let summary = summarize(frame, &self.cfg.perception);
        out.diagnostics.rejected_detections += summary.rejected as u64;
        self.last_summary = summary;
        if let Some(stable) = self.debouncer.push(summary) {
            self.pending_stable = Some(stable);
        }
    }

    /// Subsystem side of the command links. Returns the pneumatic replies,
    /// the decoded cable commands and the cable replies.
    fn receive(&mut self, at_pneu: &[Message], at_cable: &[Message]) -> (Vec<Message>, Vec<CableCommand>, Vec<Message>) {
        let mut pneu_replies = Vec::new();
        for m in at_pneu {
            if let Message::CmdPneuTargets { targets_deci_kpa } = m {
                self.pneu_targets = targets_deci_kpa.map(|t| t as f64 / 10.0);
            }
            pneu_replies.push(ack(m));
        }
        let mut commands = Vec::new();
        let mut cable_replies = Vec::new();
        for m in at_cable {
            match *m {
                Message::CmdCableWaveParams { amplitude, frequency_centi_hz, phase_milli_rad } => {
                    self.wave = wave_params_from_wire(amplitude, frequency_centi_hz, phase_milli_rad);
                }
                Message::CmdCableSetMode { leaf_mask, mode } => {
                    commands.extend(cable_command_from_wire(leaf_mask, mode, self.wave));
                }
                _ => {}
            }
            cable_replies.push(ack(m));
        }
        (pneu_replies, commands, cable_replies)
    }

    fn central_receive(&mut self, m: Message, out: &mut RunOutput) {
        match m {
            Message::TlmPneuStatus { leaves } => self.telemetry.pneumatic = pneu_telemetry_from_wire(&leaves),
            Message::TlmCableStatus { leaves } => self.telemetry.cable = cable_telemetry_from_wire(&leaves),
            Message::Ack { .. } => out.diagnostics.acks += 1,
            _ => {}
        }
    }

    fn row(&self, tick: u64) -> TraceRow {
        let leaves = std::array::from_fn(|leaf| {
            let reference = self.cable.recorded[leaf].unwrap_or(self.plant.x_stall[leaf]);
            let pose = self.plant.pose(leaf, reference, &self.cfg.plant);
            LeafRow {
                pressure_kpa: self.plant.pressure_kpa[leaf],
                popped: self.plant.popped[leaf],
                winch_pos: self.plant.winch_pos[leaf],
                curl_rad: pose.curl_rad,
                elev_rad: pose.elevation_rad,
                route: self.pneu.routes[leaf],
                pump_duty: self.pump_duty[leaf],
            }
        });
        TraceRow {
            tick,
            t_s: tick as f64 * self.dt,
            fsm_mode: self.behavior.mode.to_string(),
            override_active: self.latch.active,
            persons_within: self.last_summary.persons_within,
            min_dist_m: self.last_summary.min_person_distance,
            obstacle_sectors: self.last_summary.obstacle_sectors,
            leaves,
            entry_timeout: self.behavior.timed_out,
        }
    }
}

fn ack(m: &Message) -> Message {
    let seq = match *m {
        Message::Heartbeat { seq } => seq,
        _ => 0,
    };
    Message::Ack { acked_type: m.type_id(), seq }
}
