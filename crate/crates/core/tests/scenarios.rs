use std::collections::{BTreeSet, HashMap};

use sumbrella::config::{CableConfig, PlantConfig};
use sumbrella::protocol::Message;
use sumbrella::scenario::{bundled, parse_scenario, Scenario, BUNDLED};
use sumbrella::sim::{self, Link, RunError, RunOptions, RunOutput};
use sumbrella::trace::{write_csv, TraceRow};
use sumbrella::{Config, LeafSet};

fn run(s: &Scenario) -> RunOutput {
    sim::run(s, &Config::default()).expect("run succeeds")
}

fn csv(rows: &[TraceRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).unwrap();
    buf
}

fn first_tick(rows: &[TraceRow], mode: &str) -> Option<u64> {
    rows.iter().find(|r| r.fsm_mode == mode).map(|r| r.tick)
}

/// Position where the winch torque first reaches the homing threshold, by
/// solving the linear ramp directly.
fn torque_crossing(x_stall: f64) -> f64 {
    let p = PlantConfig::default();
    let th = CableConfig::default().torque_threshold;
    (th + p.tau_wall * (x_stall - p.wall_width) / p.wall_width) / (p.tau_base / x_stall + p.tau_wall / p.wall_width)
}

/// Tick at which a debounced bucket of `persons` first forms, reading the
/// raw perception columns of the rows on perception ticks.
fn first_stable(rows: &[TraceRow], period: u64, window: usize, persons: u32) -> Option<u64> {
    let frames: Vec<&TraceRow> = rows.iter().filter(|r| r.tick % period == 0).collect();
    let mut run = 0;
    for r in frames {
        let same = r.persons_within.min(2) == persons && r.obstacle_sectors.is_empty();
        run = if same { run + 1 } else { 0 };
        if run >= window {
            return Some(r.tick);
        }
    }
    None
}

#[test]
fn empty_scene_stays_neutral() {
    let s = parse_scenario(r#"{"meta":{"duration_s":1}}"#).unwrap();
    let out = run(&s);
    assert_eq!(out.rows.len(), 50);
    assert!(out.rows.iter().all(|r| r.fsm_mode == "neutral"));
}

#[test]
fn single_person_welcomes_one_tick_after_debounce() {
    let s = parse_scenario(
        r#"{"meta":{"duration_s":5},"events":[{"t":0,"kind":"spawn_person","id":"p","dist_m":1.5,"bearing_rad":0}]}"#,
    )
    .unwrap();
    let out = run(&s);
    let stable = first_stable(&out.rows, 5, 5, 1).expect("person is seen");
    assert_eq!(first_tick(&out.rows, "welcoming"), Some(stable + 1));

    let last = out.rows.last().unwrap();
    let expected = (torque_crossing(1000.0) / 16.0).ceil() * 16.0;
    for leaf in &last.leaves {
        assert_eq!(leaf.winch_pos, expected);
        assert!(leaf.pressure_kpa < 0.5, "{}", leaf.pressure_kpa);
        assert!(!leaf.popped);
    }
}

#[test]
fn three_people_withdraw_and_pop() {
    let s = parse_scenario(
        r#"{"meta":{"duration_s":6},"events":[
            {"t":0,"kind":"spawn_person","id":"a","dist_m":1,"bearing_rad":0},
            {"t":0,"kind":"spawn_person","id":"b","dist_m":1,"bearing_rad":2},
            {"t":0,"kind":"spawn_person","id":"c","dist_m":1,"bearing_rad":-2}]}"#,
    )
    .unwrap();
    let out = run(&s);
    assert!(first_tick(&out.rows, "withdrawal").is_some());
    let last = out.rows.last().unwrap();
    for leaf in &last.leaves {
        assert!((leaf.pressure_kpa - 25.0).abs() <= 1.0, "{}", leaf.pressure_kpa);
        assert!(leaf.popped);
        assert_eq!(leaf.winch_pos, 0.0);
    }
}

#[test]
fn reference_scenarios_reach_their_modes() {
    let approach = run(&bundled("approach_and_retreat.json").unwrap());
    assert!(first_tick(&approach.rows, "welcoming").is_some());

    let crowd = run(&bundled("crowd_withdrawal.json").unwrap());
    assert!(first_tick(&crowd.rows, "withdrawal").is_some());

    let confined = run(&bundled("confined_avoidance.json").unwrap());
    assert!(first_tick(&confined.rows, "avoidance[1]").is_some());
    assert!(confined.rows.iter().all(|r| !r.fsm_mode.starts_with("avoidance") || r.fsm_mode == "avoidance[1]"));
    // Just before the obstacle goes away: only leaf 1 is up.
    let r = &confined.rows[349];
    assert_eq!(r.fsm_mode, "avoidance[1]");
    assert!(r.leaves[1].winch_pos > 900.0 && r.leaves[1].pressure_kpa < 1.0 && !r.leaves[1].popped);
    for l in [0, 2] {
        assert_eq!(r.leaves[l].winch_pos, 0.0);
        assert!(r.leaves[l].popped);
    }
}

#[test]
fn every_mode_is_reachable() {
    let mut seen = BTreeSet::new();
    for (name, _) in BUNDLED {
        for r in run(&bundled(name).unwrap()).rows {
            let m = r.fsm_mode;
            seen.insert(if m.starts_with("avoidance") { "avoidance".to_string() } else { m });
        }
    }
    for mode in [
        "neutral",
        "welcoming",
        "withdrawal",
        "avoidance",
        "override[waving]",
        "override[welcoming]",
        "override[withdrawal]",
    ] {
        assert!(seen.contains(mode), "{mode} never reached: {seen:?}");
    }
}

#[test]
fn same_inputs_same_bytes() {
    for (name, _) in BUNDLED {
        let s = bundled(name).unwrap();
        let (a, b) = (run(&s), run(&s));
        assert_eq!(csv(&a.rows), csv(&b.rows), "{name}");
        assert_eq!(a.wire, b.wire, "{name}");
    }
}

#[test]
fn codec_bypass_changes_nothing() {
    for (name, _) in BUNDLED {
        let s = bundled(name).unwrap();
        let framed = run(&s);
        let direct = sim::run_with(&s, &Config::default(), RunOptions { bypass_codec: true, seed: None }).unwrap();
        assert_eq!(framed.rows, direct.rows, "{name}");
        assert!(framed.diagnostics.decode_errors.is_empty());
        let m1: Vec<_> = framed.wire.iter().map(|w| (w.tick, w.link, w.message)).collect();
        let m2: Vec<_> = direct.wire.iter().map(|w| (w.tick, w.link, w.message)).collect();
        assert_eq!(m1, m2);
    }
}

#[test]
fn events_never_reach_back_in_time() {
    for (name, _) in BUNDLED {
        let full = bundled(name).unwrap();
        let reference = run(&full);
        for e in &full.events {
            let mut cut = full.clone();
            cut.events.retain(|x| x.t < e.t);
            let partial = run(&cut);
            for (a, b) in reference.rows.iter().zip(&partial.rows).take_while(|(a, _)| a.t_s < e.t - 1e-9) {
                assert_eq!(a, b, "{name}: event at {} changed row {}", e.t, a.tick);
            }
        }
    }
}

#[test]
fn entry_phases_in_order() {
    let out = run(&bundled("approach_and_retreat.json").unwrap());
    let cable_mode_ticks = |mode: u8| -> Vec<u64> {
        out.wire
            .iter()
            .filter(|w| w.link == Link::ToCable && matches!(w.message, Message::CmdCableSetMode { mode: m, .. } if m == mode))
            .map(|w| w.tick)
            .collect()
    };
    let target_ticks = |kpa: u16| -> Vec<u64> {
        out.wire
            .iter()
            .filter(|w| matches!(w.message, Message::CmdPneuTargets { targets_deci_kpa } if targets_deci_kpa.contains(&kpa)))
            .map(|w| w.tick)
            .collect()
    };
    let releases = cable_mode_ticks(2);
    let pull_ups = cable_mode_ticks(1);
    let inflations = target_ticks(250);
    let deflations = target_ticks(0);

    for &t in &inflations {
        assert!(releases.iter().any(|&r| r < t), "inflation at {t} without an earlier release");
    }
    for &t in &pull_ups {
        assert!(deflations.iter().any(|&d| d < t), "pull-up at {t} without an earlier deflation");
    }
    let withdrawal = first_tick(&out.rows, "withdrawal").unwrap();
    let release = releases.iter().find(|&&r| r >= withdrawal).unwrap();
    let inflate = inflations.iter().find(|&&i| i >= withdrawal).unwrap();
    assert!(release < inflate);
}

#[test]
fn slow_deflation_times_out_and_advances() {
    let s = parse_scenario(
        r#"{"meta":{"duration_s":12},
            "events":[{"t":4,"kind":"spawn_person","id":"p","dist_m":1.5,"bearing_rad":0}],
            "config_overrides":{"plant.beta":0.5,"perception.synthetic_dropout":0}}"#,
    )
    .unwrap();
    let out = run(&s);
    let welcome = first_tick(&out.rows, "welcoming").unwrap();
    let timeout_row = out.rows.iter().find(|r| r.entry_timeout).expect("timeout flagged");
    assert_eq!(timeout_row.tick, welcome + 150);
    assert!(out.rows[timeout_row.tick as usize - 1].leaves[0].pressure_kpa > 1.0);
    let pull = out
        .wire
        .iter()
        .find(|w| matches!(w.message, Message::CmdCableSetMode { mode: 1, .. }))
        .unwrap();
    assert_eq!(pull.tick, timeout_row.tick);
}

#[test]
fn burst_aborts_with_tick() {
    let s = parse_scenario(
        r#"{"meta":{"duration_s":10},
            "config_overrides":{"pneumatics.p_max_kpa":80,"behavior.p_inflate_kpa":75}}"#,
    )
    .unwrap();
    match sim::run(&s, &Config::default()) {
        Err(RunError::Fault { fault, rows }) => {
            let sumbrella::plant::PlantFault::Burst { tick, pressure_kpa, .. } = fault;
            assert!(pressure_kpa > 60.0);
            assert_eq!(rows.len() as u64, tick);
        }
        other => panic!("expected a burst, got {:?}", other.map(|o| o.rows.len())),
    }
}

#[test]
fn seeds_change_dropout_but_not_framing() {
    let s = bundled("approach_and_retreat.json").unwrap();
    let mut bytes_of: HashMap<Message, Vec<u8>> = HashMap::new();
    let mut traces = Vec::new();
    for seed in [1, 2, 3, 99] {
        let out = sim::run_with(&s, &Config::default(), RunOptions { seed: Some(seed), ..Default::default() }).unwrap();
        for w in &out.wire {
            let prev = bytes_of.entry(w.message).or_insert_with(|| w.bytes.clone());
            assert_eq!(prev, &w.bytes);
        }
        traces.push(csv(&out.rows));
    }
    assert!(traces.windows(2).any(|w| w[0] != w[1]), "dropout never differed across seeds");
}

#[test]
fn replay_sample_log() {
    let text = include_str!("../data/detections.jsonl");
    let log = sumbrella::perception::ingest_log(text.as_bytes()).unwrap();
    assert_eq!(log.skipped.len(), 1);
    let out = sim::replay(&log.frames, 12.0, &Config::default(), RunOptions::default()).unwrap();
    assert_eq!(out.rows.len(), 600);
    let modes: Vec<&str> = sim::mode_changes(&out.rows).into_iter().map(|(_, m)| m).collect();
    assert_eq!(modes, ["neutral", "welcoming", "withdrawal", "avoidance[2]"]);
    let last = out.rows.last().unwrap();
    assert_eq!(last.obstacle_sectors, LeafSet::single(2));
}
