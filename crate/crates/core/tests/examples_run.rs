//! Every example builds and its entry point runs to completion.

#[allow(dead_code)]
#[path = "../examples/run_scenario.rs"]
mod run_scenario;

#[allow(dead_code)]
#[path = "../examples/behavior_engine.rs"]
mod behavior_engine;

#[allow(dead_code)]
#[path = "../examples/perception_frames.rs"]
mod perception_frames;

#[allow(dead_code)]
#[path = "../examples/cable_drive.rs"]
mod cable_drive;

#[allow(dead_code)]
#[path = "../examples/pressure_step.rs"]
mod pressure_step;

#[allow(dead_code)]
#[path = "../examples/wire_codec.rs"]
mod wire_codec;

#[allow(dead_code)]
#[path = "../examples/plant_model.rs"]
mod plant_model;

#[allow(dead_code)]
#[path = "../examples/replay_log.rs"]
mod replay_log;

#[allow(dead_code)]
#[path = "../examples/fuzz_codec.rs"]
mod fuzz_codec;

#[test]
fn run_scenario_example() {
    for (name, _) in sumbrella::scenario::BUNDLED {
        run_scenario::run_example(name).unwrap();
    }
}

#[test]
fn behavior_engine_example() {
    behavior_engine::run_example();
}

#[test]
fn perception_frames_example() {
    perception_frames::run_example();
}

#[test]
fn cable_drive_example() {
    cable_drive::run_example();
}

#[test]
fn pressure_step_example() {
    pressure_step::run_example().unwrap();
}

#[test]
fn wire_codec_example() {
    wire_codec::run_example().unwrap();
}

#[test]
fn plant_model_example() {
    plant_model::run_example();
}

#[test]
fn replay_log_example() {
    let dir = tempfile::tempdir().unwrap();
    let log = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/detections.jsonl");
    replay_log::run_example(&log, &dir.path().join("replay.jsonl")).unwrap();
}

#[test]
fn fuzz_codec_example() {
    assert!(fuzz_codec::run_example(500, 3));
}
