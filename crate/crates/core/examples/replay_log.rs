//! Feeds a recorded detection log through the full loop and writes the
//! trace as JSONL next to the system temp dir.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use sumbrella::perception::ingest_log;
use sumbrella::sim::{self, RunOptions};
use sumbrella::trace::{write_trace, TraceFormat};
use sumbrella::Config;

pub fn run_example(log: &Path, out: &Path) -> anyhow::Result<()> {
    let ingest = ingest_log(BufReader::new(File::open(log)?))?;
    println!("{} frames, {} skipped lines", ingest.frames.len(), ingest.skipped.len());

    let duration = ingest.frames.last().map_or(1.0, |f| f.t + 2.0);
    let run = sim::replay(&ingest.frames, duration, &Config::default(), RunOptions::default())?;
    for (tick, mode) in sim::mode_changes(&run.rows) {
        println!("  tick {tick:>4}  {mode}");
    }
    write_trace(&run.rows, TraceFormat::Jsonl, out)?;
    println!("wrote {} rows to {}", run.rows.len(), out.display());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let log = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/detections.jsonl");
    run_example(&log, &std::env::temp_dir().join("sumbrella_replay.jsonl"))
}
