//! Detection frames to debounced perception summaries.
//!
//! Detections arrive already reduced to (class, confidence, distance,
//! bearing). Bearings are split into three 120 degree sectors, one per leaf,
//! with leaf 0 facing forward.

use std::f64::consts::{FRAC_PI_3, PI, TAU};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::config::PerceptionConfig;
use crate::leaf::LeafSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionClass {
    Person,
    Object,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: DetectionClass,
    pub confidence: f64,
    pub distance_m: f64,
    /// Relative to the wearer's facing, radians.
    pub bearing_rad: f64,
}

impl Detection {
    pub fn person(distance_m: f64, bearing_rad: f64, confidence: f64) -> Detection {
        Detection { class: DetectionClass::Person, confidence, distance_m, bearing_rad }
    }

    pub fn object(distance_m: f64, bearing_rad: f64, confidence: f64) -> Detection {
        Detection { class: DetectionClass::Object, confidence, distance_m, bearing_rad }
    }

    fn is_valid(&self) -> bool {
        self.distance_m.is_finite()
            && self.distance_m > 0.0
            && (0.0..=1.0).contains(&self.confidence)
            && self.bearing_rad.is_finite()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerceptionSummary {
    pub persons_within: u32,
    pub min_person_distance: Option<f64>,
    pub obstacle_sectors: LeafSet,
    /// Detections dropped from this frame for invalid geometry or confidence.
    pub rejected: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StablePerceptionSummary {
    pub summary: PerceptionSummary,
    pub frames_stable: u32,
}

/// Sector of a bearing: 0 = [-pi/3, pi/3), 1 = [pi/3, pi), 2 = [-pi, -pi/3).
/// Bearings outside `[-pi, pi]` are wrapped first; `pi` itself is `-pi`.
pub fn sector_of(bearing_rad: f64) -> usize {
    let b = if (-PI..=PI).contains(&bearing_rad) {
        bearing_rad
    } else {
        (bearing_rad + PI).rem_euclid(TAU) - PI
    };
    if (-FRAC_PI_3..FRAC_PI_3).contains(&b) {
        0
    } else if (FRAC_PI_3..PI).contains(&b) {
        1
    } else {
        2
    }
}

pub fn summarize(frame: &[Detection], cfg: &PerceptionConfig) -> PerceptionSummary {
    let mut s = PerceptionSummary::default();
    for d in frame {
        if !d.is_valid() {
            s.rejected += 1;
            continue;
        }
        if d.confidence < cfg.c_min {
            continue;
        }
        if d.class == DetectionClass::Person && d.distance_m <= cfg.r_social_m {
            s.persons_within += 1;
            s.min_person_distance = Some(s.min_person_distance.map_or(d.distance_m, |m| m.min(d.distance_m)));
        }
        if d.distance_m <= cfg.r_avoid_m {
            s.obstacle_sectors.insert(sector_of(d.bearing_rad));
        }
    }
    s
}

/// The part of a summary the behavior policy reacts to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Bucket {
    persons: u32,
    sectors: LeafSet,
}

impl Bucket {
    fn of(s: &PerceptionSummary) -> Bucket {
        Bucket { persons: s.persons_within.min(2), sectors: s.obstacle_sectors }
    }
}

/// Emits a summary only once its bucket (persons 0 / 1 / 2+, obstacle
/// sectors) has held for `window` consecutive frames.
#[derive(Clone, Debug)]
pub struct Debouncer {
    window: u32,
    last: Option<Bucket>,
    count: u32,
}

impl Debouncer {
    pub fn new(window: u32) -> Debouncer {
        Debouncer { window: window.max(1), last: None, count: 0 }
    }

    pub fn push(&mut self, summary: PerceptionSummary) -> Option<StablePerceptionSummary> {
        let bucket = Bucket::of(&summary);
        if self.last == Some(bucket) {
            self.count = self.count.saturating_add(1);
        } else {
            self.last = Some(bucket);
            self.count = 1;
        }
        (self.count >= self.window).then_some(StablePerceptionSummary { summary, frames_stable: self.count })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimedFrame {
    pub t: f64,
    pub detections: Vec<Detection>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LogIngest {
    pub frames: Vec<TimedFrame>,
    /// `(1-based line number, reason)` for every skipped line.
    pub skipped: Vec<(usize, String)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogLine {
    t: f64,
    dets: Vec<LogDetection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogDetection {
    cls: DetectionClass,
    conf: f64,
    dist_m: f64,
    bearing_rad: f64,
}

fn parse_line(line: &str) -> Result<TimedFrame, String> {
    let parsed: LogLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if !parsed.t.is_finite() {
        return Err("non-finite timestamp".into());
    }
    let mut detections = Vec::with_capacity(parsed.dets.len());
    for (i, d) in parsed.dets.into_iter().enumerate() {
        if !(d.dist_m.is_finite() && d.dist_m > 0.0) {
            return Err(format!("dets[{i}].dist_m = {} is not a positive distance", d.dist_m));
        }
        if !(0.0..=1.0).contains(&d.conf) {
            return Err(format!("dets[{i}].conf = {} outside [0, 1]", d.conf));
        }
        if !(-PI..=PI).contains(&d.bearing_rad) {
            return Err(format!("dets[{i}].bearing_rad = {} outside [-pi, pi]", d.bearing_rad));
        }
        detections.push(Detection { class: d.cls, confidence: d.conf, distance_m: d.dist_m, bearing_rad: d.bearing_rad });
    }
    Ok(TimedFrame { t: parsed.t, detections })
}

/// Reads a JSONL detection log. Malformed lines are skipped and reported;
/// only a failing reader is fatal. Frames come back sorted by time.
pub fn ingest_log<R: BufRead>(reader: R) -> std::io::Result<LogIngest> {
    let mut out = LogIngest::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(frame) => out.frames.push(frame),
            Err(reason) => out.skipped.push((i + 1, reason)),
        }
    }
    out.frames.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(out)
}
