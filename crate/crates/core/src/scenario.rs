//! Scenario documents: timed scene events plus per-run config overrides.
//!
//! ```json
//! {
//!   "meta": {"duration_s": 20, "seed": 7},
//!   "events": [
//!     {"t": 1.0, "kind": "spawn_person", "id": "p1", "dist_m": 1.5, "bearing_rad": 0.0},
//!     {"t": 9.0, "kind": "press_override", "preset": "waving"},
//!     {"t": 12.0, "kind": "release_override"}
//!   ],
//!   "config_overrides": {"pneumatics.ki": 0.05}
//! }
//! ```

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::behavior::Preset;
use crate::config::{Config, ConfigError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    #[serde(default = "default_tick_hz")]
    pub tick_hz: u32,
    #[serde(default = "default_perception_hz")]
    pub perception_hz: u32,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_tick_hz() -> u32 {
    50
}

fn default_perception_hz() -> u32 {
    10
}

/// Written inline with the event as `"kind": "<variant>"` plus the fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EventKind {
    SpawnPerson { id: String, dist_m: f64, bearing_rad: f64 },
    MovePerson { id: String, dist_m: f64, bearing_rad: f64 },
    RemovePerson { id: String },
    SpawnObstacle { id: String, dist_m: f64, bearing_rad: f64 },
    RemoveObstacle { id: String },
    PressOverride { preset: Preset },
    ReleaseOverride,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub meta: Meta,
    pub events: Vec<Event>,
    pub config_overrides: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl fmt::Display, message: impl fmt::Display) -> ScenarioError {
    ScenarioError::Invalid { path: path.to_string(), message: message.to_string() }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    meta: Meta,
    #[serde(default)]
    events: Vec<Value>,
    #[serde(default)]
    config_overrides: BTreeMap<String, Value>,
}

impl Scenario {
    pub fn ticks(&self) -> u64 {
        (self.meta.duration_s * self.meta.tick_hz as f64).round() as u64
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.meta.tick_hz as f64
    }

    /// Ticks between perception frames.
    pub fn perception_period(&self) -> u64 {
        (self.meta.tick_hz / self.meta.perception_hz) as u64
    }

    /// First tick whose time is at or after `t`.
    pub fn tick_of(&self, t: f64) -> u64 {
        (t * self.meta.tick_hz as f64 - 1e-9).ceil().max(0.0) as u64
    }

    /// `base` with this scenario's overrides applied.
    pub fn config(&self, base: &Config) -> Result<Config, ConfigError> {
        base.with_overrides(&self.config_overrides)
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let raw: RawScenario =
        serde_path_to_error::deserialize(value).map_err(|e| invalid(e.path(), e.inner()))?;

    let mut events = Vec::with_capacity(raw.events.len());
    for (i, v) in raw.events.into_iter().enumerate() {
        let Value::Object(mut obj) = v else {
            return Err(invalid(format_args!("events[{i}]"), "expected an object"));
        };
        let t = match obj.remove("t") {
            Some(Value::Number(n)) => n.as_f64().unwrap_or(f64::NAN),
            Some(_) => return Err(invalid(format_args!("events[{i}].t"), "expected a number")),
            None => return Err(invalid(format_args!("events[{i}]"), "missing field `t`")),
        };
        let tag = match obj.remove("kind") {
            Some(Value::String(tag)) => tag,
            Some(_) => return Err(invalid(format_args!("events[{i}].kind"), "expected a string")),
            None => return Err(invalid(format_args!("events[{i}]"), "missing field `kind`")),
        };
        let tagged = if obj.is_empty() {
            Value::String(tag.clone())
        } else {
            Value::Object([(tag.clone(), Value::Object(obj))].into_iter().collect())
        };
        let kind: EventKind = serde_path_to_error::deserialize(tagged).map_err(|e| {
            let inner = e.path().to_string();
            let field = inner.strip_prefix(&tag).unwrap_or(&inner).trim_start_matches('.');
            let path = if field.is_empty() { format!("events[{i}]") } else { format!("events[{i}].{field}") };
            invalid(path, e.inner())
        })?;
        events.push(Event { t, kind });
    }

    let scenario = Scenario { meta: raw.meta, events, config_overrides: raw.config_overrides };
    validate(&scenario)?;
    Ok(scenario)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EntityKind {
    Person,
    Obstacle,
}

fn validate(s: &Scenario) -> Result<(), ScenarioError> {
    let m = &s.meta;
    if !(m.duration_s.is_finite() && m.duration_s > 0.0) {
        return Err(invalid("meta.duration_s", "must be a positive number"));
    }
    if m.tick_hz == 0 {
        return Err(invalid("meta.tick_hz", "must be positive"));
    }
    if m.perception_hz == 0 || m.perception_hz > m.tick_hz || m.tick_hz % m.perception_hz != 0 {
        return Err(invalid("meta.perception_hz", format_args!("must divide tick_hz ({})", m.tick_hz)));
    }

    let mut live: HashMap<&str, EntityKind> = HashMap::new();
    let mut previous_t = 0.0;
    for (i, e) in s.events.iter().enumerate() {
        let path = |field: &str| format!("events[{i}]{field}");
        if !e.t.is_finite() || e.t < 0.0 {
            return Err(invalid(path(".t"), format_args!("time {} is negative", e.t)));
        }
        if e.t > m.duration_s {
            return Err(invalid(path(".t"), format_args!("time {} is after duration {}", e.t, m.duration_s)));
        }
        if e.t < previous_t {
            return Err(invalid(path(".t"), format_args!("events out of order ({} after {})", e.t, previous_t)));
        }
        previous_t = e.t;

        match &e.kind {
            EventKind::SpawnPerson { id, dist_m, bearing_rad } | EventKind::SpawnObstacle { id, dist_m, bearing_rad } => {
                check_geometry(*dist_m, *bearing_rad, &path)?;
                let kind = if matches!(e.kind, EventKind::SpawnPerson { .. }) {
                    EntityKind::Person
                } else {
                    EntityKind::Obstacle
                };
                if live.insert(id, kind).is_some() {
                    return Err(invalid(path(".id"), format_args!("`{id}` is already live")));
                }
            }
            EventKind::MovePerson { id, dist_m, bearing_rad } => {
                check_geometry(*dist_m, *bearing_rad, &path)?;
                if live.get(id.as_str()) != Some(&EntityKind::Person) {
                    return Err(invalid(path(".id"), format_args!("no live person `{id}`")));
                }
            }
            EventKind::RemovePerson { id } => {
                if live.remove(id.as_str()) != Some(EntityKind::Person) {
                    return Err(invalid(path(".id"), format_args!("no live person `{id}`")));
                }
            }
            EventKind::RemoveObstacle { id } => {
                if live.remove(id.as_str()) != Some(EntityKind::Obstacle) {
                    return Err(invalid(path(".id"), format_args!("no live obstacle `{id}`")));
                }
            }
            EventKind::PressOverride { .. } | EventKind::ReleaseOverride => {}
        }
    }

    s.config(&Config::default()).map_err(|e| match e {
        ConfigError::Override { key, message } => invalid(format_args!("config_overrides.{key}"), message),
        other => invalid("config_overrides", other),
    })?;
    Ok(())
}

fn check_geometry(dist_m: f64, bearing_rad: f64, path: &dyn Fn(&str) -> String) -> Result<(), ScenarioError> {
    if !(dist_m.is_finite() && dist_m > 0.0) {
        return Err(invalid(path(".dist_m"), format_args!("{dist_m} is not a positive distance")));
    }
    if !(-PI..=PI).contains(&bearing_rad) {
        return Err(invalid(path(".bearing_rad"), format_args!("{bearing_rad} outside [-pi, pi]")));
    }
    Ok(())
}

/// Scenarios shipped with the crate, by file name.
pub const BUNDLED: [(&str, &str); 4] = [
    ("approach_and_retreat.json", include_str!("../scenarios/approach_and_retreat.json")),
    ("crowd_withdrawal.json", include_str!("../scenarios/crowd_withdrawal.json")),
    ("confined_avoidance.json", include_str!("../scenarios/confined_avoidance.json")),
    ("manual_presets.json", include_str!("../scenarios/manual_presets.json")),
];

pub fn bundled(name: &str) -> Option<Scenario> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_scenario(text).expect("bundled scenarios are valid"))
}
