//! Harness configuration: one JSON document with a section per subsystem.
//!
//! Every field has a default, so `{}` is a complete configuration. Unknown
//! keys are rejected at every level.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cable::WaveParams;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("override `{key}`: {message}")]
    Override { key: String, message: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub behavior: BehaviorConfig,
    pub perception: PerceptionConfig,
    pub cable: CableConfig,
    pub pneumatics: PneumaticsConfig,
    pub plant: PlantConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorConfig {
    /// People within the social radius needed to trigger withdrawal.
    pub multi_person_threshold: u32,
    /// Consecutive agreeing perception frames before a summary counts as stable.
    pub debounce_frames: u32,
    /// Withdrawal inflation target, kPa.
    pub p_inflate_kpa: f64,
    /// Pressure band that confirms a pneumatic entry phase, kPa.
    pub confirm_tolerance_kpa: f64,
    /// Entry phases advance after this long even without confirmation.
    pub phase_timeout_s: f64,
    /// Control period the engine is stepped at.
    pub control_dt_s: f64,
    pub wave: WaveParams,
}

impl Default for BehaviorConfig {
    fn default() -> Self {
        BehaviorConfig {
            multi_person_threshold: 2,
            debounce_frames: 5,
            p_inflate_kpa: 25.0,
            confirm_tolerance_kpa: 1.0,
            phase_timeout_s: 3.0,
            control_dt_s: 0.02,
            wave: WaveParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptionConfig {
    /// Minimum detector confidence for a detection to count.
    pub c_min: f64,
    /// Social radius: persons closer than this are "present", m.
    pub r_social_m: f64,
    /// Personal-space radius: anything closer flags its sector, m.
    pub r_avoid_m: f64,
    /// Confidence assigned to synthesized detections.
    pub synthetic_confidence: f64,
    /// Per-detection dropout probability for synthesized frames.
    pub synthetic_dropout: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        PerceptionConfig {
            c_min: 0.5,
            r_social_m: 2.5,
            r_avoid_m: 0.6,
            synthetic_confidence: 0.95,
            synthetic_dropout: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CableConfig {
    /// Homing stops once measured torque reaches this value.
    pub torque_threshold: f64,
    /// Winding and unwinding speed, ticks/s.
    pub wind_rate: f64,
    /// Proportional tracking gain for waving, 1/s.
    pub kp: f64,
    /// Velocity limit for tracking, ticks/s.
    pub v_max: f64,
    /// Upper bound on wave frequency, Hz.
    pub f_max: f64,
}

impl Default for CableConfig {
    fn default() -> Self {
        CableConfig {
            torque_threshold: 120.0,
            wind_rate: 800.0,
            kp: 5.0,
            v_max: 2000.0,
            f_max: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PneumaticsConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Valve deadband, kPa.
    pub deadband_kpa: f64,
    /// Integrator clamp, kPa*s.
    pub i_max: f64,
    /// Largest accepted target, kPa.
    pub p_max_kpa: f64,
}

impl Default for PneumaticsConfig {
    fn default() -> Self {
        PneumaticsConfig {
            kp: 0.08,
            ki: 0.04,
            kd: 0.0,
            deadband_kpa: 0.05,
            i_max: 25.0,
            p_max_kpa: 40.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    /// Inflation rate at full pump duty, kPa/s.
    pub alpha: f64,
    /// Exhaust rate at full exhaust duty, kPa/s.
    pub beta: f64,
    /// Leak coefficient, 1/s.
    pub leak: f64,
    pub p_burst_kpa: f64,
    pub p_pop_kpa: f64,
    pub p_unpop_kpa: f64,
    pub tau_base: f64,
    pub tau_wall: f64,
    /// Width of the stall torque ramp, ticks.
    pub wall_width: f64,
    /// Nominal stall position, ticks.
    pub x_stall: f64,
    /// Half-width of the seeded per-leaf stall jitter, ticks.
    pub x_stall_jitter: f64,
    pub v_max: f64,
    pub curl_max: f64,
    pub curl_min: f64,
    pub elev_soft: f64,
    pub elev_max: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig {
            alpha: 20.0,
            beta: 40.0,
            leak: 0.05,
            p_burst_kpa: 60.0,
            p_pop_kpa: 18.0,
            p_unpop_kpa: 8.0,
            tau_base: 60.0,
            tau_wall: 200.0,
            wall_width: 50.0,
            x_stall: 1000.0,
            x_stall_jitter: 0.0,
            v_max: 2000.0,
            curl_max: 2.6,
            curl_min: 0.5,
            elev_soft: 0.3,
            elev_max: 1.4,
        }
    }
}

impl Default for WaveParams {
    fn default() -> Self {
        WaveParams {
            amplitude: [0.8; 3],
            frequency_hz: 0.5,
            phase_rad: [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0],
        }
    }
}

impl Config {
    pub fn from_json_str(text: &str, origin: &str) -> Result<Config, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: format!("{}: {}", e.path(), e.inner()),
        })
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Config::from_json_str(&text, &path.display().to_string())
    }

    /// Applies flat `section.key` overrides, e.g. `"pneumatics.ki": 0`.
    ///
    /// Nested values are addressed with further dots (`behavior.wave.amplitude`).
    pub fn with_overrides(&self, overrides: &BTreeMap<String, Value>) -> Result<Config, ConfigError> {
        let mut doc = serde_json::to_value(self).expect("config serializes");
        for (key, value) in overrides {
            let mut slot = &mut doc;
            for part in key.split('.') {
                slot = slot
                    .as_object_mut()
                    .and_then(|obj| obj.get_mut(part))
                    .ok_or_else(|| ConfigError::Override {
                        key: key.clone(),
                        message: format!("unknown key segment `{part}`"),
                    })?;
            }
            *slot = value.clone();
        }
        serde_path_to_error::deserialize(doc).map_err(|e| ConfigError::Override {
            key: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let c = Config::from_json_str("{}", "inline").unwrap();
        assert_eq!(c, Config::default());
    }

    #[test]
    fn unknown_key_rejected_with_path() {
        let err = Config::from_json_str(r#"{"plant":{"alhpa":1}}"#, "inline").unwrap_err();
        assert!(err.to_string().contains("plant"), "{err}");
    }

    #[test]
    fn overrides_apply_by_dotted_path() {
        let mut o = BTreeMap::new();
        o.insert("pneumatics.ki".to_string(), Value::from(0.0));
        o.insert("behavior.wave.frequency_hz".to_string(), Value::from(1.5));
        let c = Config::default().with_overrides(&o).unwrap();
        assert_eq!(c.pneumatics.ki, 0.0);
        assert_eq!(c.behavior.wave.frequency_hz, 1.5);

        let mut bad = BTreeMap::new();
        bad.insert("plant.nope".to_string(), Value::from(1));
        assert!(Config::default().with_overrides(&bad).is_err());
    }
}
