//! Per-leaf pressure regulation.
//!
//! Each leaf has its own inflation pump behind a three-way valve; one shared
//! exhaust pump empties any leaf whose valve is switched to deflate. A PID
//! loop drives the inflation pump duty while the valve routes to it.

use serde::{Deserialize, Serialize};

use crate::config::PneumaticsConfig;
use crate::leaf::{PerLeaf, NUM_LEAVES};

/// Valve position. Discriminants are the wire encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    #[default]
    Hold = 0,
    Inflate = 1,
    Exhaust = 2,
}

impl Route {
    pub fn from_wire(v: u8) -> Option<Route> {
        match v {
            0 => Some(Route::Hold),
            1 => Some(Route::Inflate),
            2 => Some(Route::Exhaust),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Route::Hold => "hold",
            Route::Inflate => "inflate",
            Route::Exhaust => "exhaust",
        }
    }
}

impl std::str::FromStr for Route {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Route::Hold, Route::Inflate, Route::Exhaust]
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown route `{s}`"))
    }
}

pub fn valve_logic(target_kpa: f64, measured_kpa: f64, deadband_kpa: f64) -> Route {
    if target_kpa - measured_kpa > deadband_kpa {
        Route::Inflate
    } else if measured_kpa - target_kpa > deadband_kpa {
        Route::Exhaust
    } else {
        Route::Hold
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub i_max: f64,
}

impl From<&PneumaticsConfig> for PidGains {
    fn from(c: &PneumaticsConfig) -> Self {
        PidGains { kp: c.kp, ki: c.ki, kd: c.kd, i_max: c.i_max }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PidState {
    /// Accumulated error, kPa*s.
    pub integrator: f64,
    pub previous_error: f64,
}

/// One PID update producing a pump duty in `[0, 1]`.
///
/// The integrator only accumulates while the unclamped output is inside the
/// actuator range (conditional integration).
pub fn pid_update(pid: PidState, target_kpa: f64, measured_kpa: f64, dt: f64, gains: &PidGains) -> (f64, PidState) {
    debug_assert!(dt > 0.0);
    let error = target_kpa - measured_kpa;
    let derivative = (error - pid.previous_error) / dt;
    let raw = gains.kp * error + gains.ki * pid.integrator + gains.kd * derivative;
    let integrator = if (0.0..=1.0).contains(&raw) {
        (pid.integrator + error * dt).clamp(-gains.i_max, gains.i_max)
    } else {
        pid.integrator
    };
    (raw.clamp(0.0, 1.0), PidState { integrator, previous_error: error })
}

/// Controller state carried between ticks.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PneumaticState {
    pub pid: PerLeaf<PidState>,
    pub routes: PerLeaf<Route>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PneumaticTelemetry {
    pub measured_kpa: PerLeaf<f64>,
    pub routes: PerLeaf<Route>,
    pub pump_duty: PerLeaf<f64>,
    pub exhaust_duty: f64,
    /// Set for leaves whose commanded target was outside `[0, p_max]`.
    pub target_clamped: PerLeaf<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PneumaticOutput {
    pub state: PneumaticState,
    pub routes: PerLeaf<Route>,
    pub pump_duty: PerLeaf<f64>,
    pub exhaust_duty: f64,
    pub telemetry: PneumaticTelemetry,
}

/// One control tick for all leaves.
///
/// The integrator is cleared whenever a leaf switches into or out of
/// exhaust; between hold and inflate it is kept so leak compensation
/// survives the deadband limit cycle.
pub fn pneu_step(
    state: &PneumaticState,
    targets_kpa: &PerLeaf<f64>,
    measured_kpa: &PerLeaf<f64>,
    dt: f64,
    cfg: &PneumaticsConfig,
) -> PneumaticOutput {
    let gains = PidGains::from(cfg);
    let mut next = *state;
    let mut pump_duty = [0.0; NUM_LEAVES];
    let mut target_clamped = [false; NUM_LEAVES];

    for leaf in 0..NUM_LEAVES {
        let raw = targets_kpa[leaf];
        let target = if raw.is_nan() { 0.0 } else { raw.clamp(0.0, cfg.p_max_kpa) };
        target_clamped[leaf] = target != raw;

        let measured = measured_kpa[leaf];
        let route = valve_logic(target, measured, cfg.deadband_kpa);
        let previous = state.routes[leaf];
        let mut pid = state.pid[leaf];
        if route != previous && (route == Route::Exhaust || previous == Route::Exhaust) {
            pid.integrator = 0.0;
        }
        if route == Route::Inflate {
            let (duty, updated) = pid_update(pid, target, measured, dt, &gains);
            pump_duty[leaf] = duty;
            pid = updated;
        } else {
            pid.previous_error = target - measured;
        }
        next.pid[leaf] = pid;
        next.routes[leaf] = route;
    }

    let exhaust_duty = if next.routes.contains(&Route::Exhaust) { 1.0 } else { 0.0 };
    PneumaticOutput {
        state: next,
        routes: next.routes,
        pump_duty,
        exhaust_duty,
        telemetry: PneumaticTelemetry {
            measured_kpa: *measured_kpa,
            routes: next.routes,
            pump_duty,
            exhaust_duty,
            target_clamped,
        },
    }
}
