//! Closed-loop step response of one chamber under the pressure controller.

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::plant::chamber_step;
use crate::pneumatics::{pneu_step, PneumaticState};

pub const DURATION_S: f64 = 10.0;
pub const DT: f64 = 0.02;
/// Settling band, as a fraction of the target.
pub const BAND: f64 = 0.02;
/// Steady-state error is the largest error over this final window.
pub const STEADY_WINDOW_S: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub target_kpa: f64,
    pub rise_time_s: f64,
    pub overshoot_pct: f64,
    pub settling_time_s: f64,
    pub steady_state_error_kpa: f64,
    /// False when the trace never stays inside the band; `settling_time_s`
    /// is then the full duration.
    pub settled: bool,
    pub final_kpa: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("target {target} kPa outside [0, {p_max}]")]
    TargetOutOfRange { target: f64, p_max: f64 },
    #[error("chamber burst at {0:.2} kPa")]
    Burst(f64),
}

/// `(t, pressure)` samples, starting with `(0, 0)`.
pub fn step_trace(target_kpa: f64, cfg: &Config) -> Result<Vec<(f64, f64)>, StepError> {
    let p_max = cfg.pneumatics.p_max_kpa;
    if !(0.0..=p_max).contains(&target_kpa) {
        return Err(StepError::TargetOutOfRange { target: target_kpa, p_max });
    }
    let steps = (DURATION_S / DT).round() as usize;
    let targets = [target_kpa, 0.0, 0.0];
    let mut state = PneumaticState::default();
    let (mut p, mut popped) = (0.0, false);
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, p));
    for k in 1..=steps {
        let out = pneu_step(&state, &targets, &[p, 0.0, 0.0], DT, &cfg.pneumatics);
        state = out.state;
        (p, popped) = chamber_step(p, popped, out.pump_duty[0], out.exhaust_duty, out.routes[0], DT, &cfg.plant)
            .map_err(StepError::Burst)?;
        samples.push((k as f64 * DT, p));
    }
    Ok(samples)
}

pub fn pid_step_report(target_kpa: f64, cfg: &Config) -> Result<StepReport, StepError> {
    let samples = step_trace(target_kpa, cfg)?;
    let final_kpa = samples.last().map_or(0.0, |s| s.1);
    if target_kpa == 0.0 {
        return Ok(StepReport {
            target_kpa,
            rise_time_s: 0.0,
            overshoot_pct: 0.0,
            settling_time_s: 0.0,
            steady_state_error_kpa: final_kpa.abs(),
            settled: true,
            final_kpa,
        });
    }
    Ok(metrics(target_kpa, &samples))
}

/// Step metrics of an arbitrary `(t, value)` trace against `target`.
pub fn metrics(target: f64, samples: &[(f64, f64)]) -> StepReport {
    let end = samples.last().map_or(0.0, |s| s.0);
    let first_at = |level: f64| samples.iter().find(|s| s.1 >= level).map(|s| s.0);
    let rise_time_s = match (first_at(0.1 * target), first_at(0.9 * target)) {
        (Some(a), Some(b)) => b - a,
        _ => end,
    };
    let peak = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let overshoot_pct = ((peak - target) / target * 100.0).max(0.0);

    let band = BAND * target;
    let last_outside = samples.iter().rposition(|s| (s.1 - target).abs() > band);
    let (settling_time_s, settled) = match last_outside {
        None => (0.0, true),
        Some(i) if i + 1 < samples.len() => (samples[i + 1].0, true),
        Some(_) => (end, false),
    };
    let steady_state_error_kpa = samples
        .iter()
        .filter(|s| s.0 >= end - STEADY_WINDOW_S - 1e-9)
        .map(|s| (s.1 - target).abs())
        .fold(0.0, f64::max);
    StepReport {
        target_kpa: target,
        rise_time_s,
        overshoot_pct,
        settling_time_s,
        steady_state_error_kpa,
        settled,
        final_kpa: samples.last().map_or(0.0, |s| s.1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_target_is_trivial() {
        let r = pid_step_report(0.0, &Config::default()).unwrap();
        assert_eq!((r.rise_time_s, r.overshoot_pct, r.settling_time_s, r.steady_state_error_kpa), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn out_of_range_target() {
        assert!(pid_step_report(41.0, &Config::default()).is_err());
        assert!(pid_step_report(-1.0, &Config::default()).is_err());
    }

    #[test]
    fn metrics_of_a_known_trace() {
        // 0, 5, 9, 10.5, 10.1, 10, 10, ...
        let mut s = vec![(0.0, 0.0), (1.0, 5.0), (2.0, 9.0), (3.0, 10.5), (4.0, 10.1)];
        s.extend((5..12).map(|t| (t as f64, 10.0)));
        let r = metrics(10.0, &s);
        assert_eq!(r.rise_time_s, 2.0 - 1.0);
        assert!((r.overshoot_pct - 5.0).abs() < 1e-12);
        assert_eq!(r.settling_time_s, 4.0);
        assert_eq!(r.steady_state_error_kpa, 0.0);
        assert!(r.settled);
    }
}
