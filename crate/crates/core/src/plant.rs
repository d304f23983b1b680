//! Deterministic fixed-step model of the garment.
//!
//! Each leaf has a fabric chamber with sewn bistable modules and a tendon
//! wound on a winch. The chamber is a first-order linear pressure model
//! integrated with explicit Euler; the modules pop with hysteresis; the
//! winch torque climbs steeply near the mechanical stall; and the leaf pose
//! depends on tendon extension and whether the modules have popped. A soft
//! leaf curls and retracts when pulled, a stiff one lifts with little curl.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::PlantConfig;
use crate::leaf::{PerLeaf, NUM_LEAVES};
use crate::pneumatics::Route;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlantFault {
    #[error("leaf {leaf} chamber burst at {pressure_kpa:.3} kPa (tick {tick})")]
    Burst { leaf: usize, pressure_kpa: f64, tick: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LeafPose {
    pub curl_rad: f64,
    pub elevation_rad: f64,
}

/// Bistable module state with hysteresis between the unpop and pop pressures.
pub fn pop_state(pressure_kpa: f64, popped: bool, cfg: &PlantConfig) -> bool {
    if pressure_kpa >= cfg.p_pop_kpa {
        true
    } else if pressure_kpa <= cfg.p_unpop_kpa {
        false
    } else {
        popped
    }
}

/// One Euler step of a chamber.
///
/// Returns the new `(pressure, popped)` or `Err(pressure)` if the result
/// exceeds the burst pressure.
pub fn chamber_step(
    pressure_kpa: f64,
    popped: bool,
    inflate_duty: f64,
    exhaust_duty: f64,
    route: Route,
    dt: f64,
    cfg: &PlantConfig,
) -> Result<(f64, bool), f64> {
    let inflow = if route == Route::Inflate { cfg.alpha * inflate_duty } else { 0.0 };
    let outflow = if route == Route::Exhaust { cfg.beta * exhaust_duty } else { 0.0 };
    let dp = inflow - outflow - cfg.leak * pressure_kpa;
    let p = (pressure_kpa + dp * dt).max(0.0);
    if p > cfg.p_burst_kpa {
        return Err(p);
    }
    Ok((p, pop_state(p, popped, cfg)))
}

/// Tendon torque at extension `x` for a winch that stalls at `x_stall`.
pub fn winch_torque(x: f64, x_stall: f64, cfg: &PlantConfig) -> f64 {
    let ramp = (x - x_stall + cfg.wall_width).max(0.0) / cfg.wall_width;
    cfg.tau_base * (x / x_stall) + cfg.tau_wall * ramp
}

/// Advances a winch by a velocity command. Returns the new position and torque.
pub fn winch_step(x: f64, velocity: f64, x_stall: f64, dt: f64, cfg: &PlantConfig) -> (f64, f64) {
    let v = velocity.clamp(-cfg.v_max, cfg.v_max);
    let x = (x + v * dt).clamp(0.0, x_stall);
    (x, winch_torque(x, x_stall, cfg))
}

/// Pose of a leaf pulled to `x_norm` of its travel.
pub fn leaf_pose(x_norm: f64, popped: bool, cfg: &PlantConfig) -> LeafPose {
    let x = x_norm.clamp(0.0, 1.0);
    if popped {
        LeafPose { curl_rad: cfg.curl_min * x, elevation_rad: cfg.elev_max * x }
    } else {
        LeafPose { curl_rad: cfg.curl_max * x, elevation_rad: cfg.elev_soft * x }
    }
}

/// Full plant state for the three leaves.
#[derive(Clone, Debug, PartialEq)]
pub struct Plant {
    pub pressure_kpa: PerLeaf<f64>,
    pub popped: PerLeaf<bool>,
    pub winch_pos: PerLeaf<f64>,
    pub torque: PerLeaf<f64>,
    pub x_stall: PerLeaf<f64>,
    pub tick: u64,
}

/// Actuator inputs for one plant step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlantInputs {
    pub routes: PerLeaf<Route>,
    pub pump_duty: PerLeaf<f64>,
    pub exhaust_duty: f64,
    pub winch_velocity: PerLeaf<f64>,
}

impl Plant {
    /// Plant at rest. Stall positions are jittered per leaf from `seed` when
    /// `x_stall_jitter` is nonzero.
    pub fn new(cfg: &PlantConfig, seed: u64) -> Plant {
        let mut x_stall = [cfg.x_stall; NUM_LEAVES];
        if cfg.x_stall_jitter > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x57A1_1000);
            for x in &mut x_stall {
                *x += rng.gen_range(-cfg.x_stall_jitter..=cfg.x_stall_jitter);
            }
        }
        Plant::with_stall(x_stall)
    }

    pub fn with_stall(x_stall: PerLeaf<f64>) -> Plant {
        assert!(x_stall.iter().all(|&x| x > 0.0), "stall positions must be positive");
        Plant {
            pressure_kpa: [0.0; NUM_LEAVES],
            popped: [false; NUM_LEAVES],
            winch_pos: [0.0; NUM_LEAVES],
            torque: [0.0; NUM_LEAVES],
            x_stall,
            tick: 0,
        }
    }

    pub fn step(&mut self, inputs: &PlantInputs, dt: f64, cfg: &PlantConfig) -> Result<(), PlantFault> {
        for leaf in 0..NUM_LEAVES {
            let (p, popped) = chamber_step(
                self.pressure_kpa[leaf],
                self.popped[leaf],
                inputs.pump_duty[leaf],
                inputs.exhaust_duty,
                inputs.routes[leaf],
                dt,
                cfg,
            )
            .map_err(|pressure_kpa| PlantFault::Burst { leaf, pressure_kpa, tick: self.tick })?;
            self.pressure_kpa[leaf] = p;
            self.popped[leaf] = popped;

            let (x, torque) =
                winch_step(self.winch_pos[leaf], inputs.winch_velocity[leaf], self.x_stall[leaf], dt, cfg);
            self.winch_pos[leaf] = x;
            self.torque[leaf] = torque;
        }
        self.tick += 1;
        Ok(())
    }

    /// Pose of `leaf`, normalizing extension by `reference` ticks (the
    /// recorded pull-up displacement, or the stall position before homing).
    pub fn pose(&self, leaf: usize, reference: f64, cfg: &PlantConfig) -> LeafPose {
        let x_norm = if reference > 0.0 { self.winch_pos[leaf] / reference } else { 0.0 };
        leaf_pose(x_norm, self.popped[leaf], cfg)
    }
}
