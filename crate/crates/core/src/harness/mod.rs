//! Experiments: single-support stability grid and push-recovery sweeps.

mod sweep;

pub use sweep::{
    improvement_report, max_recoverable_push, run_push_trial, sweep_strategies, Improvement,
    PushSweepSpec, SweepOutcome,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lqg::ControllerState;
use crate::model::{LipmState, PlanarVec};
use crate::planner::ReferenceFrame;
use crate::plant::{
    is_fallen, saturate_zmp, step_dynamics, PushEvent, Sensor, SupportPolygon,
};
use crate::walker::{simulate_walk, TrialResult, WalkSetup};

/// Full closed-loop walk; see [`simulate_walk`].
pub fn run_trial(
    setup: &WalkSetup,
    initial: Option<LipmState>,
    pushes: &[PushEvent],
) -> Result<TrialResult> {
    simulate_walk(setup, initial, pushes)
}

/// Initial-state grid over `(c, ċ)` in the sagittal axis. Cell values are
/// `(i − half)·step`, so the grid is exactly symmetric about zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub com_step: f64,
    pub com_half_cells: usize,
    pub velocity_step: f64,
    pub velocity_half_cells: usize,
    pub time_limit: f64,
    /// Settle ball: `|c| < settle_com` and `|ċ| < settle_velocity`.
    pub settle_com: f64,
    pub settle_velocity: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            com_step: 0.02,
            com_half_cells: 10,
            velocity_step: 0.1,
            velocity_half_cells: 10,
            time_limit: 2.0,
            settle_com: 0.01,
            settle_velocity: 0.02,
        }
    }
}

impl GridSpec {
    pub fn com_values(&self) -> Vec<f64> {
        symmetric_values(self.com_step, self.com_half_cells)
    }

    pub fn velocity_values(&self) -> Vec<f64> {
        symmetric_values(self.velocity_step, self.velocity_half_cells)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.com_step > 0.0 && self.velocity_step > 0.0) {
            bad.push("grid steps must be > 0".to_string());
        }
        if !(self.time_limit > 0.0) {
            bad.push("grid time_limit must be > 0".into());
        }
        if !(self.settle_com > 0.0 && self.settle_velocity > 0.0) {
            bad.push("settle ball must be > 0".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }
}

fn symmetric_values(step: f64, half: usize) -> Vec<f64> {
    (0..=2 * half)
        .map(|i| (i as f64 - half as f64) * step)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub com: f64,
    pub com_velocity: f64,
    pub recovered: bool,
    /// First time the state entered the settle ball.
    pub settle_time: Option<f64>,
    pub capturable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityMap {
    pub n_com: usize,
    pub n_velocity: usize,
    /// Row-major over `(com index, velocity index)`.
    pub cells: Vec<GridCell>,
}

impl StabilityMap {
    pub fn cell(&self, i: usize, j: usize) -> &GridCell {
        &self.cells[i * self.n_velocity + j]
    }
}

/// Whether the pendulum can stop over a fixed foot with the ZMP limited to
/// `±p_max` about the foot centre: `|c + ċ/ω| ≤ p_max` on every axis.
pub fn capturability_oracle(state: &LipmState, foot: PlanarVec, p_max: PlanarVec, omega: f64) -> bool {
    let d = state.dcm(omega) - foot;
    d.x.abs() <= p_max.x && d.y.abs() <= p_max.y
}

/// Stand on one foot at the origin with a zero reference from `initial`
/// and report when the state first enters the settle ball.
pub fn run_stance_trial(
    setup: &WalkSetup,
    initial: LipmState,
    spec: &GridSpec,
    seed: u64,
) -> Result<Option<f64>> {
    let omega = setup.omega()?;
    let gains = setup.gains()?;
    let mut noise = setup.noise;
    noise.rng_seed = seed;
    let mut sensor = Sensor::new(&noise)?;
    let polygon = SupportPolygon::single(PlanarVec::ZERO, &setup.robot);
    let reference = ReferenceFrame {
        t: 0.0,
        zmp: PlanarVec::ZERO,
        com: PlanarVec::ZERO,
        com_velocity: PlanarVec::ZERO,
        dcm: PlanarVec::ZERO,
        swing: [0.0; 3],
    };
    let mut controller = ControllerState::new();
    let mut state = initial;
    let n = (spec.time_limit / setup.dt).round() as usize;
    for k in 0..=n {
        let t = k as f64 * setup.dt;
        if state.com.norm() < spec.settle_com && state.com_velocity.norm() < spec.settle_velocity {
            return Ok(Some(t));
        }
        if is_fallen(&state, &polygon, &[PlanarVec::ZERO], omega, &setup.fall) {
            return Ok(None);
        }
        let (c, z) = sensor.measure(&state, omega);
        controller.update_estimate(c, z, &gains);
        let p = saturate_zmp(controller.command(&reference, &gains), &polygon);
        controller.set_applied(p);
        state = step_dynamics(&state, p, &[], t, setup.dt, setup.robot.mass, omega);
    }
    Ok(None)
}

/// Run every grid cell; trial `k` draws its noise from `seed + k`.
pub fn run_stability_grid(setup: &WalkSetup, spec: &GridSpec, seed: u64) -> Result<StabilityMap> {
    spec.validate()?;
    setup.validate()?;
    let omega = setup.omega()?;
    let coms = spec.com_values();
    let vels = spec.velocity_values();
    let p_max = PlanarVec::new(0.5 * setup.robot.foot_length, 0.5 * setup.robot.foot_width);
    let jobs: Vec<(usize, f64, f64)> = coms
        .iter()
        .flat_map(|&c| vels.iter().map(move |&v| (c, v)))
        .enumerate()
        .map(|(k, (c, v))| (k, c, v))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(k, c, v)| {
            let initial = LipmState::new(PlanarVec::new(c, 0.0), PlanarVec::new(v, 0.0));
            let settle = run_stance_trial(setup, initial, spec, seed.wrapping_add(k as u64))?;
            Ok(GridCell {
                com: c,
                com_velocity: v,
                recovered: settle.is_some(),
                settle_time: settle,
                capturable: capturability_oracle(&initial, PlanarVec::ZERO, p_max, omega),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityMap {
        n_com: coms.len(),
        n_velocity: vels.len(),
        cells,
    })
}
