//! Run configuration: one flat JSON object; every field is optional and
//! defaults to the reference robot and gaits.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adjuster::AdjusterGains;
use crate::error::{Error, Result};
use crate::harness::{GridSpec, PushSweepSpec};
use crate::lqg::ControllerConfig;
use crate::model::{PlanarVec, GRAVITY};
use crate::planner::{GaitParams, WalkCommand};
use crate::plant::{FallCriteria, NoiseModel, RobotPhysicalParams};
use crate::state_machine::Side;
use crate::walker::{Strategy, WalkSetup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // robot
    pub mass: f64,
    pub com_height: f64,
    pub foot_length: f64,
    pub foot_width: f64,
    pub gravity: f64,
    pub com_vertical_accel: f64,

    // `plan`: diagonal example walk
    pub step_length_x: f64,
    pub step_length_y: f64,
    pub single_support: f64,
    pub double_support: f64,
    pub swing_height: f64,
    pub max_step: f64,
    pub lateral_offset: f64,
    /// Opening and closing weight-shift duration of every walk.
    pub transfer: f64,
    pub first_support: Side,
    pub n_steps: usize,

    // `walk`: forward walk under sensor noise
    pub walk_step_length_x: f64,
    pub walk_step_length_y: f64,
    pub walk_single_support: f64,
    pub walk_double_support: f64,
    pub walk_n_steps: usize,
    pub walk_noise_variance: f64,
    pub walk_strategy: Strategy,

    // controller
    pub q_com: f64,
    pub q_dcm: f64,
    pub q_integral: f64,
    pub r: f64,
    pub process_variance: f64,
    pub measurement_variance: f64,
    pub integral_limit: f64,

    // step adjusters
    pub k_sa: f64,
    pub k_f: f64,
    pub compliance_margin: f64,
    pub dt_sat: f64,
    pub retarget_cutoff: f64,

    // simulation
    pub dt: f64,
    pub fall_dcm_radius: f64,
    pub fall_com_radius: f64,
    pub settle_time: f64,
    pub settle_threshold: f64,

    // `scenario1`
    pub grid_com_step: f64,
    pub grid_com_half_cells: usize,
    pub grid_velocity_step: f64,
    pub grid_velocity_half_cells: usize,
    pub grid_time_limit: f64,
    pub grid_settle_com: f64,
    pub grid_settle_velocity: f64,
    pub grid_noise_variance: f64,

    // `scenario2`: walking in place with one push
    pub sweep_n_steps: usize,
    pub sweep_noise_variance: f64,
    pub push_time: f64,
    pub push_duration: f64,
    pub push_direction_x: f64,
    pub push_direction_y: f64,
    pub force_lo: f64,
    pub force_hi: f64,
    pub bisection_tol: f64,
    /// `torque_only`, `location`, `location+time` or `all`.
    pub strategy: String,

    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let robot = RobotPhysicalParams::default();
        let gait = GaitParams::default();
        let ctl = ControllerConfig::default();
        let adj = AdjusterGains::default();
        let grid = GridSpec::default();
        let sweep = PushSweepSpec::default();
        let fall = FallCriteria::default();
        Self {
            mass: robot.mass,
            com_height: robot.com_height,
            foot_length: robot.foot_length,
            foot_width: robot.foot_width,
            gravity: GRAVITY,
            com_vertical_accel: 0.0,
            step_length_x: gait.step_length.x,
            step_length_y: gait.step_length.y,
            single_support: gait.single_support,
            double_support: gait.double_support,
            swing_height: gait.swing_height,
            max_step: gait.max_step,
            lateral_offset: gait.lateral_offset,
            transfer: gait.transfer,
            first_support: gait.first_support,
            n_steps: 6,
            walk_step_length_x: 0.5,
            walk_step_length_y: 0.0,
            walk_single_support: 1.0,
            walk_double_support: 0.0,
            walk_n_steps: 6,
            walk_noise_variance: 6.25e-4,
            walk_strategy: Strategy::TorqueOnly,
            q_com: ctl.q_diag[0],
            q_dcm: ctl.q_diag[1],
            q_integral: ctl.q_diag[2],
            r: ctl.r,
            process_variance: ctl.process_variance,
            measurement_variance: ctl.measurement_variance,
            integral_limit: ctl.integral_limit,
            k_sa: adj.k_sa,
            k_f: adj.k_f,
            compliance_margin: adj.compliance_margin,
            dt_sat: adj.dt_sat,
            retarget_cutoff: adj.retarget_cutoff,
            dt: 0.002,
            fall_dcm_radius: fall.dcm_radius,
            fall_com_radius: fall.com_radius,
            settle_time: 2.0,
            settle_threshold: 0.05,
            grid_com_step: grid.com_step,
            grid_com_half_cells: grid.com_half_cells,
            grid_velocity_step: grid.velocity_step,
            grid_velocity_half_cells: grid.velocity_half_cells,
            grid_time_limit: grid.time_limit,
            grid_settle_com: grid.settle_com,
            grid_settle_velocity: grid.settle_velocity,
            grid_noise_variance: 0.0,
            sweep_n_steps: 8,
            sweep_noise_variance: 0.0,
            push_time: sweep.push_time,
            push_duration: sweep.push_duration,
            push_direction_x: sweep.direction.x,
            push_direction_y: sweep.direction.y,
            force_lo: sweep.force_lo,
            force_hi: sweep.force_hi,
            bisection_tol: sweep.tolerance,
            strategy: "all".into(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Check every field; all violations are reported together.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let mut merge = |r: Result<()>| match r {
            Ok(()) => {}
            Err(Error::Config(v)) => bad.extend(v),
            Err(e) => bad.push(e.to_string()),
        };
        merge(self.plan_setup().validate());
        merge(self.walk_setup().validate());
        merge(self.sweep_setup().validate());
        merge(self.grid_spec().validate());
        merge(self.sweep_spec(Strategy::TorqueOnly).validate());
        merge(self.strategies().map(|_| ()));
        if !(self.gravity + self.com_vertical_accel > 0.0) {
            merge(Err(Error::Config(vec!["gravity + com_vertical_accel must be > 0".into()])));
        }
        if !(self.grid_noise_variance >= 0.0) {
            merge(Err(Error::Config(vec!["grid_noise_variance must be >= 0".into()])));
        }
        bad.sort();
        bad.dedup();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }

    pub fn strategies(&self) -> Result<Vec<Strategy>> {
        if self.strategy == "all" {
            Ok(Strategy::ALL.to_vec())
        } else {
            Ok(vec![self.strategy.parse()?])
        }
    }

    pub fn robot(&self) -> RobotPhysicalParams {
        RobotPhysicalParams {
            mass: self.mass,
            com_height: self.com_height,
            foot_length: self.foot_length,
            foot_width: self.foot_width,
        }
    }

    fn gait(&self, sl: PlanarVec, ss: f64, ds: f64) -> GaitParams {
        GaitParams {
            step_length: sl,
            single_support: ss,
            double_support: ds,
            swing_height: self.swing_height,
            com_height: self.com_height,
            max_step: self.max_step,
            lateral_offset: self.lateral_offset,
            first_support: self.first_support,
            transfer: self.transfer,
        }
    }

    fn setup(&self, gait: GaitParams, n_steps: usize, noise_variance: f64, strategy: Strategy) -> WalkSetup {
        WalkSetup {
            gait,
            command: WalkCommand::StepParameters,
            n_steps,
            robot: self.robot(),
            controller: ControllerConfig {
                q_diag: [self.q_com, self.q_dcm, self.q_integral],
                r: self.r,
                process_variance: self.process_variance,
                measurement_variance: self.measurement_variance,
                integral_limit: self.integral_limit,
            },
            adjuster: AdjusterGains {
                k_sa: self.k_sa,
                k_f: self.k_f,
                compliance_margin: self.compliance_margin,
                max_step: self.max_step,
                dt_sat: self.dt_sat,
                retarget_cutoff: self.retarget_cutoff,
            },
            strategy,
            noise: NoiseModel {
                measurement_variance: noise_variance,
                rng_seed: self.seed,
            },
            dt: self.dt,
            gravity: self.gravity,
            com_vertical_accel: self.com_vertical_accel,
            fall: FallCriteria {
                dcm_radius: self.fall_dcm_radius,
                com_radius: self.fall_com_radius,
            },
            settle_time: self.settle_time,
            settle_threshold: self.settle_threshold,
            log: true,
        }
    }

    /// The diagonal example walk, noiseless.
    pub fn plan_setup(&self) -> WalkSetup {
        let sl = PlanarVec::new(self.step_length_x, self.step_length_y);
        let gait = self.gait(sl, self.single_support, self.double_support);
        self.setup(gait, self.n_steps, 0.0, Strategy::TorqueOnly)
    }

    /// Forward walk with sensor noise.
    pub fn walk_setup(&self) -> WalkSetup {
        let sl = PlanarVec::new(self.walk_step_length_x, self.walk_step_length_y);
        let gait = self.gait(sl, self.walk_single_support, self.walk_double_support);
        self.setup(gait, self.walk_n_steps, self.walk_noise_variance, self.walk_strategy)
    }

    /// Walking in place for the push sweep.
    pub fn sweep_setup(&self) -> WalkSetup {
        let gait = self.gait(PlanarVec::ZERO, self.single_support, self.double_support);
        let mut s = self.setup(gait, self.sweep_n_steps, self.sweep_noise_variance, Strategy::TorqueOnly);
        s.log = false;
        s
    }

    /// Standing on one foot for the stability grid.
    pub fn stance_setup(&self) -> WalkSetup {
        let mut s = self.plan_setup();
        s.noise.measurement_variance = self.grid_noise_variance;
        s.log = false;
        s
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            com_step: self.grid_com_step,
            com_half_cells: self.grid_com_half_cells,
            velocity_step: self.grid_velocity_step,
            velocity_half_cells: self.grid_velocity_half_cells,
            time_limit: self.grid_time_limit,
            settle_com: self.grid_settle_com,
            settle_velocity: self.grid_settle_velocity,
        }
    }

    pub fn sweep_spec(&self, strategy: Strategy) -> PushSweepSpec {
        PushSweepSpec {
            push_time: self.push_time,
            push_duration: self.push_duration,
            direction: PlanarVec::new(self.push_direction_x, self.push_direction_y),
            force_lo: self.force_lo,
            force_hi: self.force_hi,
            tolerance: self.bisection_tol,
            strategy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = RunConfig::from_json(r#"{"seed": 7, "k_sa": 0.8}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.k_sa, 0.8);
        assert_eq!(cfg.mass, 30.0);
    }

    #[test]
    fn every_violation_is_listed() {
        let cfg = RunConfig {
            mass: -1.0,
            k_f: 2.0,
            dt: 0.0,
            strategy: "hop".into(),
            ..RunConfig::default()
        };
        match cfg.validate() {
            Err(Error::Config(v)) => {
                let text = v.join("; ");
                for needle in ["mass", "k_f", "dt", "hop"] {
                    assert!(text.contains(needle), "{text}");
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_json(r#"{"mas": 3}"#).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let b = RunConfig {
            seed: 1,
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), RunConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
