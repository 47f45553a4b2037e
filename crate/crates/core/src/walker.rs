//! Closed-loop walking: state machine, planners, adjusters, LQG and plant
//! advanced together at a fixed control period.

use serde::{Deserialize, Serialize};

use crate::adjuster::{
    adjust_location, adjust_time, predict_dcm_at_landing, step_location_error, AdjusterGains,
};
use crate::error::{Error, Result};
use crate::lqg::{ControllerConfig, ControllerState, GainSet};
use crate::model::{LipmState, PendulumParams, PlanarVec};
use crate::planner::{
    plan_footprints, plan_walk, walking_segments, FootstepPlan, GaitParams, ReferencePlan,
    ReferenceFrame, SwingTrajectory, WalkCommand,
};
use crate::plant::{
    is_fallen, saturate_zmp, step_dynamics, FallCriteria, NoiseModel, PushEvent,
    RobotPhysicalParams, Sensor, SupportPolygon,
};
use crate::state_machine::{tick, Command, PhaseClock, WalkPhase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    TorqueOnly,
    Location,
    #[serde(rename = "location+time", alias = "location_time")]
    LocationTime,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::TorqueOnly, Strategy::Location, Strategy::LocationTime];

    pub fn adjusts_location(self) -> bool {
        matches!(self, Strategy::Location | Strategy::LocationTime)
    }

    pub fn adjusts_time(self) -> bool {
        self == Strategy::LocationTime
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::TorqueOnly => "torque_only",
            Strategy::Location => "location",
            Strategy::LocationTime => "location+time",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torque_only" => Ok(Strategy::TorqueOnly),
            "location" => Ok(Strategy::Location),
            "location+time" | "location_time" => Ok(Strategy::LocationTime),
            other => Err(Error::Config(vec![format!("unknown strategy {other:?}")])),
        }
    }
}

/// Everything a closed-loop walk needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSetup {
    pub gait: GaitParams,
    pub command: WalkCommand,
    pub n_steps: usize,
    pub robot: RobotPhysicalParams,
    pub controller: ControllerConfig,
    pub adjuster: AdjusterGains,
    pub strategy: Strategy,
    pub noise: NoiseModel,
    pub dt: f64,
    pub gravity: f64,
    pub com_vertical_accel: f64,
    pub fall: FallCriteria,
    /// Time simulated after the reference comes to rest.
    pub settle_time: f64,
    /// Largest terminal DCM error counted as recovered.
    pub settle_threshold: f64,
    /// Keep the per-cycle log.
    pub log: bool,
}

impl WalkSetup {
    pub fn omega(&self) -> Result<f64> {
        Ok(PendulumParams::new(self.gait.com_height, self.com_vertical_accel, self.gravity)?.omega())
    }

    pub fn gains(&self) -> Result<GainSet> {
        GainSet::synthesize(self.omega()?, self.dt, &self.controller)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        for r in [
            self.gait.validate(),
            self.robot.validate(),
            self.controller.validate(),
            self.adjuster.validate(),
        ] {
            if let Err(Error::Config(v)) = r {
                bad.extend(v);
            }
        }
        if self.n_steps == 0 {
            bad.push("n_steps must be >= 1".into());
        }
        if !(self.dt > 0.0) {
            bad.push("dt must be > 0".into());
        }
        if !(self.noise.measurement_variance >= 0.0) {
            bad.push("noise variance must be >= 0".into());
        }
        if !(self.settle_time >= 0.0) {
            bad.push("settle_time must be >= 0".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Recovered,
    Fallen,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Recovered => "recovered",
            Verdict::Fallen => "fallen",
        }
    }
}

/// One control cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleLog {
    pub t: f64,
    pub phase: &'static str,
    pub step: usize,
    pub zmp_ref_x: f64,
    pub zmp_ref_y: f64,
    pub com_ref_x: f64,
    pub com_ref_y: f64,
    pub dcm_ref_x: f64,
    pub dcm_ref_y: f64,
    pub com_x: f64,
    pub com_y: f64,
    pub dcm_x: f64,
    pub dcm_y: f64,
    pub com_meas_x: f64,
    pub com_meas_y: f64,
    pub dcm_meas_x: f64,
    pub dcm_meas_y: f64,
    pub p_cmd_x: f64,
    pub p_cmd_y: f64,
    pub p_applied_x: f64,
    pub p_applied_y: f64,
    pub delta_f_x: f64,
    pub delta_f_y: f64,
    pub delta_p_x: f64,
    pub delta_p_y: f64,
    pub delta_t: f64,
    pub t_ss: f64,
    pub landing_x: f64,
    pub landing_y: f64,
    /// Landing footprint distance from the support foot.
    pub step_displacement: f64,
    pub swing_x: f64,
    pub swing_y: f64,
    pub swing_z: f64,
    pub step_clamped: bool,
    pub time_clamped: bool,
}

/// Where and when a step came down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Landing {
    pub step: usize,
    pub time: f64,
    pub position: PlanarVec,
    pub displacement: f64,
    pub single_support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub verdict: Verdict,
    pub fall_time: Option<f64>,
    pub log: Vec<CycleLog>,
    pub landings: Vec<Landing>,
    /// Largest `|ζ − ζ_ref|` of the true state.
    pub peak_dcm_error: f64,
    pub rms_dcm_error: f64,
    pub terminal_dcm_error: f64,
    pub max_step_displacement: f64,
    pub max_abs_delta_t: f64,
    /// `Δf`, `δp` and `Δt` on the first cycle `Δf` left the compliance
    /// margin.
    pub first_adjustment: Option<(PlanarVec, PlanarVec, f64)>,
    pub cycles: usize,
}

/// Per-step bookkeeping of the adjusters.
struct StepTargets {
    nominal_landing: PlanarVec,
    nominal_landing_dcm: PlanarVec,
    swing: SwingTrajectory,
}

pub struct Walker<'a> {
    setup: &'a WalkSetup,
    omega: f64,
    gains: GainSet,
    plan: FootstepPlan,
    reference: ReferencePlan,
    state: LipmState,
    sensor: Sensor,
    controller: ControllerState,
    phase: WalkPhase,
    clock: PhaseClock,
    step: usize,
    step_start: f64,
    targets: Option<StepTargets>,
    k: usize,
}

impl<'a> Walker<'a> {
    /// Robot at rest between its home feet, or in `initial` if given.
    pub fn new(setup: &'a WalkSetup, initial: Option<LipmState>) -> Result<Self> {
        setup.validate()?;
        let omega = setup.omega()?;
        let gains = setup.gains()?;
        let plan = plan_footprints(setup.command, setup.n_steps, &setup.gait, PlanarVec::ZERO)?;
        let reference = plan_walk(&plan, &setup.gait, 0.0, omega);
        let home = plan.footprints[0].position.midpoint(plan.footprints[1].position);
        let gait = &setup.gait;
        let clock = PhaseClock::new(
            gait.single_support,
            gait.double_support,
            gait.transfer_duration(),
        );
        let phase = tick(WalkPhase::Idle, clock, setup.dt, Command::Start).phase;
        Ok(Self {
            setup,
            omega,
            gains,
            plan,
            reference,
            state: initial.unwrap_or_else(|| LipmState::at_rest(home)),
            sensor: Sensor::new(&setup.noise)?,
            controller: ControllerState::new(),
            phase,
            clock,
            step: 0,
            step_start: 0.0,
            targets: None,
            k: 0,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gains(&self) -> &GainSet {
        &self.gains
    }

    pub fn reference(&self) -> &ReferencePlan {
        &self.reference
    }

    pub fn footsteps(&self) -> &FootstepPlan {
        &self.plan
    }

    fn support_polygon(&self) -> SupportPolygon {
        let r = &self.setup.robot;
        let f = &self.plan.footprints;
        match self.phase {
            WalkPhase::SingleSupport => SupportPolygon::single(self.plan.support(self.step).position, r),
            WalkPhase::DoubleSupport => SupportPolygon::double(
                self.plan.support(self.step).position,
                self.plan.landing(self.step).position,
                r,
            ),
            WalkPhase::Initialize => SupportPolygon::double(f[0].position, f[1].position, r),
            WalkPhase::Idle => {
                let n = self.plan.n_steps();
                SupportPolygon::double(f[n].position, f[n + 1].position, r)
            }
        }
    }

    fn begin_step(&mut self) {
        let gait = &self.setup.gait;
        let t_land = self.step_start + self.clock.nominal_single_support;
        self.targets = Some(StepTargets {
            nominal_landing: self.plan.landing(self.step).position,
            nominal_landing_dcm: self.reference.dcm(t_land),
            swing: SwingTrajectory::new(
                self.plan.swing_origin(self.step).position,
                self.plan.landing(self.step).position,
                self.step_start,
                self.clock.single_support,
                gait.swing_height,
            ),
        });
    }

    fn replan(&mut self, t: f64) {
        let (anchor, _) = self.reference.com(t);
        let segments = walking_segments(
            &self.plan,
            self.step,
            self.step_start,
            self.clock.single_support,
            &self.setup.gait,
        );
        self.reference = ReferencePlan::new(segments, self.omega, (t, anchor));
        if let Some(tg) = self.targets.as_mut() {
            tg.swing.retarget(
                t,
                self.plan.landing(self.step).position,
                self.step_start + self.clock.single_support,
            );
        }
    }

    /// Run the adjusters for the current cycle.
    fn adjust(&mut self, t: f64) -> crate::adjuster::Adjustment {
        let mut out = crate::adjuster::Adjustment {
            single_support: self.clock.single_support,
            ..Default::default()
        };
        let strategy = self.setup.strategy;
        if self.phase != WalkPhase::SingleSupport || strategy == Strategy::TorqueOnly {
            return out;
        }
        let Some(tg) = self.targets.as_ref() else {
            return out;
        };
        let gains = &self.setup.adjuster;
        let tau = self.clock.t;
        let support = self.plan.support(self.step).position;
        let dcm = self.controller.estimated_dcm();
        let predicted =
            predict_dcm_at_landing(dcm, support, tau, self.clock.single_support, self.omega);
        let delta_f = step_location_error(predicted, tg.nominal_landing_dcm);
        out.delta_f = delta_f;
        let (nominal_landing, target) = (tg.nominal_landing, tg.nominal_landing_dcm);
        let mut changed = false;
        if strategy.adjusts_location()
            && tau < gains.retarget_cutoff * self.clock.nominal_single_support
        {
            let delta_p = adjust_location(delta_f, gains);
            out.delta_p = delta_p;
            let before = self.plan.landing(self.step).position;
            // δp opposes the error, so the footprint moves along Δf
            out.step_clamped = self.plan.retarget(self.step + 2, nominal_landing, -delta_p);
            changed |= self.plan.landing(self.step).position != before;
        }
        if strategy.adjusts_time() {
            let nominal = self.clock.nominal_single_support;
            let current = self.clock.single_support;
            let next = if delta_f.norm() > gains.compliance_margin {
                let ta = adjust_time(
                    dcm, support, target, delta_f, tau, nominal, current, self.omega, gains,
                );
                out.time_clamped = ta.clamped;
                ta.single_support
            } else {
                current + gains.k_f * (nominal - current)
            };
            if next != current {
                self.clock.single_support = next;
                changed = true;
            }
        }
        out.delta_t = self.clock.single_support - self.clock.nominal_single_support;
        out.single_support = self.clock.single_support;
        out.active = out.delta_p != PlanarVec::ZERO || out.delta_t != 0.0;
        if changed {
            self.replan(t);
        }
        out
    }

    /// Simulate until the reference has rested for `settle_time` or the
    /// robot falls.
    pub fn run(mut self, pushes: &[PushEvent]) -> Result<TrialResult> {
        let setup = self.setup;
        let dt = setup.dt;
        let t_final = self.reference.end_time() + setup.settle_time;
        let n_cycles = (t_final / dt).ceil() as usize;
        let mut log = Vec::with_capacity(if setup.log { n_cycles } else { 0 });
        let mut landings = Vec::new();
        let mut sq_sum = 0.0;
        let mut peak: f64 = 0.0;
        let mut terminal = 0.0;
        let mut max_disp: f64 = 0.0;
        let mut max_dt: f64 = 0.0;
        let mut first_adjustment = None;
        let mut fall_time = None;
        while self.k < n_cycles {
            let t = self.k as f64 * dt;
            let (com_meas, dcm_meas) = self.sensor.measure(&self.state, self.omega);
            self.controller.update_estimate(com_meas, dcm_meas, &self.gains);
            let adj = self.adjust(t);
            if first_adjustment.is_none() && adj.delta_f.norm() > setup.adjuster.compliance_margin {
                first_adjustment = Some((adj.delta_f, adj.delta_p, adj.delta_t));
            }
            let mut frame = self.reference.sample(t);
            let stepping = self.phase == WalkPhase::SingleSupport;
            frame.swing = match (&self.targets, stepping) {
                (Some(tg), true) => tg.swing.position(t),
                _ => [0.0; 3],
            };
            let held = ReferenceFrame {
                zmp: self.reference.held_zmp(t, dt),
                ..frame
            };
            let p_cmd = self.controller.command(&held, &self.gains);
            let polygon = self.support_polygon();
            let p_applied = saturate_zmp(p_cmd, &polygon);
            self.controller.set_applied(p_applied);

            let dcm = self.state.dcm(self.omega);
            let err = (dcm - frame.dcm).norm();
            sq_sum += err * err;
            peak = peak.max(err);
            terminal = err;
            let (landing, displacement) = if self.phase.is_stepping() {
                let l = self.plan.landing(self.step).position;
                (l, (l - self.plan.support(self.step).position).norm())
            } else {
                (PlanarVec::ZERO, 0.0)
            };
            max_disp = max_disp.max(displacement);
            max_dt = max_dt.max(adj.delta_t.abs());
            if setup.log {
                log.push(CycleLog {
                    t,
                    phase: self.phase.as_str(),
                    step: self.step,
                    zmp_ref_x: frame.zmp.x,
                    zmp_ref_y: frame.zmp.y,
                    com_ref_x: frame.com.x,
                    com_ref_y: frame.com.y,
                    dcm_ref_x: frame.dcm.x,
                    dcm_ref_y: frame.dcm.y,
                    com_x: self.state.com.x,
                    com_y: self.state.com.y,
                    dcm_x: dcm.x,
                    dcm_y: dcm.y,
                    com_meas_x: com_meas.x,
                    com_meas_y: com_meas.y,
                    dcm_meas_x: dcm_meas.x,
                    dcm_meas_y: dcm_meas.y,
                    p_cmd_x: p_cmd.x,
                    p_cmd_y: p_cmd.y,
                    p_applied_x: p_applied.x,
                    p_applied_y: p_applied.y,
                    delta_f_x: adj.delta_f.x,
                    delta_f_y: adj.delta_f.y,
                    delta_p_x: adj.delta_p.x,
                    delta_p_y: adj.delta_p.y,
                    delta_t: adj.delta_t,
                    t_ss: adj.single_support,
                    landing_x: landing.x,
                    landing_y: landing.y,
                    step_displacement: displacement,
                    swing_x: frame.swing[0],
                    swing_y: frame.swing[1],
                    swing_z: frame.swing[2],
                    step_clamped: adj.step_clamped,
                    time_clamped: adj.time_clamped,
                });
            }

            let feet: Vec<PlanarVec> = self.plan.footprints.iter().map(|f| f.position).collect();
            if is_fallen(&self.state, &polygon, &feet, self.omega, &setup.fall) {
                fall_time = Some(t);
                self.k += 1;
                break;
            }

            self.state =
                step_dynamics(&self.state, p_applied, pushes, t, dt, setup.robot.mass, self.omega);
            let last_step = self.step + 1 >= self.plan.n_steps();
            let cmd = if self.phase.is_stepping() && last_step {
                Command::Stop
            } else {
                Command::None
            };
            let used_ss = self.clock.single_support;
            let out = tick(self.phase, self.clock, dt, cmd);
            self.phase = out.phase;
            self.clock = out.clock;
            let t_next = t + dt;
            if out.stepping_started {
                self.step = 0;
                self.step_start = t_next - self.clock.t;
                self.begin_step();
            } else if out.step_completed {
                let land = self.plan.landing(self.step).position;
                landings.push(Landing {
                    step: self.step,
                    time: self.step_start + used_ss,
                    position: land,
                    displacement: (land - self.plan.support(self.step).position).norm(),
                    single_support: used_ss,
                });
                if self.phase == WalkPhase::SingleSupport {
                    self.step += 1;
                    self.step_start = t_next - self.clock.t;
                    self.begin_step();
                } else {
                    self.targets = None;
                }
            }
            self.k += 1;
        }
        let cycles = self.k;
        let verdict = if fall_time.is_none() && terminal < setup.settle_threshold {
            Verdict::Recovered
        } else {
            Verdict::Fallen
        };
        Ok(TrialResult {
            verdict,
            fall_time,
            log,
            landings,
            peak_dcm_error: peak,
            rms_dcm_error: (sq_sum / cycles.max(1) as f64).sqrt(),
            terminal_dcm_error: terminal,
            max_step_displacement: max_disp,
            max_abs_delta_t: max_dt,
            first_adjustment,
            cycles,
        })
    }
}

/// Closed-loop walk under `pushes`.
pub fn simulate_walk(
    setup: &WalkSetup,
    initial: Option<LipmState>,
    pushes: &[PushEvent],
) -> Result<TrialResult> {
    Walker::new(setup, initial)?.run(pushes)
}
