//! Simulated robot: the pendulum under a saturated ZMP, external pushes on
//! the COM, and noisy COM/DCM sensing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{com_velocity_from_dcm, propagate_com, DcmPath, LipmState, PlanarVec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotPhysicalParams {
    pub mass: f64,
    pub com_height: f64,
    pub foot_length: f64,
    pub foot_width: f64,
}

impl Default for RobotPhysicalParams {
    fn default() -> Self {
        Self {
            mass: 30.0,
            com_height: 1.0,
            foot_length: 0.15,
            foot_width: 0.075,
        }
    }
}

impl RobotPhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        for (v, name) in [
            (self.mass, "mass"),
            (self.com_height, "com_height"),
            (self.foot_length, "foot_length"),
            (self.foot_width, "foot_width"),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("{name} must be > 0"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }
}

/// Constant force on the COM over `[start_time, start_time + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushEvent {
    pub force: PlanarVec,
    pub start_time: f64,
    pub duration: f64,
}

impl PushEvent {
    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration
    }

    pub fn is_active(&self, t: f64) -> bool {
        t >= self.start_time && t < self.end_time()
    }
}

/// Gaussian measurement noise, independent per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub measurement_variance: f64,
    pub rng_seed: u64,
}

/// Axis-aligned rectangle admissible for the ZMP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportPolygon {
    pub lo: PlanarVec,
    pub hi: PlanarVec,
}

impl SupportPolygon {
    /// One foot centred on `foot`.
    pub fn single(foot: PlanarVec, robot: &RobotPhysicalParams) -> Self {
        Self::double(foot, foot, robot)
    }

    /// Bounding rectangle of two feet.
    pub fn double(a: PlanarVec, b: PlanarVec, robot: &RobotPhysicalParams) -> Self {
        let (hl, hw) = (0.5 * robot.foot_length, 0.5 * robot.foot_width);
        Self {
            lo: PlanarVec::new(a.x.min(b.x) - hl, a.y.min(b.y) - hw),
            hi: PlanarVec::new(a.x.max(b.x) + hl, a.y.max(b.y) + hw),
        }
    }

    pub fn center(&self) -> PlanarVec {
        self.lo.midpoint(self.hi)
    }

    pub fn contains(&self, p: PlanarVec) -> bool {
        (self.lo.x..=self.hi.x).contains(&p.x) && (self.lo.y..=self.hi.y).contains(&p.y)
    }
}

pub fn saturate_zmp(p: PlanarVec, polygon: &SupportPolygon) -> PlanarVec {
    let (lo, hi) = (polygon.lo, polygon.hi);
    PlanarVec::new(p.x.clamp(lo.x, hi.x), p.y.clamp(lo.y, hi.y))
}

/// Advance the plant by `dt` from time `t` under a ZMP held at `zmp`.
///
/// The interval is split wherever a push starts or stops; on each piece the
/// push acceleration `a` is constant and is folded into an equivalent ZMP
/// `zmp − a/ω²`, which makes the update exact.
pub fn step_dynamics(
    state: &LipmState,
    zmp: PlanarVec,
    pushes: &[PushEvent],
    t: f64,
    dt: f64,
    mass: f64,
    omega: f64,
) -> LipmState {
    let t_end = t + dt;
    let mut cuts = vec![t, t_end];
    for p in pushes {
        for edge in [p.start_time, p.end_time()] {
            if edge > t && edge < t_end {
                cuts.push(edge);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut s = *state;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let accel = pushes
            .iter()
            .filter(|p| p.is_active(mid))
            .fold(PlanarVec::ZERO, |acc, p| acc + p.force / mass);
        let pivot = zmp - accel / (omega * omega);
        let path = DcmPath {
            dcm0: s.dcm(omega),
            zmp: pivot,
        };
        s = propagate_com(&s, &path, b - a, omega);
    }
    s
}

/// Noisy COM and DCM sensor with its own random stream.
#[derive(Debug, Clone)]
pub struct Sensor {
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
}

impl Sensor {
    pub fn new(noise: &NoiseModel) -> Result<Self> {
        if !(noise.measurement_variance >= 0.0) {
            return Err(Error::Config(vec![
                "measurement_variance must be >= 0".into()
            ]));
        }
        let normal = if noise.measurement_variance > 0.0 {
            Some(Normal::new(0.0, noise.measurement_variance.sqrt()).expect("finite std"))
        } else {
            None
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(noise.rng_seed),
            normal,
        })
    }

    fn draw(&mut self) -> f64 {
        match &self.normal {
            Some(n) => n.sample(&mut self.rng),
            None => 0.0,
        }
    }

    /// Measured COM and DCM. Each of the four channels gets its own draw.
    pub fn measure(&mut self, state: &LipmState, omega: f64) -> (PlanarVec, PlanarVec) {
        let dcm = state.dcm(omega);
        let com = state.com + PlanarVec::new(self.draw(), self.draw());
        let dcm = dcm + PlanarVec::new(self.draw(), self.draw());
        (com, dcm)
    }
}

/// One-shot measurement with a fresh stream seeded from `noise`.
pub fn measure(state: &LipmState, noise: &NoiseModel, omega: f64) -> Result<(PlanarVec, PlanarVec)> {
    Ok(Sensor::new(noise)?.measure(state, omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FallCriteria {
    /// Largest DCM distance from the support centre.
    pub dcm_radius: f64,
    /// Largest COM distance from the nearest footprint.
    pub com_radius: f64,
}

impl Default for FallCriteria {
    fn default() -> Self {
        Self {
            dcm_radius: 1.2,
            com_radius: 2.0,
        }
    }
}

pub fn is_fallen(
    state: &LipmState,
    support: &SupportPolygon,
    footprints: &[PlanarVec],
    omega: f64,
    criteria: &FallCriteria,
) -> bool {
    if !state.is_finite() {
        return true;
    }
    if (state.dcm(omega) - support.center()).norm() > criteria.dcm_radius {
        return true;
    }
    let nearest = footprints
        .iter()
        .map(|f| (state.com - *f).norm())
        .fold(f64::INFINITY, f64::min);
    nearest.is_finite() && nearest > criteria.com_radius
}

/// State with the given COM whose DCM is `dcm`.
pub fn state_with_dcm(com: PlanarVec, dcm: PlanarVec, omega: f64) -> LipmState {
    LipmState::new(com, com_velocity_from_dcm(com, dcm, omega))
}
