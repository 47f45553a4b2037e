//! Swing-foot trajectory.
//!
//! Horizontal motion is a cubic Bezier per axis with coincident end control
//! points (zero velocity at lift-off and touchdown). Height is a quartic
//! Bezier arc whose apex is reached exactly at mid-swing.

use crate::model::PlanarVec;

/// Cubic Bezier evaluation.
fn cubic(p: [f64; 4], s: f64) -> f64 {
    let u = 1.0 - s;
    u * u * u * p[0] + 3.0 * u * u * s * p[1] + 3.0 * u * s * s * p[2] + s * s * s * p[3]
}

/// Derivative of [`cubic`] with respect to `s`.
fn cubic_ds(p: [f64; 4], s: f64) -> f64 {
    let u = 1.0 - s;
    3.0 * u * u * (p[1] - p[0]) + 6.0 * u * s * (p[2] - p[1]) + 3.0 * s * s * (p[3] - p[2])
}

fn quartic(p: [f64; 5], s: f64) -> f64 {
    let u = 1.0 - s;
    u.powi(4) * p[0]
        + 4.0 * u.powi(3) * s * p[1]
        + 6.0 * u * u * s * s * p[2]
        + 4.0 * u * s.powi(3) * p[3]
        + s.powi(4) * p[4]
}

fn quartic_ds(p: [f64; 5], s: f64) -> f64 {
    let u = 1.0 - s;
    4.0 * (u.powi(3) * (p[1] - p[0])
        + 3.0 * u * u * s * (p[2] - p[1])
        + 3.0 * u * s * s * (p[3] - p[2])
        + s.powi(3) * (p[4] - p[3]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwingTrajectory {
    t_start: f64,
    t_end: f64,
    x: [f64; 4],
    y: [f64; 4],
    z: [f64; 5],
    apex_control: f64,
    apex_time: f64,
}

impl SwingTrajectory {
    /// Fresh swing from `lift_from` to `land_at` over `[t_start, t_start + duration]`.
    pub fn new(
        lift_from: PlanarVec,
        land_at: PlanarVec,
        t_start: f64,
        duration: f64,
        swing_height: f64,
    ) -> Self {
        // quartic with controls [0, 0, a, 0, 0] peaks at 6a/16 for s = 1/2
        let apex_control = swing_height * 8.0 / 3.0;
        Self {
            t_start,
            t_end: t_start + duration,
            x: [lift_from.x, lift_from.x, land_at.x, land_at.x],
            y: [lift_from.y, lift_from.y, land_at.y, land_at.y],
            z: [0.0, 0.0, apex_control, 0.0, 0.0],
            apex_control,
            apex_time: t_start + 0.5 * duration,
        }
    }

    fn phase(&self, t: f64) -> f64 {
        let d = self.t_end - self.t_start;
        if d <= 0.0 {
            return 1.0;
        }
        ((t - self.t_start) / d).clamp(0.0, 1.0)
    }

    pub fn land_at(&self) -> PlanarVec {
        PlanarVec::new(self.x[3], self.y[3])
    }

    pub fn touchdown_time(&self) -> f64 {
        self.t_end
    }

    pub fn position(&self, t: f64) -> [f64; 3] {
        let s = self.phase(t);
        [cubic(self.x, s), cubic(self.y, s), quartic(self.z, s)]
    }

    pub fn velocity(&self, t: f64) -> [f64; 3] {
        let d = self.t_end - self.t_start;
        if d <= 0.0 || t < self.t_start || t > self.t_end {
            return [0.0; 3];
        }
        let s = self.phase(t);
        [
            cubic_ds(self.x, s) / d,
            cubic_ds(self.y, s) / d,
            quartic_ds(self.z, s) / d,
        ]
    }

    /// Replan the rest of the swing from the state at `t_now` so that it
    /// lands on `land_at` at `t_land`. Position and velocity are continuous
    /// across the replan.
    pub fn retarget(&mut self, t_now: f64, land_at: PlanarVec, t_land: f64) {
        let t_now = t_now.clamp(self.t_start, self.t_end.max(self.t_start));
        let pos = self.position(t_now);
        let vel = self.velocity(t_now);
        let d = t_land - t_now;
        if d <= 1e-9 {
            self.t_start = t_now;
            self.t_end = t_now;
            self.x = [land_at.x; 4];
            self.y = [land_at.y; 4];
            self.z = [0.0; 5];
            return;
        }
        self.x = [pos[0], pos[0] + vel[0] * d / 3.0, land_at.x, land_at.x];
        self.y = [pos[1], pos[1] + vel[1] * d / 3.0, land_at.y, land_at.y];
        let z1 = pos[2] + vel[2] * d / 4.0;
        let z2 = if t_now < self.apex_time {
            self.apex_control
        } else {
            pos[2]
        };
        self.z = [pos[2], z1, z2, 0.0, 0.0];
        self.t_start = t_now;
        self.t_end = t_land;
    }
}

/// Swing-foot position `t` seconds after lift-off for a swing lasting
/// `single_support` seconds.
pub fn plan_swing(
    t: f64,
    lift_from: PlanarVec,
    land_at: PlanarVec,
    single_support: f64,
    swing_height: f64,
) -> [f64; 3] {
    SwingTrajectory::new(lift_from, land_at, 0.0, single_support, swing_height).position(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: PlanarVec = PlanarVec::new(0.0, -0.1);
    const B: PlanarVec = PlanarVec::new(0.5, 0.4);

    #[test]
    fn boundary_conditions_are_exact() {
        let p = plan_swing(0.0, A, B, 0.8, 0.025);
        assert_eq!(p, [A.x, A.y, 0.0]);
        let p = plan_swing(0.8, A, B, 0.8, 0.025);
        assert_eq!(p, [B.x, B.y, 0.0]);
        let apex = plan_swing(0.4, A, B, 0.8, 0.025);
        assert!((apex[2] - 0.025).abs() < 1e-12);
    }

    #[test]
    fn boundary_velocity_is_zero() {
        let s = SwingTrajectory::new(A, B, 1.0, 0.8, 0.025);
        for t in [1.0, 1.8] {
            let v = s.velocity(t);
            assert!(v.iter().all(|c| c.abs() < 1e-12), "{v:?}");
        }
    }

    #[test]
    fn apex_is_the_maximum_height() {
        let s = SwingTrajectory::new(A, B, 0.0, 0.8, 0.025);
        let max = (0..=800)
            .map(|k| s.position(k as f64 * 0.001)[2])
            .fold(f64::MIN, f64::max);
        assert!((max - 0.025).abs() < 1e-12);
    }

    #[test]
    fn retarget_is_c1_and_lands_on_target() {
        let mut s = SwingTrajectory::new(A, B, 0.0, 0.8, 0.025);
        let t = 0.3;
        let (p0, v0) = (s.position(t), s.velocity(t));
        let target = PlanarVec::new(0.9, 0.3);
        s.retarget(t, target, 0.65);
        let (p1, v1) = (s.position(t), s.velocity(t));
        for i in 0..3 {
            assert!((p0[i] - p1[i]).abs() < 1e-12);
            assert!((v0[i] - v1[i]).abs() < 1e-9);
        }
        let end = s.position(0.65);
        assert!((end[0] - 0.9).abs() < 1e-12 && (end[1] - 0.3).abs() < 1e-12);
        assert!(end[2].abs() < 1e-12);
        assert_eq!(s.land_at(), target);
    }
}
