use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PlanarVec;
use crate::state_machine::Side;

/// Nominal gait description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitParams {
    /// Displacement between consecutive footprints, lateral offset aside.
    pub step_length: PlanarVec,
    pub single_support: f64,
    pub double_support: f64,
    pub swing_height: f64,
    pub com_height: f64,
    /// Largest admissible footprint displacement from the support foot.
    pub max_step: f64,
    /// Distance of each foot from the walking line.
    pub lateral_offset: f64,
    pub first_support: Side,
    /// Duration of the weight-shift ramps that open and close a walk.
    pub transfer: f64,
}

impl Default for GaitParams {
    /// The six-step diagonal example walk.
    fn default() -> Self {
        Self {
            step_length: PlanarVec::new(0.5, 0.5),
            single_support: 0.8,
            double_support: 0.2,
            swing_height: 0.025,
            com_height: 1.0,
            max_step: 0.95,
            lateral_offset: 0.1,
            first_support: Side::Left,
            transfer: 0.6,
        }
    }
}

impl GaitParams {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                bad.push(msg.to_string());
            }
        };
        check(self.step_length.is_finite(), "step_length must be finite");
        check(self.single_support > 0.0, "single_support must be > 0");
        check(self.double_support >= 0.0, "double_support must be >= 0");
        check(self.swing_height > 0.0, "swing_height must be > 0");
        check(self.com_height > 0.0, "com_height must be > 0");
        check(self.max_step > 0.0, "max_step must be > 0");
        check(self.lateral_offset >= 0.0, "lateral_offset must be >= 0");
        check(self.transfer > 0.0, "transfer must be > 0");
        check(
            self.step_length.norm() <= self.max_step,
            "|step_length| must not exceed max_step",
        );
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }

    pub fn transfer_duration(&self) -> f64 {
        self.transfer
    }
}

/// How the walk is commanded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WalkCommand {
    /// Use the step length in [`GaitParams`].
    StepParameters,
    /// Desired average velocity; converted to a per-step displacement.
    Velocity(PlanarVec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub position: PlanarVec,
    pub index: usize,
    pub side: Side,
}

/// Footprint sequence for a walk of `n_steps` steps.
///
/// Entries 0 and 1 are the two feet at rest before walking (1 is the first
/// support foot); step `k` stands on entry `k + 1` and swings the foot at
/// entry `k` to entry `k + 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootstepPlan {
    pub footprints: Vec<Footprint>,
    pub step_length: PlanarVec,
    pub lateral_offset: f64,
    pub max_step: f64,
}

impl FootstepPlan {
    pub fn n_steps(&self) -> usize {
        self.footprints.len() - 2
    }

    pub fn support(&self, step: usize) -> &Footprint {
        &self.footprints[step + 1]
    }

    pub fn landing(&self, step: usize) -> &Footprint {
        &self.footprints[step + 2]
    }

    pub fn swing_origin(&self, step: usize) -> &Footprint {
        &self.footprints[step]
    }

    /// Nominal successor of footprint `prev` under this plan's gait.
    fn successor(&self, prev: &Footprint) -> Footprint {
        let side = prev.side.opposite();
        let lateral = PlanarVec::new(0.0, 2.0 * self.lateral_offset * side.lateral_sign());
        Footprint {
            position: prev.position + self.step_length + lateral,
            index: prev.index + 1,
            side,
        }
    }

    /// Move footprint `index` to `nominal + shift`, saturated to `max_step`
    /// from the preceding footprint, and re-chain every later footprint from
    /// it. Returns true when the saturation was active.
    pub fn retarget(&mut self, index: usize, nominal: PlanarVec, shift: PlanarVec) -> bool {
        assert!(index >= 2 && index < self.footprints.len());
        let support = self.footprints[index - 1].position;
        let (position, clamped) = clamp_displacement(support, nominal, shift, self.max_step);
        self.footprints[index].position = position;
        for j in index + 1..self.footprints.len() {
            self.footprints[j] = self.successor(&self.footprints[j - 1]);
        }
        clamped
    }
}

/// `nominal + shift` saturated so that it lies within `max_step` of
/// `support`. The shift is scaled back along its own direction; a nominal
/// target that is itself out of reach is pulled in radially.
pub fn clamp_displacement(
    support: PlanarVec,
    nominal: PlanarVec,
    shift: PlanarVec,
    max_step: f64,
) -> (PlanarVec, bool) {
    let a = nominal - support;
    let target = a + shift;
    if target.norm() <= max_step {
        return (nominal + shift, false);
    }
    if a.norm() >= max_step {
        return (within(support, a, max_step), true);
    }
    // largest s in [0, 1] with |a + s·shift| = max_step
    let bb = shift.x * shift.x + shift.y * shift.y;
    let ab = a.x * shift.x + a.y * shift.y;
    let aa = a.x * a.x + a.y * a.y;
    let disc = (ab * ab - bb * (aa - max_step * max_step)).max(0.0);
    let s = ((-ab + disc.sqrt()) / bb).clamp(0.0, 1.0);
    (within(support, a + shift * s, max_step), true)
}

/// `support + d` with `d` shortened until the rounded distance back to
/// `support` does not exceed `max`.
fn within(support: PlanarVec, d: PlanarVec, max: f64) -> PlanarVec {
    let mut out = support + d;
    let mut scale: f64 = 1.0;
    while (out - support).norm() > max {
        scale = scale.min(max / d.norm()) * (1.0 - f64::EPSILON);
        out = support + d * scale;
    }
    out
}

/// Plan an alternating footprint sequence.
///
/// The two feet start at `±lateral_offset` about the origin; every further
/// footprint advances by the step length from its predecessor. `shift` is
/// applied to the first landing footprint and saturated to `max_step`.
pub fn plan_footprints(
    command: WalkCommand,
    n_steps: usize,
    params: &GaitParams,
    shift: PlanarVec,
) -> Result<FootstepPlan> {
    params.validate()?;
    if n_steps == 0 {
        return Err(Error::Config(vec!["n_steps must be >= 1".into()]));
    }
    let step_length = match command {
        WalkCommand::StepParameters => params.step_length,
        WalkCommand::Velocity(v) => v * (params.single_support + params.double_support),
    };
    if step_length.norm() > params.max_step {
        return Err(Error::Config(vec![
            "commanded step length exceeds max_step".into()
        ]));
    }
    let first = params.first_support;
    let home = |side: Side, index| Footprint {
        position: PlanarVec::new(0.0, params.lateral_offset * side.lateral_sign()),
        index,
        side,
    };
    let mut plan = FootstepPlan {
        footprints: vec![home(first.opposite(), 0), home(first, 1)],
        step_length,
        lateral_offset: params.lateral_offset,
        max_step: params.max_step,
    };
    for _ in 0..n_steps {
        let next = plan.successor(plan.footprints.last().unwrap());
        plan.footprints.push(next);
    }
    let nominal = plan.footprints[2].position;
    plan.retarget(2, nominal, shift);
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_ladder() {
        let params = GaitParams::default();
        let plan =
            plan_footprints(WalkCommand::StepParameters, 6, &params, PlanarVec::ZERO).unwrap();
        assert_eq!(plan.footprints.len(), 8);
        for pair in plan.footprints.windows(2) {
            assert_ne!(pair[0].side, pair[1].side);
        }
        for j in 2..plan.footprints.len() {
            let prev = plan.footprints[j - 1];
            let f = plan.footprints[j];
            let d = f.position - prev.position;
            assert!((d.x - 0.5).abs() < 1e-12);
            assert!((d.y - 0.5 - 0.2 * f.side.lateral_sign()).abs() < 1e-12);
            assert!(d.norm() <= params.max_step);
            // the first swing starts from a home position; later ones
            // cover two steps
            let same_side = plan.footprints[j - 2];
            let stride = f.position - same_side.position;
            let expect = if j == 2 { 0.5 } else { 1.0 };
            assert!((stride - PlanarVec::new(expect, expect)).norm() < 1e-12);
        }
    }

    #[test]
    fn walking_in_place_reuses_home_positions() {
        let params = GaitParams {
            step_length: PlanarVec::ZERO,
            ..GaitParams::default()
        };
        let plan =
            plan_footprints(WalkCommand::StepParameters, 6, &params, PlanarVec::ZERO).unwrap();
        for f in &plan.footprints {
            let expect = PlanarVec::new(0.0, 0.1 * f.side.lateral_sign());
            assert!((f.position - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn oversized_shift_is_clamped_along_its_direction() {
        let params = GaitParams {
            step_length: PlanarVec::ZERO,
            lateral_offset: 0.0,
            ..GaitParams::default()
        };
        let plan = plan_footprints(
            WalkCommand::StepParameters,
            2,
            &params,
            PlanarVec::new(1.2, 0.0),
        )
        .unwrap();
        let landed = plan.footprints[2].position - plan.footprints[1].position;
        assert!((landed.x - 0.95).abs() < 1e-12 && landed.y.abs() < 1e-15);
        // later footprints follow the retargeted one
        assert!((plan.footprints[3].position.x - 0.95).abs() < 1e-12);
    }

    #[test]
    fn clamp_keeps_direction_with_lateral_offset() {
        let support = PlanarVec::new(0.0, 0.1);
        let nominal = PlanarVec::new(0.0, -0.1);
        let (p, hit) = clamp_displacement(support, nominal, PlanarVec::new(2.0, 0.0), 0.95);
        assert!(hit);
        assert!(((p - support).norm() - 0.95).abs() < 1e-12);
        assert!((p.y + 0.1).abs() < 1e-15);
        let (p, hit) = clamp_displacement(support, nominal, PlanarVec::new(0.3, 0.0), 0.95);
        assert!(!hit && (p.x - 0.3).abs() < 1e-15);
    }

    #[test]
    fn velocity_command_scales_by_step_time() {
        let params = GaitParams::default();
        let plan = plan_footprints(
            WalkCommand::Velocity(PlanarVec::new(0.3, 0.0)),
            2,
            &params,
            PlanarVec::ZERO,
        )
        .unwrap();
        assert!((plan.step_length.x - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let params = GaitParams {
            single_support: -1.0,
            swing_height: -0.1,
            ..GaitParams::default()
        };
        match plan_footprints(WalkCommand::StepParameters, 3, &params, PlanarVec::ZERO) {
            Err(Error::Config(v)) => assert_eq!(v.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(plan_footprints(
            WalkCommand::StepParameters,
            0,
            &GaitParams::default(),
            PlanarVec::ZERO
        )
        .is_err());
    }
}
