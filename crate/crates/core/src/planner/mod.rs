//! Footprints, step timing, and the ZMP, swing-foot, COM and DCM references.

mod analytic;
mod footsteps;
mod reference;
mod swing;

pub use analytic::{plan_com, plan_com_affine, plan_dcm, plan_zmp};
pub use footsteps::{
    clamp_displacement, plan_footprints, Footprint, FootstepPlan, GaitParams, WalkCommand,
};
pub use reference::{
    initialize_ramp_start, plan_walk, swing_position, walking_segments, ReferenceFrame, ReferencePlan,
    SegmentKind, ZmpSegment,
};
pub use swing::{plan_swing, SwingTrajectory};
