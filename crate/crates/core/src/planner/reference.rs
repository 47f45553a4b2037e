//! Whole-walk ZMP/COM/DCM reference.
//!
//! The ZMP is piecewise affine in time: constant on the support foot during
//! single support, a linear transfer during double support, and a final hold.
//! The DCM follows from a backward pass that ends at rest on the final hold;
//! the COM is the stable solution anchored at a known position. On each
//! segment the COM is then exactly the two-point boundary-value solution
//! between its endpoint values, which is how samples are evaluated.

use serde::Serialize;

use crate::model::{PlanarVec, LipmState};

use super::analytic::{plan_com_affine, plan_dcm};
use super::footsteps::{FootstepPlan, GaitParams};
use super::swing::SwingTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SegmentKind {
    Initialize,
    SingleSupport { step: usize },
    DoubleSupport { step: usize },
    Final,
    Hold,
}

/// ZMP moving linearly from `p0` at `t0` to `p1` at `t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZmpSegment {
    pub t0: f64,
    pub t1: f64,
    pub p0: PlanarVec,
    pub p1: PlanarVec,
    pub kind: SegmentKind,
}

impl ZmpSegment {
    fn rate(&self) -> PlanarVec {
        if self.t1.is_finite() && self.t1 > self.t0 {
            (self.p1 - self.p0) / (self.t1 - self.t0)
        } else {
            PlanarVec::ZERO
        }
    }

    pub fn zmp(&self, t: f64) -> PlanarVec {
        self.p0 + self.rate() * (t - self.t0)
    }
}

/// One sample of the reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceFrame {
    pub t: f64,
    pub zmp: PlanarVec,
    pub com: PlanarVec,
    pub com_velocity: PlanarVec,
    pub dcm: PlanarVec,
    pub swing: [f64; 3],
}

impl ReferenceFrame {
    pub fn state(&self) -> LipmState {
        LipmState::new(self.com, self.com_velocity)
    }
}

/// Piecewise-affine ZMP plan with its DCM and COM.
#[derive(Debug, Clone)]
pub struct ReferencePlan {
    segments: Vec<ZmpSegment>,
    /// DCM at the end of each segment.
    dcm_end: Vec<PlanarVec>,
    /// Coefficient of the decaying COM mode on each segment, so that
    /// `c(t) = p(t) + (a/2)·e^{ω(t − t1)} + coef·e^{−ω(t − t0)}`.
    com_coef: Vec<PlanarVec>,
    omega: f64,
}

impl ReferencePlan {
    /// Build from contiguous segments; the last one must be a hold. The
    /// COM passes through `anchor` (time, position).
    pub fn new(segments: Vec<ZmpSegment>, omega: f64, anchor: (f64, PlanarVec)) -> Self {
        let segments: Vec<_> = segments
            .into_iter()
            .filter(|s| !(s.t1 - s.t0 <= 1e-12 && s.kind != SegmentKind::Hold))
            .collect();
        assert!(
            matches!(segments.last(), Some(s) if s.kind == SegmentKind::Hold),
            "reference plan must end in a hold"
        );
        let n = segments.len();
        let mut dcm_end = vec![PlanarVec::ZERO; n];
        dcm_end[n - 1] = segments[n - 1].p0;
        for k in (0..n - 1).rev() {
            let next_start = dcm_start_of(&segments[k + 1], dcm_end[k + 1], omega);
            dcm_end[k] = next_start;
        }
        let mut plan = Self {
            segments,
            dcm_end,
            com_coef: vec![PlanarVec::ZERO; n],
            omega,
        };
        let (ta, ca) = anchor;
        let ka = plan.segment_index(ta);
        plan.com_coef[ka] = plan.coef_through(ka, ta, ca);
        for k in ka + 1..n {
            let t = plan.segments[k].t0;
            let c = plan.com_in(k - 1, t);
            plan.com_coef[k] = plan.coef_through(k, t, c);
        }
        for k in (0..ka).rev() {
            let t = plan.segments[k].t1;
            let c = plan.com_in(k + 1, t);
            plan.com_coef[k] = plan.coef_through(k, t, c);
        }
        plan
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn segments(&self) -> &[ZmpSegment] {
        &self.segments
    }

    pub fn start_time(&self) -> f64 {
        self.segments[0].t0
    }

    /// Time the final hold begins.
    pub fn end_time(&self) -> f64 {
        self.segments.last().unwrap().t0
    }

    pub fn segment_index(&self, t: f64) -> usize {
        let n = self.segments.len();
        self.segments
            .iter()
            .position(|s| t < s.t1)
            .unwrap_or(n - 1)
    }

    pub fn segment_at(&self, t: f64) -> &ZmpSegment {
        &self.segments[self.segment_index(t)]
    }

    /// `a = ζ(t1) − p1 − ṗ/ω`, the amplitude of the divergent mode.
    fn divergent_amplitude(&self, k: usize) -> PlanarVec {
        let s = &self.segments[k];
        if s.kind == SegmentKind::Hold {
            return PlanarVec::ZERO;
        }
        self.dcm_end[k] - s.p1 - s.rate() / self.omega
    }

    fn divergent_term(&self, k: usize, t: f64) -> PlanarVec {
        let s = &self.segments[k];
        if s.kind == SegmentKind::Hold {
            return PlanarVec::ZERO;
        }
        self.divergent_amplitude(k) * (self.omega * (t - s.t1)).exp()
    }

    fn coef_through(&self, k: usize, t: f64, c: PlanarVec) -> PlanarVec {
        let s = &self.segments[k];
        (c - s.zmp(t) - self.divergent_term(k, t) * 0.5) * (self.omega * (t - s.t0)).exp()
    }

    fn com_in(&self, k: usize, t: f64) -> PlanarVec {
        let s = &self.segments[k];
        s.zmp(t)
            + self.divergent_term(k, t) * 0.5
            + self.com_coef[k] * (-self.omega * (t - s.t0)).exp()
    }

    pub fn zmp(&self, t: f64) -> PlanarVec {
        self.segment_at(t).zmp(t)
    }

    /// DCM from the backward pass.
    pub fn dcm(&self, t: f64) -> PlanarVec {
        let k = self.segment_index(t);
        let s = &self.segments[k];
        s.zmp(t) + s.rate() / self.omega + self.divergent_term(k, t)
    }

    /// Constant ZMP over `[t, t + dt]` that carries the reference DCM from
    /// `ζ(t)` to `ζ(t + dt)`. Equals [`Self::zmp`] wherever the ZMP is flat.
    pub fn held_zmp(&self, t: f64, dt: f64) -> PlanarVec {
        let g = (self.omega * dt).exp();
        (self.dcm(t + dt) - self.dcm(t) * g) / (1.0 - g)
    }

    /// COM at the start and end of segment `k`. The hold segment reports
    /// its asymptote as the end value.
    pub fn com_boundaries(&self, k: usize) -> (PlanarVec, PlanarVec) {
        let s = &self.segments[k];
        let c0 = self.com_in(k, s.t0);
        let cf = if s.kind == SegmentKind::Hold {
            s.p0
        } else {
            self.com_in(k, s.t1)
        };
        (c0, cf)
    }

    /// COM position and velocity, evaluated with the boundary-value solution
    /// on the enclosing segment.
    pub fn com(&self, t: f64) -> (PlanarVec, PlanarVec) {
        let k = self.segment_index(t);
        let s = &self.segments[k];
        if s.kind == SegmentKind::Hold {
            let c = self.com_in(k, t);
            return (c, (s.p0 - c) * self.omega);
        }
        let (c0, cf) = self.com_boundaries(k);
        plan_com_affine(t, (s.p0, s.p1), c0, cf, s.t0, s.t1, self.omega)
            .expect("non-degenerate segment")
    }

    /// ZMP, COM, COM velocity and DCM at `t`. The DCM is recomputed from the
    /// COM sample so that `dcm = com + com_velocity/ω` holds exactly.
    pub fn sample(&self, t: f64) -> ReferenceFrame {
        let (com, com_velocity) = self.com(t);
        ReferenceFrame {
            t,
            zmp: self.zmp(t),
            com,
            com_velocity,
            dcm: plan_dcm(com, com_velocity, self.omega),
            swing: [0.0; 3],
        }
    }

    /// COM at the boundaries of a walking step (single support start to
    /// double support end), together with those times.
    pub fn com_step_boundaries(&self, step: usize) -> Option<(PlanarVec, PlanarVec, f64, f64)> {
        let first = self
            .segments
            .iter()
            .position(|s| s.kind == SegmentKind::SingleSupport { step })?;
        let last = self
            .segments
            .iter()
            .rposition(|s| {
                matches!(s.kind, SegmentKind::SingleSupport { step: k } | SegmentKind::DoubleSupport { step: k } if k == step)
            })?;
        let (c0, _) = self.com_boundaries(first);
        let (_, cf) = self.com_boundaries(last);
        Some((c0, cf, self.segments[first].t0, self.segments[last].t1))
    }
}

/// DCM at the start of `seg` given its end value.
fn dcm_start_of(seg: &ZmpSegment, dcm_end: PlanarVec, omega: f64) -> PlanarVec {
    if seg.kind == SegmentKind::Hold {
        return seg.p0;
    }
    let v = seg.rate() / omega;
    seg.p0 + v + (dcm_end - seg.p1 - v) * (-omega * (seg.t1 - seg.t0)).exp()
}

/// Segments for steps `from_step..n` starting at `t_start`, followed by the
/// closing weight shift to the midpoint of the last two footprints and the
/// final hold. `first_single_support` overrides the duration of the first
/// listed step's single support.
pub fn walking_segments(
    plan: &FootstepPlan,
    from_step: usize,
    t_start: f64,
    first_single_support: f64,
    params: &GaitParams,
) -> Vec<ZmpSegment> {
    let n = plan.n_steps();
    let mut out = Vec::with_capacity(2 * (n - from_step) + 2);
    let mut t = t_start;
    for step in from_step..n {
        let ss = if step == from_step {
            first_single_support
        } else {
            params.single_support
        };
        let support = plan.support(step).position;
        let landing = plan.landing(step).position;
        out.push(ZmpSegment {
            t0: t,
            t1: t + ss,
            p0: support,
            p1: support,
            kind: SegmentKind::SingleSupport { step },
        });
        t += ss;
        out.push(ZmpSegment {
            t0: t,
            t1: t + params.double_support,
            p0: support,
            p1: landing,
            kind: SegmentKind::DoubleSupport { step },
        });
        t += params.double_support;
    }
    let last = plan.footprints[n + 1].position;
    let rest = plan.footprints[n].position.midpoint(last);
    let closing = params.transfer_duration();
    out.push(ZmpSegment {
        t0: t,
        t1: t + closing,
        p0: last,
        p1: rest,
        kind: SegmentKind::Final,
    });
    out.push(ZmpSegment {
        t0: t + closing,
        t1: f64::INFINITY,
        p0: rest,
        p1: rest,
        kind: SegmentKind::Hold,
    });
    out
}

/// Start point of the opening weight-shift ramp.
///
/// The ramp ends on the first support foot at `t = duration`; its start is
/// chosen so that a robot at rest with DCM `dcm_now` arrives with the DCM
/// `dcm_target` the walk requires.
pub fn initialize_ramp_start(
    dcm_now: PlanarVec,
    dcm_target: PlanarVec,
    support: PlanarVec,
    duration: f64,
    omega: f64,
) -> PlanarVec {
    let g = (omega * duration).exp();
    let k = 1.0 / (omega * duration);
    let denom = k * (g - 1.0) - g;
    let solve = |z0: f64, zt: f64, f: f64| (zt - f * (1.0 + k - k * g) - z0 * g) / denom;
    PlanarVec::new(
        solve(dcm_now.x, dcm_target.x, support.x),
        solve(dcm_now.y, dcm_target.y, support.y),
    )
}

/// Reference for a full walk starting at rest at the midpoint of the home
/// feet at time `t_start`: opening weight shift, the steps, closing shift,
/// hold.
pub fn plan_walk(plan: &FootstepPlan, params: &GaitParams, t_start: f64, omega: f64) -> ReferencePlan {
    let init = params.transfer_duration();
    let walking = walking_segments(plan, 0, t_start + init, params.single_support, params);
    let tail = ReferencePlan::new(walking.clone(), omega, (t_start + init, PlanarVec::ZERO));
    let home = plan.footprints[0].position.midpoint(plan.footprints[1].position);
    let support = plan.support(0).position;
    let p_start =
        initialize_ramp_start(home, tail.dcm(t_start + init), support, init, omega);
    let mut segments = vec![ZmpSegment {
        t0: t_start,
        t1: t_start + init,
        p0: p_start,
        p1: support,
        kind: SegmentKind::Initialize,
    }];
    segments.extend(walking);
    ReferencePlan::new(segments, omega, (t_start, home))
}

/// Swing-foot position of an unadjusted walk at `t`. Outside single
/// support the foot that last moved is reported on the ground.
pub fn swing_position(
    plan: &FootstepPlan,
    reference: &ReferencePlan,
    t: f64,
    swing_height: f64,
) -> [f64; 3] {
    let on_ground = |p: PlanarVec| [p.x, p.y, 0.0];
    let seg = reference.segment_at(t);
    match seg.kind {
        SegmentKind::SingleSupport { step } => SwingTrajectory::new(
            plan.swing_origin(step).position,
            plan.landing(step).position,
            seg.t0,
            seg.t1 - seg.t0,
            swing_height,
        )
        .position(t),
        SegmentKind::DoubleSupport { step } => on_ground(plan.landing(step).position),
        SegmentKind::Initialize => on_ground(plan.swing_origin(0).position),
        SegmentKind::Final | SegmentKind::Hold => {
            on_ground(plan.footprints[plan.n_steps() + 1].position)
        }
    }
}
