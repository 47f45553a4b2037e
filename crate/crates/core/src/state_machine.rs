//! Walking cycle: Idle → Initialize → SingleSupport ⇄ DoubleSupport.
//!
//! Transitions are timer driven. The step-local timer carries its residue
//! across a step boundary so long runs do not drift.

use serde::{Deserialize, Serialize};

/// Slack on timer comparisons so that a boundary reached by accumulating
/// `dt` is not missed by one tick because of rounding.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WalkPhase {
    Idle,
    Initialize,
    SingleSupport,
    DoubleSupport,
}

impl WalkPhase {
    pub fn is_stepping(self) -> bool {
        matches!(self, WalkPhase::SingleSupport | WalkPhase::DoubleSupport)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WalkPhase::Idle => "idle",
            WalkPhase::Initialize => "init",
            WalkPhase::SingleSupport => "ss",
            WalkPhase::DoubleSupport => "ds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// +1 for left, −1 for right (left is +y).
    pub fn lateral_sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Start,
    Stop,
    None,
}

/// Step-local timer. `single_support` may be retimed during a step; it
/// reverts to `nominal_single_support` when the step completes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseClock {
    pub t: f64,
    pub single_support: f64,
    pub double_support: f64,
    pub nominal_single_support: f64,
    pub initialize: f64,
}

impl PhaseClock {
    pub fn new(single_support: f64, double_support: f64, initialize: f64) -> Self {
        Self {
            t: 0.0,
            single_support,
            double_support,
            nominal_single_support: single_support,
            initialize,
        }
    }

    pub fn step_duration(&self) -> f64 {
        self.single_support + self.double_support
    }
}

/// Result of one [`tick`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tick {
    pub phase: WalkPhase,
    pub clock: PhaseClock,
    pub step_completed: bool,
    /// Initialize finished on this tick and the first step began.
    pub stepping_started: bool,
}

/// Advance the walking state machine by `dt`.
///
/// A stop request is honoured only at a step boundary; callers keep
/// issuing it until the phase becomes Idle.
pub fn tick(phase: WalkPhase, mut clock: PhaseClock, dt: f64, command: Command) -> Tick {
    debug_assert!(dt > 0.0);
    let mut out = Tick {
        phase,
        clock,
        step_completed: false,
        stepping_started: false,
    };
    match phase {
        WalkPhase::Idle => {
            if command == Command::Start {
                clock.t = 0.0;
                out.phase = WalkPhase::Initialize;
            }
        }
        WalkPhase::Initialize => {
            clock.t += dt;
            if clock.t >= clock.initialize - TIME_EPS {
                clock.t -= clock.initialize;
                out.phase = WalkPhase::SingleSupport;
                out.stepping_started = true;
            }
        }
        WalkPhase::SingleSupport | WalkPhase::DoubleSupport => {
            clock.t += dt;
            if phase == WalkPhase::SingleSupport && clock.t >= clock.single_support - TIME_EPS {
                out.phase = WalkPhase::DoubleSupport;
            }
            // checked again so that a zero-length double support is
            // skipped within the same tick
            if out.phase == WalkPhase::DoubleSupport
                && clock.t >= clock.step_duration() - TIME_EPS
            {
                clock.t -= clock.step_duration();
                clock.single_support = clock.nominal_single_support;
                out.step_completed = true;
                out.phase = if command == Command::Stop {
                    WalkPhase::Idle
                } else {
                    WalkPhase::SingleSupport
                };
            }
        }
    }
    out.clock = clock;
    out
}

/// Support side for a given step, alternating from `first_support`.
pub fn support_foot(step_index: usize, first_support: Side) -> Side {
    if step_index % 2 == 0 {
        first_support
    } else {
        first_support.opposite()
    }
}
