//! Biped walking on the linear inverted pendulum, controlled through its
//! divergent component of motion (DCM).
//!
//! The crate covers reference planning (footprints, ZMP, swing foot, COM and
//! DCM), an LQG tracking controller with integral action, proportional
//! adjustment of the next step's location and timing, a simulated pendulum
//! plant with pushes and sensor noise, and the experiment harness that runs
//! stability grids and push sweeps on top of them.

pub mod adjuster;
pub mod config;
pub mod error;
pub mod harness;
pub mod lqg;
pub mod model;
pub mod planner;
pub mod plant;
pub mod report;
pub mod state_machine;
pub mod walker;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use model::{LipmState, PendulumParams, PlanarVec};
pub use walker::{Strategy, TrialResult, Verdict, WalkSetup};
