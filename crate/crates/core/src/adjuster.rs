//! Next-step adjustment from the measured DCM.
//!
//! The DCM is extrapolated to the end of single support assuming the ZMP
//! stays on the support foot. Its distance from where the unperturbed gait
//! would put it drives a proportional shift of the landing footprint and a
//! retiming of the remaining single support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Axis, PlanarVec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjusterGains {
    pub k_sa: f64,
    pub k_f: f64,
    /// Dead band on `|Δf|` below which nothing is adjusted.
    pub compliance_margin: f64,
    pub max_step: f64,
    /// Bound on the step time change.
    pub dt_sat: f64,
    /// Fraction of the nominal single support after which the landing
    /// location is frozen.
    pub retarget_cutoff: f64,
}

impl Default for AdjusterGains {
    fn default() -> Self {
        Self {
            k_sa: 1.0,
            k_f: 0.1,
            compliance_margin: 0.02,
            max_step: 0.95,
            dt_sat: 0.2,
            retarget_cutoff: 0.8,
        }
    }
}

impl AdjusterGains {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.k_sa > 0.0) {
            bad.push("k_sa must be > 0".to_string());
        }
        if !(self.k_f > 0.0 && self.k_f <= 1.0) {
            bad.push("k_f must be in (0, 1]".into());
        }
        if !(self.compliance_margin >= 0.0) {
            bad.push("compliance_margin must be >= 0".into());
        }
        if !(self.max_step > 0.0) {
            bad.push("max_step must be > 0".into());
        }
        if !(self.dt_sat >= 0.0) {
            bad.push("dt_sat must be >= 0".into());
        }
        if !(self.retarget_cutoff > 0.0 && self.retarget_cutoff <= 1.0) {
            bad.push("retarget_cutoff must be in (0, 1]".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }
}

/// Output of one adjustment cycle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Adjustment {
    pub delta_f: PlanarVec,
    pub delta_p: PlanarVec,
    pub delta_t: f64,
    pub single_support: f64,
    pub active: bool,
    /// The landing footprint hit the reach limit.
    pub step_clamped: bool,
    /// The requested step time change hit `dt_sat`.
    pub time_clamped: bool,
}

/// DCM at the end of single support if the ZMP stays on `support`:
/// `f_i + (ζ_t − f_i)·e^{ω(T_ss − t)}`.
pub fn predict_dcm_at_landing(
    dcm: PlanarVec,
    support: PlanarVec,
    t: f64,
    single_support: f64,
    omega: f64,
) -> PlanarVec {
    support + (dcm - support) * (omega * (single_support - t)).exp()
}

/// `Δf = f_p − target`. With `target` the next planned footprint this is
/// the raw landing error; passing the footprint plus the nominal
/// end-of-step DCM offset removes the part the plan intends.
pub fn step_location_error(predicted: PlanarVec, target: PlanarVec) -> PlanarVec {
    predicted - target
}

/// `δp = −k_sa·Δf` outside the compliance margin, else zero.
pub fn adjust_location(delta_f: PlanarVec, gains: &AdjusterGains) -> PlanarVec {
    if delta_f.norm() > gains.compliance_margin {
        -delta_f * gains.k_sa
    } else {
        PlanarVec::ZERO
    }
}

/// Time-adjust result before and after the lag filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAdjustment {
    /// Requested change from the nominal single support, saturated.
    pub delta_t: f64,
    pub clamped: bool,
    /// Filtered single-support duration.
    pub single_support: f64,
}

/// Landing time at which the DCM, diverging from `support`, reaches
/// `target` on the axis where the landing error is largest. The change
/// from `nominal` is saturated to `±dt_sat` and `current` is moved towards
/// it by the lag filter.
#[allow(clippy::too_many_arguments)]
pub fn adjust_time(
    dcm: PlanarVec,
    support: PlanarVec,
    target: PlanarVec,
    delta_f: PlanarVec,
    t: f64,
    nominal: f64,
    current: f64,
    omega: f64,
    gains: &AdjusterGains,
) -> TimeAdjustment {
    let axis = if delta_f.x.abs() >= delta_f.y.abs() {
        Axis::X
    } else {
        Axis::Y
    };
    let num = target.axis(axis) - support.axis(axis);
    let den = dcm.axis(axis) - support.axis(axis);
    let ratio = num / den;
    let raw = if ratio > 0.0 && ratio.is_finite() {
        t + ratio.ln() / omega - nominal
    } else {
        -gains.dt_sat
    };
    let delta_t = raw.clamp(-gains.dt_sat, gains.dt_sat);
    let clamped = raw.abs() > gains.dt_sat;
    TimeAdjustment {
        delta_t,
        clamped,
        single_support: lag_filter(current, nominal + delta_t, gains.k_f),
    }
}

/// `T ← T(1 − k_f) + T_target·k_f`.
pub fn lag_filter(current: f64, target: f64, k_f: f64) -> f64 {
    current * (1.0 - k_f) + target * k_f
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: f64 = 3.132_091_952_673_165_5;

    #[test]
    fn prediction_examples() {
        let f = PlanarVec::new(0.3, 0.1);
        assert_eq!(predict_dcm_at_landing(f, f, 0.1, 0.8, W), f);
        let z = PlanarVec::new(0.35, 0.12);
        assert_eq!(predict_dcm_at_landing(z, f, 0.8, 0.8, W), z);
        let t = 0.8 - 2.0 / W;
        let fp = predict_dcm_at_landing(f + PlanarVec::new(0.01, 0.0), f, t, 0.8, W);
        assert!((fp.x - f.x - 0.01 * 2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn location_law() {
        let g = AdjusterGains::default();
        assert_eq!(adjust_location(PlanarVec::new(0.015, 0.01), &g), PlanarVec::ZERO);
        assert_eq!(adjust_location(PlanarVec::new(0.1, 0.0), &g), PlanarVec::new(-0.1, 0.0));
        let e = step_location_error(PlanarVec::new(0.7, 0.1), PlanarVec::new(0.5, 0.1));
        assert!((e - PlanarVec::new(0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn on_target_needs_no_retiming() {
        let g = AdjusterGains::default();
        let f = PlanarVec::ZERO;
        let target = PlanarVec::new(0.2, 0.0);
        // DCM that reaches the target exactly at T_ss = 0.8
        let dcm = target * (-W * (0.8 - 0.3)).exp();
        let out = adjust_time(dcm, f, target, PlanarVec::ZERO, 0.3, 0.8, 0.8, W, &g);
        assert!(out.delta_t.abs() < 1e-12);
        assert!((out.single_support - 0.8).abs() < 1e-12);
    }

    #[test]
    fn fast_divergence_shortens_the_step() {
        let g = AdjusterGains::default();
        let target = PlanarVec::new(0.2, 0.0);
        let nominal_dcm = target * (-W * 0.8).exp();
        let out = adjust_time(
            nominal_dcm * 1.5,
            PlanarVec::ZERO,
            target,
            PlanarVec::new(0.2, 0.0),
            0.0,
            0.8,
            0.8,
            W,
            &g,
        );
        assert!((out.delta_t + 1.5f64.ln() / W).abs() < 1e-12);
        assert!(out.single_support < 0.8);
    }

    #[test]
    fn saturation_and_wrong_side() {
        let g = AdjusterGains::default();
        let target = PlanarVec::new(0.2, 0.0);
        let dcm = target * (-W * 1.15).exp();
        let out = adjust_time(dcm, PlanarVec::ZERO, target, PlanarVec::new(0.1, 0.0), 0.0, 0.8, 0.8, W, &g);
        assert!(out.clamped && out.delta_t == 0.2);
        let out = adjust_time(
            PlanarVec::new(-0.05, 0.0),
            PlanarVec::ZERO,
            target,
            PlanarVec::new(0.1, 0.0),
            0.0,
            0.8,
            0.8,
            W,
            &g,
        );
        assert_eq!(out.delta_t, -0.2);
    }

    #[test]
    fn lag_filter_endpoints() {
        assert_eq!(lag_filter(0.8, 0.6, 1.0), 0.6);
        assert_eq!(lag_filter(0.8, 0.6, 0.0), 0.8);
        let v = lag_filter(0.8, 0.6, 0.1);
        assert!(v < 0.8 && v > 0.6);
    }
}
