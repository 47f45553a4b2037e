//! Closed-form ZMP, COM and DCM references for a single step or segment.

use crate::error::{Error, Result};
use crate::model::{dcm_of_state, LipmState, PlanarVec};

use super::footsteps::Footprint;

/// ZMP over one step: on the support footprint during single support, then a
/// linear transfer to the next footprint during double support.
///
/// `t` is measured from the start of the step.
pub fn plan_zmp(
    t: f64,
    support: &Footprint,
    next: &Footprint,
    single_support: f64,
    double_support: f64,
) -> Result<PlanarVec> {
    let end = single_support + double_support;
    if !(0.0..end).contains(&t) {
        return Err(Error::OutOfRange { t, lo: 0.0, hi: end });
    }
    if t < single_support {
        Ok(support.position)
    } else {
        let s = (t - single_support) / double_support;
        Ok(support.position.lerp(next.position, s))
    }
}

/// COM position and velocity solving `c̈ = ω²(c − p)` with constant `p`
/// between `c(t0) = c0` and `c(tf) = cf`:
///
/// `c(t) = p + [(p − c_f)·sinh(ω(t − t0)) + (c0 − p)·sinh(ω(t − tf))] / sinh(ω(t0 − tf))`.
pub fn plan_com(
    t: f64,
    zmp: PlanarVec,
    c0: PlanarVec,
    cf: PlanarVec,
    t0: f64,
    tf: f64,
    omega: f64,
) -> Result<(PlanarVec, PlanarVec)> {
    plan_com_affine(t, (zmp, zmp), c0, cf, t0, tf, omega)
}

/// [`plan_com`] for a ZMP moving linearly from `zmp.0` at `t0` to `zmp.1`
/// at `tf`. The deviation `c − p` obeys the same hyperbolic boundary-value
/// solution because `p̈ = 0`.
pub fn plan_com_affine(
    t: f64,
    zmp: (PlanarVec, PlanarVec),
    c0: PlanarVec,
    cf: PlanarVec,
    t0: f64,
    tf: f64,
    omega: f64,
) -> Result<(PlanarVec, PlanarVec)> {
    if tf == t0 {
        return Err(Error::DegenerateInterval(t0));
    }
    let span = tf - t0;
    let zmp_rate = (zmp.1 - zmp.0) / span;
    let p = zmp.0 + zmp_rate * (t - t0);
    let d0 = c0 - zmp.0;
    let df = cf - zmp.1;
    let denom = (omega * (t0 - tf)).sinh();
    let (sa, ca) = ((omega * (t - t0)).sinh(), (omega * (t - t0)).cosh());
    let (sb, cb) = ((omega * (t - tf)).sinh(), (omega * (t - tf)).cosh());
    let dev = (-df * sa + d0 * sb) / denom;
    let dev_rate = (-df * ca + d0 * cb) * (omega / denom);
    Ok((p + dev, zmp_rate + dev_rate))
}

/// DCM of a COM reference sample.
pub fn plan_dcm(com: PlanarVec, com_velocity: PlanarVec, omega: f64) -> PlanarVec {
    dcm_of_state(&LipmState::new(com, com_velocity), omega)
}
