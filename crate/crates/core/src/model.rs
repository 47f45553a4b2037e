//! Linear inverted pendulum and divergent component of motion (DCM).
//!
//! Sagittal and frontal axes decouple, so every planar operation here is a
//! pair of scalar operations. The closed-form exponential updates in this
//! module are the reference integrator for the rest of the crate.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard gravity used when a configuration does not override it.
pub const GRAVITY: f64 = 9.81;

/// Horizontal ground-plane quantity in meters (COM, DCM, ZMP, footprints).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarVec {
    pub x: f64,
    pub y: f64,
}

impl PlanarVec {
    pub const ZERO: PlanarVec = PlanarVec { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Apply `f` to both components.
    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(f(self.x), f(self.y))
    }

    /// Combine two vectors componentwise.
    pub fn zip(self, other: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::new(f(self.x, other.x), f(self.y, other.y))
    }

    pub fn lerp(self, other: Self, s: f64) -> Self {
        self + (other - self) * s
    }

    pub fn midpoint(self, other: Self) -> Self {
        (self + other) * 0.5
    }

    pub fn axis(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    pub fn axis_mut(&mut self, axis: Axis) -> &mut f64 {
        match axis {
            Axis::X => &mut self.x,
            Axis::Y => &mut self.y,
        }
    }
}

impl Add for PlanarVec {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for PlanarVec {
    fn add_assign(&mut self, rhs: Self) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for PlanarVec {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for PlanarVec {
    fn sub_assign(&mut self, rhs: Self) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for PlanarVec {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for PlanarVec {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        Self::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for PlanarVec {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Horizontal axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];
}

/// Pendulum constants. `omega` is always derived, never set directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams {
    pub com_height: f64,
    pub com_vertical_accel: f64,
    pub gravity: f64,
    omega: f64,
}

impl PendulumParams {
    pub fn new(com_height: f64, com_vertical_accel: f64, gravity: f64) -> Result<Self> {
        if !(gravity > 0.0) {
            return Err(Error::Domain(format!("gravity must be positive, got {gravity}")));
        }
        let omega = natural_frequency(com_height, com_vertical_accel, gravity)?;
        Ok(Self {
            com_height,
            com_vertical_accel,
            gravity,
            omega,
        })
    }

    /// Constant-height pendulum under standard gravity.
    pub fn with_height(com_height: f64) -> Result<Self> {
        Self::new(com_height, 0.0, GRAVITY)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// COM position and velocity; the DCM is derived.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LipmState {
    pub com: PlanarVec,
    pub com_velocity: PlanarVec,
}

impl LipmState {
    pub const fn new(com: PlanarVec, com_velocity: PlanarVec) -> Self {
        Self { com, com_velocity }
    }

    pub fn at_rest(com: PlanarVec) -> Self {
        Self::new(com, PlanarVec::ZERO)
    }

    pub fn dcm(&self, omega: f64) -> PlanarVec {
        dcm_of_state(self, omega)
    }

    pub fn is_finite(&self) -> bool {
        self.com.is_finite() && self.com_velocity.is_finite()
    }
}

/// `sqrt((g + z̈_c) / z_c)`.
pub fn natural_frequency(com_height: f64, com_vertical_accel: f64, gravity: f64) -> Result<f64> {
    if !(com_height > 0.0) || !com_height.is_finite() {
        return Err(Error::Domain(format!("COM height must be positive, got {com_height}")));
    }
    let effective = gravity + com_vertical_accel;
    if !(effective > 0.0) || !effective.is_finite() {
        return Err(Error::Domain(format!(
            "effective gravity g + z̈_c must be positive, got {effective}"
        )));
    }
    Ok((effective / com_height).sqrt())
}

/// LIPM acceleration `ω²(c − p)`.
pub fn com_acceleration(com: PlanarVec, zmp: PlanarVec, omega: f64) -> PlanarVec {
    (com - zmp) * (omega * omega)
}

/// `ζ = c + ċ/ω`.
pub fn dcm_of_state(state: &LipmState, omega: f64) -> PlanarVec {
    state.com + state.com_velocity / omega
}

/// COM velocity implied by a COM/DCM pair.
pub fn com_velocity_from_dcm(com: PlanarVec, dcm: PlanarVec, omega: f64) -> PlanarVec {
    (dcm - com) * omega
}

/// Scalar DCM propagation under a constant ZMP: `p + (ζ − p)·e^{ωΔt}`.
pub fn propagate_dcm_axis(dcm: f64, zmp: f64, dt: f64, omega: f64) -> f64 {
    zmp + (dcm - zmp) * (omega * dt).exp()
}

/// Planar DCM propagation under a constant ZMP.
pub fn propagate_dcm(dcm: PlanarVec, zmp: PlanarVec, dt: f64, omega: f64) -> PlanarVec {
    let growth = (omega * dt).exp();
    zmp + (dcm - zmp) * growth
}

/// DCM path over an interval on which the ZMP is held constant.
///
/// This is the only shape the COM propagator needs: the DCM is then
/// `zmp + (dcm0 − zmp)·e^{ωτ}` for `τ ∈ [0, Δt]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcmPath {
    pub dcm0: PlanarVec,
    pub zmp: PlanarVec,
}

impl DcmPath {
    pub fn constant(dcm: PlanarVec) -> Self {
        Self { dcm0: dcm, zmp: dcm }
    }

    pub fn at(&self, tau: f64, omega: f64) -> PlanarVec {
        propagate_dcm(self.dcm0, self.zmp, tau, omega)
    }
}

/// Exact integration of `ċ = −ω(c − ζ)` against a piecewise-exponential
/// DCM path.
///
/// With `ζ(τ) = p + a·e^{ωτ}` the solution is
/// `c(τ) = p + (a/2)e^{ωτ} + (c0 − p − a/2)e^{−ωτ}`.
pub fn propagate_com(state: &LipmState, path: &DcmPath, dt: f64, omega: f64) -> LipmState {
    let grow = (omega * dt).exp();
    let decay = (-omega * dt).exp();
    let a = path.dcm0 - path.zmp;
    let com = path.zmp + a * (0.5 * grow) + (state.com - path.zmp - a * 0.5) * decay;
    let dcm = path.zmp + a * grow;
    LipmState::new(com, com_velocity_from_dcm(com, dcm, omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Classic RK4 on a first-order system; test-only reference.
    fn rk4<const N: usize>(
        mut y: [f64; N],
        t_end: f64,
        steps: usize,
        f: impl Fn(f64, &[f64; N]) -> [f64; N],
    ) -> [f64; N] {
        let h = t_end / steps as f64;
        let add = |a: &[f64; N], b: &[f64; N], s: f64| {
            let mut out = *a;
            for i in 0..N {
                out[i] += b[i] * s;
            }
            out
        };
        for k in 0..steps {
            let t = k as f64 * h;
            let k1 = f(t, &y);
            let k2 = f(t + h / 2.0, &add(&y, &k1, h / 2.0));
            let k3 = f(t + h / 2.0, &add(&y, &k2, h / 2.0));
            let k4 = f(t + h, &add(&y, &k3, h));
            for i in 0..N {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        y
    }

    #[test]
    fn natural_frequency_examples() {
        let w = natural_frequency(1.0, 0.0, 9.81).unwrap();
        assert!((w - 3.132_091_952_673_165_5).abs() < 1e-12);
        assert!((w * w - 9.81).abs() < 1e-12);
        assert_eq!(natural_frequency(GRAVITY, 0.0, GRAVITY).unwrap(), 1.0);
        let quarter = natural_frequency(0.25, 0.0, 9.81).unwrap();
        assert!((quarter - 2.0 * w).abs() < 1e-12);
    }

    #[test]
    fn natural_frequency_rejects_bad_domain() {
        assert!(natural_frequency(0.0, 0.0, 9.81).is_err());
        assert!(natural_frequency(-1.0, 0.0, 9.81).is_err());
        assert!(natural_frequency(1.0, -9.81, 9.81).is_err());
        assert!(PendulumParams::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn com_acceleration_examples() {
        let p = PlanarVec::new(0.3, -0.2);
        assert_eq!(com_acceleration(p, p, 3.0), PlanarVec::ZERO);
        let a = com_acceleration(PlanarVec::new(0.1, 0.0), PlanarVec::ZERO, 9.81_f64.sqrt());
        assert!((a.x - 0.981).abs() < 1e-12 && a.y == 0.0);
        let c = PlanarVec::new(0.4, 0.1);
        assert_eq!(com_acceleration(c, p, 2.0), -com_acceleration(p, c, 2.0));
    }

    #[test]
    fn dcm_examples() {
        let w = 3.1321;
        let s = LipmState::at_rest(PlanarVec::new(0.1, 0.0));
        assert_eq!(dcm_of_state(&s, w), PlanarVec::new(0.1, 0.0));
        let s = LipmState::new(PlanarVec::ZERO, PlanarVec::new(0.31321, 0.0));
        assert!((dcm_of_state(&s, w).x - 0.1).abs() < 1e-12);
        // states on c + ċ/ω = 0
        for c in [-0.2, -0.05, 0.0, 0.13] {
            let s = LipmState::new(PlanarVec::new(c, -c), PlanarVec::new(-c * w, c * w));
            assert!(dcm_of_state(&s, w).norm() < 1e-15);
        }
    }

    #[test]
    fn propagate_dcm_examples() {
        let w = 3.0;
        let p = PlanarVec::new(0.2, -0.1);
        assert_eq!(propagate_dcm(p, p, 0.7, w), p);
        let z = PlanarVec::new(0.5, 0.4);
        assert_eq!(propagate_dcm(z, p, 0.0, w), z);

        // ωΔt = 1 from an offset of 0.01, against RK4 on ζ̇ = ω(ζ − p)
        let dt = 1.0 / w;
        let closed = propagate_dcm_axis(0.01, 0.0, dt, w);
        assert!((closed - 0.01 * std::f64::consts::E).abs() < 1e-15);
        let [numeric] = rk4([0.01], dt, 2000, |_, y| [w * y[0]]);
        assert!((closed - numeric).abs() < 1e-9);
    }

    #[test]
    fn propagate_com_examples() {
        let w = 3.0;
        let z = PlanarVec::new(0.3, 0.1);
        let rest = LipmState::at_rest(z);
        let out = propagate_com(&rest, &DcmPath::constant(z), 0.5, w);
        assert!((out.com - z).norm() < 1e-15 && out.com_velocity.norm() < 1e-14);

        // offset 0.1 decays to 0.1/e when ωΔt = 1
        let s = LipmState::new(PlanarVec::new(0.1, 0.0), PlanarVec::new(-0.3, 0.0));
        let out = propagate_com(&s, &DcmPath::constant(PlanarVec::ZERO), 1.0 / w, w);
        assert!((out.com.x - 0.1 / std::f64::consts::E).abs() < 1e-15);
        let [numeric] = rk4([0.1], 1.0 / w, 2000, |_, y| [-w * y[0]]);
        assert!((out.com.x - numeric).abs() < 1e-9);

        let out = propagate_com(&s, &DcmPath::constant(PlanarVec::ZERO), 0.0, w);
        assert!((out.com - s.com).norm() < 1e-15);
    }

    #[test]
    fn full_state_integration_matches_dcm_propagation() {
        // RK4 on c̈ = ω²(c − p) for 1 s, then compare ζ against the closed form
        let w = natural_frequency(1.0, 0.0, 9.81).unwrap();
        let (c0, v0, p) = (0.03, -0.05, 0.01);
        let [c, v] = rk4([c0, v0], 1.0, 4000, |_, y| [y[1], w * w * (y[0] - p)]);
        let numeric = c + v / w;
        let closed = propagate_dcm_axis(c0 + v0 / w, p, 1.0, w);
        assert!((numeric - closed).abs() < 1e-9, "{numeric} vs {closed}");

        // and the COM propagator agrees with the same RK4 run
        let s = LipmState::new(PlanarVec::new(c0, 0.0), PlanarVec::new(v0, 0.0));
        let path = DcmPath {
            dcm0: s.dcm(w),
            zmp: PlanarVec::new(p, 0.0),
        };
        let out = propagate_com(&s, &path, 1.0, w);
        assert!((out.com.x - c).abs() < 1e-9);
        assert!((out.com_velocity.x - v).abs() < 1e-9);
    }

    #[test]
    fn dcm_propagation_composes() {
        let (w, z, p) = (3.13, 0.021, -0.004);
        let whole = propagate_dcm_axis(z, p, 0.9, w);
        let split = propagate_dcm_axis(propagate_dcm_axis(z, p, 0.4, w), p, 0.5, w);
        assert!((whole - split).abs() < 1e-15);
    }

    #[test]
    fn com_converges_to_constant_dcm() {
        let w = 2.5;
        let z = PlanarVec::new(0.0, 0.0);
        let s = LipmState::new(PlanarVec::new(0.2, -0.1), PlanarVec::new(-0.5, 0.25));
        // ζ = c + ċ/ω = (0, 0) so the DCM is stationary
        let out = propagate_com(&s, &DcmPath::constant(z), 0.3, w);
        let ratio = (out.com - z).norm() / (s.com - z).norm();
        assert!((ratio - (-w * 0.3_f64).exp()).abs() < 1e-14);
    }
}
