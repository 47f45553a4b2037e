//! LQG tracking of the COM/DCM reference.
//!
//! Per axis the error state `[c − c_ref, ζ − ζ_ref]` is augmented with the
//! integral of the DCM error. Gains come from discrete algebraic Riccati
//! equations solved once, offline; the loop itself only multiplies.

use nalgebra::{DMatrix, Matrix2, Matrix3, RowVector3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Axis, PlanarVec};
use crate::planner::ReferenceFrame;

/// Continuous model over `[c, ζ]` with the ZMP as input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisStateSpace {
    pub a: Matrix2<f64>,
    pub b: Vector2<f64>,
}

pub fn build_state_space(omega: f64) -> AxisStateSpace {
    AxisStateSpace {
        a: Matrix2::new(-omega, omega, 0.0, omega),
        b: Vector2::new(0.0, -omega),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteSystem {
    pub a: Matrix2<f64>,
    pub b: Vector2<f64>,
}

/// Zero-order-hold discretization: `exp([A B; 0 0]·dt)`.
pub fn discretize(ss: &AxisStateSpace, dt: f64) -> DiscreteSystem {
    let mut m = Matrix3::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(ss.a * dt));
    m.fixed_view_mut::<2, 1>(0, 2).copy_from(&(ss.b * dt));
    let e = m.exp();
    DiscreteSystem {
        a: e.fixed_view::<2, 2>(0, 0).into_owned(),
        b: e.fixed_view::<2, 1>(0, 2).into_owned(),
    }
}

/// Append the DCM-error integral `X_i ← X_i + dt·e_ζ` (integrating the
/// error after the update) as a third state.
pub fn augment_with_integral(sys: &DiscreteSystem, dt: f64) -> (Matrix3<f64>, Vector3<f64>) {
    let mut a = Matrix3::zeros();
    a.fixed_view_mut::<2, 2>(0, 0).copy_from(&sys.a);
    a[(2, 0)] = dt * sys.a[(1, 0)];
    a[(2, 1)] = dt * sys.a[(1, 1)];
    a[(2, 2)] = 1.0;
    let b = Vector3::new(sys.b[0], sys.b[1], dt * sys.b[1]);
    (a, b)
}

/// `AᵀPA − P − AᵀPB(R + BᵀPB)⁻¹BᵀPA + Q`.
pub fn dare_residual(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    Ok(riccati_map(a, b, q, r, p)? - p)
}

fn riccati_map(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let at = a.transpose();
    let pb = p * b;
    let s = r + b.transpose() * &pb;
    let s_inv = s
        .try_inverse()
        .ok_or_else(|| Error::Synthesis("R + BᵀPB is singular".into()))?;
    let apa = &at * p * a;
    let cross = &at * &pb;
    let out = apa - &cross * s_inv * cross.transpose() + q;
    Ok((&out + out.transpose()) * 0.5)
}

/// Stabilizing solution of the discrete algebraic Riccati equation by the
/// structure-preserving doubling algorithm, polished with a few plain
/// Riccati iterations.
pub fn solve_dare(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Synthesis("R is singular".into()))?;
    let eye = DMatrix::<f64>::identity(n, n);
    let mut ak = a.clone();
    let mut gk = b * r_inv * b.transpose();
    let mut hk = q.clone();
    let mut converged = false;
    for _ in 0..200 {
        let w = &eye + &gk * &hk;
        let lu = w.lu();
        let wa = lu
            .solve(&ak)
            .ok_or_else(|| Error::Synthesis("singular doubling step".into()))?;
        let wg = lu
            .solve(&gk)
            .ok_or_else(|| Error::Synthesis("singular doubling step".into()))?;
        let h_next = &hk + ak.transpose() * &hk * &wa;
        let g_next = &gk + &ak * wg * ak.transpose();
        let a_next = &ak * wa;
        let delta = (&h_next - &hk).norm();
        let scale = h_next.norm().max(1.0);
        hk = (&h_next + h_next.transpose()) * 0.5;
        gk = (&g_next + g_next.transpose()) * 0.5;
        ak = a_next;
        if !hk.iter().all(|v| v.is_finite()) {
            return Err(Error::Synthesis("doubling diverged".into()));
        }
        if delta <= 1e-15 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Synthesis("doubling did not converge".into()));
    }
    let mut p = hk;
    for _ in 0..5 {
        p = riccati_map(a, b, q, r, &p)?;
    }
    let res = dare_residual(a, b, q, r, &p)?.abs().max();
    if !(res < 1e-10) {
        return Err(Error::Synthesis(format!("Riccati residual {res:e}")));
    }
    let k = lqr_gain(a, b, r, &p)?;
    let rho = (a - b * k)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if !(rho < 1.0) {
        return Err(Error::Synthesis(format!(
            "Riccati solution is not stabilizing (spectral radius {rho})"
        )));
    }
    Ok(p)
}

fn lqr_gain(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let s = r + b.transpose() * p * b;
    Ok(s.try_inverse()
        .ok_or_else(|| Error::Synthesis("R + BᵀPB is singular".into()))?
        * b.transpose()
        * p
        * a)
}

/// Feedback gain `K = (R + BᵀPB)⁻¹BᵀPA` for `u = −Kx`, with `P`.
pub fn solve_lqr(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let p = solve_dare(a, b, q, r)?;
    let k = lqr_gain(a, b, r, &p)?;
    Ok((k, p))
}

/// Steady-state Kalman gain `L = PCᵀ(CPCᵀ + V)⁻¹` for the filter form
/// `x̂ ← x̂⁻ + L(y − Cx̂⁻)`, with the prior covariance `P`.
pub fn design_kalman(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    process_cov: &DMatrix<f64>,
    meas_cov: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let p = solve_dare(&a.transpose(), &c.transpose(), process_cov, meas_cov)?;
    let s = c * &p * c.transpose() + meas_cov;
    let l = &p
        * c.transpose()
        * s.try_inverse()
            .ok_or_else(|| Error::Synthesis("innovation covariance is singular".into()))?;
    Ok((l, p))
}

/// Weights and noise levels the gains are synthesized from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Diagonal of Q over `[c-error, ζ-error, integral]`.
    pub q_diag: [f64; 3],
    pub r: f64,
    pub process_variance: f64,
    pub measurement_variance: f64,
    /// Anti-windup bound on the DCM-error integral (m·s).
    pub integral_limit: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            q_diag: [10.0, 100.0, 1.0],
            r: 1.0,
            process_variance: 1e-6,
            measurement_variance: 6.25e-4,
            integral_limit: 0.5,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !self.q_diag.iter().all(|q| *q >= 0.0 && q.is_finite()) {
            bad.push("q_diag entries must be >= 0".to_string());
        }
        if !(self.r > 0.0) {
            bad.push("r must be > 0".into());
        }
        if !(self.process_variance > 0.0) {
            bad.push("process_variance must be > 0".into());
        }
        if !(self.measurement_variance > 0.0) {
            bad.push("measurement_variance must be > 0".into());
        }
        if !(self.integral_limit >= 0.0) {
            bad.push("integral_limit must be >= 0".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub omega: f64,
    pub dt: f64,
    pub system: DiscreteSystem,
    /// Feedback over `[c-error, ζ-error, integral]`.
    pub k: RowVector3<f64>,
    pub l: Matrix2<f64>,
    pub q: Matrix3<f64>,
    pub r: f64,
    pub process_cov: Matrix2<f64>,
    pub meas_cov: Matrix2<f64>,
    pub lqr_p: Matrix3<f64>,
    pub kalman_p: Matrix2<f64>,
    pub integral_limit: f64,
}

impl GainSet {
    /// The cost is weighted per unit time, so Q and R are scaled by `dt`.
    pub fn synthesize(omega: f64, dt: f64, cfg: &ControllerConfig) -> Result<Self> {
        cfg.validate()?;
        if !(omega > 0.0 && dt > 0.0) {
            return Err(Error::Domain("omega and dt must be > 0".into()));
        }
        let system = discretize(&build_state_space(omega), dt);
        let (a_aug, b_aug) = augment_with_integral(&system, dt);
        let q = Matrix3::from_diagonal(&Vector3::from(cfg.q_diag));
        let dq = DMatrix::from_column_slice(3, 3, (q * dt).as_slice());
        let dr = DMatrix::from_element(1, 1, cfg.r * dt);
        let (k, lqr_p) = solve_lqr(
            &DMatrix::from_column_slice(3, 3, a_aug.as_slice()),
            &DMatrix::from_column_slice(3, 1, b_aug.as_slice()),
            &dq,
            &dr,
        )?;
        let process_cov = Matrix2::identity() * cfg.process_variance;
        let meas_cov = Matrix2::identity() * cfg.measurement_variance;
        let (l, kalman_p) = design_kalman(
            &DMatrix::from_column_slice(2, 2, system.a.as_slice()),
            &DMatrix::identity(2, 2),
            &DMatrix::from_column_slice(2, 2, process_cov.as_slice()),
            &DMatrix::from_column_slice(2, 2, meas_cov.as_slice()),
        )?;
        Ok(Self {
            omega,
            dt,
            system,
            k: RowVector3::from_iterator(k.iter().copied()),
            l: Matrix2::from_iterator(l.iter().copied()),
            q,
            r: cfg.r,
            process_cov,
            meas_cov,
            lqr_p: Matrix3::from_iterator(lqr_p.iter().copied()),
            kalman_p: Matrix2::from_iterator(kalman_p.iter().copied()),
            integral_limit: cfg.integral_limit,
        })
    }

    pub fn augmented(&self) -> (Matrix3<f64>, Vector3<f64>) {
        augment_with_integral(&self.system, self.dt)
    }

    /// Spectral radius of `A_aug − B_aug·K`.
    pub fn closed_loop_spectral_radius(&self) -> f64 {
        let (a, b) = self.augmented();
        spectral_radius(&(a - b * self.k))
    }
}

pub fn spectral_radius(m: &Matrix3<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Filter estimate, DCM-error integral and last applied input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    /// `[c, ζ]` per axis.
    pub estimate: [Vector2<f64>; 2],
    pub integral: PlanarVec,
    pub last_command: PlanarVec,
    primed: bool,
}

impl Default for ControllerState {
    fn default() -> Self {
        Self {
            estimate: [Vector2::zeros(); 2],
            integral: PlanarVec::ZERO,
            last_command: PlanarVec::ZERO,
            primed: false,
        }
    }
}

impl ControllerState {
    /// State whose first update adopts the measurement as the estimate.
    pub fn new() -> Self {
        Self::default()
    }

    pub fn estimated_com(&self) -> PlanarVec {
        PlanarVec::new(self.estimate[0][0], self.estimate[1][0])
    }

    pub fn estimated_dcm(&self) -> PlanarVec {
        PlanarVec::new(self.estimate[0][1], self.estimate[1][1])
    }

    /// Kalman predict with the last applied input, then correct with the
    /// measured COM and DCM.
    pub fn update_estimate(&mut self, com: PlanarVec, dcm: PlanarVec, gains: &GainSet) {
        for (i, axis) in Axis::BOTH.into_iter().enumerate() {
            let y = Vector2::new(com.axis(axis), dcm.axis(axis));
            if !self.primed {
                self.estimate[i] = y;
                continue;
            }
            let prior =
                gains.system.a * self.estimate[i] + gains.system.b * self.last_command.axis(axis);
            self.estimate[i] = prior + gains.l * (y - prior);
        }
        self.primed = true;
    }

    /// Advance the integral and return `p_ref − K·[x̃ − x_ref; X_i]`.
    pub fn command(&mut self, reference: &ReferenceFrame, gains: &GainSet) -> PlanarVec {
        let mut out = PlanarVec::ZERO;
        for (i, axis) in Axis::BOTH.into_iter().enumerate() {
            let e_c = self.estimate[i][0] - reference.com.axis(axis);
            let e_z = self.estimate[i][1] - reference.dcm.axis(axis);
            let xi = self.integral.axis_mut(axis);
            *xi = (*xi + e_z * gains.dt).clamp(-gains.integral_limit, gains.integral_limit);
            let s = Vector3::new(e_c, e_z, *xi);
            *out.axis_mut(axis) = reference.zmp.axis(axis) - (gains.k * s)[0];
        }
        self.last_command = out;
        out
    }

    /// Record the input the plant actually received, for the next predict.
    pub fn set_applied(&mut self, p: PlanarVec) {
        self.last_command = p;
    }
}

/// One control cycle: estimate update followed by the feedback law.
pub fn control_step(
    meas: (PlanarVec, PlanarVec),
    reference: &ReferenceFrame,
    state: &ControllerState,
    gains: &GainSet,
) -> (PlanarVec, ControllerState) {
    let mut next = *state;
    next.update_estimate(meas.0, meas.1, gains);
    let p = next.command(reference, gains);
    (p, next)
}
