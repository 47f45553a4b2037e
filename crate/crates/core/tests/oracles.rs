mod common;

use common::{rk4, shoot_bvp, OMEGA};
use dcmwalk::lqg::{dare_residual, solve_dare, ControllerConfig, ControllerState, GainSet};
use dcmwalk::model::{propagate_com, propagate_dcm, DcmPath, LipmState, PlanarVec};
use dcmwalk::planner::{plan_com_affine, plan_footprints, plan_walk, GaitParams, ReferenceFrame, SegmentKind, WalkCommand};
use dcmwalk::plant::{step_dynamics, PushEvent};
use nalgebra::{DMatrix, Matrix2, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[test]
fn dcm_propagation_matches_rk4() {
    let p = PlanarVec::new(0.2, -0.1);
    let z0 = p + PlanarVec::new(0.01, 0.0);
    let dt = 1.0 / OMEGA;
    let z = propagate_dcm(z0, p, dt, OMEGA);
    assert!((z.x - p.x - 0.027_182_818_284_590_45).abs() < 1e-12);
    let y = rk4(|_, y: &[f64; 1]| [OMEGA * (y[0] - p.x)], [z0.x], 0.0, dt, 2000);
    assert!((y[0] - z.x).abs() < 1e-9);
}

#[test]
fn com_decay_matches_rk4() {
    let zeta = PlanarVec::new(0.3, 0.0);
    let s = LipmState::new(zeta + PlanarVec::new(0.1, 0.0), PlanarVec::ZERO);
    let dt = 1.0 / OMEGA;
    let out = propagate_com(&s, &DcmPath::constant(zeta), dt, OMEGA);
    assert!((out.com.x - zeta.x - 0.1 * (-1f64).exp()).abs() < 1e-12);
    let y = rk4(|_, y: &[f64; 1]| [-OMEGA * (y[0] - zeta.x)], [s.com.x], 0.0, dt, 2000);
    assert!((y[0] - out.com.x).abs() < 1e-9);
}

#[test]
fn pushed_plant_matches_rk4() {
    let mass = 30.0;
    let push = PushEvent {
        force: PlanarVec::new(350.0, -120.0),
        start_time: 0.0031,
        duration: 0.01,
    };
    let zmp = PlanarVec::new(0.02, 0.01);
    let mut s = LipmState::new(PlanarVec::new(0.01, 0.0), PlanarVec::new(0.1, -0.05));
    let dt = 0.002;
    let mut y = [s.com.x, s.com_velocity.x, s.com.y, s.com_velocity.y];
    for k in 0..20 {
        let t = k as f64 * dt;
        s = step_dynamics(&s, zmp, &[push], t, dt, mass, OMEGA);
        // split the RK4 run at the push edges so the integrand is smooth
        let mut cuts = vec![t, t + dt];
        for e in [push.start_time, push.end_time()] {
            if e > t && e < t + dt {
                cuts.push(e);
            }
        }
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let f = if push.is_active(0.5 * (w[0] + w[1])) { push.force / mass } else { PlanarVec::ZERO };
            y = rk4(
                |_, y: &[f64; 4]| {
                    [
                        y[1],
                        OMEGA * OMEGA * (y[0] - zmp.x) + f.x,
                        y[3],
                        OMEGA * OMEGA * (y[2] - zmp.y) + f.y,
                    ]
                },
                y,
                w[0],
                w[1],
                200,
            );
        }
    }
    assert!((s.com.x - y[0]).abs() < 1e-9 && (s.com_velocity.x - y[1]).abs() < 1e-9);
    assert!((s.com.y - y[2]).abs() < 1e-9 && (s.com_velocity.y - y[3]).abs() < 1e-9);
}

#[test]
fn every_segment_matches_a_shooting_solve() {
    let params = GaitParams::default();
    let plan = plan_footprints(WalkCommand::StepParameters, 6, &params, PlanarVec::ZERO).unwrap();
    let r = plan_walk(&plan, &params, 0.0, OMEGA);
    let mut checked = 0;
    for (k, seg) in r.segments().iter().enumerate() {
        if seg.kind == SegmentKind::Hold {
            continue;
        }
        let (c0, c1) = r.com_boundaries(k);
        let times: Vec<f64> = (1..=10)
            .map(|i| seg.t0 + (seg.t1 - seg.t0) * i as f64 / 11.0)
            .collect();
        for axis in 0..2 {
            let pick = |v: PlanarVec| if axis == 0 { v.x } else { v.y };
            let p = move |t: f64| pick(seg.zmp(t));
            let shot = shoot_bvp(p, OMEGA, (seg.t0, pick(c0)), (seg.t1, pick(c1)), &times);
            for (t, c) in times.iter().zip(shot) {
                let (closed, _) =
                    plan_com_affine(*t, (seg.p0, seg.p1), c0, c1, seg.t0, seg.t1, OMEGA).unwrap();
                assert!((pick(closed) - c).abs() < 1e-6, "segment {k} t={t}");
                assert!((pick(r.com(*t).0) - c).abs() < 1e-6, "segment {k} t={t}");
            }
        }
        checked += 1;
    }
    assert!(checked >= 13);
}

#[test]
fn scalar_dare_golden_ratio() {
    let one = DMatrix::from_element(1, 1, 1.0);
    let p = solve_dare(&one, &one, &one, &one).unwrap();
    assert!((p[(0, 0)] - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    assert!(dare_residual(&one, &one, &one, &one, &p).unwrap()[(0, 0)].abs() < 1e-12);
}

/// Steady-state posterior covariance `(I − L)P` against the empirical
/// covariance of the filter error driven by the design noise.
#[test]
fn kalman_posterior_covariance_monte_carlo() {
    let g = GainSet::synthesize(OMEGA, 0.002, &ControllerConfig::default()).unwrap();
    let post = (Matrix2::identity() - g.l) * g.kalman_p;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w = Normal::new(0.0, g.process_cov[(0, 0)].sqrt()).unwrap();
    let v = Normal::new(0.0, g.meas_cov[(0, 0)].sqrt()).unwrap();
    let mut e = Vector2::zeros();
    let (burn, n) = (2_000, 100_000);
    let mut acc = Matrix2::zeros();
    for k in 0..burn + n {
        let prior = g.system.a * e + Vector2::new(w.sample(&mut rng), w.sample(&mut rng));
        let noise = Vector2::new(v.sample(&mut rng), v.sample(&mut rng));
        e = prior - g.l * (prior + noise);
        if k >= burn {
            acc += e * e.transpose();
        }
    }
    let emp = acc / n as f64;
    for i in 0..2 {
        let rel = (emp[(i, i)] - post[(i, i)]).abs() / post[(i, i)];
        assert!(rel < 0.05, "diag {i}: {} vs {}", emp[(i, i)], post[(i, i)]);
    }
    let scale = (post[(0, 0)] * post[(1, 1)]).sqrt();
    assert!((emp[(0, 1)] - post[(0, 1)]).abs() < 0.05 * scale);
}

/// The closed loop built from the controller code itself has the
/// regulator poles and the estimator poles as its spectrum.
#[test]
fn separation_principle() {
    let g = GainSet::synthesize(OMEGA, 0.002, &ControllerConfig::default()).unwrap();
    let zero = ReferenceFrame {
        t: 0.0,
        zmp: PlanarVec::ZERO,
        com: PlanarVec::ZERO,
        com_velocity: PlanarVec::ZERO,
        dcm: PlanarVec::ZERO,
        swing: [0.0; 3],
    };
    // x-axis state: [c, ζ, ĉ, ζ̂, u_prev, X_i], all other channels zero
    let step = |s: &[f64; 6]| -> [f64; 6] {
        let mut ctl = ControllerState::new();
        ctl.update_estimate(PlanarVec::ZERO, PlanarVec::ZERO, &g);
        ctl.estimate[0] = Vector2::new(s[2], s[3]);
        ctl.last_command = PlanarVec::new(s[4], 0.0);
        ctl.integral = PlanarVec::new(s[5], 0.0);
        ctl.update_estimate(PlanarVec::new(s[0], 0.0), PlanarVec::new(s[1], 0.0), &g);
        let u = ctl.command(&zero, &g).x;
        let x = g.system.a * Vector2::new(s[0], s[1]) + g.system.b * u;
        [x[0], x[1], ctl.estimate[0][0], ctl.estimate[0][1], u, ctl.integral.x]
    };
    let mut m = DMatrix::zeros(6, 6);
    for j in 0..6 {
        let mut e = [0.0; 6];
        e[j] = 1e-3;
        let col = step(&e);
        for i in 0..6 {
            m[(i, j)] = col[i] / 1e-3;
        }
    }
    let mut got: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    let (a, b) = g.augmented();
    let reg = (a - b * g.k).complex_eigenvalues();
    let est = ((Matrix2::identity() - g.l) * g.system.a).complex_eigenvalues();
    let mut want: Vec<f64> = reg.iter().chain(est.iter()).map(|z| z.norm()).collect();
    want.push(0.0);
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    for (x, y) in got.iter().zip(&want) {
        assert!((x - y).abs() < 1e-6, "{got:?} vs {want:?}");
    }
}
