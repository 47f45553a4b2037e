//! Independent numerical references shared by the integration tests.
#![allow(dead_code)]

/// Classic RK4 for `ẏ = f(t, y)` over `[t0, t1]` in `n` equal steps.
pub fn rk4<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    mut y: [f64; N],
    t0: f64,
    t1: f64,
    n: usize,
) -> [f64; N] {
    let h = (t1 - t0) / n as f64;
    let add = |y: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *y;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &add(&y, &k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, &add(&y, &k2, 0.5 * h));
        let k4 = f(t + h, &add(&y, &k3, h));
        for j in 0..N {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

/// Solve `c̈ = ω²(c − p(t))`, `c(t0) = c0`, `c(t1) = c1` by shooting on the
/// initial velocity. Returns the samples of `c` at `times` (sorted, inside
/// `[t0, t1]`).
pub fn shoot_bvp(
    p: impl Fn(f64) -> f64 + Copy,
    omega: f64,
    (t0, c0): (f64, f64),
    (t1, c1): (f64, f64),
    times: &[f64],
) -> Vec<f64> {
    let rhs = move |t: f64, y: &[f64; 2]| [y[1], omega * omega * (y[0] - p(t))];
    let n_per_unit = 20_000.0;
    let steps = |a: f64, b: f64| (((b - a) * n_per_unit).ceil() as usize).max(1);
    let end = |v0: f64| rk4(rhs, [c0, v0], t0, t1, steps(t0, t1))[0];
    // the end point is affine in the initial velocity: two shots suffice,
    // a secant refinement removes the residual rounding
    let (mut va, mut vb) = (0.0, 1.0);
    let (mut ea, mut eb) = (end(va) - c1, end(vb) - c1);
    for _ in 0..4 {
        if eb == ea {
            break;
        }
        let vc = vb - eb * (vb - va) / (eb - ea);
        va = vb;
        ea = eb;
        vb = vc;
        eb = end(vb) - c1;
    }
    let mut out = Vec::with_capacity(times.len());
    let mut y = [c0, vb];
    let mut t = t0;
    for &ts in times {
        y = rk4(rhs, y, t, ts, steps(t, ts));
        t = ts;
        out.push(y[0]);
    }
    out
}

pub const OMEGA: f64 = 3.132_091_952_673_165_5;
