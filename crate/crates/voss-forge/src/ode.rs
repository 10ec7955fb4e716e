//! Adaptive Dormand–Prince 5(4) integrator for small first-order systems.
//!
//! Stores every accepted node together with the state derivative, which is
//! enough for C¹ Hermite dense output downstream; `h_max` bounds the step so
//! that the Hermite error stays below the consumer's tolerance.

use crate::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One accepted node: time, state, state derivative.
pub struct Node<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub h_init: f64,
}

/// Integrate dy/dt = f(t, y) from (t0, y0) to t_end, returning all accepted
/// nodes including the endpoints.
pub fn dopri5<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opt: &Dopri5Options,
) -> Result<Vec<Node<N>>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let dir = (t_end - t0).signum();
    if dir == 0.0 {
        let dy = f(t0, &y0);
        return Ok(vec![Node { t: t0, y: y0, dy }]);
    }
    let mut t = t0;
    let mut y = y0;
    let mut dy = f(t, &y);
    let mut h = opt.h_init.abs().min(opt.h_max).copysign(dir);
    let mut nodes = vec![Node { t, y, dy }];
    let mut rejected_in_a_row = 0usize;

    while (t_end - t) * dir > 0.0 {
        if h.abs() > (t_end - t).abs() {
            h = t_end - t;
        }
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::solver(format!(
                "step size collapsed at t = {t} (h = {h:e})"
            )));
        }
        let mut k = [[0.0; N]; 7];
        k[0] = dy;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut y4 = y;
        for (s, ks) in k.iter().enumerate() {
            for i in 0..N {
                y5[i] += h * B5[s] * ks[i];
                y4[i] += h * B4[s] * ks[i];
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..N {
            let sc = opt.atol + opt.rtol * y[i].abs().max(y5[i].abs());
            err += ((y5[i] - y4[i]) / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();

        if err <= 1.0 {
            t += h;
            y = y5;
            dy = k[6]; // FSAL: stage 7 is f at the new point
            nodes.push(Node { t, y, dy });
            rejected_in_a_row = 0;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h = (h * fac).clamp(-opt.h_max, opt.h_max);
            if h == 0.0 {
                h = opt.h_max.copysign(dir);
            }
        } else {
            rejected_in_a_row += 1;
            if rejected_in_a_row > 60 {
                return Err(Error::solver(format!(
                    "too many rejected steps at t = {t}"
                )));
            }
            h *= (0.9 * err.powf(-0.2)).max(0.1);
        }
    }
    Ok(nodes)
}

/// Cubic Hermite evaluation on a sorted node table: value and derivative.
pub fn hermite_eval<const N: usize>(
    nodes: &[Node<N>],
    t: f64,
    comp: usize,
) -> (f64, f64) {
    let n = nodes.len();
    debug_assert!(n >= 2);
    let idx = match nodes.binary_search_by(|nd| nd.t.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.clamp(1, n - 1) - 1,
    };
    let (a, b) = (&nodes[idx], &nodes[idx + 1]);
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let (y0, y1) = (a.y[comp], b.y[comp]);
    let (d0, d1) = (a.dy[comp] * h, b.dy[comp] * h);
    let s2 = s * s;
    let s3 = s2 * s;
    let val = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * d1;
    let dval = ((6.0 * s2 - 6.0 * s) * y0
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (-6.0 * s2 + 6.0 * s) * y1
        + (3.0 * s2 - 2.0 * s) * d1)
        / h;
    (val, dval)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opt = Dopri5Options {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: 0.1,
            h_init: 1e-3,
        };
        let nodes = dopri5(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 2.0, &opt).unwrap();
        let last = nodes.last().unwrap();
        assert!((last.y[0] - (-2.0f64).exp()).abs() < 1e-10);
        let (v, d) = hermite_eval(&nodes, 1.37, 0);
        assert!((v - (-1.37f64).exp()).abs() < 1e-9);
        assert!((d + (-1.37f64).exp()).abs() < 1e-7);
    }
}
