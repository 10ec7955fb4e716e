//! Adaptive quadrature used by the immersion formulas.
//!
//! Gauss–Kronrod 7–15 panels with recursive bisection, plus a cumulative
//! variant that integrates once across a sorted set of breakpoints so that
//! per-column surface quadratures are cached rather than recomputed.

use crate::{Error, Result};

// G7K15 nodes/weights on [-1, 1]; Kronrod nodes include the Gauss ones.
const XGK: [f64; 15] = [
    -0.991455371120813,
    -0.949107912342759,
    -0.864864423359769,
    -0.741531185599394,
    -0.586087235467691,
    -0.405845151377397,
    -0.207784955007898,
    0.0,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
];
const WGK: [f64; 15] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
];
const WG: [f64; 7] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let fx = f(c + h * x);
        k += wk * fx;
        if i % 2 == 1 {
            g += WG[i / 2] * fx;
        }
    }
    (k * h, (k - g).abs() * h.abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (val, err) = gk15(f, a, b);
    if err <= tol || (b - a).abs() < 1e-14 {
        return Ok(val);
    }
    if depth == 0 {
        return Err(Error::solver(format!(
            "quadrature failed to converge on [{a}, {b}] (residual {err:.3e})"
        )));
    }
    let c = 0.5 * (a + b);
    Ok(adapt(f, a, c, 0.5 * tol, depth - 1)? + adapt(f, c, b, 0.5 * tol, depth - 1)?)
}

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    adapt(&f, a, b, tol.max(1e-15), 48)
}

/// Cumulative integral of `f` from `base` to every breakpoint in `xs`.
///
/// `xs` need not be sorted relative to `base`; each segment between
/// consecutive distinct values is integrated once.
pub struct Cumulative {
    xs: Vec<f64>,
    vals: Vec<f64>,
}

impl Cumulative {
    pub fn new<F: Fn(f64) -> f64>(f: F, base: f64, xs: &[f64], tol: f64) -> Result<Self> {
        let mut pts: Vec<f64> = xs.to_vec();
        pts.push(base);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        // integrate segment by segment, then anchor at base
        let mut acc = vec![0.0; pts.len()];
        for i in 1..pts.len() {
            acc[i] = acc[i - 1] + integrate(&f, pts[i - 1], pts[i], tol)?;
        }
        let ib = pts
            .binary_search_by(|p| p.partial_cmp(&base).unwrap())
            .map_err(|_| Error::solver("cumulative quadrature lost its base point"))?;
        let shift = acc[ib];
        for v in &mut acc {
            *v -= shift;
        }
        Ok(Cumulative {
            xs: pts,
            vals: acc,
        })
    }

    /// Value at a breakpoint supplied to `new` (exact lookup).
    pub fn at(&self, x: f64) -> f64 {
        match self
            .xs
            .binary_search_by(|p| p.partial_cmp(&x).unwrap())
        {
            Ok(i) => self.vals[i],
            Err(i) => {
                // fall back to linear interpolation for off-breakpoint queries
                let i = i.clamp(1, self.xs.len() - 1);
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let w = (x - x0) / (x1 - x0);
                self.vals[i - 1] * (1.0 - w) + self.vals[i] * w
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn cumulative_matches_direct() {
        let xs: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let c = Cumulative::new(|x: f64| x.sin(), 1.0, &xs, 1e-13).unwrap();
        for &x in &xs {
            let direct = integrate(|t: f64| t.sin(), 1.0, x, 1e-13).unwrap();
            assert!((c.at(x) - direct).abs() < 1e-11, "x = {x}");
        }
    }
}
