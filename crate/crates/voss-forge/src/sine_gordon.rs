//! Angle fields for the two generator families.
//!
//! K-surfaces of revolution are driven by the pendulum reduction of the
//! sine-Gordon equation, solved in closed form by Jacobi elliptic functions;
//! Amsler surfaces are driven by the radial Painlevé III solution
//! w'' + w'/r = sin(w), w(0) = k, w'(0) = 0, solved numerically with a
//! series start at the removable singularity r = 0.

use crate::elliptic::{self, EllipticParam};
use crate::ode::{self, Dopri5Options, Node};
use crate::{Error, Result, SingularKind};
use std::f64::consts::PI;

/// Sine-Gordon angle of a pseudospherical surface of revolution.
///
/// The angle depends on x = u + v only; `strip_index` selects which open
/// strip between consecutive singular lines the field lives on.
#[derive(Debug, Clone, Copy)]
pub struct RevolutionAngle {
    pub k: f64,
    pub strip_index: i64,
}

impl RevolutionAngle {
    pub fn new(k: f64, strip_index: i64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::domain(format!("modulus must be positive, got {k}")));
        }
        Ok(RevolutionAngle { k, strip_index })
    }

    /// The open x-interval of the selected strip.
    pub fn strip(&self) -> Result<(f64, f64)> {
        domain_strip(self.k, self.strip_index)
    }

    /// Angle at x = u + v; errors on or outside the strip boundary.
    pub fn omega(&self, x: f64) -> Result<f64> {
        omega_revolution_in_strip(x, self.k, self.strip_index)
    }

    /// d(omega)/dx, closed form.
    pub fn omega_x(&self, x: f64) -> Result<f64> {
        let m = EllipticParam::from_modulus(self.k)?;
        let t = elliptic::jacobi(x, m)?;
        // omega = arccos(2 k^2 sn^2 - 1), so omega_x = -2k cn sign(sn)
        Ok(-2.0 * self.k * t.cn * t.sn.signum())
    }
}

/// Open x-interval of the strip with the given index.
///
/// For k < 1 the strips are bounded by fold lines at even multiples of K;
/// for k > 1 folds and cusps alternate at multiples of k' K(k'), k' = 1/k;
/// for k = 1 index 0 is (0, inf) and index -1 is (-inf, 0).
pub fn domain_strip(k: f64, strip_index: i64) -> Result<(f64, f64)> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::domain(format!("modulus must be positive, got {k}")));
    }
    let i = strip_index as f64;
    if k < 1.0 {
        let kq = elliptic::ellint_k(EllipticParam::from_modulus(k)?)?;
        Ok((2.0 * i * kq, 2.0 * (i + 1.0) * kq))
    } else if k == 1.0 {
        match strip_index {
            0 => Ok((0.0, f64::INFINITY)),
            -1 => Ok((f64::NEG_INFINITY, 0.0)),
            _ => Err(Error::domain(
                "k = 1 admits only strip indices 0 and -1".into(),
            )),
        }
    } else {
        let kp = 1.0 / k;
        let q = kp * elliptic::ellint_k(EllipticParam::from_modulus(kp)?)?;
        Ok((2.0 * i * q, (2.0 * i + 1.0) * q))
    }
}

/// The angle omega = arccos(2 k^2 sn^2(x | k^2) - 1) on the selected strip.
pub fn omega_revolution(x: f64, k: f64) -> Result<f64> {
    omega_revolution_in_strip(x, k, strip_of(x, k)?)
}

fn strip_of(x: f64, k: f64) -> Result<i64> {
    if k < 1.0 {
        let kq = elliptic::ellint_k(EllipticParam::from_modulus(k)?)?;
        Ok((x / (2.0 * kq)).floor() as i64)
    } else if k == 1.0 {
        Ok(if x >= 0.0 { 0 } else { -1 })
    } else {
        let kp = 1.0 / k;
        let q = kp * elliptic::ellint_k(EllipticParam::from_modulus(kp)?)?;
        let cell = (x / q).floor() as i64;
        if cell.rem_euclid(2) != 0 {
            return Err(Error::singular(
                SingularKind::Cusp,
                format!("x = {x} lies in a cusp-bounded gap for k = {k}"),
            ));
        }
        Ok(cell.div_euclid(2))
    }
}

fn omega_revolution_in_strip(x: f64, k: f64, strip_index: i64) -> Result<f64> {
    let (lo, hi) = domain_strip(k, strip_index)?;
    let width = if hi.is_finite() && lo.is_finite() {
        hi - lo
    } else {
        1.0
    };
    let guard = 1e-12 * width.max(1.0);
    if x <= lo + guard {
        return Err(Error::singular(
            SingularKind::Fold,
            format!("x = {x} on or outside the fold boundary at {lo}"),
        ));
    }
    if x >= hi - guard {
        let kind = if k > 1.0 {
            SingularKind::Cusp
        } else {
            SingularKind::Fold
        };
        return Err(Error::singular(
            kind,
            format!("x = {x} on or outside the strip boundary at {hi}"),
        ));
    }
    let m = EllipticParam::from_modulus(k)?;
    let t = elliptic::jacobi(x, m)?;
    let c = (2.0 * k * k * t.sn * t.sn - 1.0).clamp(-1.0, 1.0);
    Ok(c.acos())
}

// ---------------------------------------------------------------------------
// Painlevé III / Amsler angle
// ---------------------------------------------------------------------------

/// Radial Painlevé III solution w_k(r) with its sample table.
///
/// Samples carry (r, w, w') at every accepted solver node; evaluation is a
/// C¹ cubic Hermite. `r_first_cusp` is the smallest r > 0 where w leaves
/// (0, pi) (infinity if none was found before `r_max`).
#[derive(Debug, Clone)]
pub struct AmslerAngle {
    pub k: f64,
    pub r_grid: Vec<f64>,
    pub omega_samples: Vec<f64>,
    pub omega_prime_samples: Vec<f64>,
    pub r_first_cusp: f64,
    pub r_max: f64,
    pub tol: f64,
}

// Even series at r = 0: w = k + a2 r^2 + a4 r^4 + a6 r^6 + O(r^8).
fn series_coeffs(k: f64) -> (f64, f64, f64) {
    let (s, c) = k.sin_cos();
    let a2 = s / 4.0;
    let a4 = s * c / 64.0;
    let a6 = s * (c * c - 2.0 * s * s) / 2304.0;
    (a2, a4, a6)
}

fn series_eval(k: f64, r: f64) -> (f64, f64) {
    let (a2, a4, a6) = series_coeffs(k);
    let r2 = r * r;
    let w = k + r2 * (a2 + r2 * (a4 + r2 * a6));
    let wp = r * (2.0 * a2 + r2 * (4.0 * a4 + r2 * 6.0 * a6));
    (w, wp)
}

const SERIES_RADIUS: f64 = 1e-3;

/// Solve the Painlevé III initial value problem out to `r_max`.
///
/// `k` is the initial angle; the range (-pi, 0) is admitted alongside
/// (0, pi) so the odd symmetry w_{-k} = -w_k can be exercised directly.
pub fn solve_painleve3(k: f64, r_max: f64, tol: f64) -> Result<AmslerAngle> {
    if !k.is_finite() || k == 0.0 || k.abs() >= PI {
        return Err(Error::domain(format!(
            "initial angle must lie in (-pi, 0) or (0, pi), got {k}"
        )));
    }
    if !(r_max > SERIES_RADIUS) {
        return Err(Error::domain(format!("r_max must exceed {SERIES_RADIUS}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tol must be positive".into()));
    }

    let rhs = |r: f64, y: &[f64; 2]| [y[1], y[0].sin() - y[1] / r];
    let (w0, wp0) = series_eval(k, SERIES_RADIUS);
    let opt = Dopri5Options {
        rtol: tol,
        atol: tol * 1e-2,
        // keeps the Hermite dense output well below the ODE tolerance
        h_max: 1.5e-3,
        h_init: 1e-4,
    };
    let nodes = ode::dopri5(rhs, SERIES_RADIUS, [w0, wp0], r_max, &opt)?;

    let r_first_cusp = locate_first_cusp(&nodes, k.signum());

    let mut r_grid = Vec::with_capacity(nodes.len() + 1);
    let mut omega_samples = Vec::with_capacity(nodes.len() + 1);
    let mut omega_prime_samples = Vec::with_capacity(nodes.len() + 1);
    r_grid.push(0.0);
    omega_samples.push(k);
    omega_prime_samples.push(0.0);
    for nd in &nodes {
        r_grid.push(nd.t);
        omega_samples.push(nd.y[0]);
        omega_prime_samples.push(nd.y[1]);
    }

    Ok(AmslerAngle {
        k,
        r_grid,
        omega_samples,
        omega_prime_samples,
        r_first_cusp,
        r_max,
        tol,
    })
}

/// First r where the angle leaves the open strip (0, pi) (sign-mirrored for
/// negative k), found by bisection on the dense output.
fn locate_first_cusp(nodes: &[Node<2>], sign: f64) -> f64 {
    let barrier = |w: f64| {
        let w = sign * w; // map to the (0, pi) picture
        w.min(PI - w)
    };
    let mut prev_t = nodes[0].t;
    let mut prev_b = barrier(nodes[0].y[0]);
    for nd in &nodes[1..] {
        let b = barrier(nd.y[0]);
        if prev_b > 0.0 && b <= 0.0 {
            // bisect on the Hermite dense output
            let (mut lo, mut hi) = (prev_t, nd.t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let (w, _) = ode::hermite_eval(nodes, mid, 0);
                if barrier(w) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-10 {
                    break;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_t = nd.t;
        prev_b = b;
    }
    f64::INFINITY
}

impl AmslerAngle {
    /// Angle and radial derivative at radius r (even in r).
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let ra = r.abs();
        if ra > self.r_max {
            return Err(Error::domain(format!(
                "r = {r} beyond solved range {}",
                self.r_max
            )));
        }
        if ra >= self.r_first_cusp {
            return Err(Error::singular(
                SingularKind::Cusp,
                format!("r = {r} beyond the first cusp at {}", self.r_first_cusp),
            ));
        }
        let (w, wp) = self.interp(ra);
        Ok((w, wp * r.signum()))
    }

    /// Like `eval` but without the cusp fence (for continuing past cusps).
    pub fn eval_unrestricted(&self, r: f64) -> Result<(f64, f64)> {
        let ra = r.abs();
        if ra > self.r_max {
            return Err(Error::domain(format!(
                "r = {r} beyond solved range {}",
                self.r_max
            )));
        }
        let (w, wp) = self.interp(ra);
        Ok((w, wp * r.signum()))
    }

    fn interp(&self, r: f64) -> (f64, f64) {
        if r <= SERIES_RADIUS {
            return series_eval(self.k, r);
        }
        let n = self.r_grid.len();
        let idx = match self
            .r_grid
            .binary_search_by(|p| p.partial_cmp(&r).unwrap())
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let (r0, r1) = (self.r_grid[idx], self.r_grid[idx + 1]);
        let h = r1 - r0;
        let s = (r - r0) / h;
        let (y0, y1) = (self.omega_samples[idx], self.omega_samples[idx + 1]);
        let (d0, d1) = (
            self.omega_prime_samples[idx] * h,
            self.omega_prime_samples[idx + 1] * h,
        );
        let s2 = s * s;
        let s3 = s2 * s;
        let val = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1;
        // derivative from the Hermite of w' with the ODE giving w'' at nodes
        let wpp0 = self.omega_samples[idx].sin() - self.omega_prime_samples[idx] / r0.max(1e-300);
        let wpp1 =
            self.omega_samples[idx + 1].sin() - self.omega_prime_samples[idx + 1] / r1;
        let (p0, p1) = (self.omega_prime_samples[idx], self.omega_prime_samples[idx + 1]);
        let (q0, q1) = (wpp0 * h, wpp1 * h);
        let dval = (2.0 * s3 - 3.0 * s2 + 1.0) * p0
            + (s3 - 2.0 * s2 + s) * q0
            + (-2.0 * s3 + 3.0 * s2) * p1
            + (s3 - s2) * q1;
        (val, dval)
    }

    /// Angle at net coordinates (u, v) through the similarity variable
    /// r = sqrt(4 u v).
    pub fn omega_uv(&self, u: f64, v: f64) -> Result<f64> {
        if u <= 0.0 || v <= 0.0 {
            return Err(Error::domain(format!(
                "amsler angle requires u, v > 0, got ({u}, {v})"
            )));
        }
        let r = (4.0 * u * v).sqrt();
        Ok(self.eval(r)?.0)
    }

    /// Serialize the sample table as CSV with the mandatory header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,omega,omega_prime\n");
        for i in 0..self.r_grid.len() {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e}\n",
                self.r_grid[i], self.omega_samples[i], self.omega_prime_samples[i]
            ));
        }
        out
    }

    /// Rebuild from the CSV produced by [`AmslerAngle::to_csv`].
    ///
    /// The cusp radius is re-derived from the samples; `k` is the angle at
    /// r = 0 (first row).
    pub fn from_csv(text: &str, tol: f64) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty CSV".into()))?;
        if header.trim() != "r,omega,omega_prime" {
            return Err(Error::Config(format!(
                "expected header 'r,omega,omega_prime', got '{header}'"
            )));
        }
        let mut r_grid = Vec::new();
        let mut omega_samples = Vec::new();
        let mut omega_prime_samples = Vec::new();
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| Error::Config(format!("short row {ln}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("row {ln}: {e}")))
            };
            r_grid.push(next()?);
            omega_samples.push(next()?);
            omega_prime_samples.push(next()?);
        }
        if r_grid.len() < 4 {
            return Err(Error::Config("CSV holds too few samples".into()));
        }
        let k = omega_samples[0];
        let sign = k.signum();
        let barrier = |w: f64| (sign * w).min(PI - sign * w);
        let mut r_first_cusp = f64::INFINITY;
        for i in 1..r_grid.len() {
            if barrier(omega_samples[i - 1]) > 0.0 && barrier(omega_samples[i]) <= 0.0 {
                r_first_cusp = r_grid[i];
                break;
            }
        }
        let r_max = *r_grid.last().unwrap();
        Ok(AmslerAngle {
            k,
            r_grid,
            omega_samples,
            omega_prime_samples,
            r_first_cusp,
            r_max,
            tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_examples() {
        let (a, b) = domain_strip(0.6, 0).unwrap();
        let kq = elliptic::ellint_k(EllipticParam::new(0.36).unwrap()).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - 2.0 * kq).abs() < 1e-14);

        let (a, b) = domain_strip(1.0, 0).unwrap();
        assert_eq!(a, 0.0);
        assert!(b.is_infinite());

        let (a, b) = domain_strip(2.0, 0).unwrap();
        let kq = elliptic::ellint_k(EllipticParam::new(0.25).unwrap()).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - 0.5 * kq).abs() < 1e-14);
    }

    #[test]
    fn omega_at_quarter_period() {
        for &k in &[0.4, 0.8] {
            let kq = elliptic::ellint_k(EllipticParam::from_modulus(k).unwrap()).unwrap();
            let w = omega_revolution(kq, k).unwrap();
            assert!((w - (2.0 * k * k - 1.0).acos()).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_limit_at_k_one() {
        // sn(x|1) = tanh x, so omega -> arccos(1) = 0 as x -> inf
        let w = omega_revolution(20.0, 1.0).unwrap();
        assert!(w < 1e-6);
    }

    #[test]
    fn omega_fold_boundary_is_singular() {
        match omega_revolution(0.0, 0.7) {
            Err(Error::SingularDomain { kind, .. }) => assert_eq!(kind, SingularKind::Fold),
            other => panic!("expected fold error, got {other:?}"),
        }
    }

    #[test]
    fn omega_open_interval() {
        let ra = RevolutionAngle::new(0.8, 0).unwrap();
        let (lo, hi) = ra.strip().unwrap();
        for i in 1..60 {
            let x = lo + (hi - lo) * i as f64 / 60.0;
            let w = ra.omega(x).unwrap();
            assert!(w > 0.0 && w < PI);
        }
    }

    #[test]
    fn omega_satisfies_pendulum_equation() {
        // d^2 w / dx^2 = sin w by central differences at interior points
        let h = 1e-4;
        for &k in &[0.5, 0.8, 1.0, 2.0] {
            let ra = RevolutionAngle::new(k, 0).unwrap();
            let (lo, hi) = ra.strip().unwrap();
            let hi = if hi.is_finite() { hi } else { lo + 6.0 };
            for i in 1..100 {
                let x = lo + (hi - lo) * i as f64 / 101.0;
                if x - h <= lo || x + h >= hi {
                    continue;
                }
                let wpp = (ra.omega(x + h).unwrap() - 2.0 * ra.omega(x).unwrap()
                    + ra.omega(x - h).unwrap())
                    / (h * h);
                assert!(
                    (wpp - ra.omega(x).unwrap().sin()).abs() < 1e-6,
                    "k = {k}, x = {x}"
                );
            }
        }
    }

    #[test]
    fn painleve_series_consistency() {
        let k = 1.1;
        let sol = solve_painleve3(k, 2.0, 1e-10).unwrap();
        for i in 1..10 {
            let r = 1e-3 * i as f64;
            let (w, _) = sol.eval(r).unwrap();
            let lead = k + k.sin() * r * r / 4.0;
            assert!((w - lead).abs() < 2.0 * r.powi(4), "r = {r}");
        }
    }

    #[test]
    fn painleve_odd_symmetry() {
        let k = 0.9;
        let plus = solve_painleve3(k, 3.0, 1e-9).unwrap();
        let minus = solve_painleve3(-k, 3.0, 1e-9).unwrap();
        for i in 1..30 {
            let r = 0.1 * i as f64;
            let (wp, _) = plus.eval_unrestricted(r).unwrap();
            let (wm, _) = minus.eval_unrestricted(r).unwrap();
            assert!((wp + wm).abs() < 1e-10, "r = {r}: {wp} vs {wm}");
        }
    }

    #[test]
    fn painleve_even_in_r() {
        let sol = solve_painleve3(1.3, 2.0, 1e-9).unwrap();
        let (wp, dp) = sol.eval(0.7).unwrap();
        let (wm, dm) = sol.eval(-0.7).unwrap();
        assert_eq!(wp, wm);
        assert_eq!(dp, -dm);
    }

    #[test]
    fn first_cusp_stability() {
        let k = std::f64::consts::FRAC_PI_2;
        let a = solve_painleve3(k, 5.0, 1e-9).unwrap();
        let b = solve_painleve3(k, 5.0, 5e-10).unwrap();
        assert!(a.r_first_cusp.is_finite());
        assert!((a.r_first_cusp - b.r_first_cusp).abs() < 1e-6);
    }

    #[test]
    fn amsler_omega_squeeze_invariant() {
        let sol = solve_painleve3(1.2, 4.0, 1e-9).unwrap();
        let w1 = sol.omega_uv(0.4, 0.5).unwrap();
        let w2 = sol.omega_uv(0.4 * 1.7, 0.5 / 1.7).unwrap();
        assert!((w1 - w2).abs() < 1e-12);
    }

    #[test]
    fn amsler_refined_solve_agrees() {
        let sol = solve_painleve3(std::f64::consts::FRAC_PI_2, 3.0, 1e-8).unwrap();
        let fine = solve_painleve3(std::f64::consts::FRAC_PI_2, 3.0, 1e-10).unwrap();
        let w = sol.omega_uv(0.5, 0.5).unwrap();
        let wf = fine.omega_uv(0.5, 0.5).unwrap();
        assert!((w - wf).abs() < 1e-8);
    }

    #[test]
    fn amsler_past_cusp_is_singular() {
        let sol = solve_painleve3(std::f64::consts::FRAC_PI_2, 6.0, 1e-9).unwrap();
        assert!(sol.r_first_cusp.is_finite());
        let r = sol.r_first_cusp + 0.1;
        match sol.eval(r) {
            Err(Error::SingularDomain { kind, .. }) => assert_eq!(kind, SingularKind::Cusp),
            other => panic!("expected cusp error, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let sol = solve_painleve3(1.0, 2.0, 1e-9).unwrap();
        let text = sol.to_csv();
        let back = AmslerAngle::from_csv(&text, 1e-9).unwrap();
        assert_eq!(back.r_grid.len(), sol.r_grid.len());
        let (w0, d0) = sol.eval(1.3).unwrap();
        let (w1, d1) = back.eval(1.3).unwrap();
        assert!((w0 - w1).abs() < 1e-15);
        assert!((d0 - d1).abs() < 1e-15);
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(solve_painleve3(0.0, 2.0, 1e-9).is_err());
        assert!(solve_painleve3(3.5, 2.0, 1e-9).is_err());
        assert!(solve_painleve3(1.0, 2.0, -1.0).is_err());
    }
}
