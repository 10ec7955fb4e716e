//! Explicit immersions: K-nets of revolution, the Bour isometry family,
//! rotation fields of surfaces of revolution, and the alignable V-nets of
//! the first kind together with their isometric deformations.
//!
//! Conventions fixed here once and used everywhere:
//!
//! - K-net parameters are (u, v) with x = u + v, y = u - v; the rotational
//!   angle of the revolution families is k·y.
//! - The Bour family is indexed by the pair (s, t) of its second-form
//!   display (M = t/G and the first integral s); the member with s = 1,
//!   t = 0 is the base surface of revolution. The immersion formula
//!   evaluates the member through the slot substitution (1/s, t/s) — see
//!   `bour_core` — which is what makes the sampled first fundamental form
//!   independent of (s, t).
//! - Rotation fields are normalized so that the rotation operator against
//!   the generating K-net has the classified closed-form coefficients.

mod lax;

pub use lax::{integrate_lax_knet, LaxDiagnostics};

use crate::elliptic::{self, EllipticParam};
use crate::grid::{Deriv1, Deriv2, GridSpec, Provenance, SurfaceGrid};
use crate::quad;
use crate::sine_gordon;
use crate::vec3::Vec3;
use crate::{Error, Result, SingularKind};

/// Profile curve gamma(x) = (f(x), 0, g(x)) of a surface of revolution.
#[derive(Debug, Clone)]
pub enum ProfileCurve {
    /// Profile of the K-net of revolution with modulus k:
    /// f = dn(x|k²)/k, g = (∫dn² - x)/k, swept with angle k·y.
    KNetRevolution { k: f64 },
    /// f = a cosh x, g = a x, swept with angle y.
    Catenoid { a: f64 },
    /// Hermite-interpolated samples (x must be strictly increasing).
    Tabulated {
        x: Vec<f64>,
        f: Vec<f64>,
        fp: Vec<f64>,
        g: Vec<f64>,
        gp: Vec<f64>,
    },
}

impl ProfileCurve {
    /// Angular speed of the sweep: the revolution angle is `angle_scale * y`.
    pub fn angle_scale(&self) -> f64 {
        match self {
            ProfileCurve::KNetRevolution { k } => *k,
            _ => 1.0,
        }
    }

    /// Whether grid coordinates are net coordinates (x, y) = (u+v, u-v).
    pub fn uses_net_coords(&self) -> bool {
        matches!(self, ProfileCurve::KNetRevolution { .. })
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        match self {
            ProfileCurve::KNetRevolution { k } => {
                let t = elliptic::jacobi(x, EllipticParam::from_modulus(*k)?)?;
                Ok(t.dn / k)
            }
            ProfileCurve::Catenoid { a } => Ok(a * x.cosh()),
            ProfileCurve::Tabulated { x: xs, f, fp, .. } => hermite(xs, f, fp, x),
        }
    }

    pub fn fp(&self, x: f64) -> Result<f64> {
        match self {
            ProfileCurve::KNetRevolution { k } => {
                let m = k * k;
                let t = elliptic::jacobi(x, EllipticParam::new(m)?)?;
                Ok(-m * t.sn * t.cn / k)
            }
            ProfileCurve::Catenoid { a } => Ok(a * x.sinh()),
            ProfileCurve::Tabulated { x: xs, f, fp, .. } => hermite_deriv(xs, f, fp, x),
        }
    }

    pub fn fpp(&self, x: f64) -> Result<f64> {
        match self {
            ProfileCurve::KNetRevolution { k } => {
                let m = k * k;
                let t = elliptic::jacobi(x, EllipticParam::new(m)?)?;
                Ok(-m * t.dn * (t.cn * t.cn - t.sn * t.sn) / k)
            }
            ProfileCurve::Catenoid { a } => Ok(a * x.cosh()),
            ProfileCurve::Tabulated { x: xs, fp, .. } => {
                // slope of the fp table rebuilt by differences
                fd_slope(xs, fp, x)
            }
        }
    }

    pub fn g(&self, x: f64) -> Result<f64> {
        match self {
            ProfileCurve::KNetRevolution { k } => Ok((dn2_integral(x, *k)? - x) / k),
            ProfileCurve::Catenoid { a } => Ok(a * x),
            ProfileCurve::Tabulated { x: xs, g, gp, .. } => hermite(xs, g, gp, x),
        }
    }

    pub fn gp(&self, x: f64) -> Result<f64> {
        match self {
            ProfileCurve::KNetRevolution { k } => {
                let t = elliptic::jacobi(x, EllipticParam::from_modulus(*k)?)?;
                Ok((t.dn * t.dn - 1.0) / k)
            }
            ProfileCurve::Catenoid { a } => Ok(*a),
            ProfileCurve::Tabulated { x: xs, g, gp, .. } => hermite_deriv(xs, g, gp, x),
        }
    }

    pub fn gpp(&self, x: f64) -> Result<f64> {
        match self {
            ProfileCurve::KNetRevolution { k } => {
                let m = k * k;
                let t = elliptic::jacobi(x, EllipticParam::new(m)?)?;
                Ok(-2.0 * m * t.sn * t.cn * t.dn / k)
            }
            ProfileCurve::Catenoid { .. } => Ok(0.0),
            ProfileCurve::Tabulated { x: xs, gp, .. } => fd_slope(xs, gp, x),
        }
    }
}

fn hermite(xs: &[f64], ys: &[f64], dys: &[f64], x: f64) -> Result<f64> {
    let (i, s, h) = locate(xs, x)?;
    let (y0, y1, d0, d1) = (ys[i], ys[i + 1], dys[i] * h, dys[i + 1] * h);
    let s2 = s * s;
    let s3 = s2 * s;
    Ok((2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * d1)
}

fn hermite_deriv(xs: &[f64], ys: &[f64], dys: &[f64], x: f64) -> Result<f64> {
    let (i, s, h) = locate(xs, x)?;
    let (y0, y1, d0, d1) = (ys[i], ys[i + 1], dys[i] * h, dys[i + 1] * h);
    let s2 = s * s;
    Ok(((6.0 * s2 - 6.0 * s) * y0
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (-6.0 * s2 + 6.0 * s) * y1
        + (3.0 * s2 - 2.0 * s) * d1)
        / h)
}

fn fd_slope(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let (i, _, h) = locate(xs, x)?;
    Ok((ys[i + 1] - ys[i]) / h)
}

fn locate(xs: &[f64], x: f64) -> Result<(usize, f64, f64)> {
    if xs.len() < 2 || x < xs[0] || x > xs[xs.len() - 1] {
        return Err(Error::domain(format!(
            "tabulated profile queried outside its range at x = {x}"
        )));
    }
    let i = match xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(xs.len() - 2),
        Err(i) => i - 1,
    };
    let h = xs[i + 1] - xs[i];
    Ok((i, (x - xs[i]) / h, h))
}

/// ∫₀ˣ dn²(z | k²) dz for any k > 0.
fn dn2_integral(x: f64, k: f64) -> Result<f64> {
    let m = k * k;
    if m < 1.0 {
        let mp = EllipticParam::new(m)?;
        let am = elliptic::jacobi(x, mp)?.am;
        elliptic::ellint_e(am, mp)
    } else if m == 1.0 {
        Ok(x.tanh())
    } else {
        // dn²(x|m) = cn²(√m x | 1/m); ∫cn² = w - (w - E(am w))/m₁
        let m1 = 1.0 / m;
        let sm = m.sqrt();
        let w = sm * x;
        let mp = EllipticParam::new(m1)?;
        let am = elliptic::jacobi(w, mp)?.am;
        let e = elliptic::ellint_e(am, mp)?;
        Ok((w - (w - e) / m1) / sm)
    }
}

// ---------------------------------------------------------------------------
// K-net of revolution
// ---------------------------------------------------------------------------

fn strip_check(k: f64, spec: &GridSpec) -> Result<i64> {
    let x_min = spec.u_range.0 + spec.v_range.0;
    let x_max = spec.u_range.1 + spec.v_range.1;
    // find the strip containing the center, then require the margin inset
    let xc = 0.5 * (x_min + x_max);
    let strip = strip_index_of(k, xc)?;
    let (lo, hi) = sine_gordon::domain_strip(k, strip)?;
    let width = if hi.is_finite() { hi - lo } else { 1.0 };
    let inset = spec.margin * width;
    if x_min < lo + inset || (hi.is_finite() && x_max > hi - inset) {
        return Err(Error::singular(
            SingularKind::Fold,
            format!(
                "grid x-range [{x_min}, {x_max}] touches the strip boundary ({lo}, {hi}) \
                 within margin {}",
                spec.margin
            ),
        ));
    }
    Ok(strip)
}

fn strip_index_of(k: f64, x: f64) -> Result<i64> {
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
                format!("grid center x = {x} falls in a cusp gap for k = {k}"),
            ));
        }
        Ok(cell.div_euclid(2))
    }
}

/// The K-net of revolution psi_k(u, v) with analytic first and second
/// derivatives attached.
pub fn knet_revolution(k: f64, spec: &GridSpec) -> Result<SurfaceGrid> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::domain(format!("modulus must be positive, got {k}")));
    }
    strip_check(k, spec)?;
    let m = k * k;
    let mp = EllipticParam::new(m)?;
    let n = spec.len();
    let mut positions = vec![[0.0; 3]; n];
    let mut du = vec![[0.0; 3]; n];
    let mut dv = vec![[0.0; 3]; n];
    let mut duu = vec![[0.0; 3]; n];
    let mut duv = vec![[0.0; 3]; n];
    let mut dvv = vec![[0.0; 3]; n];

    for i in 0..spec.nu {
        let u = spec.u(i);
        for j in 0..spec.nv {
            let v = spec.v(j);
            let x = u + v;
            let y = u - v;
            let t = elliptic::jacobi(x, mp)?;
            let (sn, cn, dn) = (t.sn, t.cn, t.dn);
            let phi = k * y;
            let (sphi, cphi) = phi.sin_cos();
            let z = (dn2_integral(x, k)? - x) / k;
            let idx = spec.idx(i, j);
            positions[idx] = [dn * cphi / k, dn * sphi / k, z];

            let px = [
                -m * sn * cn * cphi / k,
                -m * sn * cn * sphi / k,
                (dn * dn - 1.0) / k,
            ];
            let py = [-dn * sphi, dn * cphi, 0.0];
            let pxx = [
                -m * dn * (cn * cn - sn * sn) * cphi / k,
                -m * dn * (cn * cn - sn * sn) * sphi / k,
                -2.0 * m * sn * cn * dn / k,
            ];
            let pxy = [m * sn * cn * sphi, -m * sn * cn * cphi, 0.0];
            let pyy = [-k * dn * cphi, -k * dn * sphi, 0.0];

            du[idx] = crate::vec3::add(px, py);
            dv[idx] = crate::vec3::sub(px, py);
            duu[idx] = [
                pxx[0] + 2.0 * pxy[0] + pyy[0],
                pxx[1] + 2.0 * pxy[1] + pyy[1],
                pxx[2] + 2.0 * pxy[2] + pyy[2],
            ];
            duv[idx] = crate::vec3::sub(pxx, pyy);
            dvv[idx] = [
                pxx[0] - 2.0 * pxy[0] + pyy[0],
                pxx[1] - 2.0 * pxy[1] + pyy[1],
                pxx[2] - 2.0 * pxy[2] + pyy[2],
            ];
        }
    }

    Ok(SurfaceGrid {
        spec: spec.clone(),
        positions,
        d1: Some(Deriv1 { du, dv }),
        d2: Some(Deriv2 { duu, duv, dvv }),
        provenance: Provenance::new("knet-revolution").with("k", k),
    })
}

// ---------------------------------------------------------------------------
// Bour family
// ---------------------------------------------------------------------------

/// Bour deformation parameters in the second-form normalization: the member
/// (s, t) has M = t/G in the Bour frame and s as the Gauss first integral;
/// (1, 0) is the base surface of revolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BourParams {
    pub s: f64,
    pub t: f64,
}

struct BourEval<'a> {
    profile: &'a ProfileCurve,
    sigma: f64,
    tau: f64,
    /// cumulative ∫ f sqrt(inr)/rad (the height integral)
    zc: quad::Cumulative,
    /// cumulative ∫ sqrt(inr)/(f rad) (the angular shear)
    wc: quad::Cumulative,
}

fn bour_rad_inr(profile: &ProfileCurve, sigma: f64, tau: f64, x: f64) -> Result<(f64, f64)> {
    let f = profile.f(x)?;
    let fp = profile.fp(x)?;
    let gp = profile.gp(x)?;
    let rad = sigma * f * f - tau * tau;
    let inr = rad * (fp * fp + gp * gp) - sigma * sigma * f * f * fp * fp;
    Ok((rad, inr))
}

impl<'a> BourEval<'a> {
    fn new(
        profile: &'a ProfileCurve,
        params: BourParams,
        xs: &[f64],
        x_base: f64,
    ) -> Result<Self> {
        if !(params.s > 0.0) {
            return Err(Error::domain(format!(
                "Bour parameter s must be positive, got {}",
                params.s
            )));
        }
        let sigma = 1.0 / params.s;
        let tau = params.t / params.s;
        // validate the radicands on the sample set
        let mut scale: f64 = 0.0;
        for &x in xs {
            let (rad, inr) = bour_rad_inr(profile, sigma, tau, x)?;
            scale = scale.max(inr.abs());
            if rad <= 0.0 {
                return Err(Error::domain(format!(
                    "Bour radius radicand s f^2 - t^2 <= 0 at x = {x}"
                )));
            }
            if inr < -1e-9 * scale.max(1.0) {
                return Err(Error::domain(format!(
                    "Bour immersion radicand negative at x = {x} ({inr:.3e})"
                )));
            }
        }
        let p = profile;
        let (s2, t2) = (sigma, tau);
        let zint = move |x: f64| -> f64 {
            let (rad, inr) = match bour_rad_inr(p, s2, t2, x) {
                Ok(v) => v,
                Err(_) => return f64::NAN,
            };
            p.f(x).map(|f| f * inr.max(0.0).sqrt() / rad).unwrap_or(f64::NAN)
        };
        let wint = move |x: f64| -> f64 {
            let (rad, inr) = match bour_rad_inr(p, s2, t2, x) {
                Ok(v) => v,
                Err(_) => return f64::NAN,
            };
            p.f(x)
                .map(|f| inr.max(0.0).sqrt() / (f * rad))
                .unwrap_or(f64::NAN)
        };
        let zc = quad::Cumulative::new(zint, x_base, xs, 1e-12)?;
        let wc = quad::Cumulative::new(wint, x_base, xs, 1e-12)?;
        Ok(BourEval {
            profile,
            sigma,
            tau,
            zc,
            wc,
        })
    }

    fn point(&self, x: f64, y: f64) -> Result<(Vec3, Vec3, Vec3)> {
        let f = self.profile.f(x)?;
        let fp = self.profile.fp(x)?;
        let gp = self.profile.gp(x)?;
        let (sigma, tau) = (self.sigma, self.tau);
        let rad = sigma * f * f - tau * tau;
        let inr = (rad * (fp * fp + gp * gp) - sigma * sigma * f * f * fp * fp).max(0.0);
        let sq = sigma.sqrt();
        let r = rad.sqrt();
        let phi = (y + tau * self.wc.at(x)) / sq;
        let (sphi, cphi) = phi.sin_cos();
        let z = sq * self.zc.at(x) - tau * phi;
        let pos = [r * cphi, r * sphi, z];

        // analytic partials in (x, y)
        let rp = sigma * f * fp / r;
        let phix = tau * inr.sqrt() / (f * rad) / sq;
        let zx = sq * f * inr.sqrt() / rad - tau * phix;
        let px = [
            rp * cphi - r * phix * sphi,
            rp * sphi + r * phix * cphi,
            zx,
        ];
        let py = [-r * sphi / sq, r * cphi / sq, -tau / sq];
        Ok((pos, px, py))
    }
}

/// Sample the Bour-family member `params` of `profile` on `spec`.
///
/// For profiles in net coordinates the grid is (u, v) with the immersion
/// evaluated at (x, y) = (u+v, angle_scale·(u-v)); otherwise the grid slots
/// feed the immersion directly.
pub fn bour_immersion(
    profile: &ProfileCurve,
    params: BourParams,
    spec: &GridSpec,
) -> Result<SurfaceGrid> {
    let net = profile.uses_net_coords();
    let kappa = profile.angle_scale();
    if net {
        if let ProfileCurve::KNetRevolution { k } = profile {
            strip_check(*k, spec)?;
        }
    }
    let xs: Vec<f64> = if net {
        let mut v = Vec::with_capacity(spec.len());
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                v.push(spec.u(i) + spec.v(j));
            }
        }
        v
    } else {
        (0..spec.nu).map(|i| spec.u(i)).collect()
    };
    let x_base = 0.5 * (xs.iter().cloned().fold(f64::INFINITY, f64::min)
        + xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let ev = BourEval::new(profile, params, &xs, x_base)?;

    let n = spec.len();
    let mut positions = vec![[0.0; 3]; n];
    let mut du = vec![[0.0; 3]; n];
    let mut dv = vec![[0.0; 3]; n];
    for i in 0..spec.nu {
        for j in 0..spec.nv {
            let idx = spec.idx(i, j);
            if net {
                let x = spec.u(i) + spec.v(j);
                let y = kappa * (spec.u(i) - spec.v(j));
                let (pos, px, py) = ev.point(x, y)?;
                positions[idx] = pos;
                du[idx] = [
                    px[0] + kappa * py[0],
                    px[1] + kappa * py[1],
                    px[2] + kappa * py[2],
                ];
                dv[idx] = [
                    px[0] - kappa * py[0],
                    px[1] - kappa * py[1],
                    px[2] - kappa * py[2],
                ];
            } else {
                let (pos, px, py) = ev.point(spec.u(i), spec.v(j))?;
                positions[idx] = pos;
                du[idx] = px;
                dv[idx] = py;
            }
        }
    }
    let prov = Provenance::new("bour").with("s", params.s).with("t", params.t);
    Ok(SurfaceGrid {
        spec: spec.clone(),
        positions,
        d1: Some(Deriv1 { du, dv }),
        d2: None,
        provenance: prov,
    })
}

// ---------------------------------------------------------------------------
// Rotation fields
// ---------------------------------------------------------------------------

/// Rotation field of the instantaneous sliding (a surface of revolution),
/// normalized so the rotation operator against the generating K-net equals
/// csc²(omega/2) on both anti-diagonal entries.
pub fn rotation_field_positive(profile: &ProfileCurve, spec: &GridSpec) -> Result<SurfaceGrid> {
    let kappa = profile.angle_scale();
    let net = profile.uses_net_coords();
    if let ProfileCurve::KNetRevolution { k } = profile {
        strip_check(*k, spec)?;
    }
    let scale = 1.0 / (kappa * kappa);

    // height integral L(x) = ∫₀ˣ g'/f²; closed form through Pi for the
    // K-net profile with k² < 1, adaptive quadrature otherwise.
    let height: Box<dyn Fn(f64) -> Result<f64>> = match profile {
        ProfileCurve::KNetRevolution { k } if *k < 1.0 => {
            let k = *k;
            let mp = EllipticParam::from_modulus(k)?;
            Box::new(move |x: f64| {
                let am = elliptic::jacobi(x, mp)?.am;
                Ok(-k * (elliptic::ellint_pi(k * k, am, mp)? - x))
            })
        }
        _ => {
            let p = profile.clone();
            Box::new(move |x: f64| {
                quad::integrate(
                    |z| {
                        let f = p.f(z).unwrap_or(f64::NAN);
                        let gp = p.gp(z).unwrap_or(f64::NAN);
                        gp / (f * f)
                    },
                    0.0,
                    x,
                    1e-12,
                )
            })
        }
    };

    let n = spec.len();
    let mut positions = vec![[0.0; 3]; n];
    let mut du = vec![[0.0; 3]; n];
    let mut dv = vec![[0.0; 3]; n];
    for i in 0..spec.nu {
        for j in 0..spec.nv {
            let (x, y) = if net {
                (spec.u(i) + spec.v(j), spec.u(i) - spec.v(j))
            } else {
                (spec.u(i), spec.v(j))
            };
            let theta = kappa * y;
            let (st, ct) = theta.sin_cos();
            let f = profile.f(x)?;
            let fp = profile.fp(x)?;
            let gp = profile.gp(x)?;
            let idx = spec.idx(i, j);
            positions[idx] = [
                -scale * ct / f,
                -scale * st / f,
                scale * height(x)?,
            ];
            let px = [
                scale * fp * ct / (f * f),
                scale * fp * st / (f * f),
                scale * gp / (f * f),
            ];
            let pt = [scale * st / f, -scale * ct / f, 0.0];
            if net {
                du[idx] = [
                    px[0] + kappa * pt[0],
                    px[1] + kappa * pt[1],
                    px[2] + kappa * pt[2],
                ];
                dv[idx] = [
                    px[0] - kappa * pt[0],
                    px[1] - kappa * pt[1],
                    px[2] - kappa * pt[2],
                ];
            } else {
                du[idx] = px;
                dv[idx] = pt;
            }
        }
    }
    Ok(SurfaceGrid {
        spec: spec.clone(),
        positions,
        d1: Some(Deriv1 { du, dv }),
        d2: None,
        provenance: Provenance::new("rotation-positive"),
    })
}

/// Rotation field of the instantaneous wrapping (always a helicoid),
/// normalized so the third component is exactly the angle coordinate y.
pub fn rotation_field_negative(profile: &ProfileCurve, spec: &GridSpec) -> Result<SurfaceGrid> {
    let kappa = profile.angle_scale();
    let net = profile.uses_net_coords();
    if let ProfileCurve::KNetRevolution { k } = profile {
        strip_check(*k, spec)?;
    }
    let scale = 1.0 / kappa;

    // g' must not vanish on the sampled x-range
    let mut check_x = |x: f64| -> Result<()> {
        let gp = profile.gp(x)?;
        if gp.abs() < 1e-12 {
            return Err(Error::domain(format!("g' vanishes at x = {x}")));
        }
        Ok(())
    };
    for i in 0..spec.nu {
        for j in 0..spec.nv {
            let x = if net {
                spec.u(i) + spec.v(j)
            } else {
                spec.u(i)
            };
            check_x(x)?;
        }
    }

    let n = spec.len();
    let mut positions = vec![[0.0; 3]; n];
    let mut du = vec![[0.0; 3]; n];
    let mut dv = vec![[0.0; 3]; n];
    for i in 0..spec.nu {
        for j in 0..spec.nv {
            let (x, y) = if net {
                (spec.u(i) + spec.v(j), spec.u(i) - spec.v(j))
            } else {
                (spec.u(i), spec.v(j))
            };
            let theta = kappa * y;
            let (st, ct) = theta.sin_cos();
            let fp = profile.fp(x)?;
            let gp = profile.gp(x)?;
            let h = fp / gp;
            let hp = (profile.fpp(x)? * gp - fp * profile.gpp(x)?) / (gp * gp);
            let idx = spec.idx(i, j);
            positions[idx] = [scale * h * st, -scale * h * ct, scale * theta];
            let px = [scale * hp * st, -scale * hp * ct, 0.0];
            let pt = [scale * h * ct, scale * h * st, scale];
            if net {
                du[idx] = [
                    px[0] + kappa * pt[0],
                    px[1] + kappa * pt[1],
                    px[2] + kappa * pt[2],
                ];
                dv[idx] = [
                    px[0] - kappa * pt[0],
                    px[1] - kappa * pt[1],
                    px[2] - kappa * pt[2],
                ];
            } else {
                du[idx] = px;
                dv[idx] = pt;
            }
        }
    }
    Ok(SurfaceGrid {
        spec: spec.clone(),
        positions,
        d1: Some(Deriv1 { du, dv }),
        d2: None,
        provenance: Provenance::new("rotation-negative"),
    })
}

// ---------------------------------------------------------------------------
// Alignable V-nets of the first kind
// ---------------------------------------------------------------------------

/// Candidate formulas for the negative-kind deformation parameter s(lambda).
///
/// The two appear in different gauges of the Killing normalization; the
/// lambda-isometry acceptance test discriminates which one, interpreted in
/// the fixed gauge of this module, produces the V-net family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeSVariant {
    /// s = t² + k² - 1 (passes the lambda-isometry test; the default)
    Corollary,
    /// s = (k² + t² - 1)/k²
    Theorem,
}

#[derive(Debug, Clone, Copy)]
pub struct FirstKindParams {
    pub positive: bool,
    pub k: f64,
    pub lambda: f64,
}

impl FirstKindParams {
    pub fn new(positive: bool, k: f64, lambda: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::domain(format!("modulus must be positive, got {k}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!(
                "deformation parameter must be positive, got {lambda}"
            )));
        }
        Ok(FirstKindParams {
            positive,
            k,
            lambda,
        })
    }
}

/// Bour deformation parameters of the first-kind isometric family member at
/// `lambda` (positive kind: t = (λ-1/λ)/2, s = t² + k²).
pub fn bour_params_first_kind(positive: bool, k: f64, lambda: f64) -> BourParams {
    bour_params_first_kind_with(positive, k, lambda, NegativeSVariant::Corollary)
}

pub fn bour_params_first_kind_with(
    positive: bool,
    k: f64,
    lambda: f64,
    variant: NegativeSVariant,
) -> BourParams {
    if positive {
        let t = 0.5 * (lambda - 1.0 / lambda);
        BourParams { s: t * t + k * k, t }
    } else {
        let t = -0.5 * (lambda + 1.0 / lambda);
        let s = match variant {
            NegativeSVariant::Corollary => t * t + k * k - 1.0,
            NegativeSVariant::Theorem => (k * k + t * t - 1.0) / (k * k),
        };
        BourParams { s, t }
    }
}

/// The alignable V-net of the first kind at (sign, k, lambda).
pub fn first_kind_vnet(params: FirstKindParams, spec: &GridSpec) -> Result<SurfaceGrid> {
    first_kind_vnet_with(params, spec, NegativeSVariant::Corollary)
}

pub fn first_kind_vnet_with(
    params: FirstKindParams,
    spec: &GridSpec,
    variant: NegativeSVariant,
) -> Result<SurfaceGrid> {
    let k = params.k;
    let m = k * k;
    strip_check(k, spec)?;
    let bp = bour_params_first_kind_with(params.positive, k, params.lambda, variant);
    // slot parameters of the immersion core in the scaled-profile gauge
    let sigma = m / bp.s;
    let tau = bp.t / bp.s;

    let mp = EllipticParam::new(m)?;
    let fam = if params.positive {
        "first-kind-positive"
    } else {
        "first-kind-negative"
    };
    let prov = Provenance::new(fam)
        .with("k", k)
        .with("lambda", params.lambda)
        .with("s", bp.s)
        .with("t", bp.t);

    // scaled profile closures
    let (f, fp, gp): (
        Box<dyn Fn(f64) -> Result<f64>>,
        Box<dyn Fn(f64) -> Result<f64>>,
        Box<dyn Fn(f64) -> Result<f64>>,
    ) = if params.positive {
        (
            Box::new(move |x| Ok(1.0 / (k * elliptic::jacobi(x, mp)?.dn))),
            Box::new(move |x| {
                let t = elliptic::jacobi(x, mp)?;
                Ok(m * t.sn * t.cn / (k * t.dn * t.dn))
            }),
            Box::new(move |x| {
                let t = elliptic::jacobi(x, mp)?;
                Ok((1.0 / (t.dn * t.dn) - 1.0) / k)
            }),
        )
    } else {
        (
            Box::new(move |x| Ok(1.0 / (m * elliptic::jacobi(x, mp)?.sn))),
            Box::new(move |x| {
                let t = elliptic::jacobi(x, mp)?;
                Ok(-t.cn * t.dn / (m * t.sn * t.sn))
            }),
            Box::new(move |x| {
                let t = elliptic::jacobi(x, mp)?;
                Ok(-t.dn / (m * t.sn))
            }),
        )
    };

    // The negative family at lambda = 1 is the pure helicoid: the shear and
    // height integrands vanish identically, so use the closed form.
    let helicoid_closed_form = !params.positive && (params.lambda - 1.0).abs() < 1e-12;
    // The branch pair (lambda, 1/lambda) of the negative family shares
    // (s, t); the lambda > 1 member is reached by exchanging u and v.
    let swap_uv = !params.positive && params.lambda > 1.0;
    let outer = if params.positive { -1.0 } else { 1.0 };

    let mut xs = Vec::with_capacity(spec.len());
    for i in 0..spec.nu {
        for j in 0..spec.nv {
            xs.push(spec.u(i) + spec.v(j));
        }
    }

    let n = spec.len();
    let mut positions = vec![[0.0; 3]; n];
    let mut du = vec![[0.0; 3]; n];
    let mut dv = vec![[0.0; 3]; n];

    if helicoid_closed_form {
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let x = spec.u(i) + spec.v(j);
                let y = spec.u(i) - spec.v(j);
                let t = elliptic::jacobi(x, mp)?;
                let r = t.cn / (m * t.sn);
                let rp = -t.dn / (m * t.sn * t.sn);
                let phi = k * y;
                let (sp, cp) = phi.sin_cos();
                let idx = spec.idx(i, j);
                positions[idx] = [r * cp, r * sp, phi / m];
                let px = [rp * cp, rp * sp, 0.0];
                let py = [-k * r * sp, k * r * cp, k / m];
                du[idx] = crate::vec3::add(px, py);
                dv[idx] = crate::vec3::sub(px, py);
            }
        }
    } else {
        struct Closures<'c> {
            f: &'c dyn Fn(f64) -> Result<f64>,
            fp: &'c dyn Fn(f64) -> Result<f64>,
            gp: &'c dyn Fn(f64) -> Result<f64>,
        }
        let cl = Closures {
            f: f.as_ref(),
            fp: fp.as_ref(),
            gp: gp.as_ref(),
        };
        let rad_inr = |x: f64| -> Result<(f64, f64)> {
            let fv = (cl.f)(x)?;
            let fpv = (cl.fp)(x)?;
            let gpv = (cl.gp)(x)?;
            let rad = sigma * fv * fv - tau * tau;
            let inr = rad * (fpv * fpv + gpv * gpv) - sigma * sigma * fv * fv * fpv * fpv;
            Ok((rad, inr))
        };
        for &x in &xs {
            let (rad, inr) = rad_inr(x)?;
            if rad <= 0.0 {
                return Err(Error::domain(format!(
                    "first-kind V-net radius radicand non-positive at x = {x}"
                )));
            }
            if inr < -1e-9 {
                return Err(Error::domain(format!(
                    "first-kind V-net immersion radicand negative at x = {x} ({inr:.3e})"
                )));
            }
        }
        let x_base = 0.5
            * (xs.iter().cloned().fold(f64::INFINITY, f64::min)
                + xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        let zc = quad::Cumulative::new(
            |x| {
                rad_inr(x)
                    .and_then(|(rad, inr)| Ok((cl.f)(x)? * inr.max(0.0).sqrt() / rad))
                    .unwrap_or(f64::NAN)
            },
            x_base,
            &xs,
            1e-12,
        )?;
        let wc = quad::Cumulative::new(
            |x| {
                rad_inr(x)
                    .and_then(|(rad, inr)| Ok(inr.max(0.0).sqrt() / ((cl.f)(x)? * rad)))
                    .unwrap_or(f64::NAN)
            },
            x_base,
            &xs,
            1e-12,
        )?;

        let sq = sigma.sqrt();
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let (ui, vj) = if swap_uv {
                    (spec.v(j), spec.u(i))
                } else {
                    (spec.u(i), spec.v(j))
                };
                let x = ui + vj;
                let y = k * (ui - vj);
                let fv = (cl.f)(x)?;
                let fpv = (cl.fp)(x)?;
                let (rad, inr) = rad_inr(x)?;
                let inr = inr.max(0.0);
                let r = rad.sqrt();
                let phi = (y + tau * wc.at(x)) / sq;
                let (sp, cp) = phi.sin_cos();
                let z = sq * zc.at(x) - tau * phi;
                let idx = spec.idx(i, j);
                positions[idx] = [outer * r * cp, outer * r * sp, outer * z];

                let rp = sigma * fv * fpv / r;
                let phix = tau * inr.sqrt() / (fv * rad) / sq;
                let zx = sq * fv * inr.sqrt() / rad - tau * phix;
                let px = [
                    outer * (rp * cp - r * phix * sp),
                    outer * (rp * sp + r * phix * cp),
                    outer * zx,
                ];
                let py = [
                    outer * (-r * sp) * k / sq,
                    outer * (r * cp) * k / sq,
                    outer * (-tau) * k / sq,
                ];
                // derivative w.r.t. the original (u, v), accounting for swap
                let (eu, ev) = if swap_uv {
                    (crate::vec3::sub(px, py), crate::vec3::add(px, py))
                } else {
                    (crate::vec3::add(px, py), crate::vec3::sub(px, py))
                };
                du[idx] = eu;
                dv[idx] = ev;
            }
        }
    }

    Ok(SurfaceGrid {
        spec: spec.clone(),
        positions,
        d1: Some(Deriv1 { du, dv }),
        d2: None,
        provenance: prov,
    })
}

/// The squeeze map (u, v) -> (lambda u, v/lambda) applied to a sampled net.
pub fn squeeze_reparam(grid: &SurfaceGrid, lambda: f64) -> Result<SurfaceGrid> {
    grid.squeeze_reparam(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3;

    fn knet_grid(k: f64, n: usize) -> GridSpec {
        let (lo, hi) = sine_gordon::domain_strip(k, 0).unwrap();
        let hi = if hi.is_finite() { hi } else { lo + 6.0 };
        let w = hi - lo;
        let (a, b) = (lo + 0.1 * w, hi - 0.1 * w);
        GridSpec::new((a / 2.0, b / 2.0), (a / 2.0, b / 2.0), n, n).unwrap()
    }

    #[test]
    fn beltrami_pseudosphere_at_k_one() {
        let spec = GridSpec::new((0.2, 1.2), (0.2, 1.2), 9, 9).unwrap();
        let g = knet_revolution(1.0, &spec).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let (u, v) = (spec.u(i), spec.v(j));
                let x = u + v;
                let y = u - v;
                let sech = 1.0 / x.cosh();
                let expect = [sech * y.cos(), sech * y.sin(), x.tanh() - x];
                assert!(vec3::dist(g.at(i, j), expect) < 1e-12);
            }
        }
    }

    #[test]
    fn knet_chebyshev_property() {
        for &k in &[0.4, 0.8, 1.0, 2.0] {
            let spec = knet_grid(k, 21);
            let g = knet_revolution(k, &spec).unwrap();
            let d1 = g.d1.as_ref().unwrap();
            for n in 0..spec.len() {
                assert!((vec3::norm(d1.du[n]) - 1.0).abs() < 1e-10, "k = {k}");
                assert!((vec3::norm(d1.dv[n]) - 1.0).abs() < 1e-10, "k = {k}");
            }
        }
    }

    #[test]
    fn knet_angle_matches_omega() {
        let k = 0.7;
        let spec = knet_grid(k, 15);
        let g = knet_revolution(k, &spec).unwrap();
        let d1 = g.d1.as_ref().unwrap();
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let x = spec.u(i) + spec.v(j);
                let w = sine_gordon::omega_revolution(x, k).unwrap();
                let c = vec3::dot(d1.du[spec.idx(i, j)], d1.dv[spec.idx(i, j)]);
                assert!((c - w.cos()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn knet_rejects_boundary_grid() {
        let k = 0.7;
        let (lo, hi) = sine_gordon::domain_strip(k, 0).unwrap();
        let spec = GridSpec::new((lo / 2.0, hi / 2.0), (lo / 2.0, hi / 2.0), 8, 8).unwrap();
        assert!(matches!(
            knet_revolution(k, &spec),
            Err(Error::SingularDomain { .. })
        ));
    }

    #[test]
    fn bour_identity_is_catenoid() {
        let profile = ProfileCurve::Catenoid { a: 1.0 };
        let spec = GridSpec::new((-0.8, 0.8), (0.0, 1.5), 11, 11).unwrap();
        let g = bour_immersion(&profile, BourParams { s: 1.0, t: 0.0 }, &spec).unwrap();
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let (u, v) = (spec.u(i), spec.v(j));
                // catenoid up to the angular/vertical gauge of the basepoint
                let r = u.cosh();
                let got = g.at(i, j);
                assert!((vec3::norm([got[0], got[1], 0.0]) - r).abs() < 1e-10);
            }
        }
        // vertical speed: |dz/du| = 1 for the catenoid profile
        let d1 = g.d1.as_ref().unwrap();
        for n in 0..spec.len() {
            assert!((d1.du[n][2].abs() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bour_catenoid_to_helicoid() {
        // (s, t) = (1, a) turns the catenoid into a helicoid: radius sinh u,
        // z linear in the angle only
        let profile = ProfileCurve::Catenoid { a: 1.0 };
        let spec = GridSpec::new((0.2, 1.2), (0.0, 1.5), 9, 9).unwrap();
        let g = bour_immersion(&profile, BourParams { s: 1.0, t: 1.0 }, &spec).unwrap();
        let d1 = g.d1.as_ref().unwrap();
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let u = spec.u(i);
                let got = g.at(i, j);
                assert!(
                    (vec3::norm([got[0], got[1], 0.0]) - u.sinh().abs()).abs() < 1e-10,
                    "radius at u = {u}"
                );
                // z depends on the angle slot only: dz/du = 0
                assert!(d1.du[spec.idx(i, j)][2].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bour_first_form_is_deformation_invariant() {
        let profile = ProfileCurve::Catenoid { a: 1.0 };
        let spec = GridSpec::new((0.1, 1.1), (0.0, 1.2), 13, 13).unwrap();
        let base = bour_immersion(&profile, BourParams { s: 1.0, t: 0.0 }, &spec).unwrap();
        for &(s, t) in &[(1.0, 0.3), (1.4, 0.0), (0.8, 0.25), (2.0, 0.7)] {
            let def = bour_immersion(&profile, BourParams { s, t }, &spec).unwrap();
            let (b1, d1m) = (base.d1.as_ref().unwrap(), def.d1.as_ref().unwrap());
            for n in 0..spec.len() {
                let ee = vec3::dot(b1.du[n], b1.du[n]) - vec3::dot(d1m.du[n], d1m.du[n]);
                let ff = vec3::dot(b1.du[n], b1.dv[n]) - vec3::dot(d1m.du[n], d1m.dv[n]);
                let gg = vec3::dot(b1.dv[n], b1.dv[n]) - vec3::dot(d1m.dv[n], d1m.dv[n]);
                assert!(
                    ee.abs().max(ff.abs()).max(gg.abs()) < 1e-9,
                    "(s,t)=({s},{t})"
                );
            }
        }
    }

    #[test]
    fn bour_radicand_violation_is_domain_error() {
        let profile = ProfileCurve::Catenoid { a: 1.0 };
        let spec = GridSpec::new((0.0, 1.0), (0.0, 1.0), 6, 6).unwrap();
        // t too large: s f(0)^2 - t^2 = 1 - 4 < 0
        let err = bour_immersion(&profile, BourParams { s: 1.0, t: 2.0 }, &spec);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn first_kind_params_examples() {
        let p = bour_params_first_kind(true, 1.0, 2.0);
        assert!((p.s - 1.5625).abs() < 1e-15);
        assert!((p.t - 0.75).abs() < 1e-15);
        let q = bour_params_first_kind(true, 0.8, 1.0);
        assert_eq!(q.t, 0.0);
        assert!((q.s - 0.64).abs() < 1e-15);
        let r = bour_params_first_kind(false, 0.8, 1.0);
        assert_eq!(r.t, -1.0);
    }

    #[test]
    fn positive_vnet_matches_rotation_field_at_lambda_one() {
        let k = 0.8;
        let spec = knet_grid(k, 17);
        let vnet = first_kind_vnet(FirstKindParams::new(true, k, 1.0).unwrap(), &spec).unwrap();
        let eta = rotation_field_positive(&ProfileCurve::KNetRevolution { k }, &spec).unwrap();
        // both are the same surface of revolution; compare radii and the
        // x-derivative of height (the vertical gauge differs by a constant)
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let a = vnet.at(i, j);
                let b = eta.at(i, j);
                let ra = (a[0] * a[0] + a[1] * a[1]).sqrt();
                let rb = (b[0] * b[0] + b[1] * b[1]).sqrt();
                assert!((ra - rb).abs() < 1e-9);
            }
        }
        let (dv, de) = (vnet.d1.as_ref().unwrap(), eta.d1.as_ref().unwrap());
        for n in 0..spec.len() {
            // same tangent planes: du, dv agree up to the sign normalization
            for c in 0..3 {
                assert!((dv.du[n][c].abs() - de.du[n][c].abs()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn negative_vnet_lambda_one_is_helicoid() {
        let k = 0.8;
        let spec = knet_grid(k, 13);
        let vnet = first_kind_vnet(FirstKindParams::new(false, k, 1.0).unwrap(), &spec).unwrap();
        // z is linear in y = u - v alone
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let y = spec.u(i) - spec.v(j);
                assert!((vnet.at(i, j)[2] - k * y / (k * k)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_field_positive_k1_profile() {
        // radius cosh x; height z with z' = sinh^2 x (both via the generic path)
        let spec = GridSpec::new((0.3, 1.0), (0.3, 1.0), 7, 7).unwrap();
        let eta =
            rotation_field_positive(&ProfileCurve::KNetRevolution { k: 1.0 }, &spec).unwrap();
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let x = spec.u(i) + spec.v(j);
                let p = eta.at(i, j);
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                assert!((r - x.cosh()).abs() < 1e-10);
                // z = ∫ sinh² = (sinh x cosh x - x)/2 up to sign normalization
                let expect = -(x.sinh() * x.cosh() - x) / 2.0;
                assert!((p[2] - expect).abs() < 1e-9, "x = {x}");
            }
        }
    }

    #[test]
    fn rotation_field_negative_z_is_angle() {
        let spec = GridSpec::new((0.3, 1.0), (0.3, 1.0), 7, 7).unwrap();
        let eta =
            rotation_field_negative(&ProfileCurve::KNetRevolution { k: 0.8 }, &spec).unwrap();
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let y = spec.u(i) - spec.v(j);
                assert!((eta.at(i, j)[2] - y).abs() < 1e-12);
            }
        }
    }
}
