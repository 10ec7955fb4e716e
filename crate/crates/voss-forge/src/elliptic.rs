//! Jacobi elliptic functions and elliptic integrals.
//!
//! Everything is indexed by the *parameter* m = k² (k the modulus). The
//! classical literature on pseudospherical surfaces mixes the two
//! conventions freely; this crate does not. Every public signature below
//! takes [`EllipticParam`], and any modulus entering from outside is
//! converted once at the boundary via [`EllipticParam::from_modulus`].
//!
//! Algorithms: AGM for the complete integral, descending Landen (AGM phase
//! recursion) for the Jacobi amplitude, Carlson symmetric forms for the
//! incomplete integrals. Parameters m > 1 are reached through the
//! reciprocal-modulus transformation; m = 1 through hyperbolic closed forms.

use crate::{Error, Result};

/// Elliptic parameter m = k² (m >= 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticParam {
    m: f64,
}

impl EllipticParam {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() || m < 0.0 {
            return Err(Error::domain(format!(
                "elliptic parameter must be finite and >= 0, got {m}"
            )));
        }
        Ok(EllipticParam { m })
    }

    /// Convert a modulus k into the parameter m = k².
    pub fn from_modulus(k: f64) -> Result<Self> {
        Self::new(k * k)
    }

    #[inline]
    pub fn m(self) -> f64 {
        self.m
    }

    #[inline]
    pub fn modulus(self) -> f64 {
        self.m.sqrt()
    }
}

/// Jacobi amplitude and the sn, cn, dn triple at a common argument.
#[derive(Debug, Clone, Copy)]
pub struct JacobiTriple {
    pub am: f64,
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Jacobi elliptic functions (am, sn, cn, dn) at argument `x`, parameter `m`.
///
/// For m > 1 the values come from the reciprocal-modulus transformation
/// sn(x|m) = m^{-1/2} sn(m^{1/2} x | 1/m), cn(x|m) = dn(m^{1/2} x | 1/m),
/// dn(x|m) = cn(m^{1/2} x | 1/m); note dn then changes sign across the
/// cusp lines. For m = 1 the hyperbolic forms sn = tanh, cn = dn = sech.
pub fn jacobi(x: f64, m: EllipticParam) -> Result<JacobiTriple> {
    if !x.is_finite() {
        return Err(Error::domain(format!("jacobi argument must be finite, got {x}")));
    }
    let m = m.m();
    if m == 0.0 {
        return Ok(JacobiTriple {
            am: x,
            sn: x.sin(),
            cn: x.cos(),
            dn: 1.0,
        });
    }
    if m == 1.0 {
        let sn = x.tanh();
        let sech = 1.0 / x.cosh();
        return Ok(JacobiTriple {
            am: sn.asin(),
            sn,
            cn: sech,
            dn: sech,
        });
    }
    if m > 1.0 {
        let k = m.sqrt();
        let inner = jacobi(k * x, EllipticParam::new(1.0 / m)?)?;
        let sn = inner.sn / k;
        return Ok(JacobiTriple {
            am: sn.clamp(-1.0, 1.0).asin(),
            sn,
            cn: inner.dn,
            dn: inner.cn,
        });
    }
    // 0 < m < 1: reduce by the real half period, then AGM phase recursion.
    let kq = ellint_k(EllipticParam::new(m)?)?;
    let period = 2.0 * kq;
    let cycles = (x / period).floor();
    let xr = x - cycles * period;
    let am = agm_amplitude(xr, m) + core::f64::consts::PI * cycles;
    let sn = am.sin();
    let cn = am.cos();
    let dn = (1.0 - m * sn * sn).max(0.0).sqrt();
    Ok(JacobiTriple { am, sn, cn, dn })
}

/// Amplitude am(x|m) for 0 < m < 1 via the descending Landen recursion.
fn agm_amplitude(x: f64, m: f64) -> f64 {
    let mut a = [0.0f64; 64];
    let mut c = [0.0f64; 64];
    let mut an = 1.0;
    let mut bn = (1.0 - m).sqrt();
    let mut cn = m.sqrt();
    let mut n = 0;
    loop {
        a[n] = an;
        c[n] = cn;
        if cn.abs() <= f64::EPSILON * an || n == 62 {
            break;
        }
        let a1 = 0.5 * (an + bn);
        let b1 = (an * bn).sqrt();
        cn = 0.5 * (an - bn);
        an = a1;
        bn = b1;
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * an * x;
    while n > 0 {
        let s = (c[n] / a[n] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
        n -= 1;
    }
    phi
}

/// Complete elliptic integral of the first kind K(m), 0 <= m < 1 (AGM).
pub fn ellint_k(m: EllipticParam) -> Result<f64> {
    let m = m.m();
    if m >= 1.0 {
        return Err(Error::domain(format!(
            "K(m) diverges as m -> 1; got m = {m}"
        )));
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    while (a - b).abs() > f64::EPSILON * a {
        let a1 = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = a1;
    }
    Ok(core::f64::consts::FRAC_PI_2 / a)
}

/// Complete elliptic integral of the second kind E(m), 0 <= m <= 1.
pub fn ellint_e_complete(m: EllipticParam) -> Result<f64> {
    let mv = m.m();
    if mv > 1.0 {
        return Err(Error::domain(format!("E(m) requires m <= 1, got {mv}")));
    }
    if mv == 1.0 {
        return Ok(1.0);
    }
    let y = 1.0 - mv;
    Ok(rf(0.0, y, 1.0)? - mv / 3.0 * rd(0.0, y, 1.0)?)
}

/// Complete elliptic integral of the third kind Pi(n | m).
pub fn ellint_pi_complete(n: f64, m: EllipticParam) -> Result<f64> {
    let mv = m.m();
    if mv >= 1.0 {
        return Err(Error::domain(format!("Pi(n|m) requires m < 1, got {mv}")));
    }
    if n >= 1.0 {
        return Err(Error::domain(format!(
            "complete Pi has a pole for characteristic n >= 1, got {n}"
        )));
    }
    let y = 1.0 - mv;
    Ok(rf(0.0, y, 1.0)? + n / 3.0 * rj(0.0, y, 1.0, 1.0 - n)?)
}

fn split_phase(phi: f64) -> (f64, f64) {
    // phi = n*pi + phi_r with phi_r in [-pi/2, pi/2]
    let n = (phi / core::f64::consts::PI).round();
    (n, phi - n * core::f64::consts::PI)
}

/// Incomplete elliptic integral of the first kind F(phi | m).
///
/// Extended beyond [-pi/2, pi/2] by F(phi + pi | m) = F(phi | m) + 2 K(m).
pub fn ellint_f(phi: f64, m: EllipticParam) -> Result<f64> {
    if !phi.is_finite() {
        return Err(Error::domain("F(phi|m): phi must be finite".into()));
    }
    let mv = m.m();
    if mv > 1.0 {
        return Err(Error::domain(format!("F(phi|m) requires m <= 1, got {mv}")));
    }
    let (n, pr) = split_phase(phi);
    if mv == 1.0 {
        if n != 0.0 || pr.abs() >= core::f64::consts::FRAC_PI_2 {
            return Err(Error::domain(
                "F(phi|1) diverges at phi = pi/2; quasi-periodic extension undefined".into(),
            ));
        }
        return Ok(pr.sin().atanh());
    }
    let s = pr.sin();
    let c = pr.cos();
    let core = s * rf(c * c, 1.0 - mv * s * s, 1.0)?;
    if n == 0.0 {
        return Ok(core);
    }
    Ok(core + 2.0 * n * ellint_k(m)?)
}

/// Incomplete elliptic integral of the second kind E(phi | m).
pub fn ellint_e(phi: f64, m: EllipticParam) -> Result<f64> {
    if !phi.is_finite() {
        return Err(Error::domain("E(phi|m): phi must be finite".into()));
    }
    let mv = m.m();
    if mv > 1.0 {
        return Err(Error::domain(format!("E(phi|m) requires m <= 1, got {mv}")));
    }
    let (n, pr) = split_phase(phi);
    if mv == 1.0 {
        return Ok(2.0 * n + pr.sin());
    }
    let s = pr.sin();
    let c = pr.cos();
    let q = 1.0 - mv * s * s;
    let core = s * rf(c * c, q, 1.0)? - mv / 3.0 * s * s * s * rd(c * c, q, 1.0)?;
    if n == 0.0 {
        return Ok(core);
    }
    Ok(core + 2.0 * n * ellint_e_complete(m)?)
}

/// Incomplete elliptic integral of the third kind Pi(n; phi | m).
///
/// The characteristic must satisfy 1 - n sin²(theta) > 0 on the whole
/// integration range; a pole crossing is a domain error.
pub fn ellint_pi(n: f64, phi: f64, m: EllipticParam) -> Result<f64> {
    if !phi.is_finite() {
        return Err(Error::domain("Pi(n; phi|m): phi must be finite".into()));
    }
    let mv = m.m();
    if mv >= 1.0 {
        return Err(Error::domain(format!(
            "Pi(n; phi|m) requires m < 1, got {mv}"
        )));
    }
    let (nn, pr) = split_phase(phi);
    let s_max = if nn != 0.0 {
        1.0
    } else {
        pr.sin().abs()
    };
    if n * s_max * s_max >= 1.0 {
        return Err(Error::domain(format!(
            "Pi(n; phi|m): pole crossing, 1 - n sin^2 <= 0 on range (n = {n}, phi = {phi})"
        )));
    }
    let s = pr.sin();
    let c = pr.cos();
    let q = 1.0 - mv * s * s;
    let core =
        s * rf(c * c, q, 1.0)? + n / 3.0 * s * s * s * rj(c * c, q, 1.0, 1.0 - n * s * s)?;
    if nn == 0.0 {
        return Ok(core);
    }
    Ok(core + 2.0 * nn * ellint_pi_complete(n, m)?)
}

// ---------------------------------------------------------------------------
// Carlson symmetric forms (Carlson 1977/1995, as in Numerical Recipes).
// ---------------------------------------------------------------------------

const CARLSON_MAX_ITER: usize = 200;

fn rf(x: f64, y: f64, z: f64) -> Result<f64> {
    const ERRTOL: f64 = 0.001;
    let tiny = 5.0 * f64::MIN_POSITIVE;
    if x.min(y).min(z) < 0.0 || (x + y).min(x + z).min(y + z) < tiny {
        return Err(Error::domain(
            "rf: arguments must be non-negative with at most one zero".into(),
        ));
    }
    let (mut xt, mut yt, mut zt) = (x, y, z);
    for _ in 0..CARLSON_MAX_ITER {
        let sx = xt.sqrt();
        let sy = yt.sqrt();
        let sz = zt.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        let ave = (xt + yt + zt) / 3.0;
        let dx = (ave - xt) / ave;
        let dy = (ave - yt) / ave;
        let dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return Ok((1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0)
                / ave.sqrt());
        }
    }
    Err(Error::solver("rf failed to converge".into()))
}

fn rd(x: f64, y: f64, z: f64) -> Result<f64> {
    const ERRTOL: f64 = 0.0008;
    let tiny = 2.0 * f64::MIN_POSITIVE.powf(2.0 / 3.0);
    if x.min(y) < 0.0 || (x + y).min(z) < tiny {
        return Err(Error::domain(
            "rd: x, y non-negative (at most one zero), z positive".into(),
        ));
    }
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    for _ in 0..CARLSON_MAX_ITER {
        let sx = xt.sqrt();
        let sy = yt.sqrt();
        let sz = zt.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (zt + lam));
        fac *= 0.25;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        let ave = 0.2 * (xt + yt + 3.0 * zt);
        let dx = (ave - xt) / ave;
        let dy = (ave - yt) / ave;
        let dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            let s = 1.0
                + ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 4.5 / 26.0 * dz * ee)
                + dz * (ee / 6.0 + dz * (-9.0 / 22.0 * ec + dz * 3.0 / 26.0 * ea));
            return Ok(3.0 * sum + fac * s / (ave * ave.sqrt()));
        }
    }
    Err(Error::solver("rd failed to converge".into()))
}

fn rc(x: f64, y: f64) -> Result<f64> {
    const ERRTOL: f64 = 0.0006;
    if x < 0.0 || y == 0.0 {
        return Err(Error::domain("rc: x >= 0 and y != 0 required".into()));
    }
    let (mut xt, mut yt, w) = if y > 0.0 {
        (x, y, 1.0)
    } else {
        (x - y, -y, x.sqrt() / (x - y).sqrt())
    };
    for _ in 0..CARLSON_MAX_ITER {
        let lam = 2.0 * xt.sqrt() * yt.sqrt() + yt;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        let ave = (xt + 2.0 * yt) / 3.0;
        let s = (yt - ave) / ave;
        if s.abs() < ERRTOL {
            let poly = 1.0 + s * s * (0.3 + s * (1.0 / 7.0 + s * (0.375 + s * 9.0 / 22.0)));
            return Ok(w * poly / ave.sqrt());
        }
    }
    Err(Error::solver("rc failed to converge".into()))
}

fn rj(x: f64, y: f64, z: f64, p: f64) -> Result<f64> {
    const ERRTOL: f64 = 0.0008;
    let tiny = (5.0 * f64::MIN_POSITIVE).powf(1.0 / 3.0);
    if x.min(y).min(z) < 0.0 || (x + y).min(x + z).min(y + z).min(p.abs()) < tiny {
        return Err(Error::domain(
            "rj: arguments must be non-negative with at most one zero, p nonzero".into(),
        ));
    }
    let (mut xt, mut yt, mut zt, mut pt);
    let mut a = 0.0;
    let mut b = 0.0;
    let mut rcx = 0.0;
    if p > 0.0 {
        xt = x;
        yt = y;
        zt = z;
        pt = p;
    } else {
        xt = x.min(y).min(z);
        zt = x.max(y).max(z);
        yt = x + y + z - xt - zt;
        a = 1.0 / (yt - p);
        b = a * (zt - yt) * (yt - xt);
        pt = yt + b;
        let rho = xt * zt / yt;
        let tau = p * pt / yt;
        rcx = rc(rho, tau)?;
    }
    let mut sum = 0.0;
    let mut fac = 1.0;
    for _ in 0..CARLSON_MAX_ITER {
        let sx = xt.sqrt();
        let sy = yt.sqrt();
        let sz = zt.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        let alpha = (pt * (sx + sy + sz) + sx * sy * sz).powi(2);
        let beta = pt * (pt + lam).powi(2);
        sum += fac * rc(alpha, beta)?;
        fac *= 0.25;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        pt = 0.25 * (pt + lam);
        let ave = 0.2 * (xt + yt + zt + 2.0 * pt);
        let dx = (ave - xt) / ave;
        let dy = (ave - yt) / ave;
        let dz = (ave - zt) / ave;
        let dp = (ave - pt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()).max(dp.abs()) < ERRTOL {
            let ea = dx * (dy + dz) + dy * dz;
            let eb = dx * dy * dz;
            let ec = dp * dp;
            let ed = ea - 3.0 * ec;
            let ee = eb + 2.0 * dp * (ea - ec);
            let s = 1.0
                + ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 4.5 / 26.0 * ee)
                + eb * (1.0 / 6.0 + dp * (-6.0 / 22.0 + dp * 3.0 / 26.0))
                + dp * ea * (1.0 / 3.0 - dp * 3.0 / 22.0)
                - dp * ec / 3.0;
            let mut ans = 3.0 * sum + fac * s / (ave * ave.sqrt());
            if p <= 0.0 {
                ans = a * (b * ans + 3.0 * (rcx - rf(xt, yt, zt)?));
            }
            return Ok(ans);
        }
    }
    Err(Error::solver("rj failed to converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn p(m: f64) -> EllipticParam {
        EllipticParam::new(m).unwrap()
    }

    /// Independent oracle: the pendulum system sn' = cn dn, cn' = -sn dn,
    /// dn' = -m sn cn, am' = dn integrated from (0, 1, 1, 0) with RK4.
    fn pendulum_oracle(x: f64, m: f64) -> JacobiTriple {
        let n = ((x.abs() * 4000.0).ceil() as usize).max(8);
        let h = x / n as f64;
        let f = |s: [f64; 4]| {
            [
                s[1] * s[2],
                -s[0] * s[2],
                -m * s[0] * s[1],
                s[2],
            ]
        };
        let mut s = [0.0, 1.0, 1.0, 0.0];
        for _ in 0..n {
            let k1 = f(s);
            let s2 = core::array::from_fn(|i| s[i] + 0.5 * h * k1[i]);
            let k2 = f(s2);
            let s3 = core::array::from_fn(|i| s[i] + 0.5 * h * k2[i]);
            let k3 = f(s3);
            let s4 = core::array::from_fn(|i| s[i] + h * k3[i]);
            let k4 = f(s4);
            for i in 0..4 {
                s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        JacobiTriple {
            am: s[3],
            sn: s[0],
            cn: s[1],
            dn: s[2],
        }
    }

    /// Independent oracle: adaptive Simpson quadrature.
    fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        fn simp<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64) -> f64 {
            let c = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b))
        }
        fn rec<F: Fn(f64) -> f64 + Copy>(
            f: F,
            a: f64,
            b: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let c = 0.5 * (a + b);
            let left = simp(f, a, c);
            let right = simp(f, c, b);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, c, left, 0.5 * tol, depth - 1) + rec(f, c, b, right, 0.5 * tol, depth - 1)
        }
        rec(f, a, b, simp(f, a, b), tol, 40)
    }

    #[test]
    fn jacobi_identity_case() {
        let t = jacobi(0.0, p(0.37)).unwrap();
        assert_eq!(t.am, 0.0);
        assert_eq!(t.sn, 0.0);
        assert_eq!(t.cn, 1.0);
        assert_eq!(t.dn, 1.0);
    }

    #[test]
    fn jacobi_hyperbolic_at_m_one() {
        for &x in &[0.3, 0.7, 1.9, -1.1] {
            let t = jacobi(x, p(1.0)).unwrap();
            assert!((t.sn - x.tanh()).abs() < 1e-14);
            assert!((t.dn - 1.0 / x.cosh()).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobi_sn_against_pendulum_oracle() {
        // frozen from the RK oracle at (0.7, 0.36)
        let oracle = pendulum_oracle(0.7, 0.36);
        let t = jacobi(0.7, p(0.36)).unwrap();
        assert!((t.sn - oracle.sn).abs() < 1e-11, "sn: {} vs {}", t.sn, oracle.sn);
        assert!((t.cn - oracle.cn).abs() < 1e-11);
        assert!((t.dn - oracle.dn).abs() < 1e-11);
        assert!((t.am - oracle.am).abs() < 1e-11);
    }

    #[test]
    fn jacobi_triple_identities() {
        for &m in &[0.0, 0.09, 0.25, 0.64, 0.99] {
            let kq = if m < 1.0 { ellint_k(p(m)).unwrap() } else { 1.0 };
            for i in 0..40 {
                let x = -2.0 * kq + 4.0 * kq * (i as f64) / 39.0;
                let t = jacobi(x, p(m)).unwrap();
                assert!((t.sn * t.sn + t.cn * t.cn - 1.0).abs() < 1e-12);
                assert!((t.dn * t.dn + m * t.sn * t.sn - 1.0).abs() < 1e-12);
                assert!((t.sn - t.am.sin()).abs() < 1e-12);
                assert!((t.cn - t.am.cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_reciprocal_modulus() {
        for &m in &[1.44, 2.25, 4.0] {
            let sm = m.sqrt();
            for i in 1..20 {
                let x = 0.05 * i as f64;
                let t = jacobi(x, p(m)).unwrap();
                let inner = jacobi(sm * x, p(1.0 / m)).unwrap();
                assert!((t.sn * sm - inner.sn).abs() < 1e-10);
                assert!((t.dn * t.dn + m * t.sn * t.sn - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_rejects_bad_input() {
        assert!(jacobi(f64::NAN, p(0.5)).is_err());
        assert!(EllipticParam::new(-0.1).is_err());
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert!((ellint_k(p(0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn k_rejects_m_one() {
        assert!(ellint_k(p(1.0)).is_err());
    }

    #[test]
    fn k_against_quadrature_oracle() {
        let m = 0.5;
        let oracle = simpson(
            |th: f64| 1.0 / (1.0 - m * th.sin().powi(2)).sqrt(),
            0.0,
            FRAC_PI_2,
            1e-14,
        );
        assert!((ellint_k(p(m)).unwrap() - oracle).abs() < 1e-13 * oracle);
    }

    #[test]
    fn f_trivial_cases() {
        assert_eq!(ellint_f(0.0, p(0.7)).unwrap(), 0.0);
        for &phi in &[0.3, 1.2, 2.7] {
            assert!((ellint_f(phi, p(0.0)).unwrap() - phi).abs() < 1e-14);
        }
    }

    #[test]
    fn f_against_quadrature_oracle() {
        let m = 0.25;
        let oracle = simpson(
            |th: f64| 1.0 / (1.0 - m * th.sin().powi(2)).sqrt(),
            0.0,
            1.0,
            1e-14,
        );
        assert!((ellint_f(1.0, p(m)).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn f_inverts_amplitude() {
        for &m in &[0.2, 0.64, 0.9] {
            let kq = ellint_k(p(m)).unwrap();
            for i in 1..25 {
                let x = 2.0 * kq * i as f64 / 25.0;
                let t = jacobi(x, p(m)).unwrap();
                let back = ellint_f(t.am, p(m)).unwrap();
                assert!((back - x).abs() < 1e-10, "m={m} x={x} back={back}");
            }
        }
    }

    #[test]
    fn e_trivial_and_hyperbolic() {
        assert_eq!(ellint_e(0.0, p(0.4)).unwrap(), 0.0);
        for &phi in &[0.3, 1.2] {
            assert!((ellint_e(phi, p(0.0)).unwrap() - phi).abs() < 1e-14);
        }
        // E(am(x|1) | 1) = tanh x, the k = 1 K-net height integral
        for &x in &[0.4, 1.3, 2.2] {
            let t = jacobi(x, p(1.0)).unwrap();
            assert!((ellint_e(t.am, p(1.0)).unwrap() - x.tanh()).abs() < 1e-13);
        }
    }

    #[test]
    fn pi_trivial_cases() {
        for &phi in &[0.3, 1.2] {
            assert!((ellint_pi(0.0, phi, p(0.0)).unwrap() - phi).abs() < 1e-13);
        }
        assert_eq!(ellint_pi(0.36, 0.0, p(0.36)).unwrap(), 0.0);
    }

    #[test]
    fn pi_against_quadrature_oracle() {
        let (n, phi, m) = (0.36, 1.0, 0.36);
        let oracle = simpson(
            |th: f64| {
                1.0 / ((1.0 - n * th.sin().powi(2))
                    * (1.0 - m * th.sin().powi(2)).sqrt())
            },
            0.0,
            phi,
            1e-14,
        );
        assert!((ellint_pi(n, phi, p(m)).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn pi_pole_is_domain_error() {
        assert!(ellint_pi(1.2, 1.4, p(0.3)).is_err());
    }

    #[test]
    fn derivative_identities() {
        // d/dx E(am(x|m)|m) = dn^2, d/dx Pi(m; am(x|m)|m) = dn^-2
        let h = 1e-5;
        for &m in &[0.2, 0.64] {
            let mp = p(m);
            for &x in &[0.4, 0.9, 1.7] {
                let amp = |x: f64| jacobi(x, mp).unwrap().am;
                let de = (ellint_e(amp(x + h), mp).unwrap()
                    - ellint_e(amp(x - h), mp).unwrap())
                    / (2.0 * h);
                let dpi = (ellint_pi(m, amp(x + h), mp).unwrap()
                    - ellint_pi(m, amp(x - h), mp).unwrap())
                    / (2.0 * h);
                let dn = jacobi(x, mp).unwrap().dn;
                assert!((de - dn * dn).abs() < 1e-7, "E' at m={m} x={x}");
                assert!((dpi - 1.0 / (dn * dn)).abs() < 1e-7, "Pi' at m={m} x={x}");
            }
        }
    }

    #[test]
    fn quasi_periodic_extension() {
        let m = 0.3;
        let mp = p(m);
        let kq = ellint_k(mp).unwrap();
        let f1 = ellint_f(0.7 + PI, mp).unwrap();
        let f0 = ellint_f(0.7, mp).unwrap();
        assert!((f1 - f0 - 2.0 * kq).abs() < 1e-12);
    }
}
