//! Discrete differential-geometry operators and verification predicates.
//!
//! Everything here consumes sampled grids. Derivatives use analytic fields
//! when the generator attached them, and 4th-order finite differences
//! otherwise (one-sided at boundaries). All defects are scale-normalized so
//! the tolerances are unit-free; every ratio carries a 1e-12 guard.

mod align;
mod report;

pub use align::{congruence_rms, rigid_alignment_rms};
pub use report::{CheckResult, VerificationReport};

use crate::grid::{GridSpec, SurfaceGrid};
use crate::vec3::{self, Vec3};
use crate::{Error, Result};

const EPS_GUARD: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Grid derivatives
// ---------------------------------------------------------------------------

fn stencil_deriv(vals: &[Vec3], n: usize, stride: usize, at: usize, h: f64) -> Vec3 {
    debug_assert!(n >= 5);
    let v = |i: usize| vals[i * stride];
    let mut out = [0.0; 3];
    for c in 0..3 {
        out[c] = if at >= 2 && at + 2 < n {
            (-v(at + 2)[c] + 8.0 * v(at + 1)[c] - 8.0 * v(at - 1)[c] + v(at - 2)[c]) / (12.0 * h)
        } else if at == 0 {
            (-25.0 * v(0)[c] + 48.0 * v(1)[c] - 36.0 * v(2)[c] + 16.0 * v(3)[c] - 3.0 * v(4)[c])
                / (12.0 * h)
        } else if at == 1 {
            (-3.0 * v(0)[c] - 10.0 * v(1)[c] + 18.0 * v(2)[c] - 6.0 * v(3)[c] + v(4)[c])
                / (12.0 * h)
        } else if at == n - 2 {
            (3.0 * v(n - 1)[c] + 10.0 * v(n - 2)[c] - 18.0 * v(n - 3)[c] + 6.0 * v(n - 4)[c]
                - v(n - 5)[c])
                / (12.0 * h)
        } else {
            (25.0 * v(n - 1)[c] - 48.0 * v(n - 2)[c] + 36.0 * v(n - 3)[c] - 16.0 * v(n - 4)[c]
                + 3.0 * v(n - 5)[c])
                / (12.0 * h)
        };
    }
    out
}

fn grid_partial_u(spec: &GridSpec, vals: &[Vec3]) -> Result<Vec<Vec3>> {
    if spec.nu < 5 {
        return Err(Error::domain(
            "finite-difference derivatives need at least 5 samples per side".into(),
        ));
    }
    let mut out = vec![[0.0; 3]; spec.len()];
    let h = spec.du();
    for j in 0..spec.nv {
        let col: Vec<Vec3> = (0..spec.nu).map(|i| vals[spec.idx(i, j)]).collect();
        for i in 0..spec.nu {
            out[spec.idx(i, j)] = stencil_deriv(&col, spec.nu, 1, i, h);
        }
    }
    Ok(out)
}

fn grid_partial_v(spec: &GridSpec, vals: &[Vec3]) -> Result<Vec<Vec3>> {
    if spec.nv < 5 {
        return Err(Error::domain(
            "finite-difference derivatives need at least 5 samples per side".into(),
        ));
    }
    let mut out = vec![[0.0; 3]; spec.len()];
    let h = spec.dv();
    for i in 0..spec.nu {
        let row: Vec<Vec3> = (0..spec.nv).map(|j| vals[spec.idx(i, j)]).collect();
        for j in 0..spec.nv {
            out[spec.idx(i, j)] = stencil_deriv(&row, spec.nv, 1, j, h);
        }
    }
    Ok(out)
}

/// First-derivative fields, analytic when attached, else 4th-order FD.
pub fn derivatives_1(surface: &SurfaceGrid) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    if let Some(d1) = &surface.d1 {
        return Ok((d1.du.clone(), d1.dv.clone()));
    }
    Ok((
        grid_partial_u(&surface.spec, &surface.positions)?,
        grid_partial_v(&surface.spec, &surface.positions)?,
    ))
}

/// Second-derivative fields; falls back to differentiating the (analytic or
/// FD) first derivatives.
pub fn derivatives_2(surface: &SurfaceGrid) -> Result<(Vec<Vec3>, Vec<Vec3>, Vec<Vec3>)> {
    if let Some(d2) = &surface.d2 {
        return Ok((d2.duu.clone(), d2.duv.clone(), d2.dvv.clone()));
    }
    let (du, dv) = derivatives_1(surface)?;
    let duu = grid_partial_u(&surface.spec, &du)?;
    let duv = grid_partial_v(&surface.spec, &du)?;
    let dvv = grid_partial_v(&surface.spec, &dv)?;
    Ok((duu, duv, dvv))
}

// ---------------------------------------------------------------------------
// Fundamental forms
// ---------------------------------------------------------------------------

/// E, F, G, L, M, N and the unit normal, sampled on the source grid.
#[derive(Debug, Clone)]
pub struct FundamentalForms {
    pub spec: GridSpec,
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub l: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    pub normal: Vec<Vec3>,
}

impl FundamentalForms {
    pub fn first_at(&self, idx: usize) -> [[f64; 2]; 2] {
        [[self.e[idx], self.f[idx]], [self.f[idx], self.g[idx]]]
    }

    pub fn second_at(&self, idx: usize) -> [[f64; 2]; 2] {
        [[self.l[idx], self.m[idx]], [self.m[idx], self.n[idx]]]
    }
}

pub fn fundamental_forms(surface: &SurfaceGrid) -> Result<FundamentalForms> {
    let spec = surface.spec.clone();
    let (du, dv) = derivatives_1(surface)?;
    let (duu, duv, dvv) = derivatives_2(surface)?;
    let n = spec.len();
    let mut ff = FundamentalForms {
        spec: spec.clone(),
        e: vec![0.0; n],
        f: vec![0.0; n],
        g: vec![0.0; n],
        l: vec![0.0; n],
        m: vec![0.0; n],
        n: vec![0.0; n],
        normal: vec![[0.0; 3]; n],
    };
    for idx in 0..n {
        let e = vec3::dot(du[idx], du[idx]);
        let f = vec3::dot(du[idx], dv[idx]);
        let g = vec3::dot(dv[idx], dv[idx]);
        let det = e * g - f * f;
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::DegenerateImmersion {
                i: idx / spec.nv,
                j: idx % spec.nv,
                detail: format!("EG - F^2 = {det:.3e}"),
            });
        }
        let nu = vec3::normalize(vec3::cross(du[idx], dv[idx]));
        ff.e[idx] = e;
        ff.f[idx] = f;
        ff.g[idx] = g;
        ff.normal[idx] = nu;
        ff.l[idx] = vec3::dot(duu[idx], nu);
        ff.m[idx] = vec3::dot(duv[idx], nu);
        ff.n[idx] = vec3::dot(dvv[idx], nu);
    }
    Ok(ff)
}

/// Gaussian and mean curvature fields.
pub fn curvatures(forms: &FundamentalForms) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = forms.e.len();
    let mut kk = vec![0.0; n];
    let mut hh = vec![0.0; n];
    for i in 0..n {
        let det = forms.e[i] * forms.g[i] - forms.f[i] * forms.f[i];
        if det <= 0.0 {
            return Err(Error::domain(format!("degenerate first form at sample {i}")));
        }
        kk[i] = (forms.l[i] * forms.n[i] - forms.m[i] * forms.m[i]) / det;
        hh[i] = (forms.e[i] * forms.n[i] - 2.0 * forms.f[i] * forms.m[i]
            + forms.g[i] * forms.l[i])
            / (2.0 * det);
    }
    Ok((kk, hh))
}

/// Third fundamental form via the shape-operator identity
/// III = 2H·II - K·I; entries (uu, uv, vv) per sample.
pub fn third_form(forms: &FundamentalForms) -> Result<Vec<[f64; 3]>> {
    let (kk, hh) = curvatures(forms)?;
    let n = forms.e.len();
    let mut out = vec![[0.0; 3]; n];
    for i in 0..n {
        out[i] = [
            2.0 * hh[i] * forms.l[i] - kk[i] * forms.e[i],
            2.0 * hh[i] * forms.m[i] - kk[i] * forms.f[i],
            2.0 * hh[i] * forms.n[i] - kk[i] * forms.g[i],
        ];
    }
    Ok(out)
}

/// Geodesic curvature of the u- and v-coordinate lines:
/// kg = det(nu, c', c'') / |c'|^3 along each line.
pub fn geodesic_curvature_lines(surface: &SurfaceGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    let (du, dv) = derivatives_1(surface)?;
    let (duu, _, dvv) = derivatives_2(surface)?;
    let forms = fundamental_forms(surface)?;
    let n = surface.spec.len();
    let mut kg_u = vec![0.0; n];
    let mut kg_v = vec![0.0; n];
    for i in 0..n {
        let nu = forms.normal[i];
        let su = vec3::norm(du[i]);
        let sv = vec3::norm(dv[i]);
        if su < EPS_GUARD || sv < EPS_GUARD {
            return Err(Error::domain(format!("zero-speed coordinate line at {i}")));
        }
        kg_u[i] = vec3::dot(vec3::cross(nu, du[i]), duu[i]) / (su * su * su);
        kg_v[i] = vec3::dot(vec3::cross(nu, dv[i]), dvv[i]) / (sv * sv * sv);
    }
    Ok((kg_u, kg_v))
}

/// Net-character defects, all relative.
#[derive(Debug, Clone, Copy)]
pub struct NetDefects {
    /// max |M| / (|L| + |N| + eps): zero for conjugate nets
    pub conjugate: f64,
    /// max |d_v ||psi_u|||: zero when u-speeds are v-independent
    pub chebyshev_u: f64,
    /// max |d_u ||psi_v|||
    pub chebyshev_v: f64,
    /// max(|L|, |N|) / (|M| + eps): zero for asymptotic nets
    pub asymptotic: f64,
}

pub fn net_defects(surface: &SurfaceGrid) -> Result<NetDefects> {
    let forms = fundamental_forms(surface)?;
    let spec = &surface.spec;
    let (du, dv) = derivatives_1(surface)?;
    let mut conjugate: f64 = 0.0;
    let mut asymptotic: f64 = 0.0;
    for i in 0..spec.len() {
        conjugate = conjugate
            .max(forms.m[i].abs() / (forms.l[i].abs() + forms.n[i].abs() + EPS_GUARD));
        asymptotic = asymptotic
            .max(forms.l[i].abs().max(forms.n[i].abs()) / (forms.m[i].abs() + EPS_GUARD));
    }
    // Chebyshev: finite differences of the speed fields
    let speeds_u: Vec<Vec3> = du.iter().map(|p| [vec3::norm(*p), 0.0, 0.0]).collect();
    let speeds_v: Vec<Vec3> = dv.iter().map(|p| [vec3::norm(*p), 0.0, 0.0]).collect();
    let dsu = grid_partial_v(spec, &speeds_u)?;
    let dsv = grid_partial_u(spec, &speeds_v)?;
    let chebyshev_u = dsu.iter().map(|p| p[0].abs()).fold(0.0, f64::max);
    let chebyshev_v = dsv.iter().map(|p| p[0].abs()).fold(0.0, f64::max);
    Ok(NetDefects {
        conjugate,
        chebyshev_u,
        chebyshev_v,
        asymptotic,
    })
}

// ---------------------------------------------------------------------------
// Alignability
// ---------------------------------------------------------------------------

/// An index rectangle strictly inside the grid.
#[derive(Debug, Clone, Copy)]
pub struct NetLoop {
    pub i0: usize,
    pub j0: usize,
    pub i1: usize,
    pub j1: usize,
}

impl NetLoop {
    pub fn new(spec: &GridSpec, i0: usize, j0: usize, i1: usize, j1: usize) -> Result<Self> {
        if i0 >= i1 || j0 >= j1 {
            return Err(Error::domain("degenerate net loop".into()));
        }
        if i0 == 0 || j0 == 0 || i1 + 1 >= spec.nu || j1 + 1 >= spec.nv {
            return Err(Error::domain("net loop touches the grid boundary".into()));
        }
        Ok(NetLoop { i0, j0, i1, j1 })
    }
}

/// Composite Simpson on uniformly spaced samples (3/8 rule patch when the
/// interval count is odd).
fn simpson_samples(vals: &[f64], h: f64) -> f64 {
    let n = vals.len();
    debug_assert!(n >= 2);
    if n == 2 {
        return 0.5 * h * (vals[0] + vals[1]);
    }
    let intervals = n - 1;
    let mut total = 0.0;
    let mut end = n;
    if intervals % 2 == 1 {
        if n >= 4 {
            // 3/8 rule on the last three intervals
            total += 3.0 * h / 8.0
                * (vals[n - 4] + 3.0 * vals[n - 3] + 3.0 * vals[n - 2] + vals[n - 1]);
            end = n - 3;
        } else {
            // n == 3 handled by Simpson directly below with n = 3
            end = n;
        }
    }
    if end >= 3 {
        let mut s = vals[0] + vals[end - 1];
        for (off, v) in vals.iter().enumerate().take(end - 1).skip(1) {
            s += if off % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        total += s * h / 3.0;
    }
    total
}

/// Relative alignability defect of a net loop:
/// |l1_AB + l3_BC - l3_AD - l1_DC| / perimeter.
pub fn alignability_defect(surface: &SurfaceGrid, net_loop: NetLoop) -> Result<f64> {
    let spec = &surface.spec;
    let NetLoop { i0, j0, i1, j1 } = net_loop;
    if i1 + 1 >= spec.nu || j1 + 1 >= spec.nv {
        return Err(Error::domain("net loop touches the grid boundary".into()));
    }
    let (du, dv) = derivatives_1(surface)?;
    let u_speeds = |j: usize| -> Vec<f64> {
        (i0..=i1)
            .map(|i| vec3::norm(du[spec.idx(i, j)]))
            .collect()
    };
    let v_speeds = |i: usize| -> Vec<f64> {
        (j0..=j1)
            .map(|j| vec3::norm(dv[spec.idx(i, j)]))
            .collect()
    };
    let l_ab = simpson_samples(&u_speeds(j0), spec.du());
    let l_dc = simpson_samples(&u_speeds(j1), spec.du());
    let l_ad = simpson_samples(&v_speeds(i0), spec.dv());
    let l_bc = simpson_samples(&v_speeds(i1), spec.dv());
    let perimeter = l_ab + l_dc + l_ad + l_bc;
    Ok((l_ab + l_bc - l_ad - l_dc).abs() / (perimeter + EPS_GUARD))
}

// ---------------------------------------------------------------------------
// Reciprocal parallelism
// ---------------------------------------------------------------------------

/// Polarized determinant D(A, B) = (det(A+B) - det A - det B) / 2.
pub fn mixed_determinant(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    let det = |m: [[f64; 2]; 2]| m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let sum = [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ];
    0.5 * (det(sum) - det(a) - det(b))
}

fn frob(m: [[f64; 2]; 2]) -> f64 {
    (m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]).sqrt()
}

fn same_spec(a: &GridSpec, b: &GridSpec) -> bool {
    a.nu == b.nu
        && a.nv == b.nv
        && (a.u_range.0 - b.u_range.0).abs() < 1e-12
        && (a.u_range.1 - b.u_range.1).abs() < 1e-12
        && (a.v_range.0 - b.v_range.0).abs() < 1e-12
        && (a.v_range.1 - b.v_range.1).abs() < 1e-12
}

/// Rotation-field test of Eisenhart type: eta is reciprocal-parallel to psi
/// iff D(II_psi, II_eta) = 0 and III_psi = III_eta.
pub fn reciprocal_parallel_check(
    psi: &SurfaceGrid,
    eta: &SurfaceGrid,
    tol: f64,
) -> Result<VerificationReport> {
    if !same_spec(&psi.spec, &eta.spec) {
        return Err(Error::GridMismatch(
            "reciprocal-parallel check needs identical grid specs".into(),
        ));
    }
    let fp = fundamental_forms(psi)?;
    let fe = fundamental_forms(eta)?;
    let tp = third_form(&fp)?;
    let te = third_form(&fe)?;
    let mut d_max: f64 = 0.0;
    let mut d_ss = 0.0;
    let mut t_max: f64 = 0.0;
    let mut t_ss = 0.0;
    let n = psi.spec.len();
    for i in 0..n {
        let ii_p = fp.second_at(i);
        let ii_e = fe.second_at(i);
        let d = mixed_determinant(ii_p, ii_e).abs() / (frob(ii_p) * frob(ii_e) + EPS_GUARD);
        d_max = d_max.max(d);
        d_ss += d * d;
        let diff = [
            [tp[i][0] - te[i][0], tp[i][1] - te[i][1]],
            [tp[i][1] - te[i][1], tp[i][2] - te[i][2]],
        ];
        let tnorm = frob([[tp[i][0], tp[i][1]], [tp[i][1], tp[i][2]]]);
        let t = frob(diff) / (tnorm + EPS_GUARD);
        t_max = t_max.max(t);
        t_ss += t * t;
    }
    let mut report = VerificationReport::new()
        .with_provenance("psi", &psi.provenance.family)
        .with_provenance("eta", &eta.provenance.family);
    report.record(
        "mixed_determinant",
        d_max,
        (d_ss / n as f64).sqrt(),
        tol,
    );
    report.record("third_form", t_max, (t_ss / n as f64).sqrt(), tol);
    Ok(report)
}

/// Sampled rotation operator A = (d psi)^{-1} d eta in the coordinate basis.
#[derive(Debug, Clone)]
pub struct RotationOperatorField {
    pub spec: GridSpec,
    /// entries per sample: [a11, a12, a21, a22]
    pub entries: Vec<[f64; 4]>,
    /// max |trace| over samples, scale-normalized
    pub trace_residual: f64,
}

pub fn rotation_operator(psi: &SurfaceGrid, eta: &SurfaceGrid) -> Result<RotationOperatorField> {
    if !same_spec(&psi.spec, &eta.spec) {
        return Err(Error::GridMismatch(
            "rotation operator needs identical grid specs".into(),
        ));
    }
    let (pu, pv) = derivatives_1(psi)?;
    let (eu, ev) = derivatives_1(eta)?;
    let n = psi.spec.len();
    let mut entries = vec![[0.0; 4]; n];
    let mut trace_residual: f64 = 0.0;
    for i in 0..n {
        // tangent planes must be parallel
        let np = vec3::normalize(vec3::cross(pu[i], pv[i]));
        let ne = vec3::normalize(vec3::cross(eu[i], ev[i]));
        let mis = 1.0 - vec3::dot(np, ne).abs();
        if mis > 1e-6 {
            return Err(Error::domain(format!(
                "tangent planes not parallel at sample {i} (normal misalignment {mis:.3e})"
            )));
        }
        let e = vec3::dot(pu[i], pu[i]);
        let f = vec3::dot(pu[i], pv[i]);
        let g = vec3::dot(pv[i], pv[i]);
        let det = e * g - f * f;
        // eta_u = a11 psi_u + a21 psi_v ; eta_v = a12 psi_u + a22 psi_v
        let bu = [vec3::dot(pu[i], eu[i]), vec3::dot(pv[i], eu[i])];
        let bv = [vec3::dot(pu[i], ev[i]), vec3::dot(pv[i], ev[i])];
        let a11 = (g * bu[0] - f * bu[1]) / det;
        let a21 = (e * bu[1] - f * bu[0]) / det;
        let a12 = (g * bv[0] - f * bv[1]) / det;
        let a22 = (e * bv[1] - f * bv[0]) / det;
        entries[i] = [a11, a12, a21, a22];
        let scale = a11.abs() + a12.abs() + a21.abs() + a22.abs() + EPS_GUARD;
        trace_residual = trace_residual.max((a11 + a22).abs() / scale);
    }
    Ok(RotationOperatorField {
        spec: psi.spec.clone(),
        entries,
        trace_residual,
    })
}

// ---------------------------------------------------------------------------
// Rotation coefficients: quadrature and Codazzi residuals
// ---------------------------------------------------------------------------

/// The (b, c) coefficient fields of an anti-diagonal rotation operator in
/// the K-frame, as evaluable fields.
pub struct RotationCoefficients {
    pub b: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub c: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

/// Cumulative integral along uniformly spaced samples, 4th order.
fn cumulative_4th(vals: &[Vec3], h: f64) -> Vec<Vec3> {
    let n = vals.len();
    let mut out = vec![[0.0; 3]; n];
    if n < 4 {
        // trapezoid fallback for very short lines
        for i in 1..n {
            for c in 0..3 {
                out[i][c] = out[i - 1][c] + 0.5 * h * (vals[i - 1][c] + vals[i][c]);
            }
        }
        return out;
    }
    for i in 0..n - 1 {
        let inc: Vec3 = if i == 0 {
            core::array::from_fn(|c| {
                h / 24.0
                    * (9.0 * vals[0][c] + 19.0 * vals[1][c] - 5.0 * vals[2][c] + vals[3][c])
            })
        } else if i + 2 < n {
            core::array::from_fn(|c| {
                h / 24.0
                    * (-vals[i - 1][c] + 13.0 * vals[i][c] + 13.0 * vals[i + 1][c]
                        - vals[i + 2][c])
            })
        } else {
            core::array::from_fn(|c| {
                h / 24.0
                    * (vals[n - 4][c] - 5.0 * vals[n - 3][c] + 19.0 * vals[n - 2][c]
                        + 9.0 * vals[n - 1][c])
            })
        };
        out[i + 1] = vec3::add(out[i], inc);
    }
    out
}

/// Integrate d eta = d psi · A for the anti-diagonal operator with entries
/// (b, c): eta_u = c psi_v, eta_v = b psi_u. Row-first result is returned;
/// the path-independence residual (max discrepancy against column-first
/// integration) lands in the provenance and trips an error beyond `tol`.
pub fn rotation_quadrature(
    psi: &SurfaceGrid,
    coeffs: &RotationCoefficients,
    tol: f64,
) -> Result<SurfaceGrid> {
    let spec = psi.spec.clone();
    let (pu, pv) = derivatives_1(psi)?;
    let n = spec.len();

    // integrand fields
    let mut w_u = vec![[0.0; 3]; n]; // eta_u = c psi_v
    let mut w_v = vec![[0.0; 3]; n]; // eta_v = b psi_u
    for i in 0..spec.nu {
        for j in 0..spec.nv {
            let idx = spec.idx(i, j);
            let (u, v) = (spec.u(i), spec.v(j));
            w_u[idx] = vec3::scale(pv[idx], (coeffs.c)(u, v));
            w_v[idx] = vec3::scale(pu[idx], (coeffs.b)(u, v));
        }
    }

    let integrate_grid = |row_first: bool| -> Vec<Vec3> {
        let mut eta = vec![[0.0; 3]; n];
        if row_first {
            // u-line at j = 0
            let line: Vec<Vec3> = (0..spec.nu).map(|i| w_u[spec.idx(i, 0)]).collect();
            let acc = cumulative_4th(&line, spec.du());
            for i in 0..spec.nu {
                eta[spec.idx(i, 0)] = acc[i];
            }
            for i in 0..spec.nu {
                let col: Vec<Vec3> = (0..spec.nv).map(|j| w_v[spec.idx(i, j)]).collect();
                let acc = cumulative_4th(&col, spec.dv());
                let base = eta[spec.idx(i, 0)];
                for j in 0..spec.nv {
                    eta[spec.idx(i, j)] = vec3::add(base, acc[j]);
                }
            }
        } else {
            let line: Vec<Vec3> = (0..spec.nv).map(|j| w_v[spec.idx(0, j)]).collect();
            let acc = cumulative_4th(&line, spec.dv());
            for j in 0..spec.nv {
                eta[spec.idx(0, j)] = acc[j];
            }
            for j in 0..spec.nv {
                let row: Vec<Vec3> = (0..spec.nu).map(|i| w_u[spec.idx(i, j)]).collect();
                let acc = cumulative_4th(&row, spec.du());
                let base = eta[spec.idx(0, j)];
                for i in 0..spec.nu {
                    eta[spec.idx(i, j)] = vec3::add(base, acc[i]);
                }
            }
        }
        eta
    };

    let row = integrate_grid(true);
    let col = integrate_grid(false);
    let mut residual: f64 = 0.0;
    for i in 0..n {
        residual = residual.max(vec3::dist(row[i], col[i]));
    }
    if residual > tol {
        return Err(Error::IntegrationInconsistency(format!(
            "rotation quadrature path residual {residual:.3e} exceeds {tol:.1e}"
        )));
    }
    let mut provenance = crate::grid::Provenance::new("rotation-quadrature");
    provenance
        .diagnostics
        .insert("path_residual".into(), residual);
    Ok(SurfaceGrid {
        spec,
        positions: row,
        d1: Some(crate::grid::Deriv1 { du: w_u, dv: w_v }),
        d2: None,
        provenance,
    })
}

/// Residuals of the Codazzi system for rotation coefficients together with
/// the alignability identity b_u = c_v; derivatives by central differences
/// of the evaluable fields.
pub fn codazzi_residual(
    coeffs: &RotationCoefficients,
    omega: &dyn Fn(f64, f64) -> f64,
    spec: &GridSpec,
    tol: f64,
) -> Result<VerificationReport> {
    let h = 1e-4;
    let mut stats = [(0.0f64, 0.0f64); 3]; // (max, sum-of-squares)
    let mut count = 0usize;
    for i in 0..spec.nu {
        for j in 0..spec.nv {
            let (u, v) = (spec.u(i), spec.v(j));
            let b = (coeffs.b)(u, v);
            let c = (coeffs.c)(u, v);
            let w = omega(u, v);
            let bu = ((coeffs.b)(u + h, v) - (coeffs.b)(u - h, v)) / (2.0 * h);
            let cv = ((coeffs.c)(u, v + h) - (coeffs.c)(u, v - h)) / (2.0 * h);
            let wu = (omega(u + h, v) - omega(u - h, v)) / (2.0 * h);
            let wv = (omega(u, v + h) - omega(u, v - h)) / (2.0 * h);
            let (sw, cw) = w.sin_cos();
            let csc = 1.0 / sw;
            let cot = cw / sw;
            let t1 = c * csc * wv;
            let t2 = b * cot * wu;
            let r1 = -bu - t1 - t2;
            let s1 = bu.abs() + t1.abs() + t2.abs() + EPS_GUARD;
            let t3 = c * cot * wv;
            let t4 = b * csc * wu;
            let r2 = -cv - t3 - t4;
            let s2 = cv.abs() + t3.abs() + t4.abs() + EPS_GUARD;
            let r3 = bu - cv;
            let s3 = bu.abs() + cv.abs() + EPS_GUARD;
            for (slot, (r, s)) in [(0, (r1, s1)), (1, (r2, s2)), (2, (r3, s3))] {
                let rel = (r / s).abs();
                stats[slot].0 = stats[slot].0.max(rel);
                stats[slot].1 += rel * rel;
            }
            count += 1;
        }
    }
    let mut report = VerificationReport::new();
    let names = ["codazzi_b", "codazzi_c", "alignability_identity"];
    for (slot, name) in names.iter().enumerate() {
        report.record(
            name,
            stats[slot].0,
            (stats[slot].1 / count as f64).sqrt(),
            tol,
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Frenet data of coordinate lines
// ---------------------------------------------------------------------------

/// Curvature and torsion of the coordinate lines by 5-point local
/// polynomial fits; boundary samples carry NaN.
pub struct FrenetLines {
    pub kappa_u: Vec<f64>,
    pub tau_u: Vec<f64>,
    pub kappa_v: Vec<f64>,
    pub tau_v: Vec<f64>,
}

pub fn frenet_coordinate_lines(surface: &SurfaceGrid) -> Result<FrenetLines> {
    let spec = &surface.spec;
    if spec.nu < 5 || spec.nv < 5 {
        return Err(Error::domain("Frenet fits need at least 5 samples per side".into()));
    }
    let n = spec.len();
    let mut out = FrenetLines {
        kappa_u: vec![f64::NAN; n],
        tau_u: vec![f64::NAN; n],
        kappa_v: vec![f64::NAN; n],
        tau_v: vec![f64::NAN; n],
    };
    let frenet = |pm2: Vec3, pm1: Vec3, p0: Vec3, pp1: Vec3, pp2: Vec3, h: f64| -> (f64, f64) {
        let d1: Vec3 = core::array::from_fn(|c| {
            (-pp2[c] + 8.0 * pp1[c] - 8.0 * pm1[c] + pm2[c]) / (12.0 * h)
        });
        let d2: Vec3 = core::array::from_fn(|c| {
            (-pp2[c] + 16.0 * pp1[c] - 30.0 * p0[c] + 16.0 * pm1[c] - pm2[c]) / (12.0 * h * h)
        });
        let d3: Vec3 = core::array::from_fn(|c| {
            (pp2[c] - 2.0 * pp1[c] + 2.0 * pm1[c] - pm2[c]) / (2.0 * h * h * h)
        });
        let cr = vec3::cross(d1, d2);
        let sp = vec3::norm(d1);
        let kappa = vec3::norm(cr) / (sp * sp * sp);
        let tau = vec3::dot(cr, d3) / (vec3::dot(cr, cr) + EPS_GUARD);
        (kappa, tau)
    };
    for i in 0..spec.nu {
        for j in 0..spec.nv {
            let idx = spec.idx(i, j);
            if i >= 2 && i + 2 < spec.nu {
                let (k, t) = frenet(
                    surface.at(i - 2, j),
                    surface.at(i - 1, j),
                    surface.at(i, j),
                    surface.at(i + 1, j),
                    surface.at(i + 2, j),
                    spec.du(),
                );
                out.kappa_u[idx] = k;
                out.tau_u[idx] = t;
            }
            if j >= 2 && j + 2 < spec.nv {
                let (k, t) = frenet(
                    surface.at(i, j - 2),
                    surface.at(i, j - 1),
                    surface.at(i, j),
                    surface.at(i, j + 1),
                    surface.at(i, j + 2),
                    spec.dv(),
                );
                out.kappa_v[idx] = k;
                out.tau_v[idx] = t;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Provenance;

    fn sphere_grid(n: usize) -> SurfaceGrid {
        // unit sphere, u = polar angle theta, v = azimuth
        let spec = GridSpec::new((0.4, 2.0), (0.1, 2.2), n, n).unwrap();
        let mut positions = vec![[0.0; 3]; spec.len()];
        for i in 0..n {
            for j in 0..n {
                let th = spec.u(i);
                let ph = spec.v(j);
                positions[spec.idx(i, j)] =
                    [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            }
        }
        SurfaceGrid {
            spec,
            positions,
            d1: None,
            d2: None,
            provenance: Provenance::new("sphere"),
        }
    }

    fn plane_grid(n: usize) -> SurfaceGrid {
        let spec = GridSpec::new((0.0, 1.0), (0.0, 1.0), n, n).unwrap();
        let mut positions = vec![[0.0; 3]; spec.len()];
        for i in 0..n {
            for j in 0..n {
                positions[spec.idx(i, j)] =
                    [spec.u(i) + 0.3 * spec.v(j), spec.v(j), 0.7 * spec.u(i)];
            }
        }
        SurfaceGrid {
            spec,
            positions,
            d1: None,
            d2: None,
            provenance: Provenance::new("plane"),
        }
    }

    #[test]
    fn sphere_forms_match_closed_form() {
        let s = sphere_grid(60);
        let ff = fundamental_forms(&s).unwrap();
        for i in 0..s.spec.nu {
            for j in 0..s.spec.nv {
                let idx = s.spec.idx(i, j);
                let th = s.spec.u(i);
                assert!((ff.e[idx] - 1.0).abs() < 1e-6);
                assert!(ff.f[idx].abs() < 1e-6);
                assert!((ff.g[idx] - th.sin().powi(2)).abs() < 1e-6);
            }
        }
        let (kk, _) = curvatures(&ff).unwrap();
        for k in kk {
            assert!((k.abs() - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn plane_second_form_vanishes() {
        let s = plane_grid(12);
        let ff = fundamental_forms(&s).unwrap();
        for i in 0..s.spec.len() {
            assert!(ff.l[i].abs() < 1e-10);
            assert!(ff.m[i].abs() < 1e-10);
            assert!(ff.n[i].abs() < 1e-10);
        }
        let (kk, hh) = curvatures(&ff).unwrap();
        assert!(kk.iter().all(|k| k.abs() < 1e-10));
        assert!(hh.iter().all(|h| h.abs() < 1e-10));
        let tf = third_form(&ff).unwrap();
        assert!(tf.iter().all(|t| t.iter().all(|c| c.abs() < 1e-10)));
    }

    #[test]
    fn sphere_third_form_equals_first() {
        let s = sphere_grid(60);
        let ff = fundamental_forms(&s).unwrap();
        let tf = third_form(&ff).unwrap();
        for i in 0..s.spec.len() {
            assert!((tf[i][0] - ff.e[i]).abs() < 1e-4);
            assert!((tf[i][1] - ff.f[i]).abs() < 1e-4);
            assert!((tf[i][2] - ff.g[i]).abs() < 1e-4);
        }
    }

    #[test]
    fn great_circles_are_geodesics() {
        // azimuth lines at the equator and meridians are great circles
        let spec = GridSpec::new((1.37, 1.77), (0.1, 2.2), 41, 41).unwrap();
        let mut positions = vec![[0.0; 3]; spec.len()];
        for i in 0..41 {
            for j in 0..41 {
                let th = spec.u(i);
                let ph = spec.v(j);
                positions[spec.idx(i, j)] =
                    [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            }
        }
        let s = SurfaceGrid {
            spec: spec.clone(),
            positions,
            d1: None,
            d2: None,
            provenance: Provenance::new("sphere"),
        };
        let (kg_u, kg_v) = geodesic_curvature_lines(&s).unwrap();
        // meridians (u-lines) are geodesics everywhere
        for i in 2..spec.nu - 2 {
            for j in 2..spec.nv - 2 {
                assert!(kg_u[spec.idx(i, j)].abs() < 1e-5);
            }
        }
        // the equator row is a geodesic
        let eq = (0..41)
            .min_by(|&a, &b| {
                (spec.u(a) - core::f64::consts::FRAC_PI_2)
                    .abs()
                    .partial_cmp(&(spec.u(b) - core::f64::consts::FRAC_PI_2).abs())
                    .unwrap()
            })
            .unwrap();
        for j in 2..spec.nv - 2 {
            assert!(kg_v[spec.idx(eq, j)].abs() < 1e-3);
        }
    }

    #[test]
    fn mixed_determinant_properties() {
        let a = [[1.3, -0.2], [0.4, 2.1]];
        let det_a = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        assert!((mixed_determinant(a, a) - det_a).abs() < 1e-14);
        let id = [[1.0, 0.0], [0.0, 1.0]];
        assert!((mixed_determinant(id, id) - 1.0).abs() < 1e-15);
        // bilinearity
        let b = [[0.7, 1.1], [-0.3, 0.9]];
        let c = [[2.0, 0.1], [0.6, -1.4]];
        let bc = [[b[0][0] + c[0][0], b[0][1] + c[0][1]], [b[1][0] + c[1][0], b[1][1] + c[1][1]]];
        let lhs = mixed_determinant(a, bc);
        let rhs = mixed_determinant(a, b) + mixed_determinant(a, c);
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn plane_defects_within_guard() {
        let s = plane_grid(12);
        let d = net_defects(&s).unwrap();
        assert!(d.conjugate < 1e-6);
        assert!(d.chebyshev_u < 1e-9);
        assert!(d.chebyshev_v < 1e-9);
    }

    #[test]
    fn loop_validation() {
        let spec = GridSpec::new((0.0, 1.0), (0.0, 1.0), 10, 10).unwrap();
        assert!(NetLoop::new(&spec, 0, 1, 3, 3).is_err());
        assert!(NetLoop::new(&spec, 2, 2, 2, 5).is_err());
        assert!(NetLoop::new(&spec, 1, 1, 8, 8).is_ok());
        assert!(NetLoop::new(&spec, 1, 1, 9, 8).is_err());
    }

    #[test]
    fn self_pair_fails_reciprocal_check() {
        let s = sphere_grid(20);
        let report = reciprocal_parallel_check(&s, &s, 1e-5).unwrap();
        assert!(!report.pass());
    }

    #[test]
    fn rotation_operator_identity_for_self() {
        let s = sphere_grid(15);
        let op = rotation_operator(&s, &s).unwrap();
        for e in &op.entries {
            assert!((e[0] - 1.0).abs() < 1e-12);
            assert!((e[3] - 1.0).abs() < 1e-12);
            assert!(e[1].abs() < 1e-12);
            assert!(e[2].abs() < 1e-12);
        }
        // a surface is not its own rotation field: trace 2, flagged
        assert!(op.trace_residual > 0.4);
    }

    #[test]
    fn rotation_quadrature_zero_operator() {
        let s = sphere_grid(15);
        let coeffs = RotationCoefficients {
            b: Box::new(|_, _| 0.0),
            c: Box::new(|_, _| 0.0),
        };
        let eta = rotation_quadrature(&s, &coeffs, 1e-9).unwrap();
        for p in &eta.positions {
            assert!(vec3::norm(*p) < 1e-15);
        }
    }

    #[test]
    fn codazzi_constant_coeffs_fail_against_varying_omega() {
        let spec = GridSpec::new((0.3, 1.2), (0.3, 1.2), 12, 12).unwrap();
        let coeffs = RotationCoefficients {
            b: Box::new(|_, _| 1.0),
            c: Box::new(|_, _| 1.0),
        };
        let omega = |u: f64, v: f64| 0.4 + 0.3 * (u + v);
        let report = codazzi_residual(&coeffs, &omega, &spec, 1e-6).unwrap();
        assert!(!report.pass());
    }

    #[test]
    fn simpson_rule_exactness() {
        // cubic integrated exactly by both even and odd interval counts
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        for n in [5usize, 6, 9, 12] {
            let h = 1.0 / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
            let exact = 0.25 - 1.0 + 1.0;
            assert!(
                (simpson_samples(&vals, h) - exact).abs() < 1e-12,
                "n = {n}"
            );
        }
    }
}
