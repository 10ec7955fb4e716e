//! Sampled surface patches on rectangular parameter grids.

use crate::vec3::Vec3;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Rectangular sampling of an open parameter rectangle.
///
/// `margin` is the relative inset the family generators apply when they
/// derive a grid from a singular-boundary domain; an already-explicit range
/// is used as given.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub nu: usize,
    pub nv: usize,
    pub margin: f64,
}

pub const DEFAULT_MARGIN: f64 = 1e-3;

impl GridSpec {
    pub fn new(u_range: (f64, f64), v_range: (f64, f64), nu: usize, nv: usize) -> Result<Self> {
        if nu < 2 || nv < 2 {
            return Err(Error::domain(format!(
                "grid needs at least 2 samples per side, got {nu} x {nv}"
            )));
        }
        if !(u_range.0 < u_range.1) || !(v_range.0 < v_range.1) {
            return Err(Error::domain(format!(
                "grid ranges must be increasing, got {u_range:?} x {v_range:?}"
            )));
        }
        Ok(GridSpec {
            u_range,
            v_range,
            nu,
            nv,
            margin: DEFAULT_MARGIN,
        })
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    #[inline]
    pub fn u(&self, i: usize) -> f64 {
        self.u_range.0 + (self.u_range.1 - self.u_range.0) * i as f64 / (self.nu - 1) as f64
    }

    #[inline]
    pub fn v(&self, j: usize) -> f64 {
        self.v_range.0 + (self.v_range.1 - self.v_range.0) * j as f64 / (self.nv - 1) as f64
    }

    #[inline]
    pub fn du(&self) -> f64 {
        (self.u_range.1 - self.u_range.0) / (self.nu - 1) as f64
    }

    #[inline]
    pub fn dv(&self) -> f64 {
        (self.v_range.1 - self.v_range.0) / (self.nv - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }
}

/// Where a grid came from: family tag plus the parameters that determine it,
/// and any diagnostics the generator wants on record.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl Provenance {
    pub fn new(family: &str) -> Self {
        Provenance {
            family: family.to_string(),
            ..Default::default()
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// First-derivative fields (psi_u, psi_v) on the grid.
#[derive(Debug, Clone)]
pub struct Deriv1 {
    pub du: Vec<Vec3>,
    pub dv: Vec<Vec3>,
}

/// Second-derivative fields (psi_uu, psi_uv, psi_vv) on the grid.
#[derive(Debug, Clone)]
pub struct Deriv2 {
    pub duu: Vec<Vec3>,
    pub duv: Vec<Vec3>,
    pub dvv: Vec<Vec3>,
}

/// A sampled immersion: positions in row-major (i * nv + j) order, with
/// analytic derivative fields when the generator can supply them.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub spec: GridSpec,
    pub positions: Vec<Vec3>,
    pub d1: Option<Deriv1>,
    pub d2: Option<Deriv2>,
    pub provenance: Provenance,
}

impl SurfaceGrid {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Vec3 {
        self.positions[self.spec.idx(i, j)]
    }

    pub fn check_finite(&self) -> Result<()> {
        for (n, p) in self.positions.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                let i = n / self.spec.nv;
                let j = n % self.spec.nv;
                return Err(Error::DegenerateImmersion {
                    i,
                    j,
                    detail: "non-finite position".into(),
                });
            }
        }
        Ok(())
    }

    /// Relabel parameters by the squeeze map (u, v) -> (lambda u, v / lambda).
    ///
    /// Positions are untouched; ranges and derivative fields pick up the
    /// Jacobian factors.
    pub fn squeeze_reparam(&self, lambda: f64) -> Result<SurfaceGrid> {
        if !(lambda > 0.0) {
            return Err(Error::domain(format!(
                "squeeze parameter must be positive, got {lambda}"
            )));
        }
        let mut spec = self.spec.clone();
        spec.u_range = (spec.u_range.0 * lambda, spec.u_range.1 * lambda);
        spec.v_range = (spec.v_range.0 / lambda, spec.v_range.1 / lambda);
        let d1 = self.d1.as_ref().map(|d| Deriv1 {
            du: d.du.iter().map(|p| crate::vec3::scale(*p, 1.0 / lambda)).collect(),
            dv: d.dv.iter().map(|p| crate::vec3::scale(*p, lambda)).collect(),
        });
        let d2 = self.d2.as_ref().map(|d| Deriv2 {
            duu: d
                .duu
                .iter()
                .map(|p| crate::vec3::scale(*p, 1.0 / (lambda * lambda)))
                .collect(),
            duv: d.duv.clone(),
            dvv: d
                .dvv
                .iter()
                .map(|p| crate::vec3::scale(*p, lambda * lambda))
                .collect(),
        });
        let mut provenance = self.provenance.clone();
        provenance
            .params
            .insert("squeeze_lambda".into(), lambda);
        Ok(SurfaceGrid {
            spec,
            positions: self.positions.clone(),
            d1,
            d2,
            provenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sampling_endpoints() {
        let g = GridSpec::new((0.0, 1.0), (2.0, 4.0), 5, 3).unwrap();
        assert_eq!(g.u(0), 0.0);
        assert_eq!(g.u(4), 1.0);
        assert_eq!(g.v(2), 4.0);
        assert_eq!(g.idx(1, 2), 5);
    }

    #[test]
    fn rejects_degenerate_spec() {
        assert!(GridSpec::new((0.0, 0.0), (0.0, 1.0), 4, 4).is_err());
        assert!(GridSpec::new((0.0, 1.0), (0.0, 1.0), 1, 4).is_err());
    }

    #[test]
    fn squeeze_identity_and_uv_invariance() {
        let g = GridSpec::new((1.0, 2.0), (1.0, 2.0), 3, 3).unwrap();
        let sg = SurfaceGrid {
            spec: g.clone(),
            positions: vec![[0.0; 3]; 9],
            d1: None,
            d2: None,
            provenance: Provenance::new("test"),
        };
        let same = sg.squeeze_reparam(1.0).unwrap();
        assert_eq!(same.spec.u_range, g.u_range);
        let sq = sg.squeeze_reparam(2.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let prod_old = g.u(i) * g.v(j);
                let prod_new = sq.spec.u(i) * sq.spec.v(j);
                assert!((prod_old - prod_new).abs() < 1e-15);
            }
        }
    }
}
