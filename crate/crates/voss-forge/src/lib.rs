//! Construction and verification of alignable Voss surfaces.
//!
//! A Voss surface (V-surface) carries a conjugate net whose coordinate lines
//! are geodesics; equivalently it arises as the rotation field of a
//! pseudospherical surface (K-surface). The alignable ones — those whose net
//! loops collapse to a planar strip — come in two classes: rotation fields of
//! helicoidal K-surfaces (first kind) and of Amsler K-surfaces (second kind).
//!
//! This crate builds those surfaces and their isometric deformations, and
//! verifies the classified properties numerically:
//!
//! - [`elliptic`]: Jacobi elliptic functions and elliptic integrals, the
//!   special-function substrate for everything pseudospherical.
//! - [`sine_gordon`]: angle fields — elliptic solitons for K-surfaces of
//!   revolution and the Painlevé III radial solution for Amsler surfaces.
//! - [`surfaces`]: explicit immersions — K-nets of revolution, the Bour
//!   isometry family, rotation fields, first-kind alignable V-nets, and the
//!   Sym / Lax-pair integration of K-nets.
//! - [`geomkit`]: discrete differential-geometry operators and verification
//!   predicates (fundamental forms, curvatures, net defects, alignability,
//!   reciprocal-parallel tests, Codazzi residuals).
//! - [`reconstruct`]: fundamental-form specifications for the families
//!   without explicit immersions (second kind, Eisenhart counterexample) and
//!   a Gauss–Weingarten frame integrator that recovers an immersion from
//!   compatible forms.

pub mod elliptic;
mod error;
pub mod geomkit;
pub mod grid;
mod ode;
mod quad;
pub mod reconstruct;
pub mod sine_gordon;
pub mod surfaces;
pub mod vec3;

pub use error::{Error, Result, SingularKind};
pub use grid::{GridSpec, Provenance, SurfaceGrid};
