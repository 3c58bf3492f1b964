//! Numerical laboratory for van der Corput sets.
//!
//! - [`group`]: finite windows of ℤ^d, Følner families, Reiter measures.
//! - [`tiling`]: congruent dyadic box tilings and the good-tile audit.
//! - [`spectral`]: trigonometric polynomials, atomic spectral measures and the
//!   positivity verifier.
//! - [`certify`]: LP search for positive-definite certificates and witness
//!   measures, duality audits and closure transformations.
//! - [`synth`]: unimodular sequences realizing atomic spectral measures.
//!
//! Finite frequency sets are never van der Corput sets; every certificate
//! produced here is a statement about one finite fragment at one grid, and
//! every "infeasible" answer is a lower bound at that grid, not a proof.

pub mod certify;
pub mod error;
pub mod group;
pub mod lp;
pub mod spectral;
pub mod synth;
pub mod tiling;
pub mod torus;

pub use error::{Error, Result};
pub use group::{BoxSet, FiniteSet, FolnerFamily, GroupPoint, ReiterMeasure};
pub use spectral::{SpectralMeasure, TrigPolyCert};
pub use torus::TorusPoint;
