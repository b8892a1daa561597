//! Sine-basis discretization of Dirichlet rectangles: eigenvalue ladders,
//! transforms, de-aliased nonlinear terms and quadrature norms.

mod domain;
mod field;
mod space;
mod spectrum;
pub(crate) mod transform;

pub use domain::DomainSpec;
pub use field::{GridField, ModeShape, SpectralField};
pub use space::{NormBundle, SpectralSpace, BLOWUP_THRESHOLD};
pub use spectrum::{build_spectrum, lambda_ladder, LambdaLadder, OperatorSpectrum};
