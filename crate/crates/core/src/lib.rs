//! Bayesian inference after data-dependent selection.
//!
//! The numeric kernel and the split normal model are generic over [`Real`];
//! the exponential-family, multiparameter and simulation layers work in `f64`.

pub mod curve;
pub mod error;
pub mod expfam;
pub mod multiparam;
pub mod normal;
pub mod numeric;
pub mod prior;
pub mod real;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
pub use prior::PriorKind;
pub use real::Real;

/// Split normal model in double precision.
pub type NormalModel = normal::SplitNormalModel<f64>;
/// Tabulated posterior in double precision.
pub type Posterior = curve::PosteriorCurve<f64>;
/// `(h₁, h₂)` pair in double precision.
pub type Hazards = special::HazardPair<f64>;
