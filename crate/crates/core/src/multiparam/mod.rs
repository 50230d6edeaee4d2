//! Selected parameters with nuisance components.

pub mod mh;
pub mod unknown_var;
pub mod winner;

pub use mh::{credible_interval, mh_sample, Chain, MHConfig};
pub use unknown_var::{UnknownVarModel, UnknownVarPrior, UnknownVarStats, VarianceReading};
pub use winner::{WinnerLikelihood, WinnerModel};
