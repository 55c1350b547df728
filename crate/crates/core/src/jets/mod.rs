//! Forward-mode jets.
//!
//! [`JetScalar`] is the two-parameter jet used for first and second tangent
//! lifts. [`MultiJet`] generalizes it to a stack of independent first-order
//! perturbations so derivatives can be nested; form coefficients and model
//! functions are written against it.

mod jet_scalar;
mod multijet;
mod scalar;
mod smooth;

pub use jet_scalar::JetScalar;
pub use multijet::{directional, MultiJet, MAX_DEPTH};
pub use scalar::Scalar;
pub use smooth::{gradient, hessian, jet_eval, jet_eval_map, JetVector, ScalarField, SmoothMap};

pub(crate) use smooth::check_dim;

/// Embeds a real point as depth-0 jets.
pub fn constants(x: &[f64]) -> Vec<MultiJet> {
    x.iter().copied().map(MultiJet::constant).collect()
}
