//! Liouville structures on vector fibrations in a single global chart.
//!
//! The crate is organised bottom-up:
//!
//! * [`jets`]: forward-mode jets, the derivative engine for everything else.
//! * [`bundles`]: coordinate records for `TQ`, `T*Q`, `TTQ`, `TT*Q`, the
//!   flip `κ_Q`, vertical lifts and the second vector structure on `TP`.
//! * [`forms`]: differential forms, pullback, `d`, the pairings, the
//!   Liouville form and the derivations `i_T`, `d_T`.
//! * [`liouville`]: Liouville structures, their verification, the four
//!   equivalent presentations, morphism checks and the functors.
//! * [`symplin`]: linear symplectic algebra at a point.
//! * [`mechanics`]: generating functions and the dynamics they generate.
//! * [`integrate`]: fixed-step integrators and trajectory diagnostics.
//! * [`modelio`]: expression language and model files.
//!
//! See [`conventions`] for coordinate ordering and sign choices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundles;
pub mod conventions;
pub mod error;
pub mod forms;
pub mod integrate;
pub mod jets;
pub mod linalg;
pub mod liouville;
pub mod mechanics;
pub mod modelio;
pub mod sampling;
pub mod symplin;

pub use error::{Error, Result};
pub use forms::Form;
pub use jets::{JetScalar, JetVector, MultiJet, Scalar, ScalarField, SmoothMap};
pub use liouville::LiouvilleStructure;
pub use symplin::{Subspace, SymplecticSpace};
