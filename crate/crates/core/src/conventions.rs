//! Coordinate and sign conventions, and the numerical tolerances that turn
//! exact geometric conditions into decidable floating-point tests.
//!
//! # Charts
//!
//! Every manifold is covered by one global chart. A vector fibration
//! `P -> Q` is the product `R^n × R^k` with coordinates `(q, f)`: base
//! coordinates first, fibre coordinates second. A tangent vector to `P` at
//! `(q, f)` is written `(δq, δf)`, so the tangent bundle `TP` has
//! coordinates `(q, f, δq, δf)`.
//!
//! * `T*Q` has coordinates `(q, p)`.
//! * `TTQ` points are `(q, v, dq, dv)`: value, `∂t`, `∂s`, `∂s∂t` of a
//!   two-parameter family. `τ_TQ` reads `(q, v)`, `Tτ_Q` reads `(q, dq)`,
//!   and the flip `κ_Q` swaps `v` and `dq`.
//! * `TT*Q` points are `(q, p, q̇, ṗ)`; `τ_{T*Q}` reads `(q, p)` and `Tπ_Q`
//!   reads `(q, q̇)`.
//! * Structures built on `TP -> TQ` (the tangent structure) are re-ordered
//!   to `(q, q̇, f, ḟ)` so the base-then-fibre rule still holds.
//! * Products `P2 × P1 -> Q2 × Q1` use `(q2, q1, f2, f1)`.
//!
//! # Signs
//!
//! * The Liouville form on `T*Q` is `θ = p·dq`, and the symplectic form is
//!   `ω = dθ = dp ∧ dq` (not `dq ∧ dp`).
//! * A 2-form evaluates as `(α ∧ β)(u, w) = α(u)β(w) − α(w)β(u)`.
//! * Hamiltonian vector fields solve `ω(X, ·) = −dH`; with `ω = dp ∧ dq`
//!   this is `q̇ = ∂H/∂p`, `ṗ = −∂H/∂q`.
//! * Difference structures use `θ2 ⊖ θ1 = pr2*θ2 − pr1*θ1`; a two-point
//!   generating function `W(q1, q0)` then yields `p1 = ∂W/∂q1` and
//!   `p0 = −∂W/∂q0`.

/// Absolute singular-value threshold, scaled by `max(1, σ_max)`, below
/// which a direction counts as null.
pub const RANK_TOL: f64 = 1e-9;

/// A matrix with condition number above this is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Default band for residual-based set membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Default tolerance for identities that are exact up to rounding.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Mixed absolute/relative comparison: `|a − b| ≤ tol · max(1, |a|, |b|)`.
pub fn agree(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
