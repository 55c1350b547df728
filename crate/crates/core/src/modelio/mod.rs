//! Expression language and TOML model files.
//!
//! A model file declares a base dimension `n`, a role, and the expressions
//! that role needs:
//!
//! | role          | keys                      | variables              |
//! |---------------|---------------------------|------------------------|
//! | `generating`  | `U`                       | `q1..qn`               |
//! | `constrained` | `U`, `g` (list)           | `q1..qn`               |
//! | `two_point`   | `W`                       | `qf1..qfn, qi1..qin`   |
//! | `lagrangian`  | `L`                       | `q1..qn, v1..vn`       |
//! | `hamiltonian` | `H`, optional `separable` | `q1..qn, p1..pn`       |
//! | `relation`    | `F` or `matrix`           | `qf1..qfn, qi1..qin`   |
//!
//! Optional tables: `[structure] theta = [...]` (the `2n` coefficients of a
//! non-canonical Liouville form on `dq1..dqn, dp1..dpn`, for the
//! generating, constrained and hamiltonian roles), `[integrator]` with
//! `method`, `h`, `t_end`, `x0` (lagrangian and hamiltonian roles), and
//! `[tolerances]` with `membership`, `identity`, `samples`.

mod expr;
mod model;

pub use expr::{
    parse, parse_with, BinOp, Compiled, DomainError, Expr, ExprKind, Func, ParseError, Span,
};
pub use model::{
    configuration_vars, load_model, phase_vars, tangent_vars, two_point_vars, IntegratorSettings,
    Method, ModelError, ModelExpr, ModelFile, RelationSpec, Role, RoleKind, Tolerances,
};
