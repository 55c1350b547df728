use nalgebra::DVector;

use super::{generate_from_function, norm, GeneratedSet};
use crate::bundles::TTStarPoint;
use crate::conventions::CONDITION_LIMIT;
use crate::error::{Error, Result};
use crate::forms::Form;
use crate::jets::{check_dim, gradient, hessian, ScalarField, SmoothMap};
use crate::linalg::condition_number;
use crate::liouville::{functor_tangent, LiouvilleStructure};

/// The implicit dynamics generated by a Lagrangian `L(q, v)` in the tangent
/// structure on `TT*Q`.
#[derive(Clone, Debug)]
pub struct LagrangianDynamics {
    pub lagrangian: ScalarField,
    /// Chart `(q, q̇, p, ṗ)` of the tangent structure.
    pub set: GeneratedSet,
    n: usize,
}

pub fn lagrangian_dynamics(lagrangian: &ScalarField) -> Result<LagrangianDynamics> {
    if !lagrangian.dim().is_multiple_of(2) || lagrangian.dim() == 0 {
        return Err(Error::InvalidArgument(format!(
            "Lagrangian needs arguments (q, v) of equal length, got {}",
            lagrangian.dim()
        )));
    }
    let n = lagrangian.dim() / 2;
    let tangent = functor_tangent(&LiouvilleStructure::canonical(n))?;
    let mut set = generate_from_function(&tangent, lagrangian)?;
    set.label = "Lagrangian dynamics".into();
    Ok(LagrangianDynamics {
        lagrangian: lagrangian.clone(),
        set,
        n,
    })
}

impl LagrangianDynamics {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Residual of `(q, p, q̇, ṗ)`; zero iff `p = ∂L/∂v(q, q̇)` and `ṗ = ∂L/∂q(q, q̇)`.
    pub fn residual(&self, w: &TTStarPoint) -> f64 {
        let x: Vec<f64> = [&w.q, &w.qdot, &w.p, &w.pdot]
            .into_iter()
            .flatten()
            .copied()
            .collect();
        self.set.residual(&x)
    }

    pub fn contains(&self, w: &TTStarPoint, tol: f64) -> bool {
        self.residual(w) < tol
    }

    /// `(q̇, v̇)` at the state `(q, v)`, with `v̇` solving the Euler–Lagrange
    /// system `L_vv v̇ = L_q − L_vq v`. Rejects a singular `L_vv`.
    pub fn explicit_ode(&self, state: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        check_dim("Lagrangian state", 2 * n, state.len())?;
        let h = hessian(&self.lagrangian, state)?;
        let grad = gradient(&self.lagrangian, state)?;
        let lvv = h.view((n, n), (n, n)).into_owned();
        let lvq = h.view((n, 0), (n, n)).into_owned();
        let condition = condition_number(&lvv);
        if !(condition < CONDITION_LIMIT) {
            return Err(Error::Singular {
                what: "∂²L/∂v²".into(),
                witness: state.to_vec(),
                condition,
            });
        }
        let v = DVector::from_column_slice(&state[n..]);
        let rhs = DVector::from_column_slice(&grad[..n]) - lvq * &v;
        let acc = lvv.lu().solve(&rhs).ok_or_else(|| Error::Singular {
            what: "∂²L/∂v²".into(),
            witness: state.to_vec(),
            condition: f64::INFINITY,
        })?;
        Ok(state[n..]
            .iter()
            .copied()
            .chain(acc.iter().copied())
            .collect())
    }
}

/// The Hamiltonian vector field of `H` for a symplectic form `ω`.
#[derive(Clone, Debug)]
pub struct HamiltonianField {
    pub hamiltonian: ScalarField,
    pub omega: Form,
}

pub fn hamiltonian_dynamics(hamiltonian: &ScalarField, omega: &Form) -> Result<HamiltonianField> {
    if omega.degree() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a 2-form, got degree {}",
            omega.degree()
        )));
    }
    check_dim("Hamiltonian domain", omega.dim(), hamiltonian.dim())?;
    Ok(HamiltonianField {
        hamiltonian: hamiltonian.clone(),
        omega: omega.clone(),
    })
}

impl HamiltonianField {
    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        self.hamiltonian.eval(x)
    }

    /// `X(x)` solving `ω(X, ·) = −dH`, i.e. `Ωᵀ X = −∇H`.
    pub fn field(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.omega.matrix_at(x)?;
        let condition = condition_number(&m);
        if !(condition < CONDITION_LIMIT) {
            return Err(Error::Singular {
                what: "symplectic form".into(),
                witness: x.to_vec(),
                condition,
            });
        }
        let grad = gradient(&self.hamiltonian, x)?;
        let rhs = -DVector::from_vec(grad);
        let sol = m
            .transpose()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular {
                what: "symplectic form".into(),
                witness: x.to_vec(),
                condition: f64::INFINITY,
            })?;
        Ok(sol.iter().copied().collect())
    }

    /// `|ẋ − X(x)|`; infinite where the field is undefined.
    pub fn residual(&self, x: &[f64], xdot: &[f64]) -> f64 {
        match self.field(x) {
            Ok(v) if v.len() == xdot.len() => norm(v.iter().zip(xdot).map(|(a, b)| a - b)),
            _ => f64::INFINITY,
        }
    }
}

/// `(q, v) ↦ (q, ∂L/∂v)`.
pub fn legendre_map(lagrangian: &ScalarField) -> SmoothMap {
    let l = lagrangian.clone();
    let dim = l.dim();
    let n = dim / 2;
    SmoothMap::new(dim, dim, move |x| {
        let grad = l.gradient_jet(x);
        x[..n]
            .iter()
            .copied()
            .chain(grad[n..].iter().copied())
            .collect()
    })
}

/// Largest deviation, over `states`, between `X_H` at the Legendre image of
/// `(q, v)` and the Euler–Lagrange velocity `(v, d/dt ∂L/∂v)`.
pub fn consistency_check(
    lagrangian: &ScalarField,
    field: &HamiltonianField,
    states: &[Vec<f64>],
) -> Result<f64> {
    let dynamics = lagrangian_dynamics(lagrangian)?;
    let n = dynamics.dim();
    check_dim("Hamiltonian phase space", 2 * n, field.dim())?;
    let legendre = legendre_map(lagrangian);
    let mut worst: f64 = 0.0;
    for state in states {
        let ode = dynamics.explicit_ode(state)?;
        let h = hessian(lagrangian, state)?;
        // d/dt ∂L/∂v = L_vq q̇ + L_vv v̇
        let pdot: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| h[(n + i, j)] * ode[j] + h[(n + i, n + j)] * ode[n + j])
                    .sum()
            })
            .collect();
        let point = legendre.eval(state);
        let xh = field.field(&point)?;
        let flow: Vec<f64> = ode[..n].iter().copied().chain(pdot).collect();
        worst = worst.max(norm(xh.iter().zip(&flow).map(|(a, b)| a - b)));
    }
    Ok(worst)
}
