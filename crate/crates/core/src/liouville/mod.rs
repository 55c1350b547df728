//! Liouville structures: a vector fibration `P -> Q` with a 1-form `θ` on
//! `P` that is vertical, fibre-linear and has nondegenerate `dθ`.
//!
//! The record itself is inert; [`LiouvilleStructure::verify`] tests the
//! defining properties at sampled points. The other presentations (pairing,
//! the isomorphism `α: P -> T*Q`, the symplectic form) are derived views in
//! [`pairing`], morphisms between structures are checked in [`morphism`],
//! and the constructions of new structures from old live in [`functors`].

pub mod functors;
pub mod morphism;
pub mod pairing;

use serde::Serialize;

use crate::bundles::{second_add, second_scale, FibredTangent};
use crate::conventions::{agree, CONDITION_LIMIT};
use crate::error::{Error, Result};
use crate::forms::{condition_at, liouville_form, Form};
use crate::sampling::Sampler;

pub use functors::{
    functor_difference, functor_hamilton, functor_phase, functor_scale, functor_sum,
    functor_tangent, tangent_chart_permutation,
};
pub use morphism::{morphism_check, MorphismReport, RelationSampler};
pub use pairing::{Alpha, StructurePairing};

/// A candidate Liouville structure. Constructors do not verify.
#[derive(Clone, Debug)]
pub struct LiouvilleStructure {
    pub base_dim: usize,
    pub fibre_dim: usize,
    pub theta: Form,
    pub label: String,
}

/// Outcome of one sampled property test.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PropertyCheck {
    pub property: String,
    pub pass: bool,
    /// The first failing input, flattened.
    pub witness: Option<Vec<f64>>,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub label: String,
    pub checks: Vec<PropertyCheck>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, property: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.property == property)
    }
}

/// Runs `trial` on `samples` draws; the first `Some(witness)` fails the check.
pub(crate) fn sweep<F>(
    property: &str,
    tolerance: f64,
    samples: usize,
    seed: u64,
    mut trial: F,
) -> PropertyCheck
where
    F: FnMut(&mut Sampler) -> Option<Vec<f64>>,
{
    let mut sampler = Sampler::new(seed);
    let witness = (0..samples).find_map(|_| trial(&mut sampler));
    PropertyCheck {
        property: property.to_string(),
        pass: witness.is_none(),
        witness,
        tolerance,
    }
}

impl LiouvilleStructure {
    pub fn new(
        base_dim: usize,
        fibre_dim: usize,
        theta: Form,
        label: impl Into<String>,
    ) -> Result<Self> {
        if base_dim == 0 {
            return Err(Error::InvalidArgument(
                "base dimension must be positive".into(),
            ));
        }
        if theta.degree() != 1 {
            return Err(Error::InvalidArgument(format!(
                "Liouville form must have degree 1, got {}",
                theta.degree()
            )));
        }
        if theta.dim() != base_dim + fibre_dim {
            return Err(Error::DimensionMismatch {
                context: "Liouville form ambient dimension",
                expected: base_dim + fibre_dim,
                got: theta.dim(),
            });
        }
        Ok(Self {
            base_dim,
            fibre_dim,
            theta,
            label: label.into(),
        })
    }

    /// `(T*Q, θ_Q)` with `dim Q = n`.
    pub fn canonical(n: usize) -> Self {
        Self {
            base_dim: n,
            fibre_dim: n,
            theta: liouville_form(n),
            label: format!("canonical T*R^{n}"),
        }
    }

    pub fn total_dim(&self) -> usize {
        self.base_dim + self.fibre_dim
    }

    /// The symplectic form `ω = dθ`.
    pub fn omega(&self) -> Form {
        self.theta.exterior_derivative()
    }

    /// `θ` on a tangent vector to `P`.
    pub fn theta_at(&self, w: &FibredTangent) -> Result<f64> {
        let (x, v) = w.split();
        self.theta.eval(&x, &[v])
    }

    fn random_tangent(&self, s: &mut Sampler) -> FibredTangent {
        let (n, k) = (self.base_dim, self.fibre_dim);
        FibredTangent::new(s.vector(n), s.vector(k), s.vector(n), s.vector(k))
    }

    pub fn verify(&self, samples: usize, tol: f64) -> VerificationReport {
        self.verify_seeded(samples, tol, 0x5eed)
    }

    /// Samples verticality, fibre-linearity and nondegeneracy of `dθ`.
    pub fn verify_seeded(&self, samples: usize, tol: f64, seed: u64) -> VerificationReport {
        let samples = samples.max(1);
        let (n, k) = (self.base_dim, self.fibre_dim);

        let vertical = sweep("vertical", tol, samples, seed, |s| {
            let w = FibredTangent::new(s.vector(n), s.vector(k), vec![0.0; n], s.vector(k));
            let value = self.theta_at(&w).unwrap_or(f64::NAN);
            (!agree(value, 0.0, tol)).then(|| flatten(&w))
        });

        let linear = sweep("linear", tol, samples, seed.wrapping_add(1), |s| {
            let w1 = self.random_tangent(s);
            let w2 = FibredTangent::new(w1.q.clone(), s.vector(k), w1.dq.clone(), s.vector(k));
            let c = s.range(-3.0, 3.0);
            let t1 = self.theta_at(&w1).ok()?;
            let t2 = self.theta_at(&w2).ok()?;
            let scaled = self.theta_at(&second_scale(c, &w1)).ok()?;
            let summed = self.theta_at(&second_add(&w1, &w2).ok()?).ok()?;
            let ok = agree(scaled, c * t1, tol) && agree(summed, t1 + t2, tol);
            (!ok).then(|| {
                let mut wit = flatten(&w1);
                wit.extend(flatten(&w2));
                wit.push(c);
                wit
            })
        });

        let omega = self.omega();
        let nondegenerate = if k != n {
            PropertyCheck {
                property: "nondegenerate".into(),
                pass: false,
                witness: Some(vec![n as f64, k as f64]),
                tolerance: CONDITION_LIMIT,
            }
        } else {
            sweep(
                "nondegenerate",
                CONDITION_LIMIT,
                samples,
                seed.wrapping_add(2),
                |s| {
                    let x = s.vector(n + k);
                    let cond = condition_at(&omega, &x).unwrap_or(f64::INFINITY);
                    (!(cond < CONDITION_LIMIT)).then_some(x)
                },
            )
        };

        VerificationReport {
            label: self.label.clone(),
            checks: vec![vertical, linear, nondegenerate],
        }
    }
}

fn flatten(w: &FibredTangent) -> Vec<f64> {
    [&w.q, &w.f, &w.dq, &w.df]
        .into_iter()
        .flatten()
        .copied()
        .collect()
}
