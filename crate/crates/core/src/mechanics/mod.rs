//! Generating functions and the Lagrangian sets and dynamics they produce.
//!
//! A [`GeneratedSet`] is presented three ways at once: a parametrization
//! (the sampler), a residual that vanishes exactly on the set, and the
//! tangent spaces spanned by the sampler's Jacobian columns.

mod dynamics;
mod generating;
mod proper;

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::SmoothMap;
use crate::liouville::LiouvilleStructure;
use crate::sampling::Sampler;
use crate::symplin::{is_lagrangian, Subspace, SymplecticSpace};

pub use dynamics::{
    consistency_check, hamiltonian_dynamics, lagrangian_dynamics, legendre_map, HamiltonianField,
    LagrangianDynamics,
};
pub use generating::{generate_constrained, generate_from_function, generate_two_point};
pub use proper::{diagonal_check, proper_function, ProperFunction};

type ResidualFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A subset of the total space of a Liouville structure, in its chart.
#[derive(Clone)]
pub struct GeneratedSet {
    pub structure: LiouvilleStructure,
    pub label: String,
    sampler: SmoothMap,
    residual: Arc<ResidualFn>,
}

impl fmt::Debug for GeneratedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GeneratedSet({} in {})",
            self.label, self.structure.label
        )
    }
}

/// One row of a sample dump.
#[derive(Clone, Debug, Serialize)]
pub struct SampleRecord {
    pub params: Vec<f64>,
    pub point: Vec<f64>,
    pub residual: f64,
}

impl GeneratedSet {
    pub fn new<R>(
        structure: LiouvilleStructure,
        label: impl Into<String>,
        sampler: SmoothMap,
        residual: R,
    ) -> Self
    where
        R: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            structure,
            label: label.into(),
            sampler,
            residual: Arc::new(residual),
        }
    }

    pub fn param_dim(&self) -> usize {
        self.sampler.in_dim()
    }

    pub fn sampler(&self) -> &SmoothMap {
        &self.sampler
    }

    pub fn sample(&self, params: &[f64]) -> Vec<f64> {
        self.sampler.eval(params)
    }

    /// Nonnegative; zero exactly on the set. NaN inputs give `+∞`.
    pub fn residual(&self, point: &[f64]) -> f64 {
        if point.len() != self.structure.total_dim() {
            return f64::INFINITY;
        }
        let r = (self.residual)(point);
        if r.is_nan() {
            f64::INFINITY
        } else {
            r
        }
    }

    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        self.residual(point) < tol
    }

    /// Tangent space at the sampled point `sample(params)`.
    pub fn tangent_basis(&self, params: &[f64]) -> Subspace {
        Subspace::from_matrix(&self.sampler.jacobian(params))
    }

    /// Whether the tangent space at `sample(params)` is Lagrangian for `dθ`.
    pub fn is_lagrangian_at(&self, params: &[f64]) -> Result<bool> {
        let x = self.sample(params);
        let omega = SymplecticSpace::new(self.structure.omega().matrix_at(&x)?)?;
        is_lagrangian(&self.tangent_basis(params), &omega)
    }

    pub fn random_params(&self, sampler: &mut Sampler) -> Vec<f64> {
        sampler.vector(self.param_dim())
    }

    pub fn dump(&self, params: &[Vec<f64>]) -> Vec<SampleRecord> {
        params
            .iter()
            .map(|t| {
                let point = self.sample(t);
                let residual = self.residual(&point);
                SampleRecord {
                    params: t.clone(),
                    point,
                    residual,
                }
            })
            .collect()
    }
}

/// Writes sample records as CSV: `t1..tm, x1..xd, residual`.
pub fn write_samples_csv<W: Write>(records: &[SampleRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("writing samples: {e}"));
    if let Some(first) = records.first() {
        let header: Vec<String> = (1..=first.params.len())
            .map(|i| format!("t{i}"))
            .chain((1..=first.point.len()).map(|i| format!("x{i}")))
            .chain(std::iter::once("residual".to_string()))
            .collect();
        w.write_record(&header).map_err(io)?;
    }
    for r in records {
        let row: Vec<String> = r
            .params
            .iter()
            .chain(&r.point)
            .chain(std::iter::once(&r.residual))
            .map(|v| v.to_string())
            .collect();
        w.write_record(&row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("writing samples: {e}")))?;
    Ok(())
}

fn norm(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(|x| x * x).sum::<f64>().sqrt()
}
