//! Coordinate records for the iterated bundles over a chart `Q = R^n`.
//!
//! `TP` for a vector fibration `π: P -> Q` carries two vector structures:
//! the tangent one over `P` (`τ_P`) and the one over `TQ` induced by `Tπ`
//! (`+̈`, `•̈`). The flip `κ_Q` on `TTQ` exchanges the two parameters of a
//! two-parameter family. See [`crate::conventions`] for slot orders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{check_dim, constants, directional, JetScalar, JetVector, SmoothMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    pub dim_base: usize,
    pub dim_fibre: usize,
}

impl Chart {
    pub fn new(dim_base: usize, dim_fibre: usize) -> Result<Self> {
        if dim_base == 0 {
            return Err(Error::InvalidArgument(
                "base dimension must be positive".into(),
            ));
        }
        Ok(Self {
            dim_base,
            dim_fibre,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.dim_base + self.dim_fibre
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentPoint {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotangentPoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

/// A point of `TTQ` in slot order (value, ∂t, ∂s, ∂s∂t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTPoint {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub dq: Vec<f64>,
    pub dv: Vec<f64>,
}

/// A point of `TT*Q`: the tangent vector `(q̇, ṗ)` at `(q, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTStarPoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub qdot: Vec<f64>,
    pub pdot: Vec<f64>,
}

/// The covector `a·dq + b·dv` at `(q, v) ∈ TQ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotangentOfTangentPoint {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// A point of a trivial vector fibration `P = R^n × R^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FibredPoint {
    pub q: Vec<f64>,
    pub f: Vec<f64>,
}

/// A tangent vector `(δq, δf)` to `P` at `(q, f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FibredTangent {
    pub q: Vec<f64>,
    pub f: Vec<f64>,
    pub dq: Vec<f64>,
    pub df: Vec<f64>,
}

/// An element of the core of `TP`: a fibre vector attached to a base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreElement {
    pub base: Vec<f64>,
    pub value: Vec<f64>,
}

impl TTPoint {
    pub fn new(q: Vec<f64>, v: Vec<f64>, dq: Vec<f64>, dv: Vec<f64>) -> Self {
        Self { q, v, dq, dv }
    }

    /// `τ_TQ`: slots (value, ∂t).
    pub fn tau(&self) -> TangentPoint {
        TangentPoint {
            q: self.q.clone(),
            v: self.v.clone(),
        }
    }

    /// `Tτ_Q`: slots (value, ∂s).
    pub fn t_tau(&self) -> TangentPoint {
        TangentPoint {
            q: self.q.clone(),
            v: self.dq.clone(),
        }
    }

    fn as_jets(&self) -> JetVector {
        JetVector::probe(&self.q, &self.dq, &self.v, &self.dv)
    }

    fn from_jets(jets: &[JetScalar]) -> Self {
        Self {
            q: jets.iter().map(|j| j.val).collect(),
            v: jets.iter().map(|j| j.dt).collect(),
            dq: jets.iter().map(|j| j.ds).collect(),
            dv: jets.iter().map(|j| j.dst).collect(),
        }
    }
}

impl TTStarPoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>, qdot: Vec<f64>, pdot: Vec<f64>) -> Self {
        Self { q, p, qdot, pdot }
    }

    /// `τ_{T*Q}`.
    pub fn tau(&self) -> CotangentPoint {
        CotangentPoint {
            q: self.q.clone(),
            p: self.p.clone(),
        }
    }

    /// `Tπ_Q`.
    pub fn t_pi(&self) -> TangentPoint {
        TangentPoint {
            q: self.q.clone(),
            v: self.qdot.clone(),
        }
    }

    /// Flattened `(q, p, q̇, ṗ)`.
    pub fn to_vec(&self) -> Vec<f64> {
        [&self.q[..], &self.p, &self.qdot, &self.pdot].concat()
    }

    pub fn from_slice(n: usize, x: &[f64]) -> Self {
        Self::new(
            x[..n].to_vec(),
            x[n..2 * n].to_vec(),
            x[2 * n..3 * n].to_vec(),
            x[3 * n..4 * n].to_vec(),
        )
    }
}

impl FibredTangent {
    pub fn new(q: Vec<f64>, f: Vec<f64>, dq: Vec<f64>, df: Vec<f64>) -> Self {
        Self { q, f, dq, df }
    }

    /// `τ_P`: the foot point.
    pub fn tau(&self) -> FibredPoint {
        FibredPoint {
            q: self.q.clone(),
            f: self.f.clone(),
        }
    }

    /// `Tπ`: base point and base velocity.
    pub fn t_pi(&self) -> TangentPoint {
        TangentPoint {
            q: self.q.clone(),
            v: self.dq.clone(),
        }
    }

    /// Point `(q, f)` of `P` followed by the vector `(δq, δf)`.
    pub fn split(&self) -> (Vec<f64>, Vec<f64>) {
        (
            [&self.q[..], &self.f].concat(),
            [&self.dq[..], &self.df].concat(),
        )
    }

    pub fn from_parts(n: usize, point: &[f64], vector: &[f64]) -> Self {
        Self::new(
            point[..n].to_vec(),
            point[n..].to_vec(),
            vector[..n].to_vec(),
            vector[n..].to_vec(),
        )
    }
}

/// Swaps the two first-order slots: `(q, v, dq, dv) ↦ (q, dq, v, dv)`.
pub fn kappa_flip(w: &TTPoint) -> TTPoint {
    TTPoint::new(w.q.clone(), w.dq.clone(), w.v.clone(), w.dv.clone())
}

/// Tangent vector at `p0` of the fibre curve `s ↦ p0 + s·p`.
pub fn vertical_lift(p0: &FibredPoint, p: &[f64]) -> Result<FibredTangent> {
    check_dim("vertical_lift", p0.f.len(), p.len())?;
    Ok(FibredTangent::new(
        p0.q.clone(),
        p0.f.clone(),
        vec![0.0; p0.q.len()],
        p.to_vec(),
    ))
}

/// True when `Tπ(w)` has zero velocity.
pub fn is_vertical(w: &FibredTangent) -> bool {
    w.dq.iter().all(|x| *x == 0.0)
}

/// Extracts the core element of `w`: requires `w` vertical and its foot on
/// the zero section. The core projection is the base point.
pub fn core_extract(w: &FibredTangent) -> Result<CoreElement> {
    if !is_vertical(w) {
        return Err(Error::NotCore(format!(
            "Tπ(w) has nonzero velocity {:?}",
            w.dq
        )));
    }
    if w.f.iter().any(|x| *x != 0.0) {
        return Err(Error::NotCore(format!(
            "τ_P(w) = {:?} is off the zero section",
            w.f
        )));
    }
    Ok(CoreElement {
        base: w.q.clone(),
        value: w.df.clone(),
    })
}

/// Sum for the vector structure of `TP` over `TQ`.
pub fn second_add(w1: &FibredTangent, w2: &FibredTangent) -> Result<FibredTangent> {
    check_dim("second_add", w1.f.len(), w2.f.len())?;
    if w1.q != w2.q || w1.dq != w2.dq {
        return Err(Error::ProjectionMismatch(format!(
            "Tπ(w1) = ({:?}, {:?}) differs from Tπ(w2) = ({:?}, {:?})",
            w1.q, w1.dq, w2.q, w2.dq
        )));
    }
    Ok(FibredTangent::new(
        w1.q.clone(),
        add(&w1.f, &w2.f),
        w1.dq.clone(),
        add(&w1.df, &w2.df),
    ))
}

/// Scalar multiplication for the vector structure of `TP` over `TQ`.
pub fn second_scale(k: f64, w: &FibredTangent) -> FibredTangent {
    FibredTangent::new(w.q.clone(), scale(k, &w.f), w.dq.clone(), scale(k, &w.df))
}

/// `Tφ` on a tangent vector.
pub fn tangent_lift(phi: &SmoothMap, w: &TangentPoint) -> Result<TangentPoint> {
    check_dim("tangent_lift", phi.in_dim(), w.q.len())?;
    check_dim("tangent_lift", w.q.len(), w.v.len())?;
    let (value, derivative) = directional(&constants(&w.q), &w.v, |x| phi.eval_jet(x));
    Ok(TangentPoint {
        q: value.iter().map(|j| j.value()).collect(),
        v: derivative.iter().map(|j| j.value()).collect(),
    })
}

/// `TTφ` on a second tangent vector, pushing all four slots through jets.
pub fn second_tangent_lift(phi: &SmoothMap, w: &TTPoint) -> Result<TTPoint> {
    check_dim("second_tangent_lift", phi.in_dim(), w.q.len())?;
    let jets = crate::jets::jet_eval_map(phi, &w.as_jets())?;
    Ok(TTPoint::from_jets(&jets))
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn scale(k: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| k * x).collect()
}
