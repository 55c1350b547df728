//! Sampled morphism conditions for relations between Liouville structures.
//!
//! A relation from `P` to `P′` is given by a parametrization of its graph in
//! the chart `(q′, q, f′, f)` of `P′ × P`. Three equivalent conditions are
//! evaluated on graph tangents: the pairing difference, the form difference
//! `θ′ ⊖ θ`, and the symplectic difference `ω′ ⊖ ω`.

use serde::Serialize;

use super::{functor_difference, sweep, LiouvilleStructure, PropertyCheck};
use crate::bundles::{FibredPoint, TangentPoint};
use crate::conventions::agree;
use crate::error::{Error, Result};
use crate::jets::SmoothMap;
use crate::linalg::rank;

/// Parametrized graph of a relation, in the chart `(q′, q, f′, f)`.
#[derive(Clone, Debug)]
pub struct RelationSampler {
    param_dim: usize,
    base_out: usize,
    base_in: usize,
    map: SmoothMap,
}

impl RelationSampler {
    /// `base_out = dim Q′` and `base_in = dim Q`; the map's output must have
    /// the layout `(q′, q, f′, f)`.
    pub fn new(param_dim: usize, base_out: usize, base_in: usize, map: SmoothMap) -> Self {
        Self {
            param_dim,
            base_out,
            base_in,
            map,
        }
    }

    /// The graph of a fibred map `φ: P -> P′`, both with fibre = base dimension.
    pub fn graph(phi: &SmoothMap, base_in: usize, base_out: usize) -> Result<Self> {
        if phi.in_dim() != 2 * base_in || phi.out_dim() != 2 * base_out {
            return Err(Error::InvalidArgument(format!(
                "graph map must send R^{} to R^{}",
                2 * base_in,
                2 * base_out
            )));
        }
        let phi = phi.clone();
        let map = SmoothMap::new(2 * base_in, 2 * (base_in + base_out), move |x| {
            let y = phi.eval_jet(x);
            let (q, f) = x.split_at(base_in);
            let (qp, fp) = y.split_at(base_out);
            [qp, q, fp, f].concat()
        });
        Ok(Self::new(2 * base_in, base_out, base_in, map))
    }

    pub fn identity(n: usize) -> Self {
        Self::graph(&SmoothMap::identity(2 * n), n, n).expect("square identity")
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn point(&self, t: &[f64]) -> Vec<f64> {
        self.map.eval(t)
    }

    /// Graph tangent vectors at the image of `t`, one per parameter direction.
    pub fn tangents(&self, t: &[f64]) -> Vec<Vec<f64>> {
        let j = self.map.jacobian(t);
        j.column_iter()
            .map(|c| c.iter().copied().collect())
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MorphismReport {
    pub pairing: PropertyCheck,
    pub form: PropertyCheck,
    pub symplectic: PropertyCheck,
    /// False when the three verdicts disagree, which the theory rules out
    /// for linear relations and so indicates a numerical or modelling problem.
    pub consistent: bool,
}

impl MorphismReport {
    pub fn passed(&self) -> bool {
        self.pairing.pass && self.form.pass && self.symplectic.pass
    }
}

/// Evaluates the morphism conditions of `ρ` from `l` to `l_prime` at sampled
/// graph points. Rejects when the graph does not have dimension `dim Q′ + dim Q`.
pub fn morphism_check(
    l_prime: &LiouvilleStructure,
    l: &LiouvilleStructure,
    rho: &RelationSampler,
    samples: usize,
    tol: f64,
) -> Result<MorphismReport> {
    let (np, n) = (l_prime.base_dim, l.base_dim);
    let (kp, k) = (l_prime.fibre_dim, l.fibre_dim);
    if rho.base_out != np || rho.base_in != n || rho.map.out_dim() != np + n + kp + k {
        return Err(Error::InvalidArgument(format!(
            "relation chart does not match structures over R^{np} and R^{n}"
        )));
    }
    let diff = functor_difference(l_prime, l)?;
    let omega = diff.omega();
    let pair_prime = l_prime.pairing_from_theta()?;
    let pair = l.pairing_from_theta()?;
    let expected = np + n;

    let mut s = crate::sampling::Sampler::new(0x3a7);
    for _ in 0..samples.max(1) {
        let t = s.vector(rho.param_dim);
        let r = rank(&rho.map.jacobian(&t));
        if r != expected {
            return Err(Error::RankDeficient {
                what: format!("relation graph at {t:?}"),
                rank: r,
                expected,
            });
        }
    }

    let split = |x: &[f64]| {
        let (qp, rest) = x.split_at(np);
        let (q, rest) = rest.split_at(n);
        let (fp, f) = rest.split_at(kp);
        (qp.to_vec(), q.to_vec(), fp.to_vec(), f.to_vec())
    };

    let pairing = sweep("pairing difference", tol, samples, 0x3a8, |s| {
        let t = s.vector(rho.param_dim);
        let x = rho.point(&t);
        let (qp, q, fp, f) = split(&x);
        for w in rho.tangents(&t) {
            let (dqp, dq, _, _) = split(&w);
            let a = pair_prime
                .eval(
                    &FibredPoint {
                        q: qp.clone(),
                        f: fp.clone(),
                    },
                    &TangentPoint {
                        q: qp.clone(),
                        v: dqp,
                    },
                )
                .ok()?;
            let b = pair
                .eval(
                    &FibredPoint {
                        q: q.clone(),
                        f: f.clone(),
                    },
                    &TangentPoint {
                        q: q.clone(),
                        v: dq,
                    },
                )
                .ok()?;
            if !agree(a, b, tol) {
                return Some(t);
            }
        }
        None
    });

    let form = sweep("form difference", tol, samples, 0x3a8, |s| {
        let t = s.vector(rho.param_dim);
        let x = rho.point(&t);
        rho.tangents(&t)
            .into_iter()
            .any(|w| !agree(diff.theta.eval(&x, &[w]).unwrap_or(f64::NAN), 0.0, tol))
            .then_some(t)
    });

    let symplectic = sweep("symplectic difference", tol, samples, 0x3a8, |s| {
        let t = s.vector(rho.param_dim);
        let x = rho.point(&t);
        let ws = rho.tangents(&t);
        for a in 0..ws.len() {
            for b in (a + 1)..ws.len() {
                let v = omega
                    .eval(&x, &[ws[a].clone(), ws[b].clone()])
                    .unwrap_or(f64::NAN);
                if !agree(v, 0.0, tol) {
                    return Some(t);
                }
            }
        }
        None
    });

    let consistent = pairing.pass == form.pass && form.pass == symplectic.pass;
    Ok(MorphismReport {
        pairing,
        form,
        symplectic,
        consistent,
    })
}
