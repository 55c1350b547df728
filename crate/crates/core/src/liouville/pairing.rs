//! The pairing and isomorphism presentations of a Liouville structure.

use nalgebra::DMatrix;

use super::LiouvilleStructure;
use crate::bundles::{CotangentPoint, FibredPoint, TangentPoint};
use crate::conventions::{CONDITION_LIMIT, IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::forms::{condition_at, Form};
use crate::jets::{check_dim, constants, MultiJet, Scalar, SmoothMap};
use crate::linalg::{condition_number, solve_generic};
use crate::sampling::Sampler;

const WELL_DEFINED_SAMPLES: usize = 20;

#[derive(Clone, Debug)]
enum Source {
    /// `⟨f, v⟩ = θ(w)` for any `w` over `f` projecting to `v`.
    Theta,
    /// `⟨f, v⟩ = ω(vertical lift of f at the zero section, zero-section lift of v)`.
    Omega(Form),
}

/// The fibre pairing `P ×_Q TQ -> R` of a Liouville structure.
#[derive(Clone, Debug)]
pub struct StructurePairing {
    structure: LiouvilleStructure,
    source: Source,
}

impl StructurePairing {
    pub fn eval(&self, point: &FibredPoint, v: &TangentPoint) -> Result<f64> {
        self.eval_with_lift(point, v, &vec![0.0; self.structure.fibre_dim])
    }

    /// Evaluates with an explicit fibre component `δf` of the lift; only the
    /// θ-presentation reads it, and the result must not depend on it.
    pub fn eval_with_lift(&self, point: &FibredPoint, v: &TangentPoint, df: &[f64]) -> Result<f64> {
        let l = &self.structure;
        check_dim("pairing base point", l.base_dim, point.q.len())?;
        check_dim("pairing fibre point", l.fibre_dim, point.f.len())?;
        check_dim("pairing velocity", l.base_dim, v.v.len())?;
        check_dim("pairing lift", l.fibre_dim, df.len())?;
        if point.q != v.q {
            return Err(Error::ProjectionMismatch(format!(
                "fibre point over {:?}, velocity over {:?}",
                point.q, v.q
            )));
        }
        let (n, k) = (l.base_dim, l.fibre_dim);
        match &self.source {
            Source::Theta => {
                let x: Vec<f64> = point.q.iter().chain(&point.f).copied().collect();
                let w: Vec<f64> = v.v.iter().chain(df).copied().collect();
                l.theta.eval(&x, &[w])
            }
            Source::Omega(omega) => {
                let x: Vec<f64> = point
                    .q
                    .iter()
                    .copied()
                    .chain(std::iter::repeat_n(0.0, k))
                    .collect();
                let vertical: Vec<f64> = std::iter::repeat_n(0.0, n)
                    .chain(point.f.iter().copied())
                    .collect();
                let horizontal: Vec<f64> =
                    v.v.iter()
                        .copied()
                        .chain(std::iter::repeat_n(0.0, k))
                        .collect();
                omega.eval(&x, &[vertical, horizontal])
            }
        }
    }
}

impl LiouvilleStructure {
    /// The pairing read off `θ`. Rejects if the value depends on the chosen
    /// lift at sampled inputs, which happens exactly when `θ` is not vertical.
    pub fn pairing_from_theta(&self) -> Result<StructurePairing> {
        let pairing = StructurePairing {
            structure: self.clone(),
            source: Source::Theta,
        };
        let (n, k) = (self.base_dim, self.fibre_dim);
        let mut s = Sampler::new(0x1ead);
        let mut worst: f64 = 0.0;
        for _ in 0..WELL_DEFINED_SAMPLES {
            let point = FibredPoint {
                q: s.vector(n),
                f: s.vector(k),
            };
            let v = TangentPoint {
                q: point.q.clone(),
                v: s.vector(n),
            };
            let a = pairing.eval_with_lift(&point, &v, &s.vector(k))?;
            let b = pairing.eval_with_lift(&point, &v, &s.vector(k))?;
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        }
        if worst > IDENTITY_TOL {
            return Err(Error::IllDefined {
                what: format!("pairing of {}", self.label),
                deviation: worst,
                tolerance: IDENTITY_TOL,
            });
        }
        Ok(pairing)
    }

    /// The pairing read off `ω = dθ` at the zero section. Rejects if `ω` is
    /// degenerate at a sampled point.
    pub fn pairing_from_omega(&self) -> Result<StructurePairing> {
        let omega = self.omega();
        let mut s = Sampler::new(0x0e6a);
        for _ in 0..WELL_DEFINED_SAMPLES {
            let x = s.vector(self.total_dim());
            let condition = condition_at(&omega, &x)?;
            if !(condition < CONDITION_LIMIT) {
                return Err(Error::Singular {
                    what: "dθ".into(),
                    witness: x,
                    condition,
                });
            }
        }
        Ok(StructurePairing {
            structure: self.clone(),
            source: Source::Omega(omega),
        })
    }

    /// The isomorphism `α: P -> T*Q` determined by the pairing.
    pub fn alpha(&self) -> Result<Alpha> {
        if self.fibre_dim != self.base_dim {
            return Err(Error::DimensionMismatch {
                context: "alpha (fibre and base dimensions)",
                expected: self.base_dim,
                got: self.fibre_dim,
            });
        }
        Ok(Alpha {
            structure: self.clone(),
        })
    }
}

/// `α: P -> T*Q` with `⟨α(f), v⟩_Q = ⟨f, v⟩`. Per base point it is the
/// transpose of the pairing matrix `M_ij = ⟨e_i, e_j⟩`.
#[derive(Clone, Debug)]
pub struct Alpha {
    structure: LiouvilleStructure,
}

impl Alpha {
    /// `M_ij = ⟨e_i, e_j⟩`: `θ` at `(q, e_i)` on the base direction `e_j`.
    fn matrix_jet(l: &LiouvilleStructure, q: &[MultiJet]) -> Vec<Vec<MultiJet>> {
        let n = l.base_dim;
        (0..n)
            .map(|i| {
                let mut x = q.to_vec();
                x.extend((0..n).map(|j| MultiJet::constant(if i == j { 1.0 } else { 0.0 })));
                l.theta.coefficients_jet(&x)[..n].to_vec()
            })
            .collect()
    }

    pub fn matrix(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.structure.base_dim;
        check_dim("alpha base point", n, q.len())?;
        let m = Self::matrix_jet(&self.structure, &constants(q));
        let m = DMatrix::from_fn(n, n, |i, j| m[i][j].value());
        let condition = condition_number(&m);
        if !(condition < CONDITION_LIMIT) {
            return Err(Error::Singular {
                what: "fibre pairing".into(),
                witness: q.to_vec(),
                condition,
            });
        }
        Ok(m)
    }

    pub fn apply(&self, point: &FibredPoint) -> Result<CotangentPoint> {
        check_dim("alpha fibre point", self.structure.fibre_dim, point.f.len())?;
        let m = self.matrix(&point.q)?;
        let p = m.transpose() * nalgebra::DVector::from_column_slice(&point.f);
        Ok(CotangentPoint {
            q: point.q.clone(),
            p: p.iter().copied().collect(),
        })
    }

    pub fn inverse(&self, covector: &CotangentPoint) -> Result<FibredPoint> {
        check_dim(
            "alpha inverse covector",
            self.structure.base_dim,
            covector.p.len(),
        )?;
        let m = self.matrix(&covector.q)?;
        let f = m
            .transpose()
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&covector.p))
            .ok_or_else(|| Error::Singular {
                what: "fibre pairing".into(),
                witness: covector.q.clone(),
                condition: f64::INFINITY,
            })?;
        Ok(FibredPoint {
            q: covector.q.clone(),
            f: f.iter().copied().collect(),
        })
    }

    /// `α` as a smooth map `R^{2n} -> R^{2n}`, `(q, f) ↦ (q, Mᵀ f)`.
    pub fn as_map(&self) -> SmoothMap {
        let l = self.structure.clone();
        let n = l.base_dim;
        SmoothMap::new(2 * n, 2 * n, move |x| {
            let (q, f) = x.split_at(n);
            let m = Self::matrix_jet(&l, q);
            let mut out = q.to_vec();
            out.extend(
                (0..n).map(|j| (0..n).fold(MultiJet::zero(), |acc, i| acc + f[i] * m[i][j])),
            );
            out
        })
    }

    /// `α⁻¹` as a smooth map `(q, p) ↦ (q, M⁻ᵀ p)`. Produces NaN where the
    /// pairing is singular.
    pub fn inverse_map(&self) -> SmoothMap {
        let l = self.structure.clone();
        let n = l.base_dim;
        SmoothMap::new(2 * n, 2 * n, move |x| {
            let (q, p) = x.split_at(n);
            let m = Self::matrix_jet(&l, q);
            let mt: Vec<Vec<MultiJet>> =
                (0..n).map(|j| (0..n).map(|i| m[i][j]).collect()).collect();
            let mut out = q.to_vec();
            match solve_generic(&mt, p) {
                Some(f) => out.extend(f),
                None => out.extend(std::iter::repeat_n(MultiJet::constant(f64::NAN), n)),
            }
            out
        })
    }
}
