//! Constructions of Liouville structures from Liouville structures.

use super::morphism::RelationSampler;
use super::LiouvilleStructure;
use crate::conventions::{CONDITION_LIMIT, IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::forms::{condition_at, d_t, i_t, Form};
use crate::jets::{check_dim, MultiJet, SmoothMap};
use crate::linalg::{condition_number, solve_generic};
use crate::sampling::Sampler;

const CHECK_SAMPLES: usize = 20;

/// `(P, kθ)`.
pub fn functor_scale(l: &LiouvilleStructure, k: f64) -> Result<LiouvilleStructure> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale factor must be finite and nonzero, got {k}"
        )));
    }
    Ok(LiouvilleStructure {
        theta: l.theta.scale(k),
        label: format!("{k}·({})", l.label),
        ..l.clone()
    })
}

/// `P2 × P1 -> Q2 × Q1` with `pr2*θ2 + pr1*θ1`, coordinates `(q2, q1, f2, f1)`.
pub fn functor_sum(l2: &LiouvilleStructure, l1: &LiouvilleStructure) -> Result<LiouvilleStructure> {
    let (n2, n1, k2, k1) = (l2.base_dim, l1.base_dim, l2.fibre_dim, l1.fibre_dim);
    let total = n2 + n1 + k2 + k1;
    let f2 = n2 + n1;
    let f1 = f2 + k2;
    let pr2: Vec<usize> = (0..n2).chain(f2..f2 + k2).collect();
    let pr1: Vec<usize> = (n2..n2 + n1).chain(f1..f1 + k1).collect();
    let theta2 = l2.theta.pullback(&SmoothMap::select(total, &pr2))?;
    let theta1 = l1.theta.pullback(&SmoothMap::select(total, &pr1))?;
    LiouvilleStructure::new(
        n2 + n1,
        k2 + k1,
        theta2.add(&theta1)?,
        format!("({}) ⊕ ({})", l2.label, l1.label),
    )
}

/// `P2 × P1` with `pr2*θ2 − pr1*θ1`.
pub fn functor_difference(
    l2: &LiouvilleStructure,
    l1: &LiouvilleStructure,
) -> Result<LiouvilleStructure> {
    let mut out = functor_sum(l2, &functor_scale(l1, -1.0)?)?;
    out.label = format!("({}) ⊖ ({})", l2.label, l1.label);
    Ok(out)
}

/// The coordinate change from the tangent-structure chart `(q, q̇, f, ḟ)` to
/// the tangent-bundle chart `(q, f, q̇, ḟ)` of `TP`.
pub fn tangent_chart_permutation(n: usize, k: usize) -> SmoothMap {
    let m = 2 * (n + k);
    // TP slot ← reordered slot
    let indices: Vec<usize> = (0..n)
        .chain(2 * n..2 * n + k)
        .chain(n..2 * n)
        .chain(2 * n + k..m)
        .collect();
    SmoothMap::select(m, &indices)
}

/// `(TP -> TQ, d_Tθ)` in the chart `(q, q̇, f, ḟ)`.
pub fn functor_tangent(l: &LiouvilleStructure) -> Result<LiouvilleStructure> {
    let (n, k) = (l.base_dim, l.fibre_dim);
    let theta = d_t(&l.theta).pullback(&tangent_chart_permutation(n, k))?;
    LiouvilleStructure::new(2 * n, 2 * k, theta, format!("T({})", l.label))
}

/// `(TP -> P, i_Tω)` for a symplectic form `ω` on `P = R^dim`, in the chart
/// `(x, ẋ)`. Rejects when `ω` is not closed or is degenerate at a sample.
pub fn functor_hamilton(dim: usize, omega: &Form) -> Result<LiouvilleStructure> {
    if omega.degree() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a 2-form, got degree {}",
            omega.degree()
        )));
    }
    check_dim("Hamilton functor form", dim, omega.dim())?;
    let domega = omega.exterior_derivative();
    let mut s = Sampler::new(0x4a11);
    for _ in 0..CHECK_SAMPLES {
        let x = s.vector(dim);
        let condition = condition_at(omega, &x)?;
        if !(condition < CONDITION_LIMIT) {
            return Err(Error::Singular {
                what: "symplectic form".into(),
                witness: x,
                condition,
            });
        }
        let worst = domega
            .coefficients(&x)
            .iter()
            .fold(0.0f64, |a, c| a.max(c.abs()));
        if worst > IDENTITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "form is not closed: |dω| = {worst:e} at {x:?}"
            )));
        }
    }
    LiouvilleStructure::new(dim, dim, i_t(omega), "Hamilton(ω)")
}

/// The phase functor on objects: the canonical structure on `T*R^n`.
pub fn functor_phase(n: usize) -> LiouvilleStructure {
    LiouvilleStructure::canonical(n)
}

impl LiouvilleStructure {
    /// The phase functor on a diffeomorphism `χ` of `R^n`: the graph of
    /// `(q, p) ↦ (χ(q), p·Dχ(q)⁻¹)` as a relation from `T*R^n` to itself.
    /// Rejects when `Dχ` is singular at the origin or a sampled point.
    pub fn cotangent_lift(chi: &SmoothMap) -> Result<RelationSampler> {
        let n = chi.in_dim();
        check_dim("cotangent lift (χ must be square)", n, chi.out_dim())?;
        let mut s = Sampler::new(0xc41);
        for q in std::iter::once(vec![0.0; n]).chain((0..CHECK_SAMPLES).map(|_| s.vector(n))) {
            let condition = condition_number(&chi.jacobian(&q));
            if !(condition < CONDITION_LIMIT) {
                return Err(Error::Singular {
                    what: "Dχ".into(),
                    witness: q,
                    condition,
                });
            }
        }
        let chi = chi.clone();
        let map = SmoothMap::new(2 * n, 4 * n, move |x| {
            let (q, p) = x.split_at(n);
            let (image, jac) = chi.jacobian_jet(q);
            // f′ solves Dχᵀ f′ = p
            let jt: Vec<Vec<MultiJet>> = (0..n)
                .map(|i| (0..n).map(|j| jac[j][i]).collect())
                .collect();
            let f_prime =
                solve_generic(&jt, p).unwrap_or_else(|| vec![MultiJet::constant(f64::NAN); n]);
            let mut out = image;
            out.extend_from_slice(q);
            out.extend(f_prime);
            out.extend_from_slice(p);
            out
        });
        Ok(RelationSampler::new(2 * n, n, n, map))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::{kappa_flip, TTPoint, TTStarPoint};
    use crate::forms::{canonical_symplectic, liouville_form, tangent_pairing};
    use crate::jets::Scalar;
    use crate::liouville::morphism_check;

    #[test]
    fn scale_examples() {
        let c = LiouvilleStructure::canonical(1);
        let same = functor_scale(&c, 1.0).unwrap();
        assert_eq!(
            same.theta.coefficients(&[0.3, 0.9]),
            c.theta.coefficients(&[0.3, 0.9])
        );
        assert!(functor_scale(&c, 0.0).is_err());
        assert!(functor_scale(&c, -2.0).unwrap().verify(10, 1e-10).passed());
    }

    #[test]
    fn sum_and_difference() {
        let s = functor_sum(
            &LiouvilleStructure::canonical(1),
            &LiouvilleStructure::canonical(2),
        )
        .unwrap();
        assert_eq!((s.base_dim, s.fibre_dim), (3, 3));
        assert!(s.verify(20, 1e-10).passed());

        let d = functor_difference(
            &LiouvilleStructure::canonical(1),
            &LiouvilleStructure::canonical(1),
        )
        .unwrap();
        // (q2, q1, p2, p1) ↦ p2 dq2 − p1 dq1
        assert_eq!(
            d.theta.coefficients(&[0.1, 0.2, 3.0, 5.0]),
            vec![3.0, -5.0, 0.0, 0.0]
        );
        assert!(d.verify(20, 1e-10).passed());
    }

    #[test]
    fn tangent_functor_on_canonical() {
        let t = functor_tangent(&LiouvilleStructure::canonical(1)).unwrap();
        // chart (q, q̇, p, ṗ): ṗ dq + p dq̇
        let (q, qd, p, pd) = (0.4, -0.3, 1.7, 2.2);
        assert_eq!(t.theta.coefficients(&[q, qd, p, pd]), vec![pd, p, 0.0, 0.0]);
        assert!(t.verify(20, 1e-10).passed());
        let alpha = t.alpha().unwrap();
        let image = alpha
            .apply(&crate::bundles::FibredPoint {
                q: vec![1.0, 3.0],
                f: vec![2.0, 4.0],
            })
            .unwrap();
        assert_eq!(image.q, vec![1.0, 3.0]);
        assert_eq!(image.p, vec![4.0, 2.0]);
    }

    #[test]
    fn tangent_functor_duality_and_pullback() {
        let n = 2;
        let t = functor_tangent(&LiouvilleStructure::canonical(n)).unwrap();
        let alpha = t.alpha().unwrap();
        let pulled = liouville_form(2 * n).pullback(&alpha.as_map()).unwrap();
        let mut s = Sampler::new(17);
        for _ in 0..50 {
            let x = s.vector(4 * n);
            let w = s.vector(4 * n);
            let a = pulled.eval(&x, std::slice::from_ref(&w)).unwrap();
            let b = t.theta.eval(&x, &[w]).unwrap();
            assert!((a - b).abs() < 1e-10);

            // ṗ = (q, p, q̇, ṗ) ∈ TT*Q and δq̇ ∈ TTQ over (q, q̇)
            let (q, p, qd, pd) = (s.vector(n), s.vector(n), s.vector(n), s.vector(n));
            let w = TTStarPoint::new(q.clone(), p.clone(), qd.clone(), pd.clone());
            let v = TTPoint::new(q.clone(), qd.clone(), s.vector(n), s.vector(n));
            let covector = alpha
                .apply(&crate::bundles::FibredPoint {
                    q: [q.clone(), qd.clone()].concat(),
                    f: [p, pd].concat(),
                })
                .unwrap();
            let velocity: Vec<f64> = [v.dq.clone(), v.dv.clone()].concat();
            let lhs: f64 = covector.p.iter().zip(&velocity).map(|(a, b)| a * b).sum();
            let rhs = tangent_pairing(&w, &kappa_flip(&v)).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn hamilton_functor_on_canonical() {
        let h = functor_hamilton(2, &canonical_symplectic(1)).unwrap();
        let (q, p, qd, pd) = (0.2, -0.5, 1.5, 0.7);
        assert_eq!(
            h.theta.coefficients(&[q, p, qd, pd]),
            vec![pd, -qd, 0.0, 0.0]
        );
        assert!(h.verify(20, 1e-10).passed());
        let beta = h.alpha().unwrap();
        let image = beta
            .apply(&crate::bundles::FibredPoint {
                q: vec![q, p],
                f: vec![qd, pd],
            })
            .unwrap();
        assert_eq!(image.p, vec![pd, -qd]);
        let pairing = h.pairing_from_theta().unwrap();
        let point = crate::bundles::FibredPoint {
            q: vec![q, p],
            f: vec![1.0, 0.0],
        };
        let v = crate::bundles::TangentPoint {
            q: vec![q, p],
            v: vec![0.0, 1.0],
        };
        assert_eq!(pairing.eval(&point, &v).unwrap(), -1.0);

        let pulled = liouville_form(2).pullback(&beta.as_map()).unwrap();
        let mut s = Sampler::new(5);
        for _ in 0..50 {
            let x = s.vector(4);
            let w = s.vector(4);
            assert!(
                (pulled.eval(&x, std::slice::from_ref(&w)).unwrap() - h.theta.eval(&x, &[w]).unwrap()).abs()
                    < 1e-10
            );
        }
    }

    #[test]
    fn hamilton_functor_rejects_bad_forms() {
        let degenerate = Form::coordinate(2, 0)
            .wedge(&Form::coordinate(2, 1))
            .unwrap()
            .scale(0.0);
        assert!(matches!(
            functor_hamilton(2, &degenerate),
            Err(Error::Singular { .. })
        ));
        // (1 + x3²) dx1∧dx2 + dx3∧dx4 is nondegenerate but not closed
        let not_closed = Form::new(4, 2, |x| {
            let z = MultiJet::zero();
            let one = MultiJet::constant(1.0);
            vec![one + x[2] * x[2], z, z, z, z, one]
        });
        assert!(functor_hamilton(4, &not_closed).is_err());
    }

    #[test]
    fn hamilton_and_tangent_forms_differ_by_exact_term() {
        let l = LiouvilleStructure::canonical(1);
        let tangent = d_t(&l.theta);
        let hamilton = i_t(&l.omega());
        let exact = i_t(&l.theta).exterior_derivative();
        let mut s = Sampler::new(4);
        for _ in 0..20 {
            let x = s.vector(4);
            let lhs: Vec<f64> = tangent
                .coefficients(&x)
                .iter()
                .zip(hamilton.coefficients(&x))
                .map(|(a, b)| a - b)
                .collect();
            for (a, b) in lhs.iter().zip(exact.coefficients(&x)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_functor_lifts() {
        let n = 1;
        let c = functor_phase(n);
        let double =
            LiouvilleStructure::cotangent_lift(&SmoothMap::new(1, 1, |q| vec![q[0].scale(2.0)]))
                .unwrap();
        let point = double.point(&[1.5, 3.0]);
        assert_eq!(point, vec![3.0, 1.5, 1.5, 3.0]);
        assert!(morphism_check(&c, &c, &double, 30, 1e-10).unwrap().passed());

        let cubic = SmoothMap::new(1, 1, |q| vec![q[0] * q[0] * q[0] + q[0]]);
        let lift = LiouvilleStructure::cotangent_lift(&cubic).unwrap();
        assert!(morphism_check(&c, &c, &lift, 30, 1e-10).unwrap().passed());

        let square = SmoothMap::new(1, 1, |q| vec![q[0] * q[0]]);
        assert!(matches!(
            LiouvilleStructure::cotangent_lift(&square),
            Err(Error::Singular { .. })
        ));

        let id = LiouvilleStructure::cotangent_lift(&SmoothMap::identity(2)).unwrap();
        assert_eq!(
            id.point(&[1.0, 2.0, 3.0, 4.0]),
            vec![1.0, 2.0, 1.0, 2.0, 3.0, 4.0, 3.0, 4.0]
        );
    }
}
