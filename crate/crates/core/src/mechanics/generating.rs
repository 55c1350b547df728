use nalgebra::{DMatrix, DVector};

use super::{norm, GeneratedSet};
use crate::bundles::FibredPoint;
use crate::error::{Error, Result};
use crate::jets::{check_dim, constants, MultiJet, Scalar, ScalarField, SmoothMap};
use crate::linalg::{rank, solve_generic};
use crate::liouville::{functor_difference, LiouvilleStructure};
use crate::sampling::Sampler;

const RANK_SAMPLES: usize = 20;
const NEWTON_MAX: usize = 60;
/// Iterations after the value has converged, so derivative slots settle too.
const NEWTON_POLISH: usize = 3;

/// `S = {f : α(f) = dU(π(f))}`, parametrized by `q ↦ α⁻¹(q, ∇U(q))`.
pub fn generate_from_function(l: &LiouvilleStructure, u: &ScalarField) -> Result<GeneratedSet> {
    let n = l.base_dim;
    check_dim("generating function domain", n, u.dim())?;
    let alpha = l.alpha()?;
    let inverse = alpha.inverse_map();
    let field = u.clone();
    let sampler = SmoothMap::new(n, 2 * n, move |q| {
        let mut x = q.to_vec();
        x.extend(field.gradient_jet(q));
        inverse.eval_jet(&x)
    });
    let field = u.clone();
    let residual = move |x: &[f64]| {
        let (q, f) = x.split_at(n);
        let Ok(p) = alpha.apply(&FibredPoint {
            q: q.to_vec(),
            f: f.to_vec(),
        }) else {
            return f64::INFINITY;
        };
        let grad = field.gradient_jet(&constants(q));
        norm(p.p.iter().zip(grad).map(|(a, b)| a - b.value()))
    };
    Ok(GeneratedSet::new(
        l.clone(),
        "generated by U",
        sampler,
        residual,
    ))
}

/// Gauss–Newton projection onto `{g = 0}` carried out over jets, so the
/// result's derivative slots are those of the limiting projection.
fn project_jet(g: &SmoothMap, q0: &[MultiJet]) -> Vec<MultiJet> {
    let k = g.out_dim();
    let mut q = q0.to_vec();
    let mut polish = 0;
    for _ in 0..NEWTON_MAX {
        let (val, jac) = g.jacobian_jet(&q);
        let gram: Vec<Vec<MultiJet>> = (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| {
                        jac[a]
                            .iter()
                            .zip(&jac[b])
                            .fold(MultiJet::zero(), |acc, (x, y)| acc + *x * *y)
                    })
                    .collect()
            })
            .collect();
        let Some(y) = solve_generic(&gram, &val) else {
            return vec![MultiJet::constant(f64::NAN); q.len()];
        };
        for (i, qi) in q.iter_mut().enumerate() {
            let step = (0..k).fold(MultiJet::zero(), |acc, a| acc + jac[a][i] * y[a]);
            *qi = *qi - step;
        }
        let size = val.iter().map(|v| v.value().abs()).fold(0.0, f64::max);
        if size < 1e-15 {
            polish += 1;
            if polish > NEWTON_POLISH {
                break;
            }
        }
    }
    q
}

/// The set generated by `U` constrained to `C = {g = 0}`:
/// `{f : π(f) ∈ C, α(f) − dU ∈ T°C}`, parametrized by `(q, λ)` with `q`
/// projected onto `C` and `α(f) = ∇U + λ_a ∇g^a`.
pub fn generate_constrained(
    l: &LiouvilleStructure,
    u: &ScalarField,
    g: &SmoothMap,
) -> Result<GeneratedSet> {
    let n = l.base_dim;
    check_dim("constrained generating function domain", n, u.dim())?;
    check_dim("constraint domain", n, g.in_dim())?;
    let k = g.out_dim();
    if k == 0 {
        return generate_from_function(l, u);
    }
    if k > n {
        return Err(Error::RankDeficient {
            what: "constraints".into(),
            rank: n,
            expected: k,
        });
    }
    let mut s = Sampler::new(0xc0);
    for _ in 0..RANK_SAMPLES {
        let q: Vec<f64> = project_jet(g, &constants(&s.vector(n)))
            .iter()
            .map(|x| x.value())
            .collect();
        let r = rank(&g.jacobian(&q));
        if r != k {
            return Err(Error::RankDeficient {
                what: format!("constraint differential at {q:?}"),
                rank: r,
                expected: k,
            });
        }
    }

    let alpha = l.alpha()?;
    let inverse = alpha.inverse_map();
    let (field, constraints) = (u.clone(), g.clone());
    let sampler = SmoothMap::new(n + k, 2 * n, move |t| {
        let q = project_jet(&constraints, &t[..n]);
        let lambda = &t[n..];
        let (_, jac) = constraints.jacobian_jet(&q);
        let grad = field.gradient_jet(&q);
        let p: Vec<MultiJet> = (0..n)
            .map(|i| (0..k).fold(grad[i], |acc, a| acc + lambda[a] * jac[a][i]))
            .collect();
        let mut x = q;
        x.extend(p);
        inverse.eval_jet(&x)
    });

    let (field, constraints) = (u.clone(), g.clone());
    let residual = move |x: &[f64]| {
        let (q, f) = x.split_at(n);
        let Ok(p) = alpha.apply(&FibredPoint {
            q: q.to_vec(),
            f: f.to_vec(),
        }) else {
            return f64::INFINITY;
        };
        let on_c = norm(constraints.eval(q));
        let grad = field.gradient_jet(&constants(q));
        let r = DVector::from_iterator(n, p.p.iter().zip(grad).map(|(a, b)| a - b.value()));
        let normals: DMatrix<f64> = constraints.jacobian(q).transpose();
        let coeffs = match normals.clone().svd(true, true).solve(&r, 1e-12) {
            Ok(c) => c,
            Err(_) => return f64::INFINITY,
        };
        on_c + (r - normals * coeffs).norm()
    };
    Ok(GeneratedSet::new(
        l.clone(),
        "generated by U on C",
        sampler,
        residual,
    ))
}

/// The set generated by a two-point function `W(q1, q0)` in the difference
/// structure over `Q × Q`, chart `(q1, q0, p1, p0)`: `p1 = ∂W/∂q1`,
/// `p0 = −∂W/∂q0`.
pub fn generate_two_point(w: &ScalarField) -> Result<GeneratedSet> {
    if !w.dim().is_multiple_of(2) || w.dim() == 0 {
        return Err(Error::InvalidArgument(format!(
            "two-point function needs an even number of arguments, got {}",
            w.dim()
        )));
    }
    let n = w.dim() / 2;
    let canonical = LiouvilleStructure::canonical(n);
    let diff = functor_difference(&canonical, &canonical)?;
    let mut set = generate_from_function(&diff, w)?;
    set.label = "generated by W".into();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::functor_scale;
    use crate::symplin::annihilator_tc;

    fn half_square() -> ScalarField {
        ScalarField::new(1, |q| (q[0] * q[0]).scale(0.5))
    }

    #[test]
    fn generating_function_examples() {
        let c = LiouvilleStructure::canonical(1);
        let s = generate_from_function(&c, &half_square()).unwrap();
        assert!(s.residual(&[1.0, 1.0]) < 1e-14);
        assert!((s.residual(&[1.0, 2.0]) - 1.0).abs() < 1e-14);
        assert_eq!(s.sample(&[0.7]), vec![0.7, 0.7]);

        let zero = generate_from_function(&c, &ScalarField::constant(1, 0.0)).unwrap();
        assert_eq!(zero.sample(&[0.3]), vec![0.3, 0.0]);

        let scaled = functor_scale(&c, 4.0).unwrap();
        let s = generate_from_function(&scaled, &half_square()).unwrap();
        assert!((s.sample(&[2.0])[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn generated_sets_are_lagrangian() {
        let c = LiouvilleStructure::canonical(2);
        let u = ScalarField::new(2, |q| q[0] * q[0] * q[1] + q[1].sin());
        let s = generate_from_function(&c, &u).unwrap();
        let mut rng = Sampler::new(1);
        for _ in 0..20 {
            let t = s.random_params(&mut rng);
            assert!(s.residual(&s.sample(&t)) < 1e-10);
            assert!(s.is_lagrangian_at(&t).unwrap());
        }
    }

    #[test]
    fn constrained_examples() {
        let c = LiouvilleStructure::canonical(2);
        let g = SmoothMap::new(2, 1, |q| vec![q[1]]);
        let s = generate_constrained(&c, &ScalarField::constant(2, 0.0), &g).unwrap();
        let x = s.sample(&[0.4, 0.9, -1.3]);
        assert!((x[0] - 0.4).abs() < 1e-14 && x[1].abs() < 1e-14 && x[2].abs() < 1e-14);
        assert!((x[3] + 1.3).abs() < 1e-14);
        assert_eq!(s.tangent_basis(&[0.4, 0.9, -1.3]).dim(), 2);
        assert!(s.is_lagrangian_at(&[0.4, 0.9, -1.3]).unwrap());
        assert!(s.residual(&[0.4, 0.0, 0.0, 5.0]) < 1e-14);
        assert!(s.residual(&[0.4, 0.1, 0.0, 5.0]) > 0.05);
        let ann = annihilator_tc(&g, &[0.4, 0.0]).unwrap();
        assert!(ann.contains(&x[2..]));

        let u = ScalarField::new(2, |q| (q[0] * q[0]).scale(0.5));
        let s = generate_constrained(&c, &u, &g).unwrap();
        let x = s.sample(&[0.6, 0.2, 2.0]);
        assert!((x[2] - 0.6).abs() < 1e-14);
        assert!(s.residual(&[0.6, 0.0, 0.6, -7.0]) < 1e-14);

        let none = SmoothMap::new(2, 0, |_| Vec::new());
        let plain = generate_constrained(&c, &u, &none).unwrap();
        assert_eq!(plain.param_dim(), 2);
    }

    #[test]
    fn curved_constraint_is_lagrangian() {
        let c = LiouvilleStructure::canonical(2);
        let g = SmoothMap::new(2, 1, |q| {
            vec![q[0] * q[0] + q[1] * q[1] - MultiJet::constant(1.0)]
        });
        let u = ScalarField::new(2, |q| q[0] * q[1]);
        let s = generate_constrained(&c, &u, &g).unwrap();
        let mut rng = Sampler::new(2);
        for _ in 0..20 {
            let t = s.random_params(&mut rng);
            assert!(s.residual(&s.sample(&t)) < 1e-10);
            assert_eq!(s.tangent_basis(&t).dim(), 2);
            assert!(s.is_lagrangian_at(&t).unwrap());
        }
    }

    #[test]
    fn degenerate_constraints_are_rejected() {
        let c = LiouvilleStructure::canonical(2);
        let g = SmoothMap::new(2, 2, |q| vec![q[1], q[1].scale(2.0)]);
        assert!(matches!(
            generate_constrained(&c, &ScalarField::constant(2, 0.0), &g),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn two_point_examples() {
        let w = ScalarField::new(2, |x| ((x[0] - x[1]) * (x[0] - x[1])).scale(0.5));
        let s = generate_two_point(&w).unwrap();
        assert_eq!(s.sample(&[2.0, 0.5]), vec![2.0, 0.5, 1.5, 1.5]);

        let zero = generate_two_point(&ScalarField::constant(2, 0.0)).unwrap();
        assert_eq!(zero.sample(&[2.0, 0.5]), vec![2.0, 0.5, 0.0, 0.0]);

        let product = generate_two_point(&ScalarField::new(2, |x| x[0] * x[1])).unwrap();
        assert_eq!(product.sample(&[2.0, 0.5]), vec![2.0, 0.5, 0.5, -2.0]);
        assert!(product.is_lagrangian_at(&[2.0, 0.5]).unwrap());
        assert!(generate_two_point(&ScalarField::constant(3, 0.0)).is_err());
    }
}
