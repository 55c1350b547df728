use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;

use crate::bundles::{FibredPoint, TangentPoint};
use crate::conventions::agree;
use crate::error::{Error, Result};
use crate::forms::{d_t, i_t, Form};
use crate::jets::{check_dim, SmoothMap};
use crate::linalg::null_space;
use crate::liouville::{sweep, LiouvilleStructure, PropertyCheck, VerificationReport};
use crate::sampling::Sampler;
use crate::symplin::Subspace;

const QUADRATURE_DEGREE: usize = 32;
const PATH_SAMPLES: usize = 20;

/// A primitive `Ũ` of `σ*θ` on `Q`, normalized to vanish at the base point.
#[derive(Clone, Debug)]
pub struct ProperFunction {
    form: Form,
    base: Vec<f64>,
}

fn quadrature() -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(QUADRATURE_DEGREE).expect("positive degree"))
}

/// `∫ μ` along the straight segment `a -> b` for a 1-form `μ`.
fn segment_integral(mu: &Form, quad: &GaussLegendre, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let length = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if length == 0.0 {
        return 0.0;
    }
    let panels = length.ceil().max(1.0) as usize;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = k as f64 / panels as f64;
        let hi = (k + 1) as f64 / panels as f64;
        total += quad.integrate(lo, hi, |t| {
            let x: Vec<f64> = a.iter().zip(&d).map(|(ai, di)| ai + t * di).collect();
            mu.coefficients(&x)
                .iter()
                .zip(&d)
                .map(|(c, di)| c * di)
                .sum::<f64>()
        });
    }
    total
}

/// `∫ μ` along the axis-parallel path that fixes one coordinate at a time.
fn staircase_integral(mu: &Form, quad: &GaussLegendre, a: &[f64], b: &[f64]) -> f64 {
    let mut corner = a.to_vec();
    let mut total = 0.0;
    for i in 0..a.len() {
        let mut next = corner.clone();
        next[i] = b[i];
        total += segment_integral(mu, quad, &corner, &next);
        corner = next;
    }
    total
}

impl ProperFunction {
    pub fn eval(&self, q: &[f64]) -> f64 {
        segment_integral(&self.form, &quadrature(), &self.base, q)
    }

    /// `∇Ũ = σ*θ` coefficients.
    pub fn gradient(&self, q: &[f64]) -> Vec<f64> {
        self.form.coefficients(q)
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }
}

/// Recovers a proper function of the image of a section `σ: Q -> P` from
/// `σ*θ`. Rejects when straight and axis-parallel line integrals disagree at
/// a sampled point, i.e. when `σ*θ` is not closed.
pub fn proper_function(
    l: &LiouvilleStructure,
    section: &SmoothMap,
    base: Option<Vec<f64>>,
    tol: f64,
) -> Result<ProperFunction> {
    let n = l.base_dim;
    check_dim("section domain", n, section.in_dim())?;
    check_dim("section target", l.total_dim(), section.out_dim())?;
    let base = base.unwrap_or_else(|| vec![0.0; n]);
    check_dim("proper function base point", n, base.len())?;
    let form = l.theta.pullback(section)?;
    let quad = quadrature();
    let mut s = Sampler::new(0x9a7);
    for _ in 0..PATH_SAMPLES {
        let q: Vec<f64> = base.iter().zip(s.vector(n)).map(|(b, d)| b + d).collect();
        let straight = segment_integral(&form, &quad, &base, &q);
        let stairs = staircase_integral(&form, &quad, &base, &q);
        if !agree(straight, stairs, tol) {
            return Err(Error::PathDependent {
                deviation: (straight - stairs).abs(),
                tolerance: tol,
                witness: q,
            });
        }
    }
    Ok(ProperFunction { form, base })
}

/// Checks, at sampled tangent vectors of `P`, that `i_T dθ − d_Tθ` pulled back
/// to the diagonal of `TP × TP` equals `dF` with `F = −i_Tθ`, that `F` is
/// minus the structure pairing of `τ_P(ṗ)` with `Tπ(ṗ)`, and that the fibres
/// of `TP -> P ×_Q TQ` are the vertical affine subspaces.
pub fn diagonal_check(
    l: &LiouvilleStructure,
    samples: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let (n, k) = (l.base_dim, l.fibre_dim);
    let m = n + k;
    let hamilton = i_t(&l.omega());
    let tangent = d_t(&l.theta);
    let pr2 = SmoothMap::select(4 * m, &(0..2 * m).collect::<Vec<_>>());
    let pr1 = SmoothMap::select(4 * m, &(2 * m..4 * m).collect::<Vec<_>>());
    let difference = hamilton.pullback(&pr2)?.sub(&tangent.pullback(&pr1)?)?;
    let diagonal = SmoothMap::linear(DMatrix::from_fn(4 * m, 2 * m, |r, c| {
        if r % (2 * m) == c {
            1.0
        } else {
            0.0
        }
    }));
    let restricted = difference.pullback(&diagonal)?;
    let f = i_t(&l.theta).scale(-1.0);
    let df = f.exterior_derivative();

    let identity = sweep("diagonal identity", tol, samples, 0xd1a, |s| {
        let x = s.vector(2 * m);
        let w = s.vector(2 * m);
        let a = restricted.eval(&x, std::slice::from_ref(&w)).ok()?;
        let b = df.eval(&x, &[w]).ok()?;
        (!agree(a, b, tol)).then_some(x)
    });

    let pairing = l.pairing_from_theta()?;
    let f_is_pairing = sweep(
        "proper function is minus the pairing",
        tol,
        samples,
        0xd1b,
        |s| {
            let x = s.vector(2 * m);
            let value = f.eval(&x, &[]).ok()?;
            let point = FibredPoint {
                q: x[..n].to_vec(),
                f: x[n..m].to_vec(),
            };
            let v = TangentPoint {
                q: point.q.clone(),
                v: x[m..m + n].to_vec(),
            };
            let expected = -pairing.eval(&point, &v).ok()?;
            (!agree(value, expected, tol)).then_some(x)
        },
    );

    // η̃(q, f, q̇, ḟ) = ((q, f), (q, q̇)); a linear projection, so its
    // fibres are translates of its kernel.
    let eta = SmoothMap::select(2 * m, &(0..m + n).collect::<Vec<_>>());
    let kernel = Subspace::from_matrix(&null_space(&eta.jacobian(&vec![0.0; 2 * m])));
    let vertical: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut e = vec![0.0; 2 * m];
            e[m + n + i] = 1.0;
            e
        })
        .collect();
    let expected = Subspace::new(2 * m, &vertical)?;
    let affine = PropertyCheck {
        property: "affine fibre is vertical".into(),
        pass: kernel.same_span(&expected),
        witness: (!kernel.same_span(&expected)).then(|| vec![kernel.dim() as f64]),
        tolerance: 0.0,
    };

    Ok(VerificationReport {
        label: format!("diagonal check of {}", l.label),
        checks: vec![identity, f_is_pairing, affine],
    })
}
