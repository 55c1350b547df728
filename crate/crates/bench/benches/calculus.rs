use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use liouville_core::forms::{d_t, liouville_form};
use liouville_core::integrate::{leapfrog, rk4_hamiltonian};
use liouville_core::jets::{gradient, hessian};
use liouville_core::mechanics::hamiltonian_dynamics;
use liouville_core::modelio::{phase_vars, Compiled};
use liouville_core::{LiouvilleStructure, MultiJet, Scalar, ScalarField};

fn henon_heiles() -> ScalarField {
    ScalarField::new(4, |x| {
        let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
        (p1 * p1 + p2 * p2 + q1 * q1 + q2 * q2).scale(0.5) + q1 * q1 * q2
            - (q2 * q2 * q2).scale(1.0 / 3.0)
    })
}

fn jets(c: &mut Criterion) {
    let h = henon_heiles();
    let x = [0.1, -0.2, 0.3, 0.35];
    c.bench_function("gradient 4d", |b| b.iter(|| gradient(&h, black_box(&x))));
    c.bench_function("hessian 4d", |b| b.iter(|| hessian(&h, black_box(&x))));
    let cubic = ScalarField::new(2, |x| {
        x[0].sin() * x[1].exp() + MultiJet::constant(2.0) * x[0].powi(3)
    });
    c.bench_function("hessian transcendental 2d", |b| {
        b.iter(|| hessian(&cubic, black_box(&[0.4, -0.7])))
    });
}

fn forms(c: &mut Criterion) {
    let theta = liouville_form(3);
    let omega = theta.exterior_derivative();
    let x = [0.1, 0.2, 0.3, -0.4, 0.5, -0.6];
    c.bench_function("d of Liouville form, matrix at point", |b| {
        b.iter(|| omega.matrix_at(black_box(&x)))
    });
    let dt = d_t(&theta);
    let y: Vec<f64> = (0..12).map(|i| 0.1 * i as f64).collect();
    c.bench_function("d_T of Liouville form, coefficients", |b| {
        b.iter(|| dt.coefficients(black_box(&y)))
    });
    let canonical = LiouvilleStructure::canonical(2);
    c.bench_function("structure verification, 20 samples", |b| {
        b.iter(|| canonical.verify(20, 1e-9))
    });
}

fn integrators(c: &mut Criterion) {
    let h = henon_heiles();
    let field = hamiltonian_dynamics(&h, &LiouvilleStructure::canonical(2).omega()).unwrap();
    let x0 = [0.1, 0.0, 0.0, 0.35];
    c.bench_function("rk4 1000 steps", |b| {
        b.iter(|| rk4_hamiltonian(&field, black_box(&x0), 10.0, 0.01))
    });
    c.bench_function("leapfrog 1000 steps", |b| {
        b.iter(|| leapfrog(&h, black_box(&x0), 10.0, 0.01))
    });
}

fn expressions(c: &mut Criterion) {
    let source = "(p1^2 + p2^2) / 2 + (q1^2 + q2^2) / 2 + q1^2 * q2 - q2^3 / 3";
    let vars = phase_vars(2);
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    c.bench_function("compile expression", |b| {
        b.iter(|| Compiled::new(black_box(source), &names))
    });
    let compiled = Compiled::new(source, &names).unwrap();
    let x = [0.1, -0.2, 0.3, 0.35];
    c.bench_function("evaluate expression", |b| {
        b.iter(|| compiled.eval(black_box(&x)))
    });
}

criterion_group!(benches, jets, forms, integrators, expressions);
criterion_main!(benches);
