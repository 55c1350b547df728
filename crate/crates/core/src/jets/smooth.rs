use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::multijet::directional;
use super::{JetScalar, MultiJet, Scalar};
use crate::error::{Error, Result};

type FieldFn = dyn Fn(&[MultiJet]) -> MultiJet + Send + Sync;
type MapFn = dyn Fn(&[MultiJet]) -> Vec<MultiJet> + Send + Sync;

/// A smooth real function on `R^dim`, evaluable over jets.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    f: Arc<FieldFn>,
}

impl ScalarField {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[MultiJet]) -> MultiJet + Send + Sync + 'static,
    {
        Self {
            dim,
            f: Arc::new(f),
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self::new(dim, move |_| MultiJet::constant(value))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_jet(&self, x: &[MultiJet]) -> MultiJet {
        debug_assert_eq!(x.len(), self.dim);
        (self.f)(x)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let jets: Vec<MultiJet> = x.iter().copied().map(MultiJet::constant).collect();
        self.eval_jet(&jets).value()
    }

    /// Gradient at a jet-valued point; components come back at the input depth.
    pub fn gradient_jet(&self, x: &[MultiJet]) -> Vec<MultiJet> {
        let mut e = vec![0.0; self.dim];
        (0..self.dim)
            .map(|i| {
                e[i] = 1.0;
                let (_, d) = directional(x, &e, |z| vec![self.eval_jet(z)]);
                e[i] = 0.0;
                d[0]
            })
            .collect()
    }

    /// The gradient as a vector-valued map.
    pub fn gradient_map(&self) -> SmoothMap {
        let field = self.clone();
        SmoothMap::new(self.dim, self.dim, move |x| field.gradient_jet(x))
    }

    /// Precomposition `self ∘ map`.
    pub fn compose(&self, map: &SmoothMap) -> Result<ScalarField> {
        check_dim("scalar field composition", self.dim, map.out_dim())?;
        let field = self.clone();
        let map = map.clone();
        Ok(ScalarField::new(map.in_dim(), move |x| {
            field.eval_jet(&map.eval_jet(x))
        }))
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField(R^{})", self.dim)
    }
}

#[derive(Clone)]
enum MapKind {
    /// `x ↦ A x`; kept explicit so pullbacks along projections and
    /// permutations do not spend a nesting level on a constant Jacobian.
    Linear(DMatrix<f64>),
    General(Arc<MapFn>),
}

/// A smooth map `R^in_dim -> R^out_dim`, evaluable over jets.
#[derive(Clone)]
pub struct SmoothMap {
    in_dim: usize,
    out_dim: usize,
    kind: MapKind,
}

impl SmoothMap {
    pub fn new<F>(in_dim: usize, out_dim: usize, f: F) -> Self
    where
        F: Fn(&[MultiJet]) -> Vec<MultiJet> + Send + Sync + 'static,
    {
        Self {
            in_dim,
            out_dim,
            kind: MapKind::General(Arc::new(f)),
        }
    }

    pub fn linear(matrix: DMatrix<f64>) -> Self {
        Self {
            in_dim: matrix.ncols(),
            out_dim: matrix.nrows(),
            kind: MapKind::Linear(matrix),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::linear(DMatrix::identity(dim, dim))
    }

    /// Coordinate selection/permutation: output `i` is input `indices[i]`.
    pub fn select(in_dim: usize, indices: &[usize]) -> Self {
        let mut m = DMatrix::zeros(indices.len(), in_dim);
        for (row, &col) in indices.iter().enumerate() {
            m[(row, col)] = 1.0;
        }
        Self::linear(m)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn eval_jet(&self, x: &[MultiJet]) -> Vec<MultiJet> {
        debug_assert_eq!(x.len(), self.in_dim);
        match &self.kind {
            MapKind::Linear(m) => (0..self.out_dim)
                .map(|r| {
                    let mut acc = MultiJet::constant(0.0);
                    for (c, xc) in x.iter().enumerate() {
                        let a = m[(r, c)];
                        if a != 0.0 {
                            acc = acc + if a == 1.0 { *xc } else { xc.scale(a) };
                        }
                    }
                    acc
                })
                .collect(),
            MapKind::General(f) => f(x),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let jets: Vec<MultiJet> = x.iter().copied().map(MultiJet::constant).collect();
        self.eval_jet(&jets).iter().map(MultiJet::value).collect()
    }

    /// Value and Jacobian (`jac[out][in]`) at a jet-valued point.
    pub fn jacobian_jet(&self, x: &[MultiJet]) -> (Vec<MultiJet>, Vec<Vec<MultiJet>>) {
        match &self.kind {
            MapKind::Linear(m) => {
                let jac = (0..self.out_dim)
                    .map(|r| {
                        (0..self.in_dim)
                            .map(|c| MultiJet::constant(m[(r, c)]))
                            .collect()
                    })
                    .collect();
                (self.eval_jet(x), jac)
            }
            MapKind::General(_) => {
                let mut jac = vec![Vec::with_capacity(self.in_dim); self.out_dim];
                let mut value = Vec::new();
                let mut e = vec![0.0; self.in_dim];
                for i in 0..self.in_dim {
                    e[i] = 1.0;
                    let (v, d) = directional(x, &e, |z| self.eval_jet(z));
                    e[i] = 0.0;
                    if i == 0 {
                        value = v;
                    }
                    for (row, di) in jac.iter_mut().zip(d) {
                        row.push(di);
                    }
                }
                if self.in_dim == 0 {
                    value = self.eval_jet(x);
                }
                (value, jac)
            }
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let jets: Vec<MultiJet> = x.iter().copied().map(MultiJet::constant).collect();
        let (_, jac) = self.jacobian_jet(&jets);
        DMatrix::from_fn(self.out_dim, self.in_dim, |r, c| jac[r][c].value())
    }

    /// Composition `self ∘ inner`.
    pub fn compose(&self, inner: &SmoothMap) -> Result<SmoothMap> {
        check_dim("map composition", self.in_dim, inner.out_dim)?;
        if let (MapKind::Linear(a), MapKind::Linear(b)) = (&self.kind, &inner.kind) {
            return Ok(SmoothMap::linear(a * b));
        }
        let outer = self.clone();
        let inner = inner.clone();
        Ok(SmoothMap::new(inner.in_dim, outer.out_dim, move |x| {
            outer.eval_jet(&inner.eval_jet(x))
        }))
    }
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            MapKind::Linear(_) => "linear",
            MapKind::General(_) => "general",
        };
        write!(
            f,
            "SmoothMap({kind}, R^{} -> R^{})",
            self.in_dim, self.out_dim
        )
    }
}

/// A point of `R^m` carrying a two-parameter probe in every component.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JetVector(pub Vec<JetScalar>);

impl JetVector {
    pub fn new(components: Vec<JetScalar>) -> Self {
        Self(components)
    }

    /// The affine probe `(s, t) ↦ x + s·ds + t·dt + s t·dst`.
    pub fn probe(x: &[f64], ds: &[f64], dt: &[f64], dst: &[f64]) -> Self {
        Self(
            (0..x.len())
                .map(|i| JetScalar::new(x[i], ds[i], dt[i], dst[i]))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}

/// Pushes a two-parameter probe through `f`, returning the partials of
/// `f ∘ probe` at `(s, t) = (0, 0)`.
pub fn jet_eval(f: &ScalarField, seed: &JetVector) -> Result<JetScalar> {
    check_dim("jet_eval", f.dim(), seed.len())?;
    let x: Vec<MultiJet> = seed.0.iter().copied().map(MultiJet::from).collect();
    Ok(JetScalar::from(f.eval_jet(&x)))
}

/// Same as [`jet_eval`] for every component of a map.
pub fn jet_eval_map(f: &SmoothMap, seed: &JetVector) -> Result<Vec<JetScalar>> {
    check_dim("jet_eval_map", f.in_dim(), seed.len())?;
    let x: Vec<MultiJet> = seed.0.iter().copied().map(MultiJet::from).collect();
    Ok(f.eval_jet(&x).into_iter().map(JetScalar::from).collect())
}

pub fn gradient(f: &ScalarField, point: &[f64]) -> Result<Vec<f64>> {
    check_dim("gradient", f.dim(), point.len())?;
    let n = point.len();
    let zeros = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        e[i] = 1.0;
        out.push(jet_eval(f, &JetVector::probe(point, &e, &zeros, &zeros))?.ds);
        e[i] = 0.0;
    }
    Ok(out)
}

/// Hessian from mixed slots: entry `(i, j)` is the `dst` slot of the probe
/// seeded with `e_i` along `s` and `e_j` along `t`.
pub fn hessian(f: &ScalarField, point: &[f64]) -> Result<DMatrix<f64>> {
    check_dim("hessian", f.dim(), point.len())?;
    let n = point.len();
    let zeros = vec![0.0; n];
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut ei = vec![0.0; n];
            let mut ej = vec![0.0; n];
            ei[i] = 1.0;
            ej[j] = 1.0;
            h[(i, j)] = jet_eval(f, &JetVector::probe(point, &ei, &ej, &zeros))?.dst;
        }
    }
    debug_assert!(
        (0..n).all(
            |i| (0..n).all(|j| (h[(i, j)] - h[(j, i)]).abs() <= 1e-9 * (1.0 + h[(i, j)].abs()))
        ),
        "mixed partials must commute"
    );
    Ok(h)
}
