//! Linear symplectic algebra at a single point: polars, the isotropy
//! predicates, product forms `ω′ ⊖ ω`, composition of linear relations and
//! constraint annihilators.

use nalgebra::{DMatrix, DVector};

use crate::conventions::{CONDITION_LIMIT, RANK_TOL};
use crate::error::{Error, Result};
use crate::jets::{check_dim, SmoothMap};
use crate::linalg::{column_basis, condition_number, null_space, rank};

/// A vector space `R^{2n}` with a nondegenerate antisymmetric form.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticSpace {
    omega: DMatrix<f64>,
}

impl SymplecticSpace {
    pub fn new(omega: DMatrix<f64>) -> Result<Self> {
        if !omega.is_square() {
            return Err(Error::DimensionMismatch {
                context: "symplectic matrix",
                expected: omega.nrows(),
                got: omega.ncols(),
            });
        }
        let asym = (&omega + omega.transpose()).amax();
        if asym > RANK_TOL * omega.amax().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "form matrix is not antisymmetric (|Ω + Ωᵀ| = {asym:e})"
            )));
        }
        let condition = condition_number(&omega);
        if condition > CONDITION_LIMIT {
            return Err(Error::Singular {
                what: "symplectic form".into(),
                witness: Vec::new(),
                condition,
            });
        }
        Ok(Self { omega })
    }

    /// `dp ∧ dq` on `R^{2n}` with coordinates `(q, p)`.
    pub fn standard(n: usize) -> Self {
        let mut omega = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            omega[(n + i, i)] = 1.0;
            omega[(i, n + i)] = -1.0;
        }
        Self { omega }
    }

    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn pair(&self, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (u.transpose() * &self.omega * w)[(0, 0)]
    }
}

/// A linear subspace given by independent basis columns.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Requires the vectors to be numerically independent.
    pub fn new(ambient: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let m = Self::columns(ambient, vectors)?;
        let r = rank(&m);
        if r != vectors.len() {
            return Err(Error::RankDeficient {
                what: "subspace basis".into(),
                rank: r,
                expected: vectors.len(),
            });
        }
        Ok(Self { ambient, basis: m })
    }

    /// The span of arbitrary vectors, dependent ones dropped.
    pub fn span(ambient: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::from_matrix(&Self::columns(ambient, vectors)?))
    }

    /// The span of the columns of `m`.
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self {
            ambient: m.nrows(),
            basis: column_basis(m),
        }
    }

    fn columns(ambient: usize, vectors: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        for v in vectors {
            check_dim("subspace vector", ambient, v.len())?;
        }
        let cols: Vec<DVector<f64>> = vectors
            .iter()
            .map(|v| DVector::from_column_slice(v))
            .collect();
        Ok(if cols.is_empty() {
            DMatrix::zeros(ambient, 0)
        } else {
            DMatrix::from_columns(&cols)
        })
    }

    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            basis: DMatrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            basis: DMatrix::identity(ambient, ambient),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Basis vectors as columns.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<f64>> {
        self.basis
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect()
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        if v.len() != self.ambient {
            return false;
        }
        let mut m = self.basis.clone().insert_column(self.dim(), 0.0);
        m.set_column(self.dim(), &DVector::from_column_slice(v));
        rank(&m) == self.dim()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        if other.ambient != self.ambient {
            return false;
        }
        let stacked = hcat(&self.basis, &other.basis);
        rank(&stacked) == self.dim()
    }

    /// Equality of spans.
    pub fn same_span(&self, other: &Subspace) -> bool {
        self.dim() == other.dim() && self.contains_subspace(other)
    }

    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        check_dim("subspace intersection", self.ambient, other.ambient)?;
        let stacked = hcat(&self.basis, &(-&other.basis));
        let ns = null_space(&stacked);
        let coeffs = ns.rows(0, self.dim()).into_owned();
        Ok(Subspace::from_matrix(&(&self.basis * coeffs)))
    }
}

fn hcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

/// The annihilator `V° ⊂ (R^m)*`, covectors written in the dual basis.
pub fn polar(v: &Subspace) -> Subspace {
    let ns = null_space(&v.basis.transpose());
    Subspace {
        ambient: v.ambient,
        basis: ns,
    }
}

/// `V^§ = {w : ω(v, w) = 0 for all v ∈ V}`.
pub fn symplectic_polar(v: &Subspace, s: &SymplecticSpace) -> Result<Subspace> {
    check_dim("symplectic_polar", s.dim(), v.ambient)?;
    let ns = null_space(&(v.basis.transpose() * &s.omega));
    Ok(Subspace {
        ambient: v.ambient,
        basis: ns,
    })
}

pub fn is_isotropic(v: &Subspace, s: &SymplecticSpace) -> Result<bool> {
    Ok(symplectic_polar(v, s)?.contains_subspace(v))
}

pub fn is_coisotropic(v: &Subspace, s: &SymplecticSpace) -> Result<bool> {
    Ok(v.contains_subspace(&symplectic_polar(v, s)?))
}

pub fn is_lagrangian(v: &Subspace, s: &SymplecticSpace) -> Result<bool> {
    Ok(symplectic_polar(v, s)?.same_span(v))
}

/// `V^§` for coisotropic `V`; the kernel directions of `ω` restricted to `V`.
pub fn characteristic_distribution(v: &Subspace, s: &SymplecticSpace) -> Result<Subspace> {
    let polar = symplectic_polar(v, s)?;
    if !v.contains_subspace(&polar) {
        return Err(Error::NotCoisotropic);
    }
    Ok(polar)
}

/// `(P′ × P, ω′ ⊖ ω)` with matrix `diag(Ω′, −Ω)`.
pub fn product_form(s_prime: &SymplecticSpace, s: &SymplecticSpace) -> SymplecticSpace {
    let (a, b) = (s_prime.dim(), s.dim());
    let mut m = DMatrix::zeros(a + b, a + b);
    m.view_mut((0, 0), (a, a)).copy_from(&s_prime.omega);
    m.view_mut((a, a), (b, b)).copy_from(&(-&s.omega));
    SymplecticSpace { omega: m }
}

/// Composes `G2 ⊂ P″ × P′` with `G1 ⊂ P′ × P`, where `mid_dim = dim P′`.
/// Returns `{(c, a) : ∃ b, (c, b) ∈ G2, (b, a) ∈ G1}` as a subspace of `P″ × P`.
pub fn compose_linear_relations(g2: &Subspace, g1: &Subspace, mid_dim: usize) -> Result<Subspace> {
    if g2.ambient < mid_dim || g1.ambient < mid_dim {
        return Err(Error::InvalidArgument(format!(
            "middle factor of dimension {mid_dim} does not fit relations in R^{} and R^{}",
            g2.ambient, g1.ambient
        )));
    }
    let outer = g2.ambient - mid_dim;
    let inner = g1.ambient - mid_dim;
    let (d2, d1) = (g2.dim(), g1.dim());
    // B2_b x − B1_b y = 0
    let b2_mid = g2.basis.rows(outer, mid_dim);
    let b1_mid = g1.basis.rows(0, mid_dim);
    let mut system = DMatrix::zeros(mid_dim, d2 + d1);
    system.columns_mut(0, d2).copy_from(&b2_mid);
    system.columns_mut(d2, d1).copy_from(&(-b1_mid));
    let ns = null_space(&system);
    let mut image = DMatrix::zeros(outer + inner, ns.ncols());
    if ns.ncols() > 0 {
        let x = ns.rows(0, d2);
        let y = ns.rows(d2, d1);
        image
            .rows_mut(0, outer)
            .copy_from(&(g2.basis.rows(0, outer) * x));
        image
            .rows_mut(outer, inner)
            .copy_from(&(g1.basis.rows(mid_dim, inner) * y));
    }
    Ok(Subspace::from_matrix(&image))
}

/// `T°_q C` for `C = {g = 0}`: the span of the constraint gradients.
pub fn annihilator_tc(g: &SmoothMap, q: &[f64]) -> Result<Subspace> {
    check_dim("annihilator_tc point", g.in_dim(), q.len())?;
    let n = q.len();
    let k = g.out_dim();
    if k == 0 {
        return Ok(Subspace::zero(n));
    }
    let jac = g.jacobian(q);
    let r = rank(&jac);
    if r < k {
        return Err(Error::RankDeficient {
            what: format!("constraint differential at {q:?}"),
            rank: r,
            expected: k,
        });
    }
    Ok(Subspace::from_matrix(&jac.transpose()))
}

/// Graph of a linear map `x ↦ A x` inside `R^{rows} × R^{cols}` (image first).
pub fn linear_graph(a: &DMatrix<f64>) -> Subspace {
    let n = a.ncols();
    let mut m = DMatrix::zeros(a.nrows() + n, n);
    m.rows_mut(0, a.nrows()).copy_from(a);
    m.rows_mut(a.nrows(), n).copy_from(&DMatrix::identity(n, n));
    Subspace::from_matrix(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Sampler;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    fn random_subspace(s: &mut Sampler, ambient: usize, dim: usize) -> Subspace {
        let vs: Vec<Vec<f64>> = (0..dim).map(|_| s.vector(ambient)).collect();
        Subspace::new(ambient, &vs).unwrap()
    }

    /// Cotangent lift of `q ↦ a q` on `R^1`: `(q, p) ↦ (a q, p / a)`.
    fn lift_matrix(a: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, 1.0 / a])
    }

    #[test]
    fn standard_form_matches_dp_wedge_dq() {
        let s = SymplecticSpace::standard(1);
        let (q, p) = (DVector::from_vec(e(2, 0)), DVector::from_vec(e(2, 1)));
        assert_eq!(s.pair(&p, &q), 1.0);
        assert_eq!(s.pair(&q, &p), -1.0);
        assert!(
            SymplecticSpace::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).is_err()
        );
        assert!(SymplecticSpace::new(DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn polar_examples() {
        let s = SymplecticSpace::standard(1);
        let v = Subspace::new(2, &[e(2, 0)]).unwrap();
        let vp = symplectic_polar(&v, &s).unwrap();
        assert!(vp.same_span(&v));
        assert_eq!(symplectic_polar(&Subspace::full(2), &s).unwrap().dim(), 0);
        assert_eq!(symplectic_polar(&Subspace::zero(2), &s).unwrap().dim(), 2);
        let ann = polar(&v);
        assert!(ann.same_span(&Subspace::new(2, &[e(2, 1)]).unwrap()));
    }

    #[test]
    fn polar_dimension_and_double_polar() {
        let s = SymplecticSpace::standard(3);
        let mut rng = Sampler::new(9);
        for d in 0..=6 {
            let v = random_subspace(&mut rng, 6, d);
            let vp = symplectic_polar(&v, &s).unwrap();
            assert_eq!(v.dim() + vp.dim(), 6);
            assert!(symplectic_polar(&vp, &s).unwrap().same_span(&v));
            assert_eq!(polar(&v).dim() + d, 6);
        }
    }

    #[test]
    fn predicate_examples() {
        let s1 = SymplecticSpace::standard(1);
        let line = Subspace::new(2, &[e(2, 0)]).unwrap();
        assert!(is_lagrangian(&line, &s1).unwrap());
        let s2 = SymplecticSpace::standard(2);
        let q_plane = Subspace::new(4, &[e(4, 0), e(4, 1)]).unwrap();
        assert!(is_lagrangian(&q_plane, &s2).unwrap());
        let mixed = Subspace::new(4, &[e(4, 0), e(4, 2)]).unwrap();
        assert!(!is_isotropic(&mixed, &s2).unwrap());
        let hyper = Subspace::new(4, &[e(4, 0), e(4, 1), e(4, 2)]).unwrap();
        assert!(is_coisotropic(&hyper, &s2).unwrap());
        let chr = characteristic_distribution(&hyper, &s2).unwrap();
        assert!(chr.same_span(&Subspace::new(4, &[e(4, 1)]).unwrap()));
        assert!(characteristic_distribution(&line.clone(), &s1).is_ok());
        assert!(matches!(
            characteristic_distribution(&Subspace::new(4, &[e(4, 0)]).unwrap(), &s2),
            Err(Error::NotCoisotropic)
        ));
    }

    #[test]
    fn product_form_examples() {
        let s = SymplecticSpace::standard(1);
        let prod = product_form(&s, &s);
        let m = prod.matrix();
        assert_eq!(m.view((0, 0), (2, 2)), s.matrix().view((0, 0), (2, 2)));
        assert_eq!(m.view((2, 2), (2, 2)).into_owned(), -s.matrix());
        let diag = linear_graph(&DMatrix::identity(2, 2));
        assert!(is_lagrangian(&diag, &prod).unwrap());
        let scaling = linear_graph(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]));
        assert!(!is_lagrangian(&scaling, &prod).unwrap());
        assert!(is_lagrangian(&linear_graph(&lift_matrix(3.0)), &prod).unwrap());
    }

    #[test]
    fn composition_examples() {
        let mut rng = Sampler::new(14);
        let g = random_subspace(&mut rng, 4, 2);
        let id = linear_graph(&DMatrix::identity(2, 2));
        assert!(compose_linear_relations(&id, &g, 2).unwrap().same_span(&g));
        assert!(compose_linear_relations(&g, &id, 2).unwrap().same_span(&g));

        let composed = compose_linear_relations(
            &linear_graph(&lift_matrix(3.0)),
            &linear_graph(&lift_matrix(2.0)),
            2,
        )
        .unwrap();
        assert!(composed.same_span(&linear_graph(&lift_matrix(6.0))));
    }

    #[test]
    fn reduction_composes_to_lagrangian() {
        // C = {p2 = 0} in R⁴ (q1, q2, p1, p2), reduced along e_{q2} to R² (q1, p1).
        // Reduction graph R = {((q1, p1), x) : x ∈ C}; its transpose goes back.
        let mut red = Vec::new();
        for x in [e(4, 0), e(4, 1), e(4, 2)] {
            let image = [x[0], x[2]];
            red.push(
                image
                    .iter()
                    .copied()
                    .chain(x.iter().copied())
                    .collect::<Vec<_>>(),
            );
        }
        let r = Subspace::new(6, &red).unwrap();
        let s2 = SymplecticSpace::standard(2);
        let s1 = SymplecticSpace::standard(1);
        assert!(is_lagrangian(&r, &product_form(&s1, &s2)).unwrap());
        let transpose: Vec<Vec<f64>> = r
            .basis_vectors()
            .iter()
            .map(|v| v[2..].iter().chain(&v[..2]).copied().collect())
            .collect();
        let rt = Subspace::span(6, &transpose).unwrap();
        let back = compose_linear_relations(&r, &rt, 4).unwrap();
        assert!(is_lagrangian(&back, &product_form(&s1, &s1)).unwrap());
        let round = compose_linear_relations(&rt, &r, 2).unwrap();
        assert!(is_lagrangian(&round, &product_form(&s2, &s2)).unwrap());
    }

    #[test]
    fn transpose_reproduces_domain() {
        let mut rng = Sampler::new(2);
        let a = DMatrix::from_fn(2, 2, |_, _| rng.scalar()) + DMatrix::identity(2, 2) * 3.0;
        let g = linear_graph(&a);
        let gt = Subspace::from_matrix(&{
            let mut m = DMatrix::zeros(4, 2);
            m.rows_mut(0, 2).copy_from(&g.basis().rows(2, 2));
            m.rows_mut(2, 2).copy_from(&g.basis().rows(0, 2));
            m
        });
        let round = compose_linear_relations(&gt, &g, 2).unwrap();
        assert!(round.same_span(&linear_graph(&DMatrix::identity(2, 2))));
    }

    #[test]
    fn annihilator_examples() {
        let g = SmoothMap::new(2, 1, |x| vec![x[1]]);
        let ann = annihilator_tc(&g, &[1.0, 0.0]).unwrap();
        assert!(ann.same_span(&Subspace::new(2, &[e(2, 1)]).unwrap()));
        let none = SmoothMap::new(2, 0, |_| Vec::new());
        assert_eq!(annihilator_tc(&none, &[1.0, 0.0]).unwrap().dim(), 0);
        let dup = SmoothMap::new(2, 2, |x| vec![x[1], x[1] + x[1]]);
        assert!(matches!(
            annihilator_tc(&dup, &[1.0, 0.0]),
            Err(Error::RankDeficient { rank: 1, .. })
        ));

        let mut rng = Sampler::new(6);
        for k in 0..4 {
            let rows: Vec<f64> = rng.vector(4 * k);
            let a = DMatrix::from_row_slice(k, 4, &rows);
            let g = SmoothMap::linear(a);
            assert_eq!(annihilator_tc(&g, &[0.0; 4]).unwrap().dim(), k);
        }
    }
}
