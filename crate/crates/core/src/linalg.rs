//! Rank, null space and conditioning on top of nalgebra's SVD, plus a
//! small Gaussian elimination that works over any [`Scalar`].

use nalgebra::{DMatrix, DVector};

use crate::conventions::RANK_TOL;
use crate::jets::Scalar;

/// Singular values, padding wide matrices so the spectrum has `ncols` entries.
fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Vec::new();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

fn threshold(sv: &[f64]) -> f64 {
    let max = sv.iter().copied().fold(0.0, f64::max);
    RANK_TOL * max.max(1.0)
}

/// Numerical rank with threshold `RANK_TOL · max(1, σ_max)`.
pub fn rank(m: &DMatrix<f64>) -> usize {
    let sv = singular_values(m);
    let tol = threshold(&sv);
    sv.iter().filter(|s| **s > tol).count()
}

/// Orthonormal basis (as columns) of `{x : m x = 0}`.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // pad to at least square so V_t is complete
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(true, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let tol = threshold(&sv);
    let cols: Vec<DVector<f64>> = sv
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the column span, dropping numerically dependent columns.
pub fn column_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    // Images of the right singular vectors lie in the column space exactly,
    // unlike the computed left singular vectors on rank-deficient input.
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let tol = threshold(&sv);
    let cols: Vec<DVector<f64>> = sv
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > tol)
        .map(|(i, _)| m * v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&cols).qr().q()
}

/// `σ_max / σ_min`; infinite for singular or empty-spectrum input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `a x = b` by partial pivoting on the value slot. Returns `None`
/// when a pivot vanishes.
pub fn solve_generic<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let n = b.len();
    let mut m: Vec<Vec<S>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].value().abs().total_cmp(&m[j][col].value().abs()))?;
        if m[pivot][col].value().abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = m[col][col].recip();
        for row in (col + 1)..n {
            let factor = m[row][col] * inv;
            for k in col..n {
                let delta = factor * m[col][k];
                m[row][k] = m[row][k] - delta;
            }
            rhs[row] = rhs[row] - factor * rhs[col];
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc = acc - m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::MultiJet;

    #[test]
    fn null_space_of_wide_matrix_is_complete() {
        let m = DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0]);
        let ns = null_space(&m);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-12);
    }

    #[test]
    fn rank_and_condition() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(rank(&m), 1);
        assert!(condition_number(&m) > 1e12);
        assert_eq!(rank(&DMatrix::<f64>::identity(3, 3)), 3);
    }

    #[test]
    fn generic_solve_propagates_derivatives() {
        // [[x, 1], [0, 2]] · (u, w) = (3, 2)  =>  u = 2/x, du/dx = -2/x²
        let x = MultiJet::constant(2.0).perturbed(0, 1.0);
        let a = vec![
            vec![x, MultiJet::constant(1.0)],
            vec![MultiJet::constant(0.0), MultiJet::constant(2.0)],
        ];
        let b = vec![MultiJet::constant(3.0), MultiJet::constant(2.0)];
        let sol = solve_generic(&a, &b).unwrap();
        assert!((sol[0].value() - 1.0).abs() < 1e-15);
        assert!((sol[0].coeff(1) + 0.5).abs() < 1e-15);
        assert!(solve_generic(&[vec![0.0]], &[1.0]).is_none());
    }
}
