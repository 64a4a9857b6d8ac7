use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{HsiError, Result};

/// Pivots of the Cholesky factor below this fraction of the largest
/// diagonal entry are treated as rank deficiency.
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PencilSolution {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `c` pairs with `values[c]`, scaled so `v^T B v = 1`, with its
    /// largest-magnitude entry positive.
    pub vectors: DMatrix<f64>,
}

/// The `d` smallest eigenpairs of the symmetric-definite pencil
/// `A v = lambda B v`, by reduction to a standard symmetric problem through
/// the Cholesky factor of `B`.
pub fn solve_pencil(a: &DMatrix<f64>, b: &DMatrix<f64>, d: usize) -> Result<PencilSolution> {
    let dim = a.nrows();
    if a.shape() != (dim, dim) || b.shape() != (dim, dim) {
        return Err(HsiError::shape(format!(
            "pencil matrices must be square and equal, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if d == 0 || d > dim {
        return Err(HsiError::config(format!(
            "embedding dimension d = {d} must satisfy 1 <= d <= {dim}"
        )));
    }
    let b_sym = (b + b.transpose()) * 0.5;
    let max_diag = b_sym.diagonal().amax();
    let chol = b_sym
        .clone()
        .cholesky()
        .ok_or_else(|| HsiError::Singular("right-hand matrix is not positive definite; use a ridge".into()))?;
    let l = chol.l();
    let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    if min_pivot.is_nan() || min_pivot <= PIVOT_TOL * max_diag {
        return Err(HsiError::Singular(
            "right-hand matrix is numerically singular; use a ridge".into(),
        ));
    }

    let a_sym = (a + a.transpose()) * 0.5;
    // C = L^-1 A L^-T
    let y = l
        .solve_lower_triangular(&a_sym)
        .ok_or_else(|| HsiError::Singular("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| HsiError::Singular("triangular solve failed".into()))?;
    let c = (&c + c.transpose()) * 0.5;

    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .total_cmp(&eig.eigenvalues[j])
            .then(i.cmp(&j))
    });
    order.truncate(d);

    let mut vectors = DMatrix::zeros(dim, d);
    let mut values = Vec::with_capacity(d);
    for (col, &idx) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(idx).clone_owned();
        let mut x = l
            .tr_solve_lower_triangular(&v)
            .ok_or_else(|| HsiError::Singular("back substitution failed".into()))?;
        let scale = (x.transpose() * &b_sym * &x)[(0, 0)].sqrt();
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(HsiError::Singular("degenerate eigenvector".into()));
        }
        x /= scale;
        fix_sign(x.as_mut_slice());
        vectors.set_column(col, &x);
        values.push(eig.eigenvalues[idx]);
    }
    Ok(PencilSolution { values, vectors })
}

/// Flips `v` so its largest-magnitude entry (first on ties) is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
