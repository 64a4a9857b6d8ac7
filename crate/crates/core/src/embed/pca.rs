use nalgebra::{DMatrix, SymmetricEigen};

use super::pencil::fix_sign;
use super::{centered, column_mean, EmbeddingModel, Method};
use crate::error::{HsiError, Result};

/// Top-`d` principal axes of the sample covariance of the columns of `x`.
pub fn pca_fit(x: &DMatrix<f64>, d: usize) -> Result<EmbeddingModel> {
    let (dim, n) = x.shape();
    if d == 0 || d > dim {
        return Err(HsiError::config(format!(
            "embedding dimension d = {d} must satisfy 1 <= d <= {dim}"
        )));
    }
    if n < 2 {
        return Err(HsiError::config("PCA needs at least two samples"));
    }
    let mean = column_mean(x);
    let xc = centered(x, &mean);
    let cov = (&xc * xc.transpose()) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .total_cmp(&eig.eigenvalues[i])
            .then(i.cmp(&j))
    });
    let mut projection = DMatrix::zeros(dim, d);
    let mut eigenvalues = Vec::with_capacity(d);
    for (col, &idx) in order.iter().take(d).enumerate() {
        let mut v = eig.eigenvectors.column(idx).clone_owned();
        fix_sign(v.as_mut_slice());
        projection.set_column(col, &v);
        eigenvalues.push(eig.eigenvalues[idx].max(0.0));
    }
    Ok(EmbeddingModel {
        projection,
        eigenvalues,
        mean,
        method: Method::Pca,
    })
}
