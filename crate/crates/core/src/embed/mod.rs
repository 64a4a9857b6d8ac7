//! Linear projections: the graph-embedding pencil solve shared by SSMRPE and
//! NPE, plus the PCA baseline.

mod pca;
mod pencil;
mod ssmrpe;

use nalgebra::{DMatrix, DVector};

use crate::cube::FeatureMatrix;
use crate::error::{HsiError, Result};
use crate::ssgraph::{build_weights, knn_euclidean, NodeData, ScdMode, WeightMatrix, WeightOptions};

pub use pca::pca_fit;
pub use pencil::{solve_pencil, PencilSolution};
pub use ssmrpe::{ssmrpe_fit, SsmrpeFit, SsmrpeParams};

/// Default ridge, relative to `trace(X X^T) / D`.
pub const DEFAULT_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// No projection; features are the spectra themselves.
    Raw,
    Pca,
    Npe,
    Ssmrpe,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Raw => "raw",
            Method::Pca => "pca",
            Method::Npe => "npe",
            Method::Ssmrpe => "ssmrpe",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = HsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Method::Raw),
            "pca" => Ok(Method::Pca),
            "npe" => Ok(Method::Npe),
            "ssmrpe" => Ok(Method::Ssmrpe),
            other => Err(HsiError::config(format!("unknown method '{other}'"))),
        }
    }
}

/// A fitted linear map `y = A^T (x - mean)`.
///
/// For graph methods the eigenvalues are ascending; for PCA they are the
/// explained variances in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub projection: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub mean: DVector<f64>,
    pub method: Method,
}

impl EmbeddingModel {
    pub fn input_dim(&self) -> usize {
        self.projection.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.ncols()
    }

    /// The identity map (used for the RAW baseline).
    pub fn identity(bands: usize) -> Self {
        Self {
            projection: DMatrix::identity(bands, bands),
            eigenvalues: vec![1.0; bands],
            mean: DVector::zeros(bands),
            method: Method::Raw,
        }
    }
}

pub(crate) fn column_mean(x: &DMatrix<f64>) -> DVector<f64> {
    let n = x.ncols().max(1) as f64;
    x.column_sum() / n
}

pub(crate) fn centered(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut c = x.clone();
    for mut col in c.column_iter_mut() {
        col -= mean;
    }
    c
}

/// `(I - W)^T (I - W)` for a row-stochastic weight matrix, so that
/// `sum_i |y_i - sum_j W_ij y_j|^2 = tr(Y M Y^T)`.
pub fn build_m(weights: &WeightMatrix) -> DMatrix<f64> {
    let mut r = -weights.to_dense();
    for i in 0..weights.n() {
        r[(i, i)] += 1.0;
    }
    r.tr_mul(&r)
}

/// `X M X^T` computed through the residual rows `x_i - sum_j W_ij x_j`
/// without forming the `n x n` matrix `M`.
pub fn reconstruction_scatter(x: &DMatrix<f64>, weights: &WeightMatrix) -> Result<DMatrix<f64>> {
    if x.ncols() != weights.n() {
        return Err(HsiError::shape(format!(
            "{} samples for {} weight rows",
            x.ncols(),
            weights.n()
        )));
    }
    let mut resid = x.clone();
    for i in 0..weights.n() {
        for &(j, w) in weights.row(i) {
            let xj = x.column(j).clone_owned();
            resid.column_mut(i).axpy(-w, &xj, 1.0);
        }
    }
    Ok(&resid * resid.transpose())
}

fn absolute_ridge(x: &DMatrix<f64>, relative: f64) -> Result<f64> {
    if !(relative >= 0.0 && relative.is_finite()) {
        return Err(HsiError::config(format!("ridge must be nonnegative, got {relative}")));
    }
    let trace: f64 = x.iter().map(|v| v * v).sum();
    Ok(relative * trace / x.nrows() as f64)
}

/// Generalized eigenvectors of `(X M X^T, X X^T + ridge I)` for the `d`
/// smallest eigenvalues. `x` is `D x n` and must already be centered;
/// `ridge` is absolute.
pub fn solve_projection(x: &DMatrix<f64>, m: &DMatrix<f64>, d: usize, ridge: f64) -> Result<EmbeddingModel> {
    if m.shape() != (x.ncols(), x.ncols()) {
        return Err(HsiError::shape(format!(
            "M is {:?} but X has {} columns",
            m.shape(),
            x.ncols()
        )));
    }
    let lhs = x * m * x.transpose();
    solve_from_scatter(x, lhs, d, ridge, Method::Ssmrpe)
}

fn solve_from_scatter(
    x: &DMatrix<f64>,
    lhs: DMatrix<f64>,
    d: usize,
    ridge: f64,
    method: Method,
) -> Result<EmbeddingModel> {
    let dim = x.nrows();
    let mut rhs = x * x.transpose();
    for i in 0..dim {
        rhs[(i, i)] += ridge;
    }
    let sol = solve_pencil(&lhs, &rhs, d)?;
    Ok(EmbeddingModel {
        projection: sol.vectors,
        eigenvalues: sol.values,
        mean: DVector::zeros(dim),
        method,
    })
}

/// Fits the projection for a weight matrix over the columns of `x` (raw,
/// uncentered samples). `ridge` is relative to `trace(X X^T) / D`.
pub fn fit_from_weights(
    x: &DMatrix<f64>,
    weights: &WeightMatrix,
    d: usize,
    ridge: f64,
    method: Method,
) -> Result<EmbeddingModel> {
    let mean = column_mean(x);
    let xc = centered(x, &mean);
    let lhs = reconstruction_scatter(&xc, weights)?;
    let ridge = absolute_ridge(&xc, ridge)?;
    let mut model = solve_from_scatter(&xc, lhs, d, ridge, method)?;
    model.mean = mean;
    Ok(model)
}

/// `Y = A^T (X - mean)`, one column per sample.
pub fn project(model: &EmbeddingModel, x: &DMatrix<f64>) -> Result<FeatureMatrix> {
    if x.nrows() != model.input_dim() {
        return Err(HsiError::shape(format!(
            "model expects {} bands, data has {}",
            model.input_dim(),
            x.nrows()
        )));
    }
    let xc = centered(x, &model.mean);
    FeatureMatrix::new(model.projection.tr_mul(&xc))
}

/// Result of a graph-embedding fit: the model and the graph weights it used.
#[derive(Debug, Clone)]
pub struct GraphFit {
    pub model: EmbeddingModel,
    pub weights: WeightMatrix,
}

/// Neighborhood preserving embedding: Euclidean k-NN on the columns of `x`,
/// affine reconstruction weights from plain differences, then the pencil
/// solve. `ridge` is relative.
pub fn npe_fit(x: &DMatrix<f64>, k: usize, d: usize, eps: f64, ridge: f64) -> Result<GraphFit> {
    let graph = knn_euclidean(x, k)?;
    let data = NodeData::plain(x.clone());
    let weights = build_weights(
        &data,
        &graph,
        &WeightOptions {
            eps,
            scd: ScdMode::Constant(1.0),
        },
    )?;
    let model = fit_from_weights(x, &weights, d, ridge, Method::Npe)?;
    Ok(GraphFit { model, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn m_examples() {
        let zero = WeightMatrix::from_rows(vec![vec![], vec![], vec![]]).unwrap();
        assert_eq!(build_m(&zero), DMatrix::identity(3, 3));
        let swap = WeightMatrix::from_rows(vec![vec![(1, 1.0)], vec![(0, 1.0)]]).unwrap();
        assert_eq!(build_m(&swap), DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]));
    }

    #[test]
    fn m_annihilates_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 12;
        let rows = (0..n)
            .map(|i| {
                let js: Vec<usize> = (1..4).map(|o| (i + o) % n).collect();
                let mut w: Vec<f64> = js.iter().map(|_| rng.random_range(-1.0..2.0)).collect();
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|v| *v /= s);
                js.into_iter().zip(w).collect()
            })
            .collect();
        let w = WeightMatrix::from_rows(rows).unwrap();
        let m = build_m(&w);
        assert!((&m - m.transpose()).amax() == 0.0);
        let ones = DVector::from_element(n, 1.0);
        assert!((&m * ones).amax() <= 1e-9);

        let x = rand_mat(&mut rng, 4, n);
        let direct = &x * &m * x.transpose();
        let via = reconstruction_scatter(&x, &w).unwrap();
        assert!((direct - via).amax() <= 1e-12);
    }

    #[test]
    fn orthonormal_rows_identity_pencil() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = rand_mat(&mut rng, 8, 3).qr().q();
        let x = q.transpose();
        let model = solve_projection(&x, &DMatrix::identity(8, 8), 3, 0.0).unwrap();
        for l in &model.eigenvalues {
            assert!((l - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn residuals_and_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = rand_mat(&mut rng, 5, 40);
        let b = rand_mat(&mut rng, 40, 40);
        let m = b.tr_mul(&b);
        let ridge = 1e-3;
        let model = solve_projection(&x, &m, 3, ridge).unwrap();
        let lhs = &x * &m * x.transpose();
        let rhs = &x * x.transpose() + DMatrix::identity(5, 5) * ridge;
        for (c, lam) in model.eigenvalues.iter().enumerate() {
            let a = model.projection.column(c);
            let r = &lhs * a - (&rhs * a) * *lam;
            assert!(r.norm() <= 1e-8 * lhs.norm());
            assert!(((a.transpose() * &rhs * a)[(0, 0)] - 1.0).abs() <= 1e-10);
            let big = a.iter().cloned().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
            assert!(big > 0.0);
        }
        assert!(model.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let objective = (model.projection.transpose() * &lhs * &model.projection).trace();
        let total: f64 = model.eigenvalues.iter().sum();
        assert!((objective - total).abs() <= 1e-8);
    }

    #[test]
    fn solve_errors() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, -1.0]);
        let m = DMatrix::identity(2, 2);
        assert!(matches!(solve_projection(&x, &m, 1, 0.0), Err(HsiError::Singular(_))));
        assert!(matches!(solve_projection(&x, &m, 3, 1.0), Err(HsiError::Config(_))));
        assert!(matches!(solve_projection(&x, &m, 0, 1.0), Err(HsiError::Config(_))));
        assert!(solve_projection(&x, &DMatrix::identity(3, 3), 1, 1.0).is_err());
    }

    #[test]
    fn project_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = rand_mat(&mut rng, 3, 7);
        let id = EmbeddingModel::identity(3);
        assert_eq!(project(&id, &x).unwrap().values(), &x);

        let model = EmbeddingModel {
            projection: rand_mat(&mut rng, 3, 2),
            eigenvalues: vec![0.1, 0.2],
            mean: DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0)),
            method: Method::Npe,
        };
        let y = project(&model, &x).unwrap();
        for c in 0..7 {
            for r in 0..2 {
                let mut s = 0.0;
                for b in 0..3 {
                    s += model.projection[(b, r)] * (x[(b, c)] - model.mean[b]);
                }
                assert!((y.values()[(r, c)] - s).abs() <= 1e-12);
            }
        }
        assert!(project(&model, &rand_mat(&mut rng, 4, 2)).is_err());
    }

    #[test]
    fn single_point_projects_to_zero() {
        let x = DMatrix::from_column_slice(3, 1, &[0.3, 0.2, 0.9]);
        let mean = column_mean(&x);
        let model = EmbeddingModel {
            projection: DMatrix::identity(3, 2),
            eigenvalues: vec![0.0, 0.0],
            mean,
            method: Method::Pca,
        };
        assert!(project(&model, &x).unwrap().values().amax() == 0.0);
    }

    #[test]
    fn npe_collinear_middle_point() {
        let x = DMatrix::from_column_slice(2, 3, &[0.0, 0.0, 1.0, 1.0, 2.0, 2.0]);
        // Gram and scatter matrices are rank one here; the default regularizers resolve them.
        let fit = npe_fit(&x, 2, 1, crate::ssgraph::DEFAULT_EPS, DEFAULT_RIDGE).unwrap();
        let w = &fit.weights;
        let mut recon = DVector::zeros(2);
        for &(j, v) in w.row(1) {
            recon += x.column(j) * v;
        }
        assert!((recon - x.column(1)).norm() <= 1e-12);
        assert!((w.get(1, 0) - 0.5).abs() <= 1e-12);
        assert!((w.get(1, 2) - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn npe_centering_and_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = rand_mat(&mut rng, 6, 30).add_scalar(3.0);
        let fit = npe_fit(&x, 5, 3, 1e-3, 1e-6).unwrap();
        let y = project(&fit.model, &x).unwrap();
        assert!(y.values().column_sum().amax() <= 1e-8);
        let xc = centered(&x, &fit.model.mean);
        let lhs = &xc * build_m(&fit.weights) * xc.transpose();
        let ridge = 1e-6 * xc.norm_squared() / 6.0;
        let rhs = &xc * xc.transpose() + DMatrix::identity(6, 6) * ridge;
        for (c, lam) in fit.model.eigenvalues.iter().enumerate() {
            let a = fit.model.projection.column(c);
            let r = &lhs * a - (&rhs * a) * *lam;
            assert!(r.norm() <= 1e-8 * lhs.norm());
        }
    }

    #[test]
    fn method_parse() {
        assert_eq!("SSMRPE".parse::<Method>().unwrap(), Method::Ssmrpe);
        assert!("lda".parse::<Method>().is_err());
    }
}
