//! Python bindings. Spectra and feature vectors cross the boundary as plain
//! lists: a sample matrix is a list of rows, one row per sample.

use std::path::PathBuf;

use nalgebra::DMatrix;

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ssmrpe::cube::{FeatureMatrix, HyperCube, LabelRaster};
use ssmrpe::embed::{self, EmbeddingModel, Method, SsmrpeParams};
use ssmrpe::eval::{self, MethodConfig, SplitMode, SplitSpec, SynthConfig};
use ssmrpe::metrics::SscdContext;
use ssmrpe::ssgraph::{self, ScdMode};
use ssmrpe::wmf::{self, FilterConfig};
use ssmrpe::HsiError;

fn py_err(e: HsiError) -> PyErr {
    match e {
        HsiError::Singular(_) => PyArithmeticError::new_err(e.to_string()),
        HsiError::Io(_) | HsiError::Format { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Rows (one per sample) to a `dim x n` column matrix.
fn samples_to_matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let dim = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("all samples must have the same length"));
    }
    Ok(DMatrix::from_fn(dim, rows.len(), |r, c| rows[c][r]))
}

fn matrix_to_samples(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

fn parse_method(name: &str) -> PyResult<Method> {
    name.parse().map_err(py_err)
}

#[pyclass(name = "HyperCube", module = "ssmrpe_py", frozen)]
struct PyHyperCube {
    inner: HyperCube,
}

#[pymethods]
impl PyHyperCube {
    /// `data` is pixel-interleaved, row-major: pixel `(p, q)` band `b` at
    /// `(p * width + q) * bands + b`.
    #[new]
    fn new(height: usize, width: usize, bands: usize, data: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: HyperCube::new(height, width, bands, data).map_err(py_err)?,
        })
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        (self.inner.height(), self.inner.width(), self.inner.bands())
    }

    fn pixel(&self, index: usize) -> PyResult<Vec<f64>> {
        self.inner.check_index(index).map_err(py_err)?;
        Ok(self.inner.pixel(index).to_vec())
    }

    fn pixels(&self, indices: Vec<usize>) -> PyResult<Vec<Vec<f64>>> {
        for &i in &indices {
            self.inner.check_index(i).map_err(py_err)?;
        }
        Ok(indices.iter().map(|&i| self.inner.pixel(i).to_vec()).collect())
    }

    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "HyperCube(height={}, width={}, bands={})",
            self.inner.height(),
            self.inner.width(),
            self.inner.bands()
        )
    }
}

#[pyclass(name = "LabelRaster", module = "ssmrpe_py", frozen)]
struct PyLabelRaster {
    inner: LabelRaster,
}

#[pymethods]
impl PyLabelRaster {
    #[new]
    fn new(height: usize, width: usize, classes: u16, labels: Vec<u16>) -> PyResult<Self> {
        Ok(Self {
            inner: LabelRaster::new(height, width, classes, labels).map_err(py_err)?,
        })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.height(), self.inner.width())
    }

    #[getter]
    fn classes(&self) -> u16 {
        self.inner.classes()
    }

    fn labels(&self) -> Vec<u16> {
        self.inner.labels().to_vec()
    }
}

#[pyclass(name = "SscdContext", module = "ssmrpe_py", frozen)]
struct PySscdContext {
    inner: SscdContext,
}

#[pymethods]
impl PySscdContext {
    #[new]
    #[pyo3(signature = (cube, w, gamma0 = wmf::DEFAULT_GAMMA0))]
    fn new(cube: PyRef<'_, PyHyperCube>, w: usize, gamma0: f64) -> PyResult<Self> {
        let cfg = FilterConfig::new(w, gamma0).map_err(py_err)?;
        Ok(Self {
            inner: SscdContext::new(cube.inner.clone(), cfg).map_err(py_err)?,
        })
    }

    fn sscd(&self, i: usize, j: usize) -> PyResult<f64> {
        ssmrpe::metrics::sscd(&self.inner, i, j).map_err(py_err)
    }

    fn scd(&self, i: usize, j: usize) -> PyResult<f64> {
        self.inner.raw().check_index(i).map_err(py_err)?;
        self.inner.raw().check_index(j).map_err(py_err)?;
        Ok(self.inner.scd(i, j))
    }

    fn filtered(&self) -> PyHyperCube {
        PyHyperCube {
            inner: self.inner.filtered().clone(),
        }
    }
}

#[pyclass(name = "EmbeddingModel", module = "ssmrpe_py", frozen)]
struct PyEmbeddingModel {
    inner: EmbeddingModel,
    filtered_input: bool,
}

#[pymethods]
impl PyEmbeddingModel {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.name()
    }

    /// `D` rows of `d` projection coefficients.
    #[getter]
    fn projection(&self) -> Vec<Vec<f64>> {
        self.inner
            .projection
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues.clone()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean.iter().copied().collect()
    }

    /// Whether the model expects WMF-filtered spectra as input.
    #[getter]
    fn filtered_input(&self) -> bool {
        self.filtered_input
    }

    fn project(&self, samples: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let y = embed::project(&self.inner, &samples_to_matrix(&samples)?).map_err(py_err)?;
        Ok(matrix_to_samples(y.values()))
    }
}

fn model(inner: EmbeddingModel, filtered_input: bool) -> PyEmbeddingModel {
    PyEmbeddingModel { inner, filtered_input }
}

#[pyfunction]
#[pyo3(signature = (cube, w, gamma0 = wmf::DEFAULT_GAMMA0))]
fn filter_cube(cube: PyRef<'_, PyHyperCube>, w: usize, gamma0: f64) -> PyResult<PyHyperCube> {
    let cfg = FilterConfig::new(w, gamma0).map_err(py_err)?;
    Ok(PyHyperCube {
        inner: wmf::filter_cube(&cube.inner, &cfg).map_err(py_err)?,
    })
}

/// Affine reconstruction weights for a `k x k` Gram matrix given as rows.
#[pyfunction]
#[pyo3(signature = (z, eps = ssgraph::DEFAULT_EPS))]
fn reconstruction_weights(z: Vec<Vec<f64>>, eps: f64) -> PyResult<Vec<f64>> {
    let k = z.len();
    if z.iter().any(|r| r.len() != k) {
        return Err(PyValueError::new_err("z must be square"));
    }
    let m = DMatrix::from_fn(k, k, |r, c| z[r][c]);
    Ok(ssgraph::reconstruction_weights(&m, eps).map_err(py_err)?.iter().copied().collect())
}

#[pyfunction]
fn pca_fit(samples: Vec<Vec<f64>>, d: usize) -> PyResult<PyEmbeddingModel> {
    let m = embed::pca_fit(&samples_to_matrix(&samples)?, d).map_err(py_err)?;
    Ok(model(m, false))
}

#[pyfunction]
#[pyo3(signature = (samples, k, d, eps = ssgraph::DEFAULT_EPS, ridge = embed::DEFAULT_RIDGE))]
fn npe_fit(samples: Vec<Vec<f64>>, k: usize, d: usize, eps: f64, ridge: f64) -> PyResult<PyEmbeddingModel> {
    let fit = embed::npe_fit(&samples_to_matrix(&samples)?, k, d, eps, ridge).map_err(py_err)?;
    Ok(model(fit.model, false))
}

/// Fits on the pixels `nodes` (flat indices) of the context's cube.
#[pyfunction]
#[pyo3(signature = (ctx, nodes, k, d, eps = ssgraph::DEFAULT_EPS, ridge = embed::DEFAULT_RIDGE, project_filtered = false, scd_const = None))]
#[allow(clippy::too_many_arguments)]
fn ssmrpe_fit(
    ctx: PyRef<'_, PySscdContext>,
    nodes: Vec<usize>,
    k: usize,
    d: usize,
    eps: f64,
    ridge: f64,
    project_filtered: bool,
    scd_const: Option<f64>,
) -> PyResult<PyEmbeddingModel> {
    let params = SsmrpeParams {
        filter: *ctx.inner.config(),
        k,
        d,
        eps,
        ridge,
        project_filtered,
        scd: scd_const.map_or(ScdMode::Coordinates, ScdMode::Constant),
    };
    let fit = embed::ssmrpe_fit(&ctx.inner, &nodes, &params).map_err(py_err)?;
    Ok(model(fit.model, fit.project_filtered))
}

#[pyfunction]
fn nn_classify(train: Vec<Vec<f64>>, train_labels: Vec<u16>, test: Vec<Vec<f64>>) -> PyResult<Vec<u16>> {
    let tr = FeatureMatrix::new(samples_to_matrix(&train)?).map_err(py_err)?;
    let te = FeatureMatrix::new(samples_to_matrix(&test)?).map_err(py_err)?;
    eval::nn_classify(&tr, &train_labels, &te).map_err(py_err)
}

/// OA and AA in percent, kappa as a coefficient, per-class recall (None
/// for classes absent from `truth`).
#[pyfunction]
fn score<'py>(py: Python<'py>, truth: Vec<u16>, predicted: Vec<u16>, classes: u16) -> PyResult<Bound<'py, PyDict>> {
    let s = eval::score(&truth, &predicted, classes).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("oa", s.oa)?;
    out.set_item("aa", s.aa)?;
    out.set_item("kappa", s.kappa)?;
    out.set_item("per_class", s.per_class)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (seed = 0, size = 32, bands = 20, classes = 4, noise = None, clutter = None))]
fn synthesize(
    seed: u64,
    size: usize,
    bands: usize,
    classes: u16,
    noise: Option<f64>,
    clutter: Option<f64>,
) -> PyResult<(PyHyperCube, PyLabelRaster)> {
    let base = SynthConfig::default();
    let cfg = SynthConfig {
        size,
        bands,
        classes,
        noise: noise.unwrap_or(base.noise),
        clutter: clutter.unwrap_or(base.clutter),
        ..base
    };
    let (cube, labels) = eval::synthesize(&cfg, seed).map_err(py_err)?;
    Ok((PyHyperCube { inner: cube }, PyLabelRaster { inner: labels }))
}

/// Repeated split / fit / 1-NN trials. Returns mean and population std of
/// OA, AA and kappa (all in percent).
#[pyfunction]
#[pyo3(signature = (cube, labels, method = "ssmrpe", w = 13, k = 20, d = 30, train_count = 20, seed = 0, repeats = 5))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    cube: PyRef<'_, PyHyperCube>,
    labels: PyRef<'_, PyLabelRaster>,
    method: &str,
    w: usize,
    k: usize,
    d: usize,
    train_count: usize,
    seed: u64,
    repeats: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = MethodConfig {
        method: parse_method(method)?,
        params: SsmrpeParams::new(w, k, d).map_err(py_err)?,
    };
    let spec = SplitSpec {
        mode: SplitMode::Count(train_count),
        seed,
        repeats,
    };
    let (cube, labels) = (&cube.inner, &labels.inner);
    let report = py
        .detach(|| eval::run_experiment(cube, labels, &cfg, &spec))
        .map_err(py_err)?
        .report;
    let out = PyDict::new(py);
    for (name, s) in [("oa", report.oa), ("aa", report.aa), ("kappa", report.kappa)] {
        out.set_item(name, (s.mean, s.std))?;
    }
    Ok(out)
}

#[pyfunction]
fn load_cube(path: PathBuf) -> PyResult<PyHyperCube> {
    Ok(PyHyperCube {
        inner: ssmrpe::io::load_cube(&path).map_err(py_err)?,
    })
}

#[pyfunction]
fn save_cube(cube: PyRef<'_, PyHyperCube>, path: PathBuf) -> PyResult<()> {
    ssmrpe::io::save_cube(&cube.inner, &path).map_err(py_err)
}

#[pyfunction]
fn load_labels(path: PathBuf) -> PyResult<PyLabelRaster> {
    Ok(PyLabelRaster {
        inner: ssmrpe::io::load_labels(&path).map_err(py_err)?,
    })
}

#[pyfunction]
fn save_labels(labels: PyRef<'_, PyLabelRaster>, path: PathBuf) -> PyResult<()> {
    ssmrpe::io::save_labels(&labels.inner, &path).map_err(py_err)
}

#[pymodule]
fn ssmrpe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHyperCube>()?;
    m.add_class::<PyLabelRaster>()?;
    m.add_class::<PySscdContext>()?;
    m.add_class::<PyEmbeddingModel>()?;
    m.add_function(wrap_pyfunction!(filter_cube, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruction_weights, m)?)?;
    m.add_function(wrap_pyfunction!(pca_fit, m)?)?;
    m.add_function(wrap_pyfunction!(npe_fit, m)?)?;
    m.add_function(wrap_pyfunction!(ssmrpe_fit, m)?)?;
    m.add_function(wrap_pyfunction!(nn_classify, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(load_cube, m)?)?;
    m.add_function(wrap_pyfunction!(save_cube, m)?)?;
    m.add_function(wrap_pyfunction!(load_labels, m)?)?;
    m.add_function(wrap_pyfunction!(save_labels, m)?)?;
    Ok(())
}
