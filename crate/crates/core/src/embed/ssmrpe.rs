//! The full SSMRPE fit: filter, SSCD neighbors, coordinate-scaled
//! reconstruction weights, pencil solve.

use nalgebra::DMatrix;

use super::{fit_from_weights, EmbeddingModel, Method, DEFAULT_RIDGE};
use crate::cube::HyperCube;
use crate::error::{HsiError, Result};
use crate::metrics::SscdContext;
use crate::ssgraph::{build_weights, knn_sscd_among, NeighborGraph, NodeData, ScdMode, WeightMatrix, WeightOptions, DEFAULT_EPS};
use crate::wmf::FilterConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsmrpeParams {
    pub filter: FilterConfig,
    pub k: usize,
    pub d: usize,
    /// Relative Gram regularizer.
    pub eps: f64,
    /// Relative pencil ridge.
    pub ridge: f64,
    /// Use filtered spectra (instead of raw) for the weights and projection.
    pub project_filtered: bool,
    pub scd: ScdMode,
}

impl SsmrpeParams {
    pub fn new(w: usize, k: usize, d: usize) -> Result<Self> {
        Ok(Self {
            filter: FilterConfig::with_window(w)?,
            k,
            d,
            eps: DEFAULT_EPS,
            ridge: DEFAULT_RIDGE,
            project_filtered: false,
            scd: ScdMode::Coordinates,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SsmrpeFit {
    pub model: EmbeddingModel,
    pub graph: NeighborGraph,
    pub weights: WeightMatrix,
    pub project_filtered: bool,
}

impl SsmrpeFit {
    /// The cube whose spectra this model consumes.
    pub fn source<'a>(&self, ctx: &'a SscdContext) -> &'a HyperCube {
        if self.project_filtered {
            ctx.filtered()
        } else {
            ctx.raw()
        }
    }

    /// Input spectra of the given pixels, ready for [`super::project`].
    pub fn inputs(&self, ctx: &SscdContext, pixels: &[usize]) -> DMatrix<f64> {
        self.source(ctx).columns(pixels)
    }
}

/// Fits SSMRPE with the graph built over `nodes` (flat pixel indices).
/// Windows and filtered spectra come from the whole cube in `ctx`.
pub fn ssmrpe_fit(ctx: &SscdContext, nodes: &[usize], params: &SsmrpeParams) -> Result<SsmrpeFit> {
    if ctx.config() != &params.filter {
        return Err(HsiError::config(
            "context was filtered with a different window or gamma0",
        ));
    }
    let graph = knn_sscd_among(ctx, nodes, params.k)?;
    let source = if params.project_filtered {
        ctx.filtered()
    } else {
        ctx.raw()
    };
    let data = NodeData::from_cube(source, nodes);
    let weights = build_weights(
        &data,
        &graph,
        &WeightOptions {
            eps: params.eps,
            scd: params.scd,
        },
    )?;
    let model = fit_from_weights(&data.samples, &weights, params.d, params.ridge, Method::Ssmrpe)?;
    Ok(SsmrpeFit {
        model,
        graph,
        weights,
        project_filtered: params.project_filtered,
    })
}
