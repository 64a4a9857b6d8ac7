//! Repeated split / fit / project / 1-NN trials and the parameter sweep.

use rayon::prelude::*;

use super::classify::nn_classify;
use super::scores::{score, TrialScores};
use super::split::{split_per_class, Split, SplitSpec};
use crate::cube::{FeatureMatrix, HyperCube, LabelRaster};
use crate::embed::{npe_fit, pca_fit, project, ssmrpe_fit, EmbeddingModel, Method, SsmrpeParams};
use crate::error::{HsiError, Result};
use crate::metrics::SscdContext;
use crate::wmf::FilterConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    /// Parameters shared by all methods; PCA reads only `d`, NPE ignores
    /// the filter, and RAW ignores everything.
    pub params: SsmrpeParams,
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub class: u16,
    pub train: usize,
    pub test: usize,
    pub accuracy: Stat,
}

/// Aggregated scores over all trials, in percent (kappa scaled by 100).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub method: Method,
    pub classes: Vec<ClassRow>,
    pub oa: Stat,
    pub aa: Stat,
    pub kappa: Stat,
    pub repeats: usize,
}

impl MetricsReport {
    pub fn from_trials(method: Method, trials: &[Trial]) -> Result<Self> {
        let first = trials
            .first()
            .ok_or_else(|| HsiError::config("no trials to aggregate"))?;
        let classes = first
            .split
            .counts
            .iter()
            .map(|c| {
                let accs: Vec<f64> = trials
                    .iter()
                    .filter_map(|t| t.scores.per_class[c.class as usize - 1])
                    .collect();
                if accs.len() < trials.len() {
                    log::info!(
                        "class {} absent from {} test split(s); averaged over the rest",
                        c.class,
                        trials.len() - accs.len()
                    );
                }
                ClassRow {
                    class: c.class,
                    train: c.train,
                    test: c.test,
                    accuracy: Stat::of(&accs),
                }
            })
            .collect();
        let pick = |f: fn(&TrialScores) -> f64| Stat::of(&trials.iter().map(|t| f(&t.scores)).collect::<Vec<_>>());
        Ok(Self {
            method,
            classes,
            oa: pick(|s| s.oa),
            aa: pick(|s| s.aa),
            kappa: pick(|s| 100.0 * s.kappa),
            repeats: trials.len(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub split: Split,
    /// Aligned with `split.test`.
    pub predictions: Vec<u16>,
    pub scores: TrialScores,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub report: MetricsReport,
    pub trials: Vec<Trial>,
}

/// Per-cube state shared by every trial of one configuration.
pub struct Prepared<'a> {
    cube: &'a HyperCube,
    ctx: Option<SscdContext>,
}

impl<'a> Prepared<'a> {
    pub fn new(cube: &'a HyperCube, cfg: &MethodConfig) -> Result<Self> {
        cfg.params.filter.validate()?;
        let ctx = match cfg.method {
            Method::Ssmrpe => Some(SscdContext::new(cube.clone(), cfg.params.filter)?),
            _ => None,
        };
        Ok(Self { cube, ctx })
    }

    pub fn cube(&self) -> &'a HyperCube {
        self.cube
    }

    fn reuse(cube: &'a HyperCube, ctx: Option<SscdContext>) -> Self {
        Self { cube, ctx }
    }
}

/// A fitted embedding together with the spectra it consumes.
#[derive(Debug, Clone)]
pub struct FittedEmbedding {
    pub model: EmbeddingModel,
    /// Project WMF-filtered spectra instead of raw ones.
    pub filtered_input: bool,
}

impl FittedEmbedding {
    /// Projected features of `pixels`, one column each.
    pub fn features(&self, prepared: &Prepared<'_>, pixels: &[usize]) -> Result<FeatureMatrix> {
        if self.model.method == Method::Raw {
            return FeatureMatrix::new(prepared.cube.columns(pixels));
        }
        let source = match (&prepared.ctx, self.filtered_input) {
            (Some(ctx), true) => ctx.filtered(),
            (None, true) => return Err(HsiError::config("filtered projection needs a filtered context")),
            (_, false) => prepared.cube,
        };
        project(&self.model, &source.columns(pixels))
    }
}

/// Fits the embedding on the `train` pixels. No labels are involved.
pub fn fit_embedding(prepared: &Prepared<'_>, cfg: &MethodConfig, train: &[usize]) -> Result<FittedEmbedding> {
    let cube = prepared.cube;
    let p = &cfg.params;
    let plain = |model| FittedEmbedding {
        model,
        filtered_input: false,
    };
    match cfg.method {
        Method::Raw => Ok(plain(EmbeddingModel::identity(cube.bands()))),
        Method::Pca => Ok(plain(pca_fit(&cube.columns(train), p.d)?)),
        Method::Npe => Ok(plain(npe_fit(&cube.columns(train), p.k, p.d, p.eps, p.ridge)?.model)),
        Method::Ssmrpe => {
            let ctx = prepared
                .ctx
                .as_ref()
                .ok_or_else(|| HsiError::config("SSMRPE needs a filtered context"))?;
            let fit = ssmrpe_fit(ctx, train, p)?;
            Ok(FittedEmbedding {
                model: fit.model,
                filtered_input: fit.project_filtered,
            })
        }
    }
}

/// Fits on `train` and returns train and test features.
pub fn fit_features(
    prepared: &Prepared<'_>,
    cfg: &MethodConfig,
    train: &[usize],
    test: &[usize],
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let fitted = fit_embedding(prepared, cfg, train)?;
    Ok((fitted.features(prepared, train)?, fitted.features(prepared, test)?))
}

fn run_trial(prepared: &Prepared<'_>, labels: &LabelRaster, cfg: &MethodConfig, spec: &SplitSpec, trial: usize) -> Result<Trial> {
    let split = split_per_class(labels, spec, trial)?;
    let (ftr, fte) = fit_features(prepared, cfg, &split.train, &split.test)?;
    let train_labels: Vec<u16> = split.train.iter().map(|&i| labels.get(i)).collect();
    let predictions = nn_classify(&ftr, &train_labels, &fte)?;
    let truth: Vec<u16> = split.test.iter().map(|&i| labels.get(i)).collect();
    let scores = score(&truth, &predictions, labels.classes())?;
    Ok(Trial {
        split,
        predictions,
        scores,
    })
}

pub fn run_prepared(
    prepared: &Prepared<'_>,
    labels: &LabelRaster,
    cfg: &MethodConfig,
    spec: &SplitSpec,
) -> Result<Experiment> {
    labels.matches(prepared.cube)?;
    spec.validate()?;
    let trials = (0..spec.repeats)
        .into_par_iter()
        .map(|t| run_trial(prepared, labels, cfg, spec, t))
        .collect::<Result<Vec<_>>>()?;
    let report = MetricsReport::from_trials(cfg.method, &trials)?;
    Ok(Experiment { report, trials })
}

pub fn run_experiment(cube: &HyperCube, labels: &LabelRaster, cfg: &MethodConfig, spec: &SplitSpec) -> Result<Experiment> {
    let prepared = Prepared::new(cube, cfg)?;
    run_prepared(&prepared, labels, cfg, spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub w: usize,
    pub k: usize,
    pub oa: Stat,
    pub aa: Stat,
    pub kappa: Stat,
}

/// Runs `cfg` for every `(w, k)` pair, `w` outermost.
pub fn sweep(
    cube: &HyperCube,
    labels: &LabelRaster,
    ws: &[usize],
    ks: &[usize],
    cfg: &MethodConfig,
    spec: &SplitSpec,
) -> Result<Vec<SweepCell>> {
    if ws.is_empty() || ks.is_empty() {
        return Err(HsiError::config("sweep grids must be nonempty"));
    }
    let mut cells = Vec::with_capacity(ws.len() * ks.len());
    for &w in ws {
        let mut cell_cfg = *cfg;
        cell_cfg.params.filter = FilterConfig::new(w, cfg.params.filter.gamma0)?;
        let ctx = match cfg.method {
            Method::Ssmrpe => Some(SscdContext::new(cube.clone(), cell_cfg.params.filter)?),
            _ => None,
        };
        let prepared = Prepared::reuse(cube, ctx);
        for &k in ks {
            cell_cfg.params.k = k;
            let r = run_prepared(&prepared, labels, &cell_cfg, spec)?.report;
            cells.push(SweepCell {
                w,
                k,
                oa: r.oa,
                aa: r.aa,
                kappa: r.kappa,
            });
        }
    }
    Ok(cells)
}
