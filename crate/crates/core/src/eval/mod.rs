//! Classification protocol: per-class random splits, embedding fit on the
//! training pixels only, 1-NN on the projected features, and OA / AA / kappa.

mod classify;
mod experiment;
mod scores;
mod split;
mod synth;

pub use classify::nn_classify;
pub use experiment::{
    fit_embedding, fit_features, run_experiment, run_prepared, sweep, ClassRow, Experiment, FittedEmbedding, MethodConfig, MetricsReport, Prepared,
    Stat, SweepCell, Trial,
};
pub use scores::{score, ConfusionMatrix, TrialScores};
pub use split::{split_per_class, ClassCounts, Rounding, Split, SplitMode, SplitSpec};
pub use synth::{synthesize, SynthConfig};
