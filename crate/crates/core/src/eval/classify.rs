use rayon::prelude::*;

use crate::cube::FeatureMatrix;
use crate::error::{HsiError, Result};

/// 1-NN under Euclidean distance. Ties go to the lower training index.
pub fn nn_classify(train: &FeatureMatrix, train_labels: &[u16], test: &FeatureMatrix) -> Result<Vec<u16>> {
    if train.count() == 0 {
        return Err(HsiError::config("1-NN needs at least one training sample"));
    }
    if train_labels.len() != train.count() {
        return Err(HsiError::shape(format!(
            "{} training labels for {} samples",
            train_labels.len(),
            train.count()
        )));
    }
    if test.count() > 0 && test.dim() != train.dim() {
        return Err(HsiError::shape(format!(
            "test features have dimension {}, training {}",
            test.dim(),
            train.dim()
        )));
    }
    let tr = train.values();
    let te = test.values();
    Ok((0..test.count())
        .into_par_iter()
        .map(|t| {
            let x = te.column(t);
            let mut best = f64::INFINITY;
            let mut label = train_labels[0];
            for (j, &l) in train_labels.iter().enumerate() {
                let d = (tr.column(j) - x).norm_squared();
                if d < best {
                    best = d;
                    label = l;
                }
            }
            label
        })
        .collect())
}
