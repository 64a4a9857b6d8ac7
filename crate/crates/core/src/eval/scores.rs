//! Confusion-matrix accuracy measures.

use crate::error::{HsiError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    classes: usize,
    /// `counts[t * classes + p]`: truth class `t + 1`, predicted `p + 1`.
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_labels(truth: &[u16], predicted: &[u16], classes: u16) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(HsiError::shape(format!(
                "{} true labels vs {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        if truth.is_empty() {
            return Err(HsiError::shape("no samples to score"));
        }
        let c = classes as usize;
        let mut counts = vec![0u64; c * c];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t == 0 || p == 0 || t > classes || p > classes {
                return Err(HsiError::shape(format!(
                    "label pair ({t}, {p}) outside 1..={classes}"
                )));
            }
            counts[(t as usize - 1) * c + (p as usize - 1)] += 1;
        }
        Ok(Self { classes: c, counts })
    }

    pub fn get(&self, truth: u16, predicted: u16) -> u64 {
        self.counts[(truth as usize - 1) * self.classes + (predicted as usize - 1)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|i| self.counts[i * self.classes + i]).sum()
    }

    fn row_sum(&self, t: usize) -> u64 {
        self.counts[t * self.classes..(t + 1) * self.classes].iter().sum()
    }

    fn col_sum(&self, p: usize) -> u64 {
        (0..self.classes).map(|t| self.counts[t * self.classes + p]).sum()
    }
}

/// Scores of one trial. Accuracies are percentages; `kappa` is the raw
/// coefficient in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialScores {
    /// Recall per class `1..=c`; `None` when the class is absent from the truth.
    pub per_class: Vec<Option<f64>>,
    pub oa: f64,
    pub aa: f64,
    pub kappa: f64,
    pub confusion: ConfusionMatrix,
}

pub fn score(truth: &[u16], predicted: &[u16], classes: u16) -> Result<TrialScores> {
    let cm = ConfusionMatrix::from_labels(truth, predicted, classes)?;
    let c = classes as usize;
    let n = cm.total() as f64;
    let per_class: Vec<Option<f64>> = (0..c)
        .map(|t| {
            let row = cm.row_sum(t);
            (row > 0).then(|| 100.0 * cm.counts[t * c + t] as f64 / row as f64)
        })
        .collect();
    let present: Vec<f64> = per_class.iter().flatten().copied().collect();
    let aa = present.iter().sum::<f64>() / present.len() as f64;
    let p_o = cm.trace() as f64 / n;
    let p_e = (0..c)
        .map(|i| cm.row_sum(i) as f64 * cm.col_sum(i) as f64)
        .sum::<f64>()
        / (n * n);
    // Chance agreement of 1 means truth and prediction are both a single class.
    let kappa = if p_e < 1.0 {
        (p_o - p_e) / (1.0 - p_e)
    } else if p_o == 1.0 {
        1.0
    } else {
        0.0
    };
    Ok(TrialScores {
        per_class,
        oa: 100.0 * cm.trace() as f64 / n,
        aa,
        kappa,
        confusion: cm,
    })
}
