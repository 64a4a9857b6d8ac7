//! Seeded per-class train/test splits.
//!
//! Trial `t` of seed `s` draws from a ChaCha8 stream seeded with `s + t`.
//! Within each class (ascending class id) the labeled pixel indices, in
//! ascending order, are Fisher-Yates shuffled with `random_range` over `u32`
//! bounds and the first `n_i` become training samples. Both the generator and
//! the `u32` sampling are platform independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cube::LabelRaster;
use crate::error::{HsiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Ceil,
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitMode {
    /// Exactly this many training samples per class.
    Count(usize),
    /// `max(min, round(fraction * class_size))` training samples per class.
    Fraction {
        fraction: f64,
        rounding: Rounding,
        min: usize,
    },
}

impl SplitMode {
    pub fn fraction(fraction: f64) -> Self {
        SplitMode::Fraction {
            fraction,
            rounding: Rounding::Ceil,
            min: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub seed: u64,
    pub repeats: usize,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(HsiError::config("repeats must be at least 1"));
        }
        match self.mode {
            SplitMode::Count(0) => Err(HsiError::config("per-class training count must be at least 1")),
            SplitMode::Fraction { fraction, min, .. } if !(fraction > 0.0 && fraction < 1.0) || min == 0 => {
                Err(HsiError::config(format!(
                    "training fraction must lie in (0, 1) with min >= 1, got {fraction}, {min}"
                )))
            }
            _ => Ok(()),
        }
    }

    fn train_count(&self, class: u16, size: usize) -> Result<usize> {
        let n = match self.mode {
            SplitMode::Count(n) => n,
            SplitMode::Fraction {
                fraction,
                rounding,
                min,
            } => {
                let raw = fraction * size as f64;
                let r = match rounding {
                    Rounding::Ceil => raw.ceil(),
                    Rounding::Nearest => raw.round(),
                };
                (r as usize).max(min)
            }
        };
        if n >= size {
            return Err(HsiError::config(format!(
                "class {class} has {size} labeled samples, needs more than {n} for training"
            )));
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassCounts {
    pub class: u16,
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    /// Ascending flat indices.
    pub train: Vec<usize>,
    /// Ascending flat indices.
    pub test: Vec<usize>,
    /// Classes with at least one labeled pixel, ascending.
    pub counts: Vec<ClassCounts>,
}

pub fn split_per_class(labels: &LabelRaster, spec: &SplitSpec, trial: usize) -> Result<Split> {
    spec.validate()?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); labels.classes() as usize + 1];
    for (i, &l) in labels.labels().iter().enumerate() {
        if l > 0 {
            members[l as usize].push(i);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(trial as u64));
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut counts = Vec::new();
    for (class, idx) in members.iter_mut().enumerate().skip(1) {
        if idx.is_empty() {
            continue;
        }
        let class = class as u16;
        let n = spec.train_count(class, idx.len())?;
        for i in (1..idx.len()).rev() {
            let j = rng.random_range(0..=i as u32) as usize;
            idx.swap(i, j);
        }
        train.extend_from_slice(&idx[..n]);
        test.extend_from_slice(&idx[n..]);
        counts.push(ClassCounts {
            class,
            train: n,
            test: idx.len() - n,
        });
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train,
        test,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_by_ten() -> LabelRaster {
        let labels: Vec<u16> = (0..36).map(|i| if i < 30 { (i % 3 + 1) as u16 } else { 0 }).collect();
        LabelRaster::new(6, 6, 3, labels).unwrap()
    }

    fn spec(mode: SplitMode) -> SplitSpec {
        SplitSpec {
            mode,
            seed: 42,
            repeats: 1,
        }
    }

    #[test]
    fn counts_and_disjointness() {
        let labels = three_by_ten();
        let s = split_per_class(&labels, &spec(SplitMode::Count(2)), 0).unwrap();
        assert_eq!(s.train.len(), 6);
        assert_eq!(s.test.len(), 24);
        for class in 1..=3u16 {
            let n = s.train.iter().filter(|&&i| labels.get(i) == class).count();
            assert_eq!(n, 2);
        }
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn leave_one_out_per_class() {
        let labels = three_by_ten();
        let s = split_per_class(&labels, &spec(SplitMode::Count(9)), 3).unwrap();
        assert_eq!(s.test.len(), 3);
        assert!(matches!(
            split_per_class(&labels, &spec(SplitMode::Count(10)), 0),
            Err(HsiError::Config(msg)) if msg.contains("class 1")
        ));
    }

    #[test]
    fn deterministic_per_seed_and_trial() {
        let labels = three_by_ten();
        let sp = spec(SplitMode::Count(3));
        let a = split_per_class(&labels, &sp, 1).unwrap();
        assert_eq!(a, split_per_class(&labels, &sp, 1).unwrap());
        assert_ne!(a.train, split_per_class(&labels, &sp, 2).unwrap().train);
    }

    #[test]
    fn fraction_rounding() {
        let labels = three_by_ten();
        let s = split_per_class(&labels, &spec(SplitMode::fraction(0.01)), 0).unwrap();
        assert!(s.counts.iter().all(|c| c.train == 1 && c.test == 9));
        let s = split_per_class(&labels, &spec(SplitMode::fraction(0.25)), 0).unwrap();
        assert!(s.counts.iter().all(|c| c.train == 3));
        let nearest = SplitMode::Fraction {
            fraction: 0.25,
            rounding: Rounding::Nearest,
            min: 1,
        };
        let s = split_per_class(&labels, &spec(nearest), 0).unwrap();
        assert!(s.counts.iter().all(|c| c.train == 3));
        assert!(split_per_class(&labels, &spec(SplitMode::fraction(1.5)), 0).is_err());
    }
}
