use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Train / test / validation proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub test: f64,
    pub validation: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.6,
            test: 0.2,
            validation: 0.2,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.test, self.validation];
        if parts.iter().any(|&f| !(f > 0.0 && f.is_finite())) {
            return Err(Error::Config(format!(
                "split fractions must all be positive, got {parts:?}"
            )));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions must sum to 1, got {parts:?}")));
        }
        Ok(())
    }

    /// Sizes of the three parts for `n` patterns; remainders go to validation.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let train = (self.train * n as f64).round() as usize;
        let test = ((self.test * n as f64).round() as usize).min(n - train.min(n));
        (train.min(n), test, n - train.min(n) - test)
    }
}

/// Shuffles with `seed` and slices contiguously into train, test and
/// validation parts. No stratification.
pub fn split_dataset(data: &Dataset, fractions: &SplitFractions, seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    fractions.validate()?;
    let (n_train, n_test, n_val) = fractions.sizes(data.len());
    if n_train == 0 || n_test == 0 || n_val == 0 {
        return Err(Error::Data(format!(
            "split of {} patterns leaves an empty part ({n_train}/{n_test}/{n_val})",
            data.len()
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((
        data.subset(&order[..n_train])?,
        data.subset(&order[n_train..n_train + n_test])?,
        data.subset(&order[n_train + n_test..])?,
    ))
}

/// Per-feature min-max scaling to `[0, 1]` fitted on one dataset and
/// applied to others.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    ranges: Vec<(f64, f64)>,
}

impl MinMaxScaler {
    pub fn fit(data: &Dataset) -> Self {
        Self {
            ranges: data.feature_ranges(),
        }
    }

    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        if data.dim() != self.ranges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.ranges.len(),
                found: data.dim(),
            });
        }
        data.map_features(|k, v| {
            let (lo, hi) = self.ranges[k];
            if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                0.0
            }
        })
    }
}
