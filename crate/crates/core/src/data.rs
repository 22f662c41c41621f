//! Pattern collections.

use crate::error::{Error, Result};

/// Row-major collection of `len()` feature vectors of dimension `dim()`,
/// optionally carrying one integer class id per pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    dim: usize,
    labels: Option<Vec<u32>>,
    class_names: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset from individual rows.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Option<Vec<u32>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(values, dim, labels)
    }

    /// Builds a dataset from a flat row-major buffer.
    pub fn from_flat(values: Vec<f64>, dim: usize, labels: Option<Vec<u32>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Data("feature dimension must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::Data("dataset has no patterns".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::Data(format!(
                "buffer of {} values is not a multiple of dimension {dim}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("dataset contains non-finite values".into()));
        }
        let n = values.len() / dim;
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::Data(format!("{} labels for {n} patterns", labels.len())));
            }
        }
        Ok(Self {
            values,
            dim,
            labels,
            class_names: None,
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Self {
        self.class_names = Some(names);
        self
    }

    /// Number of patterns.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Feature dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pattern(&self, index: usize) -> &[f64] {
        &self.values[index * self.dim..(index + 1) * self.dim]
    }

    pub fn patterns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    /// Number of distinct class ids, if labelled.
    pub fn class_count(&self) -> Option<usize> {
        self.labels.as_ref().map(|labels| {
            let mut seen: Vec<u32> = labels.clone();
            seen.sort_unstable();
            seen.dedup();
            seen.len()
        })
    }

    /// New dataset holding the given patterns in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.pattern(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|labels| indices.iter().map(|&i| labels[i]).collect());
        let mut out = Self::from_flat(values, self.dim, labels)?;
        out.class_names = self.class_names.clone();
        Ok(out)
    }

    /// Per-feature `(min, max)` over all patterns.
    pub fn feature_ranges(&self) -> Vec<(f64, f64)> {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for row in self.patterns() {
            for (range, &v) in ranges.iter_mut().zip(row) {
                range.0 = range.0.min(v);
                range.1 = range.1.max(v);
            }
        }
        ranges
    }

    /// Applies `f(feature, value)` to every entry.
    pub fn map_features(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k % self.dim, v))
            .collect();
        let mut out = Self::from_flat(values, self.dim, self.labels.clone())?;
        out.class_names = self.class_names.clone();
        Ok(out)
    }
}
