//! Map quality measures: quantization error, topographic error, dead units
//! and majority-vote neuron labels.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::map::{assign_all, Assignment, MapState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub qe: f64,
    pub te: f64,
    pub dead_units: usize,
    pub dead_fraction: f64,
    /// Majority class per neuron; `None` for unlabeled neurons.
    pub neuron_labels: Option<Vec<Option<u32>>>,
}

/// Mean Euclidean distance from each pattern to its winner.
pub fn quantization_error(data: &Dataset, map: &MapState) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Data("quantization error of an empty dataset".into()));
    }
    Ok(assign_all(data, map)?.mean_distance())
}

fn topographic_error_of(assignment: &Assignment, map: &MapState) -> f64 {
    let broken = assignment
        .winner
        .iter()
        .zip(&assignment.second)
        .filter(|(&c, s)| s.is_some_and(|s| !map.is_connected(c, s)))
        .count();
    broken as f64 / assignment.len() as f64
}

/// Fraction of patterns whose winner and runner-up are not connected.
pub fn topographic_error(data: &Dataset, map: &MapState) -> Result<f64> {
    if map.len() < 2 {
        return Err(Error::Structural("topographic error needs two neurons".into()));
    }
    Ok(topographic_error_of(&assign_all(data, map)?, map))
}

fn labels_of(assignment: &Assignment, labels: &[u32], neurons: usize) -> Vec<Option<u32>> {
    let mut votes: Vec<std::collections::BTreeMap<u32, usize>> = vec![Default::default(); neurons];
    for (&c, &l) in assignment.winner.iter().zip(labels) {
        *votes[c].entry(l).or_default() += 1;
    }
    votes
        .into_iter()
        .map(|v| {
            // BTreeMap iterates ascending, so the first maximum is the lowest id
            v.into_iter()
                .fold(None, |best: Option<(u32, usize)>, (l, n)| match best {
                    Some((_, m)) if m >= n => best,
                    _ => Some((l, n)),
                })
                .map(|(l, _)| l)
        })
        .collect()
}

/// Majority-vote class of the patterns each neuron wins; ties go to the
/// lowest class id and neurons winning nothing stay unlabeled.
pub fn label_neurons(data: &Dataset, map: &MapState) -> Result<Vec<Option<u32>>> {
    let labels = data
        .labels()
        .ok_or_else(|| Error::Data("dataset has no class labels".into()))?;
    Ok(labels_of(&assign_all(data, map)?, labels, map.len()))
}

/// All quality measures from a single assignment pass.
pub fn quality_report(data: &Dataset, map: &MapState) -> Result<QualityReport> {
    if data.is_empty() {
        return Err(Error::Data("quality of an empty dataset".into()));
    }
    let assignment = assign_all(data, map)?;
    let counts = assignment.counts(map.len());
    let dead_units = counts.iter().filter(|&&c| c == 0).count();
    Ok(QualityReport {
        qe: assignment.mean_distance(),
        te: if map.len() >= 2 {
            topographic_error_of(&assignment, map)
        } else {
            0.0
        },
        dead_units,
        dead_fraction: dead_units as f64 / map.len() as f64,
        neuron_labels: data.labels().map(|l| labels_of(&assignment, l, map.len())),
    })
}
