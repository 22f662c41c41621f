//! Initial map sizing and lattice construction.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::map::MapState;

/// Upper bound on the covariance eigenvalue ratio used for sizing.
pub const MAX_EIGEN_RATIO: f64 = 10.0;

/// Multiplicative slack allowed between the realized side ratio and the
/// requested one.
const SIDE_RATIO_SLACK: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    #[default]
    Rectangular,
    Hexagonal,
}

impl Topology {
    /// Maximum neighbour count `Q` of an interior lattice node.
    pub fn max_degree(self) -> usize {
        match self {
            Topology::Rectangular => 4,
            Topology::Hexagonal => 6,
        }
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rect" | "rectangular" => Ok(Topology::Rectangular),
            "hex" | "hexagonal" => Ok(Topology::Hexagonal),
            other => Err(Error::Config(format!(
                "unknown topology '{other}', expected rectangular|hexagonal"
            ))),
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Topology::Rectangular => "rectangular",
            Topology::Hexagonal => "hexagonal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    pub topology: Topology,
}

impl LatticeSpec {
    pub fn new(rows: usize, cols: usize, topology: Topology) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols < 2 {
            return Err(Error::Config(format!(
                "lattice {rows}x{cols} needs at least two neurons"
            )));
        }
        Ok(Self { rows, cols, topology })
    }

    pub fn neurons(&self) -> usize {
        self.rows * self.cols
    }

    pub fn max_degree(&self) -> usize {
        self.topology.max_degree()
    }

    /// Initial neighbourhood width: half the longer side.
    pub fn initial_sigma(&self) -> f64 {
        self.rows.max(self.cols) as f64 / 2.0
    }
}

/// `round(5 * sqrt(N))`.
pub fn target_neuron_count(patterns: usize) -> usize {
    (5.0 * (patterns.max(1) as f64).sqrt()).round() as usize
}

/// Ratio of the two largest eigenvalues of the feature covariance matrix,
/// capped at [`MAX_EIGEN_RATIO`]. Falls back to 1 for `D < 2` or `N < 2`.
pub fn eigenvalue_ratio(data: &Dataset) -> f64 {
    let (n, d) = (data.len(), data.dim());
    if d < 2 || n < 2 {
        return 1.0;
    }
    let mut mean = vec![0.0; d];
    for row in data.patterns() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for row in data.patterns() {
        for a in 0..d {
            let da = row[a] - mean[a];
            for b in a..d {
                cov[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / (n - 1) as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let mut eig: Vec<f64> = cov.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let (l1, l2) = (eig[0], eig[1]);
    if l1 <= 0.0 {
        return 1.0;
    }
    if l2 <= l1 / MAX_EIGEN_RATIO {
        return MAX_EIGEN_RATIO;
    }
    l1 / l2
}

/// Side lengths `(rows, cols)`, `rows >= cols >= 2`, whose ratio tracks
/// `sqrt(eigen_ratio)` and whose product is as close to `target` as possible.
pub fn side_lengths_for_ratio(eigen_ratio: f64, target: usize) -> (usize, usize) {
    let side_ratio = eigen_ratio.clamp(1.0, MAX_EIGEN_RATIO).sqrt();
    let slack = SIDE_RATIO_SLACK.ln() + 1e-12;
    let limit = (2 * target).max(8);
    // (outside slack, product distance or ratio deviation, product, deviation)
    type Key = (bool, f64, usize, f64);
    let mut best: Option<(Key, (usize, usize))> = None;
    for rows in 2..=limit {
        for cols in 2..=rows {
            let deviation = ((rows as f64 / cols as f64).ln() - side_ratio.ln()).abs();
            let outside = deviation > slack;
            let product = rows * cols;
            let primary = if outside {
                deviation
            } else {
                product.abs_diff(target) as f64
            };
            let key = (outside, primary, product, deviation);
            let better = match &best {
                None => true,
                Some((k, _)) => {
                    (key.0, key.1, key.2)
                        .partial_cmp(&(k.0, k.1, k.2))
                        .map(|o| o.then(key.3.total_cmp(&k.3)))
                        == Some(std::cmp::Ordering::Less)
                }
            };
            if better {
                best = Some((key, (rows, cols)));
            }
        }
    }
    best.expect("search space is non-empty").1
}

/// Side lengths from the data covariance spectrum.
pub fn side_lengths(data: &Dataset, target: usize) -> (usize, usize) {
    side_lengths_for_ratio(eigenvalue_ratio(data), target)
}

/// Unweighted map with lattice positions and lattice connectivity.
/// Weights are zero until [`init_weights`] is called.
pub fn build_lattice(spec: &LatticeSpec, dim: usize) -> Result<MapState> {
    let (rows, cols) = (spec.rows, spec.cols);
    let index = |r: usize, c: usize| r * cols + c;
    let mut positions = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            positions.push(match spec.topology {
                Topology::Rectangular => [c as f64, r as f64],
                Topology::Hexagonal => {
                    let shift = if r % 2 == 1 { 0.5 } else { 0.0 };
                    [c as f64 + shift, r as f64 * 3f64.sqrt() / 2.0]
                }
            });
        }
    }
    let mut map = MapState::new(dim, vec![0.0; rows * cols * dim], positions)?;
    for r in 0..rows {
        for c in 0..cols {
            let here = index(r, c);
            if c + 1 < cols {
                map.connect(here, index(r, c + 1));
            }
            if r + 1 < rows {
                match spec.topology {
                    Topology::Rectangular => map.connect(here, index(r + 1, c)),
                    Topology::Hexagonal => {
                        // odd rows sit half a cell to the right
                        let (left, right) = if r % 2 == 0 {
                            (c.checked_sub(1), Some(c))
                        } else {
                            (Some(c), (c + 1 < cols).then_some(c + 1))
                        };
                        for nc in [left, right].into_iter().flatten() {
                            map.connect(here, index(r + 1, nc));
                        }
                    }
                }
            }
        }
    }
    Ok(map)
}

/// Draws every weight component uniformly from the corresponding feature's
/// `[min, max]` range.
pub fn init_weights(map: &mut MapState, data: &Dataset, seed: u64) -> Result<()> {
    if data.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: data.dim(),
        });
    }
    let ranges = data.feature_ranges();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(map.len() * map.dim());
    for _ in 0..map.len() {
        for &(lo, hi) in &ranges {
            weights.push(if hi > lo { rng.random_range(lo..=hi) } else { lo });
        }
    }
    map.set_weights(weights);
    Ok(())
}

/// `GT = -ln(D) * ln(SF)`.
pub fn growing_threshold(dim: usize, spread_factor: f64) -> Result<f64> {
    if !(spread_factor > 0.0 && spread_factor < 1.0) {
        return Err(Error::Config(format!(
            "spread factor must lie in (0, 1), got {spread_factor}"
        )));
    }
    if dim < 2 {
        return Err(Error::Config(format!(
            "feature dimension {dim} gives a zero growing threshold; at least 2 features required"
        )));
    }
    Ok(-(dim as f64).ln() * spread_factor.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent brute force: keep every (rows, cols) whose ratio is inside
    /// the slack, then take the closest product, smaller product, closest ratio.
    fn brute_force(target: usize, side_ratio: f64) -> (usize, usize) {
        let dev = |r: usize, c: usize| ((r as f64 / c as f64) / side_ratio).ln().abs();
        let mut cands = vec![];
        for rows in 2..=3 * target {
            for cols in 2..=rows {
                let r = rows as f64 / cols as f64;
                if r <= side_ratio * 1.25 + 1e-9 && r >= side_ratio / 1.25 - 1e-9 {
                    cands.push((rows, cols));
                }
            }
        }
        cands.sort_by(|a, b| {
            let ka = ((a.0 * a.1).abs_diff(target), a.0 * a.1);
            let kb = ((b.0 * b.1).abs_diff(target), b.0 * b.1);
            ka.cmp(&kb).then(dev(a.0, a.1).total_cmp(&dev(b.0, b.1)))
        });
        cands[0]
    }

    #[test]
    fn target_counts() {
        assert_eq!(target_neuron_count(150), 61);
        assert_eq!(target_neuron_count(1), 5);
        assert_eq!(target_neuron_count(1000), 158);
    }

    #[test]
    fn side_length_examples() {
        assert_eq!(side_lengths_for_ratio(4.0, 66), (11, 6));
        assert_eq!(side_lengths_for_ratio(1.0, 16), (4, 4));
        assert_eq!(side_lengths_for_ratio(2.0, 154), (14, 11));
    }

    #[test]
    fn side_lengths_match_brute_force_on_small_targets() {
        for target in 4..=80 {
            for ratio in [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0] {
                assert_eq!(
                    side_lengths_for_ratio(ratio, target),
                    brute_force(target, f64::sqrt(ratio)),
                    "target {target} ratio {ratio}"
                );
            }
        }
    }

    #[test]
    fn eigen_ratio_of_elongated_cloud() {
        // variance 4 along x, 1 along y
        let rows = vec![vec![-2.0, -1.0], vec![-2.0, 1.0], vec![2.0, -1.0], vec![2.0, 1.0]];
        let data = Dataset::from_rows(rows, None).unwrap();
        assert!((eigenvalue_ratio(&data) - 4.0).abs() < 1e-12);
        assert_eq!(side_lengths(&data, 66), (11, 6));
    }

    #[test]
    fn eigen_ratio_fallbacks() {
        let one_d = Dataset::from_rows(vec![vec![1.0], vec![3.0]], None).unwrap();
        assert_eq!(eigenvalue_ratio(&one_d), 1.0);
        let line = Dataset::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]], None).unwrap();
        assert_eq!(eigenvalue_ratio(&line), MAX_EIGEN_RATIO);
    }

    fn degrees(map: &MapState) -> Vec<usize> {
        (0..map.len()).map(|i| map.degree(i)).collect()
    }

    #[test]
    fn rectangular_lattices() {
        let m = build_lattice(&LatticeSpec::new(2, 2, Topology::Rectangular).unwrap(), 1).unwrap();
        assert_eq!((m.len(), m.edge_count()), (4, 4));
        assert_eq!(degrees(&m), vec![2, 2, 2, 2]);

        let m = build_lattice(&LatticeSpec::new(3, 3, Topology::Rectangular).unwrap(), 1).unwrap();
        assert_eq!((m.len(), m.edge_count()), (9, 12));
        assert_eq!(m.degree(4), 4);
        assert_eq!(m.position(5), [2.0, 1.0]);

        for (r, c) in [(2, 7), (5, 4), (11, 6)] {
            let m = build_lattice(&LatticeSpec::new(r, c, Topology::Rectangular).unwrap(), 1).unwrap();
            assert_eq!(m.edge_count(), r * (c - 1) + c * (r - 1));
            m.check_invariants(Some(4), true).unwrap();
        }
    }

    #[test]
    fn hexagonal_lattices() {
        let m = build_lattice(&LatticeSpec::new(2, 2, Topology::Hexagonal).unwrap(), 1).unwrap();
        assert_eq!(degrees(&m), vec![2, 3, 3, 2]);
        assert!(m.edge_list().iter().all(|&(_, _, age)| age == 0));

        let m = build_lattice(&LatticeSpec::new(5, 6, Topology::Hexagonal).unwrap(), 1).unwrap();
        m.check_invariants(Some(6), true).unwrap();
        assert!(degrees(&m).contains(&6));
        // every lattice neighbour sits at unit output distance
        for (p, q, _) in m.edge_list() {
            let (a, b) = (m.position(p), m.position(q));
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            assert!((d - 1.0).abs() < 1e-12, "edge ({p},{q}) has length {d}");
        }
    }

    #[test]
    fn lattice_spec_rejects_single_neuron() {
        assert!(LatticeSpec::new(1, 1, Topology::Rectangular).is_err());
    }

    #[test]
    fn weights_within_feature_ranges() {
        let data = Dataset::from_rows(vec![vec![0.0, 3.0], vec![1.0, 3.0], vec![0.5, 3.0]], None).unwrap();
        let spec = LatticeSpec::new(3, 2, Topology::Rectangular).unwrap();
        let mut a = build_lattice(&spec, 2).unwrap();
        init_weights(&mut a, &data, 9).unwrap();
        for w in a.weight_rows() {
            assert!((0.0..=1.0).contains(&w[0]));
            assert_eq!(w[1], 3.0);
        }
        let mut b = build_lattice(&spec, 2).unwrap();
        init_weights(&mut b, &data, 9).unwrap();
        assert_eq!(a.weights(), b.weights());
        let mut c = build_lattice(&spec, 2).unwrap();
        init_weights(&mut c, &data, 10).unwrap();
        assert_ne!(a.weights(), c.weights());
    }

    #[test]
    fn growing_threshold_values() {
        assert!((growing_threshold(4, 0.5).unwrap() - 0.9609).abs() < 1e-4);
        assert!((growing_threshold(2, 0.5).unwrap() - 0.4805).abs() < 1e-4);
        assert!(growing_threshold(4, 1.0 - 1e-12).unwrap() < 1e-10);
        assert!(matches!(growing_threshold(4, 1.0), Err(Error::Config(_))));
        assert!(matches!(growing_threshold(4, 0.0), Err(Error::Config(_))));
        assert!(matches!(growing_threshold(1, 0.5), Err(Error::Config(_))));
    }
}
