//! Batch weight update and position self-organization.

use crate::data::Dataset;
use crate::map::{sq_dist, Assignment, MapState};

/// Which neurons may contribute to neuron `i`'s update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reach {
    /// Every neuron; the Gaussian kernel does the localization.
    All,
    /// Only `i` itself and its direct graph neighbours.
    Adjacent,
}

impl Reach {
    #[inline]
    fn admits(self, map: &MapState, i: usize, j: usize) -> bool {
        match self {
            Reach::All => true,
            Reach::Adjacent => i == j || map.is_connected(i, j),
        }
    }
}

/// Output-space kernel `exp(-||r_j - r_i||^2 / sigma^2)`.
pub fn neighborhood_output(r_j: [f64; 2], r_i: [f64; 2], sigma: f64) -> f64 {
    (-sq_dist(&r_j, &r_i) / (sigma * sigma)).exp()
}

/// Input-space kernel `exp(-||w_j - w_i||^2 / (gamma * sigma^2))`.
pub fn neighborhood_input(w_j: &[f64], w_i: &[f64], sigma: f64, gamma: f64) -> f64 {
    (-sq_dist(w_j, w_i) / (gamma * sigma * sigma)).exp()
}

/// Batch weight update: each neuron becomes the kernel- and count-weighted
/// average of the per-neuron pattern means. Neurons with a zero denominator
/// keep their weight. Returns the new row-major weight matrix.
pub fn batch_weight_update(
    map: &MapState,
    assignment: &Assignment,
    data: &Dataset,
    sigma: f64,
    reach: Reach,
) -> Vec<f64> {
    let (m, dim) = (map.len(), map.dim());
    let counts = assignment.counts(m);
    // per-neuron pattern sums, i.e. n_j * mean_j
    let mut sums = vec![0.0; m * dim];
    for (j, &c) in assignment.winner.iter().enumerate() {
        for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(data.pattern(j)) {
            *s += x;
        }
    }
    let winners: Vec<usize> = (0..m).filter(|&j| counts[j] > 0).collect();

    let mut out = map.weights().to_vec();
    let mut num = vec![0.0; dim];
    for i in 0..m {
        num.iter_mut().for_each(|v| *v = 0.0);
        let mut den = 0.0;
        for &j in &winners {
            if !reach.admits(map, i, j) {
                continue;
            }
            let h = neighborhood_output(map.position(j), map.position(i), sigma);
            if h == 0.0 {
                continue;
            }
            den += h * counts[j] as f64;
            for (v, s) in num.iter_mut().zip(&sums[j * dim..(j + 1) * dim]) {
                *v += h * s;
            }
        }
        if den > 0.0 {
            for (w, v) in out[i * dim..(i + 1) * dim].iter_mut().zip(&num) {
                *w = v / den;
            }
        }
    }
    out
}

/// Position update: every neuron moves by `alpha` times the kernel- and
/// count-weighted mean displacement towards the other neurons. Kernels use
/// the map's current weights. Neurons with a zero denominator stay put.
pub fn position_update(
    map: &MapState,
    assignment: &Assignment,
    sigma: f64,
    alpha: f64,
    gamma: f64,
    reach: Reach,
) -> Vec<[f64; 2]> {
    let m = map.len();
    let counts = assignment.counts(m);
    let winners: Vec<usize> = (0..m).filter(|&j| counts[j] > 0).collect();
    let mut out = map.positions().to_vec();
    for (i, r_out) in out.iter_mut().enumerate() {
        let r_i = map.position(i);
        let (mut dx, mut dy, mut den) = (0.0, 0.0, 0.0);
        for &j in &winners {
            if j == i || !reach.admits(map, i, j) {
                continue;
            }
            let weight = counts[j] as f64 * neighborhood_input(map.weight(j), map.weight(i), sigma, gamma);
            let r_j = map.position(j);
            dx += weight * (r_j[0] - r_i[0]);
            dy += weight * (r_j[1] - r_i[1]);
            den += weight;
        }
        if den > 0.0 {
            *r_out = [r_i[0] + alpha * dx / den, r_i[1] + alpha * dy / den];
        }
    }
    out
}

/// Mean output-space length of the map's edges for the given positions.
/// `None` when the map has no edges.
pub fn mean_edge_length(map: &MapState, positions: &[[f64; 2]]) -> Option<f64> {
    let edges = map.edge_list();
    if edges.is_empty() {
        return None;
    }
    let total: f64 = edges
        .iter()
        .map(|&(a, b, _)| sq_dist(&positions[a], &positions[b]).sqrt())
        .sum();
    Some(total / edges.len() as f64)
}

/// Scales `positions` about their centroid so that the mean edge length
/// matches the one of the map's current positions. This removes the uniform
/// contraction of [`position_update`] and keeps output distances in lattice
/// cells; relative moves are untouched.
pub fn restore_edge_length(map: &MapState, positions: &mut [[f64; 2]]) {
    let (Some(target), Some(now)) = (mean_edge_length(map, map.positions()), mean_edge_length(map, positions)) else {
        return;
    };
    if !(now > 0.0 && target > 0.0) {
        return;
    }
    let k = target / now;
    let n = positions.len() as f64;
    let cx = positions.iter().map(|r| r[0]).sum::<f64>() / n;
    let cy = positions.iter().map(|r| r[1]).sum::<f64>() / n;
    for r in positions.iter_mut() {
        *r = [cx + (r[0] - cx) * k, cy + (r[1] - cy) * k];
    }
}
