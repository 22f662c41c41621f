//! Map state shared by the adaptive map and the fixed-lattice baseline, plus
//! the pattern-to-neuron assignment primitives.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Dense symmetric `n x n` matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SymMatrix<T> {
    n: usize,
    cells: Vec<T>,
}

impl<T: Copy + Default + PartialEq> SymMatrix<T> {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            cells: vec![T::default(); n * n],
        }
    }

    #[inline]
    pub(crate) fn get(&self, p: usize, q: usize) -> T {
        self.cells[p * self.n + q]
    }

    #[inline]
    pub(crate) fn set(&mut self, p: usize, q: usize, value: T) {
        debug_assert!(p != q || value == T::default());
        self.cells[p * self.n + q] = value;
        self.cells[q * self.n + p] = value;
    }

    #[inline]
    pub(crate) fn row(&self, p: usize) -> &[T] {
        &self.cells[p * self.n..(p + 1) * self.n]
    }

    /// Keeps rows/columns whose `keep` flag is set, preserving order.
    pub(crate) fn retain(&mut self, keep: &[bool]) {
        let kept: Vec<usize> = (0..self.n).filter(|&i| keep[i]).collect();
        let m = kept.len();
        let mut cells = Vec::with_capacity(m * m);
        for &p in &kept {
            for &q in &kept {
                cells.push(self.get(p, q));
            }
        }
        self.n = m;
        self.cells = cells;
    }

    /// Appends one row/column of default values.
    pub(crate) fn grow(&mut self) {
        let n = self.n + 1;
        let mut cells = vec![T::default(); n * n];
        for p in 0..self.n {
            cells[p * n..p * n + self.n].copy_from_slice(self.row(p));
        }
        self.n = n;
        self.cells = cells;
    }
}

/// Neuron weights `W` (M x D), output-space positions `R` (M x 2), binary
/// connectivity `E`, edge ages `A` and per-neuron win counters.
#[derive(Debug, Clone, PartialEq)]
pub struct MapState {
    dim: usize,
    weights: Vec<f64>,
    positions: Vec<[f64; 2]>,
    edges: SymMatrix<bool>,
    ages: SymMatrix<u32>,
    win_counts: Vec<u64>,
}

impl MapState {
    /// Unconnected map with the given weights (row-major) and positions.
    pub fn new(dim: usize, weights: Vec<f64>, positions: Vec<[f64; 2]>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Structural("weight dimension must be positive".into()));
        }
        if weights.len() != positions.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: positions.len() * dim,
                found: weights.len(),
            });
        }
        let m = positions.len();
        Ok(Self {
            dim,
            weights,
            positions,
            edges: SymMatrix::new(m),
            ages: SymMatrix::new(m),
            win_counts: vec![0; m],
        })
    }

    /// Builds a map from rows of weights, positions and an undirected edge
    /// list of `(p, q, age)` triples.
    pub fn from_parts(weights: &[Vec<f64>], positions: &[[f64; 2]], edges: &[(usize, usize, u32)]) -> Result<Self> {
        let dim = weights.first().map(Vec::len).unwrap_or(0);
        if weights.len() != positions.len() {
            return Err(Error::Structural(format!(
                "{} weight rows but {} positions",
                weights.len(),
                positions.len()
            )));
        }
        let mut flat = Vec::with_capacity(weights.len() * dim);
        for row in weights {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let mut map = Self::new(dim, flat, positions.to_vec())?;
        for &(p, q, age) in edges {
            if p == q || p >= map.len() || q >= map.len() {
                return Err(Error::Structural(format!("invalid edge ({p}, {q})")));
            }
            map.connect(p, q);
            map.set_age(p, q, age);
        }
        Ok(map)
    }

    /// Neuron count `M`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self, i: usize) -> &[f64] {
        &self.weights[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major weight matrix.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.weights.chunks_exact(self.dim)
    }

    pub fn set_weights(&mut self, weights: Vec<f64>) {
        assert_eq!(weights.len(), self.weights.len(), "weight matrix shape");
        self.weights = weights;
    }

    pub fn position(&self, i: usize) -> [f64; 2] {
        self.positions[i]
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn set_positions(&mut self, positions: Vec<[f64; 2]>) {
        assert_eq!(positions.len(), self.positions.len(), "position matrix shape");
        self.positions = positions;
    }

    pub fn win_counts(&self) -> &[u64] {
        &self.win_counts
    }

    pub fn set_win_counts(&mut self, counts: Vec<u64>) {
        assert_eq!(counts.len(), self.len(), "win count length");
        self.win_counts = counts;
    }

    pub(crate) fn record_win(&mut self, i: usize) {
        self.win_counts[i] += 1;
    }

    pub(crate) fn reset_win_counts(&mut self) {
        self.win_counts.iter_mut().for_each(|c| *c = 0);
    }

    pub fn is_connected(&self, p: usize, q: usize) -> bool {
        self.edges.get(p, q)
    }

    pub fn age(&self, p: usize, q: usize) -> u32 {
        self.ages.get(p, q)
    }

    /// Neighbours of `i` in ascending index order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .row(i)
            .iter()
            .enumerate()
            .filter_map(|(q, &e)| e.then_some(q))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.row(i).iter().filter(|&&e| e).count()
    }

    /// Connects `p` and `q` and resets their edge age to zero.
    pub fn connect(&mut self, p: usize, q: usize) {
        assert_ne!(p, q, "self loops are not allowed");
        self.edges.set(p, q, true);
        self.ages.set(p, q, 0);
    }

    /// Removes the edge between `p` and `q`, zeroing its age.
    pub fn disconnect(&mut self, p: usize, q: usize) {
        self.edges.set(p, q, false);
        self.ages.set(p, q, 0);
    }

    /// Sets the age of an existing edge.
    pub fn set_age(&mut self, p: usize, q: usize, age: u32) {
        assert!(self.edges.get(p, q), "age set on a missing edge ({p}, {q})");
        self.ages.set(p, q, age);
    }

    pub fn edge_count(&self) -> usize {
        (0..self.len()).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    /// Every undirected edge once as `(p, q, age)` with `p < q`.
    pub fn edge_list(&self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for p in 0..self.len() {
            for q in self.neighbors(p).filter(|&q| q > p) {
                out.push((p, q, self.age(p, q)));
            }
        }
        out
    }

    /// Deletes every neuron whose `keep` flag is false and compacts indices.
    /// Returns the old-to-new index map.
    pub fn retain_neurons(&mut self, keep: &[bool]) -> Vec<Option<usize>> {
        assert_eq!(keep.len(), self.len());
        let mut remap = Vec::with_capacity(keep.len());
        let mut next = 0;
        for &k in keep {
            remap.push(k.then(|| {
                next += 1;
                next - 1
            }));
        }
        let dim = self.dim;
        let mut weights = Vec::with_capacity(next * dim);
        let mut positions = Vec::with_capacity(next);
        let mut wins = Vec::with_capacity(next);
        for (i, &k) in keep.iter().enumerate() {
            if k {
                weights.extend_from_slice(self.weight(i));
                positions.push(self.positions[i]);
                wins.push(self.win_counts[i]);
            }
        }
        self.weights = weights;
        self.positions = positions;
        self.win_counts = wins;
        self.edges.retain(keep);
        self.ages.retain(keep);
        remap
    }

    /// Appends an unconnected neuron and returns its index.
    pub fn push_neuron(&mut self, weight: &[f64], position: [f64; 2]) -> usize {
        assert_eq!(weight.len(), self.dim);
        self.weights.extend_from_slice(weight);
        self.positions.push(position);
        self.win_counts.push(0);
        self.edges.grow();
        self.ages.grow();
        self.len() - 1
    }

    pub(crate) fn set_weight(&mut self, i: usize, weight: &[f64]) {
        self.weights[i * self.dim..(i + 1) * self.dim].copy_from_slice(weight);
    }

    pub(crate) fn set_position(&mut self, i: usize, position: [f64; 2]) {
        self.positions[i] = position;
    }

    /// Increments the age of every edge incident to `i`.
    pub(crate) fn age_edges_of(&mut self, i: usize) {
        for q in 0..self.len() {
            if self.edges.get(i, q) {
                let a = self.ages.get(i, q).saturating_add(1);
                self.ages.set(i, q, a);
            }
        }
    }

    /// Checks the structural invariants; `require_connected` additionally
    /// demands that no neuron is isolated.
    pub fn check_invariants(&self, max_degree: Option<usize>, require_connected: bool) -> Result<()> {
        let m = self.len();
        if self.weights.len() != m * self.dim || self.win_counts.len() != m {
            return Err(Error::Structural("inconsistent matrix shapes".into()));
        }
        if self.weights.iter().any(|w| !w.is_finite()) || self.positions.iter().flatten().any(|r| !r.is_finite()) {
            return Err(Error::Structural("non-finite weight or position".into()));
        }
        for p in 0..m {
            if self.edges.get(p, p) || self.ages.get(p, p) != 0 {
                return Err(Error::Structural(format!("non-zero diagonal at {p}")));
            }
            for q in 0..m {
                if self.edges.get(p, q) != self.edges.get(q, p) || self.ages.get(p, q) != self.ages.get(q, p) {
                    return Err(Error::Structural(format!("asymmetry at ({p}, {q})")));
                }
                if self.ages.get(p, q) > 0 && !self.edges.get(p, q) {
                    return Err(Error::Structural(format!("age without edge at ({p}, {q})")));
                }
            }
            let degree = self.degree(p);
            if let Some(q) = max_degree {
                if degree > q {
                    return Err(Error::Structural(format!("neuron {p} has degree {degree} > {q}")));
                }
            }
            if require_connected && m > 1 && degree == 0 {
                return Err(Error::Structural(format!("neuron {p} is isolated")));
            }
        }
        Ok(())
    }
}

/// Winner, runner-up and squared winner distance for every pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub winner: Vec<usize>,
    /// `None` only when the map has a single neuron.
    pub second: Vec<Option<usize>>,
    pub dist: Vec<f64>,
}

impl Assignment {
    pub fn len(&self) -> usize {
        self.winner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.winner.is_empty()
    }

    /// Patterns won per neuron (`n_j`).
    pub fn counts(&self, neurons: usize) -> Vec<u64> {
        let mut counts = vec![0u64; neurons];
        for &c in &self.winner {
            counts[c] += 1;
        }
        counts
    }

    /// Mean Euclidean (root) distance from patterns to their winners.
    pub fn mean_distance(&self) -> f64 {
        self.dist.iter().map(|d| d.sqrt()).sum::<f64>() / self.dist.len() as f64
    }

    /// Mean root distance of the patterns won by each neuron; `None` for
    /// neurons that won nothing.
    pub fn per_neuron_error(&self, neurons: usize) -> Vec<Option<f64>> {
        let (sum, count) = self.error_sums(neurons);
        sum.into_iter()
            .zip(count)
            .map(|(s, n)| (n > 0).then(|| s / n as f64))
            .collect()
    }

    /// Accumulated root distance per neuron; `None` for neurons that won nothing.
    pub fn per_neuron_total_error(&self, neurons: usize) -> Vec<Option<f64>> {
        let (sum, count) = self.error_sums(neurons);
        sum.into_iter().zip(count).map(|(s, n)| (n > 0).then_some(s)).collect()
    }

    fn error_sums(&self, neurons: usize) -> (Vec<f64>, Vec<u64>) {
        let mut sum = vec![0.0; neurons];
        let mut count = vec![0u64; neurons];
        for (&c, &d) in self.winner.iter().zip(&self.dist) {
            sum[c] += d.sqrt();
            count[c] += 1;
        }
        (sum, count)
    }
}

/// `||x - w||^2`.
pub fn squared_distance(x: &[f64], w: &[f64]) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: w.len(),
        });
    }
    Ok(sq_dist(x, w))
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], w: &[f64]) -> f64 {
    x.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Best and second-best neurons for `x`, ties to the lowest index.
fn scan(x: &[f64], map: &MapState) -> (usize, f64, Option<usize>) {
    let mut best = (usize::MAX, f64::INFINITY);
    let mut second = (usize::MAX, f64::INFINITY);
    for (i, w) in map.weight_rows().enumerate() {
        let d = sq_dist(x, w);
        if d < best.1 || best.0 == usize::MAX {
            second = best;
            best = (i, d);
        } else if d < second.1 || second.0 == usize::MAX {
            second = (i, d);
        }
    }
    (best.0, best.1, (second.0 != usize::MAX).then_some(second.0))
}

/// Winner and second-best neuron for a single pattern.
pub fn find_winner_pair(x: &[f64], map: &MapState) -> Result<(usize, usize)> {
    if map.len() < 2 {
        return Err(Error::Structural(format!(
            "second-best neuron undefined for a map of {} neuron(s)",
            map.len()
        )));
    }
    if x.len() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: x.len(),
        });
    }
    let (winner, _, second) = scan(x, map);
    Ok((winner, second.expect("map has at least two neurons")))
}

/// Assigns every pattern against the map's current (frozen) weights.
pub fn assign_all(data: &Dataset, map: &MapState) -> Result<Assignment> {
    if data.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: data.dim(),
        });
    }
    if map.is_empty() {
        return Err(Error::Structural("map has no neurons".into()));
    }
    let rows: Vec<(usize, f64, Option<usize>)> = (0..data.len())
        .into_par_iter()
        .with_min_len(64)
        .map(|j| scan(data.pattern(j), map))
        .collect();
    let mut out = Assignment {
        winner: Vec::with_capacity(rows.len()),
        second: Vec::with_capacity(rows.len()),
        dist: Vec::with_capacity(rows.len()),
    };
    for (w, d, s) in rows {
        out.winner.push(w);
        out.dist.push(d);
        out.second.push(s);
    }
    Ok(out)
}
