use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the cell-division mutation factor is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum BetaMode {
    /// Standard normal draw clamped to `[-limit, limit]`.
    ClampedGaussian(f64),
    /// Always the given value.
    Fixed(f64),
}

impl Default for BetaMode {
    fn default() -> Self {
        BetaMode::ClampedGaussian(0.5)
    }
}

/// Per-neuron error compared against the growing threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitError {
    /// Mean root distance of the patterns the neuron won.
    #[default]
    Mean,
    /// Accumulated root distance, as in growing SOMs.
    Total,
}

impl std::str::FromStr for SplitError {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(SplitError::Mean),
            "total" | "sum" => Ok(SplitError::Total),
            other => Err(Error::Config(format!("unknown split error mode '{other}'"))),
        }
    }
}

/// Every tunable of the adaptive map and of the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Spread factor in (0, 1); drives the growing threshold.
    pub spread_factor: f64,
    /// Divisor of the input-space neighbourhood used for position updates.
    pub gamma: f64,
    /// Position learning rate during training.
    pub alpha_train: f64,
    /// Position learning rate during smoothing.
    pub alpha_smooth: f64,
    /// Edges whose age reaches this value are pruned.
    pub age_max: u32,
    /// Minimum number of epochs between two neuron splits.
    pub t_add: usize,
    pub max_epochs: usize,
    pub max_smooth_epochs: usize,
    /// Training stops once the epoch-to-epoch mqe change falls below this.
    pub eps1: f64,
    /// Smoothing stops once the epoch-to-epoch mqe change falls below this.
    pub eps2: f64,
    /// Initial neighbourhood width; derived from the map extent when unset.
    pub sigma0: Option<f64>,
    pub sigma_final: f64,
    /// Maximum neighbour count `Q`.
    pub max_degree: usize,
    pub beta_mode: BetaMode,
    pub split_error: SplitError,
    /// Rescale positions after each position update so the mean edge length
    /// is unchanged (see [`super::restore_edge_length`]).
    pub preserve_edge_length: bool,
    /// Also age, once per epoch, edges between two neurons that won nothing.
    pub age_idle_edges: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            spread_factor: 0.5,
            gamma: 4.0,
            alpha_train: 0.01,
            alpha_smooth: 0.001,
            age_max: 30,
            t_add: 30,
            max_epochs: 1000,
            max_smooth_epochs: 500,
            eps1: 1e-6,
            eps2: 1e-10,
            sigma0: None,
            sigma_final: 1.0,
            max_degree: 4,
            beta_mode: BetaMode::default(),
            split_error: SplitError::Mean,
            preserve_edge_length: true,
            age_idle_edges: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.spread_factor > 0.0 && self.spread_factor < 1.0) {
            return fail(format!("spread_factor {} outside (0, 1)", self.spread_factor));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return fail(format!("gamma {} must be positive", self.gamma));
        }
        for (name, a) in [("alpha_train", self.alpha_train), ("alpha_smooth", self.alpha_smooth)] {
            if !(0.0..1.0).contains(&a) {
                return fail(format!("{name} {a} outside [0, 1)"));
            }
        }
        if self.age_max < 1 || self.t_add < 1 {
            return fail("age_max and t_add must be at least 1".into());
        }
        if self.max_epochs < 1 {
            return fail("max_epochs must be at least 1".into());
        }
        if !(self.eps2 > 0.0 && self.eps2 < self.eps1) {
            return fail(format!(
                "need 0 < eps2 < eps1, got eps1={} eps2={}",
                self.eps1, self.eps2
            ));
        }
        if !(self.sigma_final > 0.0 && self.sigma_final.is_finite()) {
            return fail(format!("sigma_final {} must be positive", self.sigma_final));
        }
        if let Some(s0) = self.sigma0 {
            if !(s0 >= self.sigma_final && s0.is_finite()) {
                return fail(format!("sigma0 {s0} must be at least sigma_final {}", self.sigma_final));
            }
        }
        if self.max_degree < 1 {
            return fail("max_degree must be at least 1".into());
        }
        match self.beta_mode {
            BetaMode::ClampedGaussian(limit) if !(limit >= 0.0 && limit.is_finite()) => {
                fail(format!("beta clamp {limit} must be non-negative"))
            }
            BetaMode::Fixed(b) if !b.is_finite() => fail("fixed beta must be finite".into()),
            _ => Ok(()),
        }
    }

    /// Neighbourhood width at epoch `t` (1-based): exponential decay from
    /// `sigma0` at `t = 0` to `sigma_final` at `t = max_epochs`.
    pub fn sigma_at(&self, sigma0: f64, epoch: usize) -> f64 {
        let frac = epoch as f64 / self.max_epochs as f64;
        sigma0 * (self.sigma_final / sigma0).powf(frac)
    }
}

/// Structural change applied during an epoch. Indices refer to the neuron
/// numbering in force when the event happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum StructuralEvent {
    EdgePruned {
        a: usize,
        b: usize,
        age: u32,
    },
    NeuronRemoved {
        index: usize,
    },
    /// Isolated neurons survived because removing them would leave fewer
    /// than two neurons.
    RemovalFloor {
        kept: Vec<usize>,
    },
    NeuronSplit {
        parent: usize,
        neighbor: usize,
        offspring: usize,
        beta: f64,
    },
    DegreeTrimmed {
        a: usize,
        b: usize,
        age: u32,
    },
}

/// Per-epoch training trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub sigma: f64,
    /// Mean root distance of training patterns to their winners, measured
    /// against end-of-epoch weights.
    pub mqe: f64,
    /// Mean error per neuron at epoch end; `None` marks a neuron that won
    /// no pattern.
    pub per_neuron_qe: Vec<Option<f64>>,
    pub neurons: usize,
    pub events: Vec<StructuralEvent>,
}
