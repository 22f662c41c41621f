//! The adaptive moving map: training with structural adaptation, followed
//! by a smoothing phase over a frozen structure.

mod config;
mod structure;
mod update;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{BetaMode, EpochReport, SplitError, StructuralEvent, TrainConfig};
pub use structure::{
    age_idle_edges, draw_beta, enforce_degree, maybe_add_neuron, process_pattern_edges, prune_edges_and_neurons,
    remove_isolated,
};
pub use update::{
    batch_weight_update, mean_edge_length, neighborhood_input, neighborhood_output, position_update,
    restore_edge_length, Reach,
};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::grid::growing_threshold;
use crate::map::{assign_all, Assignment, MapState};

/// Final map plus the per-epoch trace of a training or smoothing run.
#[derive(Debug, Clone)]
pub struct Trained {
    pub map: MapState,
    pub reports: Vec<EpochReport>,
}

impl Trained {
    pub fn epochs(&self) -> usize {
        self.reports.len()
    }

    pub fn final_mqe(&self) -> Option<f64> {
        self.reports.last().map(|r| r.mqe)
    }
}

/// Half the larger side of the positions' bounding box, in lattice cells.
/// Equals `max(rows, cols) / 2` for a fresh rectangular lattice.
pub fn default_sigma0(map: &MapState) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for r in map.positions() {
        for k in 0..2 {
            lo[k] = lo[k].min(r[k]);
            hi[k] = hi[k].max(r[k]);
        }
    }
    ((hi[0] - lo[0]).max(hi[1] - lo[1]) + 1.0) / 2.0
}

pub(crate) fn resolve_sigma0(config: &TrainConfig, map: &MapState) -> f64 {
    config
        .sigma0
        .unwrap_or_else(|| default_sigma0(map))
        .max(config.sigma_final)
}

pub(crate) fn check_inputs(data: &Dataset, map: &MapState, min_neurons: usize) -> Result<()> {
    if data.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: data.dim(),
        });
    }
    if map.len() < min_neurons {
        return Err(Error::Structural(format!(
            "map needs at least {min_neurons} neuron(s), has {}",
            map.len()
        )));
    }
    Ok(())
}

pub(crate) fn finite_mqe(assignment: &Assignment, epoch: usize) -> Result<f64> {
    let mqe = assignment.mean_distance();
    if !mqe.is_finite() {
        return Err(Error::NonFinite {
            epoch,
            message: format!("mean quantization error is {mqe}"),
        });
    }
    Ok(mqe)
}

/// Trains the adaptive map. See [`train_with_progress`].
pub fn train(data: &Dataset, map: MapState, config: &TrainConfig) -> Result<Trained> {
    train_with_progress(data, map, config, &mut |_, _| {})
}

/// Trains the adaptive map, calling `progress` with the report and the map
/// after every epoch.
///
/// Each epoch:
/// 1. winners and runners-up against the epoch-start weights, with the edge
///    aging/reset rule applied per pattern in presentation order;
/// 2. batch weight update, then position update from the new weights,
///    rescaled to keep the mean edge length when `preserve_edge_length` is set;
/// 3. pruning of aged edges and isolated neurons;
/// 4. at most one cell division, no sooner than `t_add` epochs after the
///    previous one;
/// 5. degree cap;
/// 6. mqe against the final weights. Training stops once consecutive mqe
///    values differ by less than `eps1`.
pub fn train_with_progress(
    data: &Dataset,
    mut map: MapState,
    config: &TrainConfig,
    progress: &mut dyn FnMut(&EpochReport, &MapState),
) -> Result<Trained> {
    config.validate()?;
    check_inputs(data, &map, 2)?;
    let threshold = growing_threshold(data.dim(), config.spread_factor)?;
    let sigma0 = resolve_sigma0(config, &map);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut assignment = assign_all(data, &map)?;
    let mut reports: Vec<EpochReport> = Vec::new();
    let mut epochs_since_add = 0;

    for epoch in 1..=config.max_epochs {
        let sigma = config.sigma_at(sigma0, epoch);

        map.reset_win_counts();
        for (&winner, &second) in assignment.winner.iter().zip(&assignment.second) {
            let second = second.ok_or_else(|| Error::Structural("map shrank below two neurons".into()))?;
            process_pattern_edges(&mut map, winner, second)?;
        }

        if config.age_idle_edges {
            age_idle_edges(&mut map);
        }
        let weights = batch_weight_update(&map, &assignment, data, sigma, Reach::All);
        map.set_weights(weights);
        let mut positions = position_update(&map, &assignment, sigma, config.alpha_train, config.gamma, Reach::All);
        if config.preserve_edge_length {
            restore_edge_length(&map, &mut positions);
        }
        map.set_positions(positions);

        let mut events = prune_edges_and_neurons(&mut map, config.age_max);

        epochs_since_add += 1;
        if epochs_since_add >= config.t_add {
            let current = assign_all(data, &map)?;
            let errors = match config.split_error {
                SplitError::Mean => current.per_neuron_error(map.len()),
                SplitError::Total => current.per_neuron_total_error(map.len()),
            };
            if let Some(split) = maybe_add_neuron(
                &mut map,
                &errors,
                threshold,
                epochs_since_add,
                config.t_add,
                config.beta_mode,
                &mut rng,
            )? {
                events.push(split);
                epochs_since_add = 0;
            }
        }

        events.extend(enforce_degree(&mut map, config.max_degree));

        assignment = assign_all(data, &map)?;
        let mqe = finite_mqe(&assignment, epoch)?;
        let report = EpochReport {
            epoch,
            sigma,
            mqe,
            per_neuron_qe: assignment.per_neuron_error(map.len()),
            neurons: map.len(),
            events,
        };
        progress(&report, &map);
        let converged = reports.last().is_some_and(|prev| (mqe - prev.mqe).abs() < config.eps1);
        reports.push(report);
        if converged {
            break;
        }
    }
    map.set_win_counts(assignment.counts(map.len()));
    Ok(Trained { map, reports })
}

/// Smoothing phase. See [`smooth_with_progress`].
pub fn smooth(data: &Dataset, map: MapState, config: &TrainConfig) -> Result<Trained> {
    smooth_with_progress(data, map, config, &mut |_, _| {})
}

/// Fine-tunes weights and positions with the structure frozen: kernels are
/// restricted to each neuron and its direct neighbours, the width stays at
/// `sigma_final` and positions move with `alpha_smooth`. Stops when
/// consecutive mqe values differ by less than `eps2` or after
/// `max_smooth_epochs`.
pub fn smooth_with_progress(
    data: &Dataset,
    mut map: MapState,
    config: &TrainConfig,
    progress: &mut dyn FnMut(&EpochReport, &MapState),
) -> Result<Trained> {
    config.validate()?;
    check_inputs(data, &map, 1)?;
    let sigma = config.sigma_final;
    let mut assignment = assign_all(data, &map)?;
    let mut reports: Vec<EpochReport> = Vec::new();
    for epoch in 1..=config.max_smooth_epochs {
        let weights = batch_weight_update(&map, &assignment, data, sigma, Reach::Adjacent);
        map.set_weights(weights);
        let mut positions = position_update(
            &map,
            &assignment,
            sigma,
            config.alpha_smooth,
            config.gamma,
            Reach::Adjacent,
        );
        if config.preserve_edge_length {
            restore_edge_length(&map, &mut positions);
        }
        map.set_positions(positions);

        assignment = assign_all(data, &map)?;
        let mqe = finite_mqe(&assignment, epoch)?;
        let report = EpochReport {
            epoch,
            sigma,
            mqe,
            per_neuron_qe: assignment.per_neuron_error(map.len()),
            neurons: map.len(),
            events: Vec::new(),
        };
        progress(&report, &map);
        let converged = reports.last().is_some_and(|prev| (mqe - prev.mqe).abs() < config.eps2);
        reports.push(report);
        if converged {
            break;
        }
    }
    map.set_win_counts(assignment.counts(map.len()));
    Ok(Trained { map, reports })
}
