//! Classic batch SOM on a fixed lattice.

use crate::data::Dataset;
use crate::engine::{
    batch_weight_update, check_inputs, finite_mqe, resolve_sigma0, EpochReport, Reach, TrainConfig, Trained,
};
use crate::error::Result;
use crate::map::{assign_all, MapState};

/// Batch SOM: Voronoi assignment against the epoch-start weights, then a
/// Gaussian-weighted average over the fixed lattice positions. Shares the
/// neighbourhood schedule and `eps1` stopping rule with the adaptive map;
/// positions, edges and ages are never touched.
pub fn train_batch_som(data: &Dataset, map: MapState, config: &TrainConfig) -> Result<Trained> {
    train_batch_som_with_progress(data, map, config, &mut |_, _| {})
}

pub fn train_batch_som_with_progress(
    data: &Dataset,
    mut map: MapState,
    config: &TrainConfig,
    progress: &mut dyn FnMut(&EpochReport, &MapState),
) -> Result<Trained> {
    config.validate()?;
    check_inputs(data, &map, 1)?;
    let sigma0 = resolve_sigma0(config, &map);
    let mut assignment = assign_all(data, &map)?;
    let mut reports: Vec<EpochReport> = Vec::new();
    for epoch in 1..=config.max_epochs {
        let sigma = config.sigma_at(sigma0, epoch);
        let weights = batch_weight_update(&map, &assignment, data, sigma, Reach::All);
        map.set_weights(weights);
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
        let converged = reports.last().is_some_and(|prev| (mqe - prev.mqe).abs() < config.eps1);
        reports.push(report);
        if converged {
            break;
        }
    }
    map.set_win_counts(assignment.counts(map.len()));
    Ok(Trained { map, reports })
}
