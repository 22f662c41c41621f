//! Edge aging, pruning, neuron removal, cell division and degree limits.

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{BetaMode, StructuralEvent};
use crate::error::{Error, Result};
use crate::map::MapState;

/// Competitive Hebbian step for one pattern: count the win, age every edge
/// of the winner, then connect winner and runner-up with a fresh edge.
pub fn process_pattern_edges(map: &mut MapState, winner: usize, second: usize) -> Result<()> {
    if winner == second {
        return Err(Error::Structural(format!(
            "winner and second-best are both neuron {winner}"
        )));
    }
    map.record_win(winner);
    map.age_edges_of(winner);
    map.connect(winner, second);
    Ok(())
}

/// Ages by one every edge whose endpoints both won no pattern this epoch.
/// Such edges are never touched by the per-pattern rule.
pub fn age_idle_edges(map: &mut MapState) {
    for (a, b, age) in map.edge_list() {
        if map.win_counts()[a] == 0 && map.win_counts()[b] == 0 {
            map.set_age(a, b, age.saturating_add(1));
        }
    }
}

/// Removes isolated neurons while at least two neurons remain. If every
/// neuron is isolated, the two busiest (by win count, then lowest index)
/// survive and are joined by a fresh edge.
pub fn remove_isolated(map: &mut MapState, events: &mut Vec<StructuralEvent>) -> Vec<Option<usize>> {
    let m = map.len();
    let isolated: Vec<usize> = (0..m).filter(|&i| map.degree(i) == 0).collect();
    if isolated.is_empty() {
        return (0..m).map(Some).collect();
    }
    let mut keep = vec![true; m];
    let connected = m - isolated.len();
    if connected >= 2 {
        for &i in &isolated {
            keep[i] = false;
        }
    } else {
        let mut ranked = isolated.clone();
        ranked.sort_by(|&a, &b| map.win_counts()[b].cmp(&map.win_counts()[a]).then(a.cmp(&b)));
        let mut kept: Vec<usize> = ranked[..2.min(ranked.len())].to_vec();
        kept.sort_unstable();
        for &i in &isolated {
            keep[i] = kept.contains(&i);
        }
        if let [a, b] = kept[..] {
            map.connect(a, b);
        }
        events.push(StructuralEvent::RemovalFloor { kept });
    }
    for (i, &k) in keep.iter().enumerate() {
        if !k {
            events.push(StructuralEvent::NeuronRemoved { index: i });
        }
    }
    map.retain_neurons(&keep)
}

/// Deletes every edge whose age reached `age_max`, then removes neurons left
/// without edges.
pub fn prune_edges_and_neurons(map: &mut MapState, age_max: u32) -> Vec<StructuralEvent> {
    let mut events = Vec::new();
    for (a, b, age) in map.edge_list() {
        if age >= age_max {
            map.disconnect(a, b);
            events.push(StructuralEvent::EdgePruned { a, b, age });
        }
    }
    remove_isolated(map, &mut events);
    events
}

/// Draws the cell-division mutation factor.
pub fn draw_beta<R: Rng + ?Sized>(mode: BetaMode, rng: &mut R) -> f64 {
    match mode {
        BetaMode::Fixed(beta) => beta,
        BetaMode::ClampedGaussian(limit) => {
            let z: f64 = rng.sample(StandardNormal);
            z.clamp(-limit, limit)
        }
    }
}

fn argmax_error(errors: impl Iterator<Item = (usize, Option<f64>)>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in errors {
        if let Some(e) = e {
            if best.is_none_or(|(_, b)| e > b) {
                best = Some((i, e));
            }
        }
    }
    best
}

/// Splits the neuron with the largest error into two offspring when the
/// error exceeds `growing_threshold` and at least `t_add` epochs passed since
/// the last split. The first offspring keeps the parent's index, the second
/// is appended. Both inherit the parent's edges, are joined to each other,
/// and every incident age is reset to zero.
#[allow(clippy::too_many_arguments)]
pub fn maybe_add_neuron<R: Rng + ?Sized>(
    map: &mut MapState,
    per_neuron_qe: &[Option<f64>],
    growing_threshold: f64,
    epochs_since_add: usize,
    t_add: usize,
    beta_mode: BetaMode,
    rng: &mut R,
) -> Result<Option<StructuralEvent>> {
    if epochs_since_add < t_add {
        return Ok(None);
    }
    assert_eq!(per_neuron_qe.len(), map.len(), "per-neuron error length");
    let Some((u, err)) = argmax_error(per_neuron_qe.iter().copied().enumerate()) else {
        return Ok(None);
    };
    if err <= growing_threshold {
        return Ok(None);
    }
    let neighbors: Vec<usize> = map.neighbors(u).collect();
    let Some(&first) = neighbors.first() else {
        return Err(Error::Structural(format!("split candidate {u} has no neighbours")));
    };
    let v = argmax_error(neighbors.iter().map(|&q| (q, per_neuron_qe[q])))
        .map(|(q, _)| q)
        .unwrap_or(first);

    let beta = draw_beta(beta_mode, rng);
    let w_u = map.weight(u).to_vec();
    let (r_u, r_v) = (map.position(u), map.position(v));
    let w_first: Vec<f64> = w_u.iter().map(|w| (1.0 + beta) * w).collect();
    let w_second: Vec<f64> = w_u.iter().map(|w| -beta * w).collect();

    map.set_weight(u, &w_first);
    map.set_position(u, r_u);
    let offspring = map.push_neuron(&w_second, [(r_u[0] + r_v[0]) / 2.0, (r_u[1] + r_v[1]) / 2.0]);
    for &q in &neighbors {
        map.connect(u, q);
        map.connect(offspring, q);
    }
    map.connect(u, offspring);
    Ok(Some(StructuralEvent::NeuronSplit {
        parent: u,
        neighbor: v,
        offspring,
        beta,
    }))
}

/// Caps every neuron's degree at `max_degree`, keeping the youngest edges
/// (ties to the lowest peer index). Neurons are visited in index order;
/// peers isolated by trimming are removed afterwards.
pub fn enforce_degree(map: &mut MapState, max_degree: usize) -> Vec<StructuralEvent> {
    let mut events = Vec::new();
    for i in 0..map.len() {
        if map.degree(i) <= max_degree {
            continue;
        }
        let mut peers: Vec<(u32, usize)> = map.neighbors(i).map(|q| (map.age(i, q), q)).collect();
        peers.sort_unstable();
        for &(age, q) in &peers[max_degree..] {
            map.disconnect(i, q);
            events.push(StructuralEvent::DegreeTrimmed { a: i, b: q, age });
        }
    }
    if !events.is_empty() {
        remove_isolated(map, &mut events);
    }
    events
}
