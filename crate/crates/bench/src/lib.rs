//! Fixtures shared by the criterion benchmarks.

use amsom_core::grid::{build_lattice, init_weights, side_lengths, target_neuron_count, LatticeSpec, Topology};
use amsom_core::io::generate_cluster_dataset;
use amsom_core::{Dataset, MapState};

/// The synthetic four-blob set with a fixed seed.
pub fn cluster_data() -> Dataset {
    generate_cluster_dataset(7)
}

/// Initial lattice for `data`, sized by the usual heuristic, with seeded
/// random weights.
pub fn initial_map(data: &Dataset, seed: u64) -> MapState {
    let (rows, cols) = side_lengths(data, target_neuron_count(data.len()));
    let spec = LatticeSpec::new(rows, cols, Topology::Rectangular).expect("valid lattice");
    let mut map = build_lattice(&spec, data.dim()).expect("lattice");
    init_weights(&mut map, data, seed).expect("weights");
    map
}
