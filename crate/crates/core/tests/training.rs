use std::path::PathBuf;

use amsom_core::engine::{smooth, smooth_with_progress, train, train_with_progress, TrainConfig};
use amsom_core::grid::{build_lattice, init_weights, side_lengths, target_neuron_count, LatticeSpec, Topology};
use amsom_core::io::{generate_cluster_dataset, load_csv, CsvOptions, LabelColumn, MinMaxScaler};
use amsom_core::{assign_all, Dataset, MapState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn iris() -> Dataset {
    load_csv(
        data_file("iris.csv"),
        &CsvOptions {
            label: Some(LabelColumn::Last),
        },
    )
    .unwrap()
    .dataset
}

fn wine_scaled() -> Dataset {
    let wine = load_csv(
        data_file("wine.csv"),
        &CsvOptions {
            label: Some(LabelColumn::Last),
        },
    )
    .unwrap()
    .dataset;
    MinMaxScaler::fit(&wine).transform(&wine).unwrap()
}

fn lattice_for(data: &Dataset, topology: Topology, seed: u64) -> MapState {
    let (rows, cols) = side_lengths(data, target_neuron_count(data.len()));
    let mut map = build_lattice(&LatticeSpec::new(rows, cols, topology).unwrap(), data.dim()).unwrap();
    init_weights(&mut map, data, seed).unwrap();
    map
}

/// Four tight blobs around the corners of a 10 x 10 square.
fn four_blobs() -> (Dataset, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]];
    let mut rows = Vec::new();
    let mut blob = Vec::new();
    for (k, c) in centers.iter().enumerate() {
        for _ in 0..25 {
            rows.push(vec![
                c[0] + rng.random_range(-0.2..0.2),
                c[1] + rng.random_range(-0.2..0.2),
            ]);
            blob.push(k);
        }
    }
    (Dataset::from_rows(rows, None).unwrap(), blob)
}

fn check_every_epoch(data: &Dataset, map: MapState, config: &TrainConfig) {
    let q = config.max_degree;
    let mut epochs = 0;
    let trained = train_with_progress(data, map, config, &mut |report, map| {
        epochs += 1;
        map.check_invariants(Some(q), true)
            .unwrap_or_else(|e| panic!("epoch {}: {e}", report.epoch));
        assert!(map.len() >= 2, "epoch {}: {} neurons", report.epoch, map.len());
        assert_eq!(report.neurons, map.len());
        assert!(map.weights().iter().all(|w| w.is_finite()));
    })
    .unwrap();
    assert_eq!(epochs, trained.epochs());
    smooth_with_progress(data, trained.map, config, &mut |report, map| {
        map.check_invariants(Some(q), true)
            .unwrap_or_else(|e| panic!("smoothing epoch {}: {e}", report.epoch));
    })
    .unwrap();
}

#[test]
fn invariants_hold_after_every_epoch_on_iris() {
    let data = iris();
    for seed in 0..3 {
        let cfg = TrainConfig {
            seed,
            ..Default::default()
        };
        check_every_epoch(&data, lattice_for(&data, Topology::Rectangular, seed), &cfg);
    }
}

#[test]
fn invariants_hold_on_hexagonal_iris() {
    let data = iris();
    let cfg = TrainConfig {
        max_degree: Topology::Hexagonal.max_degree(),
        max_epochs: 300,
        seed: 4,
        ..Default::default()
    };
    check_every_epoch(&data, lattice_for(&data, Topology::Hexagonal, 4), &cfg);
}

#[test]
fn invariants_hold_on_cluster_and_wine() {
    let cluster = generate_cluster_dataset(3);
    let cfg = TrainConfig {
        max_epochs: 150,
        max_smooth_epochs: 50,
        seed: 1,
        ..Default::default()
    };
    check_every_epoch(&cluster, lattice_for(&cluster, Topology::Rectangular, 1), &cfg);

    let wine = wine_scaled();
    let cfg = TrainConfig {
        max_epochs: 400,
        seed: 2,
        ..Default::default()
    };
    check_every_epoch(&wine, lattice_for(&wine, Topology::Rectangular, 2), &cfg);
}

#[test]
fn invariants_hold_with_aggressive_structure_changes() {
    let data = iris();
    let cfg = TrainConfig {
        age_max: 2,
        t_add: 1,
        spread_factor: 0.01,
        max_degree: 3,
        age_idle_edges: true,
        max_epochs: 200,
        seed: 9,
        ..Default::default()
    };
    check_every_epoch(&data, lattice_for(&data, Topology::Rectangular, 9), &cfg);
}

/// 2 x 2 lattice stretched to 10 cells per side, so output-space cross terms
/// vanish (exp(-100)) for the whole run.
fn stretched_square(data: &Dataset, seed: u64) -> MapState {
    let mut map = build_lattice(&LatticeSpec::new(2, 2, Topology::Rectangular).unwrap(), 2).unwrap();
    init_weights(&mut map, data, seed).unwrap();
    let positions = map.positions().iter().map(|r| [r[0] * 10.0, r[1] * 10.0]).collect();
    map.set_positions(positions);
    map
}

#[test]
fn four_blobs_end_with_one_neuron_per_blob() {
    let (data, blob) = four_blobs();
    let cfg = TrainConfig {
        sigma0: Some(1.0),
        ..Default::default()
    };
    let trained = train(&data, stretched_square(&data, 0), &cfg).unwrap();

    let a = assign_all(&data, &trained.map).unwrap();
    let mut owner = [None; 4];
    for (&w, &b) in a.winner.iter().zip(&blob) {
        assert_eq!(*owner[b].get_or_insert(w), w, "blob {b} is split between neurons");
    }
    let mut owners: Vec<usize> = owner.iter().map(|o| o.unwrap()).collect();
    owners.sort_unstable();
    owners.dedup();
    assert_eq!(owners.len(), 4, "two blobs share a neuron");
    let non_empty = a.counts(trained.map.len()).iter().filter(|&&n| n > 0).count();
    assert_eq!(non_empty, 4);

    // k-means oracle: mean distance to the blob means
    let mut means = [[0.0f64; 2]; 4];
    for (x, &b) in data.patterns().zip(&blob) {
        means[b][0] += x[0] / 25.0;
        means[b][1] += x[1] / 25.0;
    }
    let oracle: f64 = data
        .patterns()
        .zip(&blob)
        .map(|(x, &b)| ((x[0] - means[b][0]).powi(2) + (x[1] - means[b][1]).powi(2)).sqrt())
        .sum::<f64>()
        / data.len() as f64;
    let mqe = trained.final_mqe().unwrap();
    assert!((mqe - oracle).abs() < 1e-9, "mqe {mqe} vs oracle {oracle}");

    let before = trained.final_mqe().unwrap();
    let smoothed = smooth(&data, trained.map, &cfg).unwrap();
    assert!(smoothed.final_mqe().unwrap() <= before + cfg.eps2);
}

#[test]
fn smoothing_freezes_structure() {
    let data = iris();
    let cfg = TrainConfig {
        max_epochs: 200,
        seed: 3,
        ..Default::default()
    };
    let trained = train(&data, lattice_for(&data, Topology::Rectangular, 3), &cfg).unwrap();
    let edges = trained.map.edge_list();
    let m = trained.map.len();
    let smoothed = smooth_with_progress(&data, trained.map, &cfg, &mut |_, map| {
        assert_eq!(map.len(), m);
        let now: Vec<(usize, usize)> = map.edge_list().iter().map(|&(a, b, _)| (a, b)).collect();
        let was: Vec<(usize, usize)> = edges.iter().map(|&(a, b, _)| (a, b)).collect();
        assert_eq!(now, was);
    })
    .unwrap();
    assert!(smoothed.reports.iter().all(|r| r.events.is_empty()));
}

#[test]
fn converged_map_smooths_quickly() {
    // two blobs, one neuron on each mean, 100 cells apart
    let rows = vec![vec![0.0, 0.1], vec![0.0, -0.1], vec![5.0, 5.1], vec![5.0, 4.9]];
    let data = Dataset::from_rows(rows, None).unwrap();
    let map = MapState::from_parts(
        &[vec![0.0, 0.0], vec![5.0, 5.0]],
        &[[0.0, 0.0], [100.0, 0.0]],
        &[(0, 1, 0)],
    )
    .unwrap();
    let out = smooth(&data, map, &TrainConfig::default()).unwrap();
    assert_eq!(out.epochs(), 2);
    assert!((out.final_mqe().unwrap() - 0.1).abs() < 1e-12);
}

#[test]
fn termination_and_epoch_cap() {
    let data = iris();
    let map = lattice_for(&data, Topology::Rectangular, 0);
    let huge = TrainConfig {
        eps1: 1e3,
        ..Default::default()
    };
    assert_eq!(train(&data, map.clone(), &huge).unwrap().epochs(), 2);
    assert_eq!(
        amsom_core::train_batch_som(&data, map.clone(), &huge).unwrap().epochs(),
        2
    );

    let one = TrainConfig {
        max_epochs: 1,
        ..Default::default()
    };
    let out = train(&data, map, &one).unwrap();
    assert_eq!(out.reports.len(), 1);
    assert_eq!(out.reports[0].epoch, 1);
}

#[test]
fn training_is_deterministic() {
    let data = iris();
    let cfg = TrainConfig {
        max_epochs: 150,
        seed: 21,
        ..Default::default()
    };
    let map = lattice_for(&data, Topology::Rectangular, 21);
    let a = train(&data, map.clone(), &cfg).unwrap();
    let b = train(&data, map, &cfg).unwrap();
    assert_eq!(a.map, b.map);
    assert_eq!(a.reports, b.reports);
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let data = iris();
    let map = build_lattice(&LatticeSpec::new(2, 2, Topology::Rectangular).unwrap(), 3).unwrap();
    assert!(matches!(
        train(&data, map, &TrainConfig::default()),
        Err(amsom_core::Error::DimensionMismatch { expected: 3, found: 4 })
    ));
}
