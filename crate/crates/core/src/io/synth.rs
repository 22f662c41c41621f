use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;

/// Blob centres of the synthetic four-group dataset, on a 2 x 2 arrangement.
pub const CLUSTER_CENTERS: [[f64; 2]; 4] = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]];
/// Per-coordinate standard deviation of every blob.
pub const CLUSTER_SPREAD: f64 = 0.15;
pub const CLUSTER_BLOB_SIZE: usize = 250;

/// 1000 two-dimensional points in four isotropic Gaussian blobs of 250,
/// labelled by blob id, blob after blob.
pub fn generate_cluster_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, CLUSTER_SPREAD).expect("valid spread");
    let mut values = Vec::with_capacity(CLUSTER_CENTERS.len() * CLUSTER_BLOB_SIZE * 2);
    let mut labels = Vec::with_capacity(CLUSTER_CENTERS.len() * CLUSTER_BLOB_SIZE);
    for (id, c) in CLUSTER_CENTERS.iter().enumerate() {
        for _ in 0..CLUSTER_BLOB_SIZE {
            values.push(c[0] + noise.sample(&mut rng));
            values.push(c[1] + noise.sample(&mut rng));
            labels.push(id as u32);
        }
    }
    Dataset::from_flat(values, 2, Some(labels)).expect("generated data is well formed")
}
