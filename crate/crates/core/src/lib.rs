//! Adaptive moving self-organizing map (AMSOM) and the classic batch SOM.
//!
//! The adaptive map starts from a lattice sized from the data, then lets its
//! neurons move in output space, ages and prunes edges between them, removes
//! neurons left without edges and splits neurons whose quantization error
//! exceeds a growing threshold. [`experiment`] runs both maps side by side
//! under a seeded train/test/validation protocol.

pub mod baseline;
pub mod data;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod io;
pub mod map;
pub mod metrics;

pub use baseline::train_batch_som;
pub use data::Dataset;
pub use engine::{smooth, train, EpochReport, StructuralEvent, TrainConfig, Trained};
pub use error::{Error, ErrorKind, Result};
pub use grid::{LatticeSpec, Topology};
pub use map::{assign_all, find_winner_pair, squared_distance, Assignment, MapState};
pub use metrics::QualityReport;
