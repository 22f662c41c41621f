use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::TrainConfig;
use crate::error::{Error, Result};
use crate::map::MapState;

pub const SNAPSHOT_FORMAT: &str = "amsom-map";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Undirected edge, stored once with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotEdge {
    pub a: usize,
    pub b: usize,
    pub age: u32,
}

/// Serializable frozen map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSnapshot {
    pub format: String,
    pub version: u32,
    /// Which trainer produced the map (`amsom` or `som`).
    pub model: String,
    pub dim: usize,
    pub weights: Vec<Vec<f64>>,
    pub positions: Vec<[f64; 2]>,
    pub edges: Vec<SnapshotEdge>,
    pub win_counts: Vec<u64>,
    pub labels: Option<Vec<Option<u32>>>,
    pub class_names: Option<Vec<String>>,
    pub config: Option<TrainConfig>,
    pub metrics: BTreeMap<String, f64>,
}

impl MapSnapshot {
    pub fn from_map(map: &MapState, model: &str) -> Self {
        Self {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            model: model.to_string(),
            dim: map.dim(),
            weights: map.weight_rows().map(<[f64]>::to_vec).collect(),
            positions: map.positions().to_vec(),
            edges: map
                .edge_list()
                .into_iter()
                .map(|(a, b, age)| SnapshotEdge { a, b, age })
                .collect(),
            win_counts: map.win_counts().to_vec(),
            labels: None,
            class_names: None,
            config: None,
            metrics: BTreeMap::new(),
        }
    }

    pub fn with_labels(mut self, labels: Option<Vec<Option<u32>>>, class_names: Option<Vec<String>>) -> Self {
        self.labels = labels;
        self.class_names = class_names;
        self
    }

    pub fn with_config(mut self, config: &TrainConfig) -> Self {
        self.config = Some(config.clone());
        self
    }

    pub fn with_metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    /// Rebuilds the map state.
    pub fn to_map(&self) -> Result<MapState> {
        if self.format != SNAPSHOT_FORMAT || self.version != SNAPSHOT_VERSION {
            return Err(Error::Data(format!(
                "unsupported snapshot {} v{}",
                self.format, self.version
            )));
        }
        if self.weights.iter().any(|w| w.len() != self.dim) || self.win_counts.len() != self.weights.len() {
            return Err(Error::Data("snapshot matrices have inconsistent shapes".into()));
        }
        let edges: Vec<(usize, usize, u32)> = self.edges.iter().map(|e| (e.a, e.b, e.age)).collect();
        let mut map = MapState::from_parts(&self.weights, &self.positions, &edges)?;
        map.set_win_counts(self.win_counts.clone());
        Ok(map)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn export_snapshot_json(snapshot: &MapSnapshot, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = snapshot.to_json()?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot_json(path: impl AsRef<Path>) -> Result<MapSnapshot> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    MapSnapshot::from_json(&text)
}
