//! Dataset ingestion, splitting, snapshots and rendering.

mod csv;
mod snapshot;
mod split;
mod svg;
mod synth;

pub use self::csv::{load_csv, CsvLoad, CsvOptions, LabelColumn};
pub use snapshot::{
    export_snapshot_json, load_snapshot_json, MapSnapshot, SnapshotEdge, SNAPSHOT_FORMAT, SNAPSHOT_VERSION,
};
pub use split::{split_dataset, MinMaxScaler, SplitFractions};
pub use svg::{render_svg, write_svg};
pub use synth::{generate_cluster_dataset, CLUSTER_BLOB_SIZE, CLUSTER_CENTERS, CLUSTER_SPREAD};
