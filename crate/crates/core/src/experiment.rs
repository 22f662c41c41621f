//! Repeated, seeded comparison of the adaptive map against the batch SOM.
//!
//! Every run shuffles and splits the data, builds one initial lattice, and
//! trains both models from it. Results are aggregated over runs and can be
//! written as CSV/text summaries plus one JSON snapshot per trained map.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::train_batch_som;
use crate::data::Dataset;
use crate::engine::{smooth, train, BetaMode, TrainConfig, Trained};
use crate::error::{Error, Result};
use crate::grid::{build_lattice, init_weights, side_lengths, target_neuron_count, LatticeSpec, Topology};
use crate::io::{
    export_snapshot_json, generate_cluster_dataset, load_csv, split_dataset, CsvOptions, LabelColumn, MapSnapshot,
    MinMaxScaler, SplitFractions,
};
use crate::map::MapState;
use crate::metrics::{label_neurons, quality_report, QualityReport};

/// Where the patterns come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv {
        path: PathBuf,
        label: Option<LabelColumn>,
    },
    /// The synthetic four-blob set, generated with the given seed.
    Cluster {
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: DataSource,
    pub split: SplitFractions,
    pub runs: usize,
    pub seed: u64,
    /// Min-max scale features using the training split's ranges.
    pub normalize: bool,
    pub topology: Topology,
    /// Training settings; `seed` is replaced by a per-run seed.
    pub config: TrainConfig,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            source: DataSource::Cluster { seed: 0 },
            split: SplitFractions::default(),
            runs: 20,
            seed: 0,
            normalize: false,
            topology: Topology::Rectangular,
            config: TrainConfig::default(),
            output_dir: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 1 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        self.split.validate()?;
        self.config.validate()
    }

    /// Parses a flat `key = value` file. Blank lines and `#` comments are
    /// ignored; relative dataset paths resolve against the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    /// See [`ExperimentSpec::from_file`].
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        let mut builder = SpecBuilder::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            builder
                .apply(&mut spec, key.trim(), value.trim(), base_dir)
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, message(e))))?;
        }
        builder.finish(&mut spec)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Applies a single `key`/`value` override, as the CLI does for flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut builder = SpecBuilder {
            max_degree_set: true,
            ..Default::default()
        };
        builder.apply(self, key, value, Path::new(""))?;
        builder.finish(self)
    }
}

fn message(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

#[derive(Default)]
struct SpecBuilder {
    dataset: Option<String>,
    label: Option<Option<LabelColumn>>,
    cluster_seed: Option<u64>,
    max_degree_set: bool,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got '{value}'"))),
    }
}

impl SpecBuilder {
    fn apply(&mut self, spec: &mut ExperimentSpec, key: &str, value: &str, base: &Path) -> Result<()> {
        let cfg = &mut spec.config;
        match key {
            "dataset" => {
                self.dataset = Some(
                    if value.eq_ignore_ascii_case("cluster") || Path::new(value).is_absolute() {
                        value.to_string()
                    } else {
                        base.join(value).to_string_lossy().into_owned()
                    },
                )
            }
            "label" => {
                self.label = Some(if value.eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(value.parse()?)
                })
            }
            "cluster_seed" => self.cluster_seed = Some(parse_num(key, value)?),
            "split" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| parse_num(key, p.trim()))
                    .collect::<Result<_>>()?;
                let [train, test, validation] = parts[..] else {
                    return Err(Error::Config("split: expected three comma-separated fractions".into()));
                };
                spec.split = SplitFractions {
                    train,
                    test,
                    validation,
                };
            }
            "runs" => spec.runs = parse_num(key, value)?,
            "seed" => spec.seed = parse_num(key, value)?,
            "normalize" => spec.normalize = parse_bool(key, value)?,
            "topology" => spec.topology = value.parse()?,
            "output_dir" => spec.output_dir = Some(PathBuf::from(value)),
            "spread_factor" => cfg.spread_factor = parse_num(key, value)?,
            "gamma" => cfg.gamma = parse_num(key, value)?,
            "alpha_train" => cfg.alpha_train = parse_num(key, value)?,
            "alpha_smooth" => cfg.alpha_smooth = parse_num(key, value)?,
            "age_max" => cfg.age_max = parse_num(key, value)?,
            "t_add" => cfg.t_add = parse_num(key, value)?,
            "max_epochs" => cfg.max_epochs = parse_num(key, value)?,
            "max_smooth_epochs" => cfg.max_smooth_epochs = parse_num(key, value)?,
            "eps1" => cfg.eps1 = parse_num(key, value)?,
            "eps2" => cfg.eps2 = parse_num(key, value)?,
            "sigma0" => {
                cfg.sigma0 = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "sigma_final" => cfg.sigma_final = parse_num(key, value)?,
            "max_degree" => {
                cfg.max_degree = parse_num(key, value)?;
                self.max_degree_set = true;
            }
            "beta_clamp" => cfg.beta_mode = BetaMode::ClampedGaussian(parse_num(key, value)?),
            "beta_fixed" => cfg.beta_mode = BetaMode::Fixed(parse_num(key, value)?),
            "split_error" => cfg.split_error = value.parse()?,
            "preserve_edge_length" => cfg.preserve_edge_length = parse_bool(key, value)?,
            "age_idle_edges" => cfg.age_idle_edges = parse_bool(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    fn finish(self, spec: &mut ExperimentSpec) -> Result<()> {
        if !self.max_degree_set {
            spec.config.max_degree = spec.topology.max_degree();
        }
        let label = |current: Option<LabelColumn>| self.label.clone().unwrap_or(current);
        spec.source = match (self.dataset, &spec.source) {
            (Some(d), _) if d.eq_ignore_ascii_case("cluster") => DataSource::Cluster {
                seed: self.cluster_seed.unwrap_or(0),
            },
            (Some(d), _) => DataSource::Csv {
                path: PathBuf::from(d),
                label: label(None),
            },
            (None, DataSource::Csv { path, label: l }) => DataSource::Csv {
                path: path.clone(),
                label: label(l.clone()),
            },
            (None, DataSource::Cluster { seed }) => DataSource::Cluster {
                seed: self.cluster_seed.unwrap_or(*seed),
            },
        };
        Ok(())
    }
}

/// Loads the spec's dataset. Returns the data and the number of rows skipped
/// for missing values.
pub fn load_source(source: &DataSource) -> Result<(Dataset, usize)> {
    match source {
        DataSource::Cluster { seed } => Ok((generate_cluster_dataset(*seed), 0)),
        DataSource::Csv { path, label } => {
            let loaded = load_csv(path, &CsvOptions { label: label.clone() })?;
            Ok((loaded.dataset, loaded.rejected_lines.len()))
        }
    }
}

/// Seed of run `run` under experiment seed `seed`: one ChaCha stream per run.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng.next_u64()
}

/// Outcome of one model in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub neurons: usize,
    pub epochs: usize,
    pub smooth_epochs: usize,
    pub final_mqe: f64,
    pub train: QualityReport,
    pub test: QualityReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub initial_neurons: usize,
    pub amsom: ModelResult,
    pub som: ModelResult,
    pub amsom_map: MapSnapshot,
    pub som_map: MapSnapshot,
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Stat { mean, std: var.sqrt() }
    }
}

/// Names of the aggregated quantities, in output order.
pub const SUMMARY_METRICS: [&str; 9] = [
    "qe_train",
    "te_train",
    "qe_test",
    "te_test",
    "neurons",
    "epochs",
    "smooth_epochs",
    "dead_fraction_train",
    "final_mqe",
];

fn metric(m: &ModelResult, name: &str) -> f64 {
    match name {
        "qe_train" => m.train.qe,
        "te_train" => m.train.te,
        "qe_test" => m.test.qe,
        "te_test" => m.test.te,
        "neurons" => m.neurons as f64,
        "epochs" => m.epochs as f64,
        "smooth_epochs" => m.smooth_epochs as f64,
        "dead_fraction_train" => m.train.dead_fraction,
        "final_mqe" => m.final_mqe,
        _ => unreachable!("unknown metric {name}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub metric: &'static str,
    pub amsom: Stat,
    pub som: Stat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub patterns: usize,
    pub dim: usize,
    pub rejected_rows: usize,
    /// Completed runs, sorted by run index.
    pub runs: Vec<RunResult>,
    /// Runs that failed, with the error message.
    pub failures: Vec<(usize, String)>,
}

impl ExperimentResult {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        SUMMARY_METRICS
            .iter()
            .map(|&name| {
                let a: Vec<f64> = self.runs.iter().map(|r| metric(&r.amsom, name)).collect();
                let s: Vec<f64> = self.runs.iter().map(|r| metric(&r.som, name)).collect();
                SummaryRow {
                    metric: name,
                    amsom: Stat::of(&a),
                    som: Stat::of(&s),
                }
            })
            .collect()
    }

    pub fn stat(&self, name: &str) -> Option<(Stat, Stat)> {
        self.summary()
            .into_iter()
            .find(|r| r.metric == name)
            .map(|r| (r.amsom, r.som))
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("metric,amsom_mean,amsom_std,som_mean,som_std\n");
        for r in self.summary() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.metric, r.amsom.mean, r.amsom.std, r.som.mean, r.som.std
            );
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} run(s), {} patterns x {} features ({} rows skipped)",
            self.runs.len(),
            self.patterns,
            self.dim,
            self.rejected_rows
        );
        if let Some(r) = self.runs.first() {
            let _ = writeln!(
                out,
                "initial lattice {} x {} = {} neurons",
                r.rows, r.cols, r.initial_neurons
            );
        }
        for (run, msg) in &self.failures {
            let _ = writeln!(out, "PARTIAL: run {run} failed: {msg}");
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<20} {:>22} {:>22}",
            "metric", "amsom mean (std)", "som mean (std)"
        );
        for r in self.summary() {
            let cell = |s: Stat| format!("{:.4} ({:.4})", s.mean, s.std);
            let _ = writeln!(out, "{:<20} {:>22} {:>22}", r.metric, cell(r.amsom), cell(r.som));
        }
        out
    }

    pub fn runs_csv(&self) -> String {
        let mut out = String::from("run,seed,model,neurons,epochs,smooth_epochs,final_mqe,qe_train,te_train,dead_train,qe_test,te_test,dead_test\n");
        for r in &self.runs {
            for (name, m) in [("amsom", &r.amsom), ("som", &r.som)] {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.run,
                    r.seed,
                    name,
                    m.neurons,
                    m.epochs,
                    m.smooth_epochs,
                    m.final_mqe,
                    m.train.qe,
                    m.train.te,
                    m.train.dead_units,
                    m.test.qe,
                    m.test.te,
                    m.test.dead_units
                );
            }
        }
        out
    }

    /// Writes `summary.csv`, `summary.txt`, `runs.csv` and one snapshot per
    /// trained map into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: String| {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
        };
        write("summary.csv", self.summary_csv())?;
        write("summary.txt", self.summary_text())?;
        write("runs.csv", self.runs_csv())?;
        for r in &self.runs {
            export_snapshot_json(&r.amsom_map, dir.join(format!("run_{:03}_amsom.json", r.run)))?;
            export_snapshot_json(&r.som_map, dir.join(format!("run_{:03}_som.json", r.run)))?;
        }
        Ok(())
    }
}

fn model_result(trained: &Trained, smooth_epochs: usize, train: &Dataset, test: &Dataset) -> Result<ModelResult> {
    Ok(ModelResult {
        neurons: trained.map.len(),
        epochs: 0,
        smooth_epochs,
        final_mqe: trained.final_mqe().unwrap_or(f64::NAN),
        train: quality_report(train, &trained.map)?,
        test: quality_report(test, &trained.map)?,
    })
}

fn snapshot(
    map: &MapState,
    model: &str,
    data: &Dataset,
    config: &TrainConfig,
    result: &ModelResult,
) -> Result<MapSnapshot> {
    let labels = match data.labels() {
        Some(_) => Some(label_neurons(data, map)?),
        None => None,
    };
    Ok(MapSnapshot::from_map(map, model)
        .with_labels(labels, data.class_names().map(<[String]>::to_vec))
        .with_config(config)
        .with_metric("qe_train", result.train.qe)
        .with_metric("te_train", result.train.te)
        .with_metric("qe_test", result.test.qe)
        .with_metric("te_test", result.test.te)
        .with_metric("epochs", result.epochs as f64))
}

/// Trains both models for a single run.
pub fn run_once(spec: &ExperimentSpec, data: &Dataset, run: usize) -> Result<RunResult> {
    let seed = run_seed(spec.seed, run);
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let (split_seed, init_seed, train_seed) = (seeds.next_u64(), seeds.next_u64(), seeds.next_u64());

    let (mut train_set, mut test_set, _validation) = split_dataset(data, &spec.split, split_seed)?;
    if spec.normalize {
        let scaler = MinMaxScaler::fit(&train_set);
        train_set = scaler.transform(&train_set)?;
        test_set = scaler.transform(&test_set)?;
    }

    let (rows, cols) = side_lengths(&train_set, target_neuron_count(data.len()));
    let lattice = LatticeSpec::new(rows, cols, spec.topology)?;
    let mut initial = build_lattice(&lattice, train_set.dim())?;
    init_weights(&mut initial, &train_set, init_seed)?;
    let config = TrainConfig {
        seed: train_seed,
        ..spec.config.clone()
    };

    let trained = train(&train_set, initial.clone(), &config)?;
    let epochs = trained.epochs();
    let smoothed = smooth(&train_set, trained.map, &config)?;
    let mut amsom = model_result(&smoothed, smoothed.epochs(), &train_set, &test_set)?;
    amsom.epochs = epochs;
    amsom.final_mqe = smoothed
        .final_mqe()
        .or(trained.reports.last().map(|r| r.mqe))
        .unwrap_or(f64::NAN);

    let som_trained = train_batch_som(&train_set, initial.clone(), &config)?;
    let mut som = model_result(&som_trained, 0, &train_set, &test_set)?;
    som.epochs = som_trained.epochs();

    Ok(RunResult {
        run,
        seed,
        rows,
        cols,
        initial_neurons: initial.len(),
        amsom_map: snapshot(&smoothed.map, "amsom", &train_set, &config, &amsom)?,
        som_map: snapshot(&som_trained.map, "som", &train_set, &config, &som)?,
        amsom,
        som,
    })
}

/// Runs every repetition (in parallel), aggregates, and writes the outputs
/// when the spec names a directory. If a run fails, the completed runs are
/// still written, flagged as partial, and the first error is returned.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let (data, rejected_rows) = load_source(&spec.source)?;
    if data.dim() < 2 {
        return Err(Error::Config(format!(
            "the growing threshold needs at least 2 features, dataset has {}",
            data.dim()
        )));
    }
    let outcomes: Vec<(usize, Result<RunResult>)> = (0..spec.runs)
        .into_par_iter()
        .map(|run| (run, run_once(spec, &data, run)))
        .collect();

    let mut result = ExperimentResult {
        patterns: data.len(),
        dim: data.dim(),
        rejected_rows,
        runs: Vec::new(),
        failures: Vec::new(),
    };
    let mut first_error = None;
    for (run, outcome) in outcomes {
        match outcome {
            Ok(r) => result.runs.push(r),
            Err(e) => {
                result.failures.push((run, e.to_string()));
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(dir) = &spec.output_dir {
        result.write(dir)?;
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(result),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_config() {
        let text = "# iris\ndataset = iris.csv\nlabel = last\nruns = 3\nsplit = 0.5, 0.25, 0.25\n\
                    gamma = 2 # inline\ntopology = hex\nsigma0 = auto\nsplit_error = total\n";
        let spec = ExperimentSpec::parse(text, Path::new("/data")).unwrap();
        assert_eq!(
            spec.source,
            DataSource::Csv {
                path: PathBuf::from("/data/iris.csv"),
                label: Some(LabelColumn::Last)
            }
        );
        assert_eq!(spec.runs, 3);
        assert_eq!(spec.split.train, 0.5);
        assert_eq!(spec.config.gamma, 2.0);
        assert_eq!(spec.config.max_degree, 6);
        assert_eq!(spec.config.split_error, crate::engine::SplitError::Total);
    }

    #[test]
    fn config_errors_name_the_line() {
        let err = ExperimentSpec::parse("runs = 2\nbogus = 1\n", Path::new("")).unwrap_err();
        assert!(
            matches!(&err, Error::Config(m) if m.contains("line 2") && m.contains("bogus")),
            "{err}"
        );
        assert!(ExperimentSpec::parse("runs = 0\n", Path::new("")).is_err());
        assert!(ExperimentSpec::parse("gamma 4\n", Path::new("")).is_err());
        assert!(ExperimentSpec::parse("split = 1, 0\n", Path::new("")).is_err());
    }

    #[test]
    fn run_seeds_differ_and_repeat() {
        let seeds: Vec<u64> = (0..5).map(|r| run_seed(9, r)).collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), 5);
        assert_eq!(seeds, (0..5).map(|r| run_seed(9, r)).collect::<Vec<_>>());
    }

    #[test]
    fn population_std() {
        let s = Stat::of(&[1.0, 3.0]);
        assert_eq!((s.mean, s.std), (2.0, 1.0));
        assert_eq!(Stat::of(&[4.0]).std, 0.0);
    }
}
