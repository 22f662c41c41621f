//! `amsom`: train maps, run seeded benchmarks, render snapshots.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 runtime
//! error.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amsom_core::baseline::train_batch_som_with_progress;
use amsom_core::engine::{smooth_with_progress, train_with_progress, EpochReport};
use amsom_core::experiment::{load_source, run_experiment, DataSource, ExperimentSpec};
use amsom_core::grid::{build_lattice, init_weights, side_lengths, target_neuron_count, LatticeSpec};
use amsom_core::io::{export_snapshot_json, load_snapshot_json, write_svg, MapSnapshot, MinMaxScaler};
use amsom_core::metrics::{label_neurons, quality_report};
use amsom_core::{Error, ErrorKind, MapState, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "amsom", version, about = "Adaptive moving self-organizing maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train on a whole dataset and write snapshot, SVG and epoch trace.
    Train(TrainArgs),
    /// Run a seeded multi-run comparison described by a spec file.
    Bench(BenchArgs),
    /// Render a snapshot JSON file as SVG.
    Render(RenderArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Amsom,
    Som,
    Both,
}

#[derive(clap::Args)]
struct TrainArgs {
    /// CSV file, or `cluster` for the synthetic four-blob set.
    #[arg(long)]
    data: Option<String>,
    /// Label column: index, header name or `last`.
    #[arg(long)]
    label: Option<String>,
    /// Flat key = value file with dataset and training settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set gamma=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, value_enum, default_value = "amsom")]
    model: Model,
    #[arg(long)]
    seed: Option<u64>,
    /// Min-max scale features to [0, 1].
    #[arg(long)]
    normalize: bool,
    #[arg(long, short)]
    out: PathBuf,
    /// Print one line per epoch.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Experiment spec file.
    spec: PathBuf,
    /// Output directory; overrides `output_dir` in the spec.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(clap::Args)]
struct RenderArgs {
    snapshot: PathBuf,
    /// Output SVG; defaults to the snapshot path with an `.svg` extension.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn apply_overrides(spec: &mut ExperimentSpec, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{o}'")))?;
        spec.set(k.trim(), v.trim())?;
    }
    Ok(())
}

fn write_text(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn epoch_line(phase: &str, r: &EpochReport) -> String {
    format!(
        "{phase},{},{},{},{},{}\n",
        r.epoch,
        r.sigma,
        r.mqe,
        r.neurons,
        r.events.len()
    )
}

fn train_cmd(args: TrainArgs) -> Result<()> {
    let mut spec = match &args.config {
        Some(p) => ExperimentSpec::from_file(p)?,
        None => ExperimentSpec::default(),
    };
    if let Some(d) = &args.data {
        spec.set("dataset", d)?;
        if args.label.is_none() && !d.eq_ignore_ascii_case("cluster") {
            spec.set("label", "none")?;
        }
    }
    if let Some(l) = &args.label {
        spec.set("label", l)?;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    spec.normalize |= args.normalize;
    apply_overrides(&mut spec, &args.overrides)?;
    spec.validate()?;
    if args.config.is_none() && args.data.is_none() {
        return Err(Error::Config("train needs --data or --config".into()));
    }

    let (mut data, rejected) = load_source(&spec.source)?;
    if rejected > 0 {
        eprintln!("skipped {rejected} row(s) with missing values");
    }
    if spec.normalize {
        data = MinMaxScaler::fit(&data).transform(&data)?;
    }
    let (rows, cols) = side_lengths(&data, target_neuron_count(data.len()));
    let mut initial = build_lattice(&LatticeSpec::new(rows, cols, spec.topology)?, data.dim())?;
    init_weights(&mut initial, &data, spec.seed)?;
    let config = amsom_core::TrainConfig {
        seed: spec.seed,
        ..spec.config.clone()
    };
    let out = &args.out;
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    println!(
        "{} patterns x {} features, initial lattice {rows} x {cols}",
        data.len(),
        data.dim()
    );

    let mut trace = String::from("phase,epoch,sigma,mqe,neurons,events\n");
    let verbose = args.verbose;
    let mut log = |phase: &str, r: &EpochReport| {
        trace.push_str(&epoch_line(phase, r));
        if verbose {
            eprintln!(
                "{phase} epoch {:4}  sigma {:.4}  mqe {:.6}  neurons {}",
                r.epoch, r.sigma, r.mqe, r.neurons
            );
        }
    };

    let mut finished: Vec<(&str, MapState)> = Vec::new();
    if args.model != Model::Som {
        let trained = train_with_progress(&data, initial.clone(), &config, &mut |r, _| log("train", r))?;
        let smoothed = smooth_with_progress(&data, trained.map, &config, &mut |r, _| log("smooth", r))?;
        finished.push(("amsom", smoothed.map));
    }
    if args.model != Model::Amsom {
        let som = train_batch_som_with_progress(&data, initial, &config, &mut |r, _| log("som", r))?;
        finished.push(("som", som.map));
    }
    write_text(&out.join("epochs.csv"), &trace)?;

    for (name, map) in finished {
        let q = quality_report(&data, &map)?;
        let labels = match data.labels() {
            Some(_) => Some(label_neurons(&data, &map)?),
            None => None,
        };
        let snap = MapSnapshot::from_map(&map, name)
            .with_labels(labels, data.class_names().map(<[String]>::to_vec))
            .with_config(&config)
            .with_metric("qe", q.qe)
            .with_metric("te", q.te)
            .with_metric("dead_fraction", q.dead_fraction);
        export_snapshot_json(&snap, out.join(format!("{name}.json")))?;
        write_svg(&snap, out.join(format!("{name}.svg")))?;
        println!(
            "{name}: neurons {}  qe {:.4}  te {:.4}  dead {}",
            map.len(),
            q.qe,
            q.te,
            q.dead_units
        );
    }
    Ok(())
}

fn bench_cmd(args: BenchArgs) -> Result<()> {
    let mut spec = ExperimentSpec::from_file(&args.spec)?;
    if let Some(r) = args.runs {
        spec.runs = r;
    }
    apply_overrides(&mut spec, &args.overrides)?;
    if let Some(o) = args.out {
        spec.output_dir = Some(o);
    }
    if let DataSource::Csv { path, .. } = &spec.source {
        eprintln!("dataset {}", path.display());
    }
    let result = run_experiment(&spec)?;
    print!("{}", result.summary_text());
    std::io::stdout().flush().ok();
    Ok(())
}

fn render_cmd(args: RenderArgs) -> Result<()> {
    let snap = load_snapshot_json(&args.snapshot)?;
    snap.to_map()?;
    let out = args.out.unwrap_or_else(|| args.snapshot.with_extension("svg"));
    write_svg(&snap, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Train(a) => train_cmd(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Render(a) => render_cmd(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 1,
                ErrorKind::Data => 2,
                ErrorKind::Runtime => 3,
            })
        }
    }
}
