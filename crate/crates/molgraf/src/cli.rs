//! Command-line front end. Every subcommand is deterministic for a
//! fixed `--seed`; outputs are plain text or CSV meant for external
//! plotting tools.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    distance_matrix, export_colored_graph, kmeans, pca_project, stack_node_states, DEFAULT_PALETTE,
};
use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::datagen::gen_dataset;
use crate::dataset::{load_dataset, write_dataset};
use crate::featurize::{batch, GraphBatch};
use crate::model::{AttentionMode, CombineMode, ModelConfig, ModelParams, Variant};
use crate::rng::SplitMix64;
use crate::smiles::{parse, BondOrder};
use crate::training::{evaluate, predict_batch, split_dataset, train, TrainConfig, DEFAULT_SPLIT};

/// Errors split by exit code: usage problems exit 2, failures during
/// the actual work exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(err: impl std::fmt::Display) -> CliError {
    CliError::Runtime(err.to_string())
}

/// Resolved settings for one invocation: model and optimizer
/// hyperparameters plus analysis knobs. Assembled from defaults, then a
/// `--config` file, then individual flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variant: Variant,
    pub layers: usize,
    pub heads: usize,
    pub attention_mode: AttentionMode,
    pub combine: Option<CombineMode>,
    pub hidden_dim: usize,
    pub readout_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub decay_rate: f64,
    pub seed: u64,
    pub k: usize,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        let model = ModelConfig::default();
        let train = TrainConfig::default();
        RunConfig {
            variant: model.variant,
            layers: model.layers,
            heads: model.heads,
            attention_mode: model.attention_mode,
            combine: None,
            hidden_dim: model.hidden_dim,
            readout_dim: model.readout_dim,
            epochs: train.epochs,
            batch_size: train.batch_size,
            learning_rate: train.learning_rate,
            decay_rate: train.decay_rate,
            seed: train.seed,
            k: 10,
        }
    }
}

impl RunConfig {
    /// Parse `key=value` lines; `#` starts a comment, blank lines are
    /// skipped, unknown keys are rejected.
    pub fn from_text(text: &str) -> Result<RunConfig, CliError> {
        let mut config = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key=value", i + 1)))?;
            config.apply(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn parsed<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| usage(format!("config key {key}: {e}")))
        }
        match key {
            "variant" => self.variant = parsed(key, value)?,
            "layers" => self.layers = parsed(key, value)?,
            "heads" => self.heads = parsed(key, value)?,
            "attention_mode" => self.attention_mode = parsed(key, value)?,
            "combine" => self.combine = Some(parsed(key, value)?),
            "hidden_dim" => self.hidden_dim = parsed(key, value)?,
            "readout_dim" => self.readout_dim = parsed(key, value)?,
            "epochs" => self.epochs = parsed(key, value)?,
            "batch_size" => self.batch_size = parsed(key, value)?,
            "learning_rate" => self.learning_rate = parsed(key, value)?,
            "decay_rate" => self.decay_rate = parsed(key, value)?,
            "seed" => self.seed = parsed(key, value)?,
            "k" => self.k = parsed(key, value)?,
            other => return Err(usage(format!("unknown config key \"{other}\""))),
        }
        Ok(())
    }

    /// Serialize so that [`RunConfig::from_text`] reproduces this value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "variant={}", self.variant);
        let _ = writeln!(out, "layers={}", self.layers);
        let _ = writeln!(out, "heads={}", self.heads);
        let _ = writeln!(out, "attention_mode={}", self.attention_mode);
        if let Some(combine) = self.combine {
            let _ = writeln!(out, "combine={combine}");
        }
        let _ = writeln!(out, "hidden_dim={}", self.hidden_dim);
        let _ = writeln!(out, "readout_dim={}", self.readout_dim);
        let _ = writeln!(out, "epochs={}", self.epochs);
        let _ = writeln!(out, "batch_size={}", self.batch_size);
        let _ = writeln!(out, "learning_rate={}", self.learning_rate);
        let _ = writeln!(out, "decay_rate={}", self.decay_rate);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "k={}", self.k);
        out
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            variant: self.variant,
            layers: self.layers,
            heads: self.heads,
            attention_mode: self.attention_mode,
            combine_override: self.combine,
            hidden_dim: self.hidden_dim,
            readout_dim: self.readout_dim,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            decay_rate: self.decay_rate,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }
}

/// Hyperparameter flags shared by the modeling subcommands. Anything
/// set here overrides the `--config` file. `depth-study` uses this set
/// directly because it repurposes `--layers` for its sweep range; the
/// other commands get the single-depth flag through [`HyperFlags`].
#[derive(Args, Debug, Clone, Default)]
struct SweepHyperFlags {
    /// Key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model variant: gcn, gcn+attention, gcn+gate, gcn+attention+gate
    #[arg(long)]
    variant: Option<String>,
    /// Attention heads per layer
    #[arg(long)]
    heads: Option<usize>,
    /// Attention scoring: coupling or softmax-concat
    #[arg(long)]
    attention_mode: Option<String>,
    /// Training epochs
    #[arg(long)]
    epochs: Option<usize>,
    /// Minibatch size
    #[arg(long)]
    batch_size: Option<usize>,
    /// Base learning rate
    #[arg(long)]
    lr: Option<f64>,
    /// Per-epoch learning-rate decay factor
    #[arg(long)]
    decay: Option<f64>,
    /// Seed for every random choice in the run
    #[arg(long)]
    seed: Option<u64>,
    /// Cluster count for atom analysis
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
struct HyperFlags {
    #[command(flatten)]
    sweep: SweepHyperFlags,
    /// Number of graph convolution layers
    #[arg(long)]
    layers: Option<usize>,
}

impl HyperFlags {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = self.sweep.resolve()?;
        if let Some(v) = self.layers {
            config.layers = v;
        }
        Ok(config)
    }
}

impl SweepHyperFlags {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => {
                let text = read_input(path)?;
                RunConfig::from_text(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &self.variant {
            config.apply("variant", v)?;
        }
        if let Some(v) = self.heads {
            config.heads = v;
        }
        if let Some(v) = &self.attention_mode {
            config.apply("attention_mode", v)?;
        }
        if let Some(v) = self.epochs {
            config.epochs = v;
        }
        if let Some(v) = self.batch_size {
            config.batch_size = v;
        }
        if let Some(v) = self.lr {
            config.learning_rate = v;
        }
        if let Some(v) = self.decay {
            config.decay_rate = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.k {
            config.k = v;
        }
        Ok(config)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "molgraf",
    about = "Graph-convolutional property models over SMILES molecules",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a SMILES string and print its graph
    Parse {
        /// SMILES string, e.g. "CC(C)O"
        smiles: String,
        /// Write the dump here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model and write the best-validation checkpoint
    Train {
        #[command(flatten)]
        hyper: HyperFlags,
        /// Dataset CSV with header "smiles,target"
        #[arg(long)]
        data: Option<PathBuf>,
        /// Checkpoint output path
        #[arg(long)]
        out: Option<PathBuf>,
        /// History CSV path; defaults to the checkpoint with extension
        /// "history.csv"
        #[arg(long)]
        history: Option<PathBuf>,
        /// Print the resolved configuration and exit
        #[arg(long)]
        dump_config: bool,
    },
    /// Report MAE and error standard deviation on a dataset
    Evaluate {
        /// Trained checkpoint
        #[arg(long)]
        model: PathBuf,
        /// Dataset CSV with header "smiles,target"
        #[arg(long)]
        data: PathBuf,
        /// Write the report here as well as stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write model predictions for a dataset
    Predict {
        /// Trained checkpoint
        #[arg(long)]
        model: PathBuf,
        /// Dataset CSV with header "smiles,target"
        #[arg(long)]
        data: PathBuf,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster atom states, project them to 2-D, and export colored
    /// molecule graphs
    AnalyzeAtoms {
        #[command(flatten)]
        hyper: HyperFlags,
        /// Trained checkpoint
        #[arg(long)]
        model: PathBuf,
        /// Dataset CSV with header "smiles,target"
        #[arg(long)]
        data: PathBuf,
        /// Output directory for atoms.csv and one DOT file per molecule
        #[arg(long)]
        out: PathBuf,
    },
    /// Export the normalized latent distance matrix, rows sorted by
    /// target
    LatentDistance {
        /// Trained checkpoint
        #[arg(long)]
        model: PathBuf,
        /// Dataset CSV with header "smiles,target"
        #[arg(long)]
        data: PathBuf,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Train variants across convolution depths and tabulate MAE
    DepthStudy {
        #[command(flatten)]
        hyper: HyperFlags,
        /// Dataset CSV with header "smiles,target"
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated variant list
        #[arg(long, default_value = "gcn,gcn+attention+gate")]
        variants: String,
        /// Layer counts: a single number or an inclusive range like 1..7
        #[arg(long = "layers", default_value = "1..7")]
        layer_range: String,
        /// Output CSV path; defaults to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset of parseable molecules
    GenData {
        /// Number of distinct molecules
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Generator seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum heavy atoms per molecule
        #[arg(long, default_value_t = 24)]
        max_atoms: usize,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
}

/// Entry point: parses `argv`, applies `MOLGRAF_THREADS`, runs the
/// subcommand, and translates errors to exit codes.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 2; --help and --version exit 0.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match configure_threads().and_then(|()| dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Some(raw) = std::env::var_os("MOLGRAF_THREADS") else {
        return Ok(());
    };
    let parsed: usize = raw
        .to_string_lossy()
        .trim()
        .parse()
        .map_err(|_| usage("MOLGRAF_THREADS must be a positive integer"))?;
    if parsed == 0 {
        return Err(usage("MOLGRAF_THREADS must be a positive integer"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(parsed)
        .build_global()
        .map_err(|e| usage(format!("could not configure worker threads: {e}")))
}

fn read_input(path: &Path) -> Result<String, CliError> {
    if !path.is_file() {
        return Err(usage(format!("input file {} does not exist", path.display())));
    }
    std::fs::read_to_string(path)
        .map_err(|e| runtime(format!("could not read {}: {e}", path.display())))
}

/// Input paths must exist and output locations must be creatable before
/// any expensive work starts.
fn check_input(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("input file {} does not exist", path.display())))
    }
}

fn check_output(path: &Path) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => return Ok(()),
    };
    if parent.is_dir() {
        Ok(())
    } else {
        Err(usage(format!(
            "output directory {} does not exist",
            parent.display()
        )))
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| runtime(format!("could not write {}: {e}", path.display())))
}

fn load_features(path: &Path) -> Result<(Vec<(String, f64)>, GraphBatch), CliError> {
    let text = read_input(path)?;
    let records = crate::dataset::parse_dataset(&text).map_err(runtime)?;
    let names: Vec<(String, f64)> = {
        // Recover the SMILES column for outputs that echo it.
        let mut lines = text.lines();
        lines.next();
        lines
            .filter(|l| !l.trim_end().is_empty())
            .zip(&records)
            .map(|(line, (_, target))| {
                let smiles = line.split(',').next().unwrap_or("").to_string();
                (smiles, *target)
            })
            .collect()
    };
    Ok((names, batch(&records)))
}

fn format_float(v: f64) -> String {
    format!("{v}")
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Parse { smiles, out } => cmd_parse(&smiles, out.as_deref()),
        Command::Train {
            hyper,
            data,
            out,
            history,
            dump_config,
        } => cmd_train(&hyper, data, out, history, dump_config),
        Command::Evaluate { model, data, out } => cmd_evaluate(&model, &data, out.as_deref()),
        Command::Predict { model, data, out } => cmd_predict(&model, &data, &out),
        Command::AnalyzeAtoms {
            hyper,
            model,
            data,
            out,
        } => cmd_analyze_atoms(&hyper, &model, &data, &out),
        Command::LatentDistance { model, data, out } => cmd_latent_distance(&model, &data, &out),
        Command::DepthStudy {
            hyper,
            data,
            variants,
            layer_range,
            out,
        } => cmd_depth_study(&hyper, &data, &variants, &layer_range, out.as_deref()),
        Command::GenData {
            count,
            seed,
            max_atoms,
            out,
        } => cmd_gen_data(count, seed, max_atoms, &out),
    }
}

fn order_text(order: BondOrder) -> &'static str {
    match order {
        BondOrder::Single => "1",
        BondOrder::Double => "2",
        BondOrder::Triple => "3",
        BondOrder::Aromatic => "1.5",
    }
}

fn cmd_parse(smiles: &str, out: Option<&Path>) -> Result<(), CliError> {
    if let Some(path) = out {
        check_output(path)?;
    }
    let graph = parse(smiles).map_err(runtime)?;
    let mut dump = String::new();
    for (i, atom) in graph.atoms.iter().enumerate() {
        let _ = writeln!(
            dump,
            "{i} {} {} {} {}",
            atom.element.symbol(),
            atom.aromatic,
            atom.hydrogens,
            atom.charge
        );
    }
    for bond in &graph.bonds {
        let _ = writeln!(dump, "{} {} {}", bond.a, bond.b, order_text(bond.order));
    }
    match out {
        Some(path) => write_text(path, &dump),
        None => {
            print!("{dump}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    hyper: &HyperFlags,
    data: Option<PathBuf>,
    out: Option<PathBuf>,
    history: Option<PathBuf>,
    dump_config: bool,
) -> Result<(), CliError> {
    let config = hyper.resolve()?;
    if dump_config {
        match out {
            Some(path) => {
                check_output(&path)?;
                return write_text(&path, &config.to_text());
            }
            None => {
                print!("{}", config.to_text());
                return Ok(());
            }
        }
    }
    let data = data.ok_or_else(|| usage("train requires --data"))?;
    let out = out.ok_or_else(|| usage("train requires --out"))?;
    check_input(&data)?;
    check_output(&out)?;
    let history_path = history.unwrap_or_else(|| out.with_extension("history.csv"));
    check_output(&history_path)?;

    let records = load_dataset(&data).map_err(runtime)?;
    let (train_recs, val_recs, _test) =
        split_dataset(records, DEFAULT_SPLIT, config.seed).map_err(runtime)?;
    let train_set = batch(&train_recs);
    let val_set = batch(&val_recs);

    let model_config = config.model_config();
    model_config.validate().map_err(|e| usage(e.to_string()))?;
    let mut init_rng = SplitMix64::new(config.seed).fork(1);
    let params = ModelParams::init(model_config, &mut init_rng).map_err(runtime)?;

    let outcome = train(&config.train_config(), params, &train_set, &val_set).map_err(runtime)?;
    save_checkpoint(&outcome.params, &out).map_err(runtime)?;
    outcome
        .history
        .write_csv(&history_path)
        .map_err(|e| runtime(format!("could not write history: {e}")))?;

    let best = outcome
        .history
        .epochs
        .iter()
        .map(|e| e.val_mae)
        .fold(f64::INFINITY, f64::min);
    println!(
        "trained {} epochs on {} molecules; best validation MAE {}",
        outcome.history.epochs.len(),
        train_set.size(),
        format_float(best)
    );
    Ok(())
}

fn cmd_evaluate(model: &Path, data: &Path, out: Option<&Path>) -> Result<(), CliError> {
    check_input(model)?;
    check_input(data)?;
    if let Some(path) = out {
        check_output(path)?;
    }
    let params = load_checkpoint(model).map_err(runtime)?;
    let (_, set) = load_features(data)?;
    let (mae, std) = evaluate(&params, &set).map_err(runtime)?;
    let report = format!("mae {}\nstd {}\n", format_float(mae), format_float(std));
    print!("{report}");
    if let Some(path) = out {
        write_text(path, &report)?;
    }
    Ok(())
}

fn cmd_predict(model: &Path, data: &Path, out: &Path) -> Result<(), CliError> {
    check_input(model)?;
    check_input(data)?;
    check_output(out)?;
    let params = load_checkpoint(model).map_err(runtime)?;
    let (names, set) = load_features(data)?;
    let preds = predict_batch(&params, &set).map_err(runtime)?;
    let mut csv = String::from("smiles,prediction\n");
    for ((smiles, _), pred) in names.iter().zip(&preds) {
        let _ = writeln!(csv, "{smiles},{}", format_float(*pred));
    }
    write_text(out, &csv)
}

fn cmd_analyze_atoms(
    hyper: &HyperFlags,
    model: &Path,
    data: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let config = hyper.resolve()?;
    check_input(model)?;
    check_input(data)?;
    check_output(out)?;
    let params = load_checkpoint(model).map_err(runtime)?;
    let text = read_input(data)?;
    let records = crate::dataset::parse_dataset(&text).map_err(runtime)?;
    let graphs: Vec<_> = records.iter().map(|(g, _)| g.clone()).collect();
    let molecules: Vec<_> = graphs.iter().map(crate::featurize::featurize).collect();

    let (stacked, provenance) = stack_node_states(&params, &molecules).map_err(runtime)?;
    let clusters = kmeans(&stacked, config.k, config.seed).map_err(runtime)?;
    let projection = pca_project(&stacked, 2).map_err(runtime)?;

    std::fs::create_dir_all(out)
        .map_err(|e| runtime(format!("could not create {}: {e}", out.display())))?;
    let mut csv = String::from("molecule_id,atom_index,x,y,label\n");
    for (row, &(mi, ai)) in provenance.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{mi},{ai},{},{},{}",
            format_float(projection.coords.get(row, 0)),
            format_float(projection.coords.get(row, 1)),
            clusters.assignments[row]
        );
    }
    write_text(&out.join("atoms.csv"), &csv)?;

    let mut cursor = 0;
    for (mi, graph) in graphs.iter().enumerate() {
        let n = graph.atom_count();
        let labels = &clusters.assignments[cursor..cursor + n];
        cursor += n;
        let dot = export_colored_graph(graph, labels, &DEFAULT_PALETTE).map_err(runtime)?;
        write_text(&out.join(format!("mol{mi}.dot")), &dot)?;
    }
    println!(
        "wrote atoms.csv and {} DOT files to {}",
        graphs.len(),
        out.display()
    );
    Ok(())
}

fn cmd_latent_distance(model: &Path, data: &Path, out: &Path) -> Result<(), CliError> {
    check_input(model)?;
    check_input(data)?;
    check_output(out)?;
    let params = load_checkpoint(model).map_err(runtime)?;
    let (_, set) = load_features(data)?;
    let entries: Vec<(f64, Vec<f64>)> = set
        .graphs
        .iter()
        .map(|(x, a, t)| {
            crate::analysis::extract_features(&params, x, a).map(|f| (*t, f.graph_latent))
        })
        .collect::<Result<_, _>>()
        .map_err(runtime)?;
    let dm = distance_matrix(&entries).map_err(runtime)?;

    let mut csv = String::from("property");
    for p in &dm.properties {
        let _ = write!(csv, ",{}", format_float(*p));
    }
    csv.push('\n');
    for i in 0..dm.matrix.rows() {
        let _ = write!(csv, "{}", format_float(dm.properties[i]));
        for j in 0..dm.matrix.cols() {
            let _ = write!(csv, ",{}", format_float(dm.matrix.get(i, j)));
        }
        csv.push('\n');
    }
    write_text(out, &csv)
}

fn parse_layer_range(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || usage(format!("--layers expects N or A..B, got \"{text}\""));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        Ok((lo..=hi).collect())
    } else {
        let single: usize = text.trim().parse().map_err(|_| bad())?;
        if single == 0 {
            return Err(bad());
        }
        Ok(vec![single])
    }
}

fn cmd_depth_study(
    hyper: &HyperFlags,
    data: &Path,
    variants: &str,
    layer_range: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let config = hyper.resolve()?;
    check_input(data)?;
    if let Some(path) = out {
        check_output(path)?;
    }
    let variants: Vec<Variant> = variants
        .split(',')
        .map(|v| v.trim().parse().map_err(|e: crate::model::ModelError| usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    let depths = parse_layer_range(layer_range)?;

    let records = load_dataset(data).map_err(runtime)?;
    let (train_recs, val_recs, test_recs) =
        split_dataset(records, DEFAULT_SPLIT, config.seed).map_err(runtime)?;
    let train_set = batch(&train_recs);
    let val_set = batch(&val_recs);
    let test_set = batch(&test_recs);

    let mut csv = String::from("variant,layers,val_mae,test_mae,seconds\n");
    for &variant in &variants {
        for &layers in &depths {
            let model_config = ModelConfig {
                variant,
                layers,
                heads: config.heads,
                attention_mode: config.attention_mode,
                combine_override: config.combine,
                hidden_dim: config.hidden_dim,
                readout_dim: config.readout_dim,
            };
            model_config.validate().map_err(|e| usage(e.to_string()))?;
            let mut init_rng = SplitMix64::new(config.seed).fork(1);
            let params = ModelParams::init(model_config, &mut init_rng).map_err(runtime)?;
            let outcome =
                train(&config.train_config(), params, &train_set, &val_set).map_err(runtime)?;
            let seconds: f64 = outcome.history.epochs.iter().map(|e| e.seconds).sum();
            let val_mae = outcome
                .history
                .epochs
                .iter()
                .map(|e| e.val_mae)
                .fold(f64::INFINITY, f64::min);
            let (test_mae, _) = evaluate(&outcome.params, &test_set).map_err(runtime)?;
            let _ = writeln!(
                csv,
                "{variant},{layers},{},{},{}",
                format_float(val_mae),
                format_float(test_mae),
                format_float(seconds)
            );
            eprintln!("finished {variant} at {layers} layers");
        }
    }
    match out {
        Some(path) => write_text(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_gen_data(count: usize, seed: u64, max_atoms: usize, out: &Path) -> Result<(), CliError> {
    check_output(out)?;
    if count == 0 {
        return Err(usage("--count must be at least one"));
    }
    if max_atoms == 0 {
        return Err(usage("--max-atoms must be at least one"));
    }
    let rows = gen_dataset(count, seed, max_atoms);
    write_dataset(out, &rows).map_err(|e| runtime(format!("could not write {}: {e}", out.display())))?;
    println!("wrote {count} molecules to {}", out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_text() {
        let mut config = RunConfig::default();
        config.apply("variant", "gcn+attention+gate").unwrap();
        config.apply("layers", "5").unwrap();
        config.apply("learning_rate", "0.0025").unwrap();
        config.apply("combine", "sc").unwrap();
        let text = config.to_text();
        let reloaded = RunConfig::from_text(&text).unwrap();
        assert_eq!(reloaded, config);
    }

    #[test]
    fn config_accepts_comments_and_rejects_unknown_keys() {
        let parsed = RunConfig::from_text("# a comment\nlayers=4 # trailing\n\nseed=9\n").unwrap();
        assert_eq!(parsed.layers, 4);
        assert_eq!(parsed.seed, 9);

        let err = RunConfig::from_text("layerz=4\n").unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
        let err = RunConfig::from_text("layers four\n").unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }

    #[test]
    fn layer_ranges_parse_inclusively() {
        assert_eq!(parse_layer_range("1..7").unwrap(), vec![1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(parse_layer_range("3").unwrap(), vec![3]);
        assert!(parse_layer_range("0..2").is_err());
        assert!(parse_layer_range("5..2").is_err());
        assert!(parse_layer_range("x").is_err());
    }
}
