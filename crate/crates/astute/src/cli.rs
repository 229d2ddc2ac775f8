//! Argument parsing and dispatch.

use std::io::Write;
use std::path::PathBuf;

use astute_core::generate::{GeneratorKind, GeneratorSpec, DEFAULT_DIM};
use astute_core::pairs::{PairMode, DEFAULT_MAX_PAIRS};
use astute_core::predict::{Architecture, TrainConfig};
use astute_core::robustness::{default_lambda_grid, default_lipschitz_grid};
use astute_core::NormOrder;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::commands::{self, PairArgs, TrainArgs};
use crate::config::{
    parse_explainer, CsvSource, DatasetSource, ExperimentConfig, ExplainerOptions, GeneratedSource, GridSpec,
};
use crate::error::{CliError, CliResult};
use crate::io::LabelColumn;
use crate::pipeline::run_pipeline;

#[derive(Debug, Parser)]
#[command(name = "astute", version, about = "Explainer astuteness and probabilistic Lipschitzness experiments")]
pub struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "ASTUTE_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Generate a synthetic dataset CSV and its generator sidecar.
    Gen(GenArgs),
    /// Train a model on a dataset CSV.
    Train(TrainCmd),
    /// Explain every sample of a dataset.
    Explain(ExplainCmd),
    /// Estimate a model's probabilistic Lipschitzness profile.
    Lipschitz(LipschitzCmd),
    /// Estimate explainer astuteness from attributions.
    Astuteness(AstutenessCmd),
    /// Lower bound on astuteness implied by a Lipschitzness profile.
    Bound(BoundCmd),
    /// Assemble the AUC-gap table and plots from curve files.
    Report(ReportCmd),
    /// Check the deterministic astuteness guarantee on every pair.
    Verify(VerifyCmd),
    /// Run every step for one dataset.
    Pipeline(PipelineCmd),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<GeneratorKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// File name inside the output directory.
    #[arg(long, default_value = "data.csv")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Label column name or zero-based index.
    #[arg(long, default_value = "label")]
    pub label_column: String,
}

impl DataArgs {
    fn label(&self) -> LabelColumn {
        self.label_column.parse().expect("infallible")
    }
}

#[derive(Debug, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Per-layer spectral-norm cap.
    #[arg(long)]
    pub cap: Option<f64>,
    /// Hidden layer width.
    #[arg(long)]
    pub width: Option<usize>,
}

impl TrainFlags {
    fn apply(&self, mut cfg: TrainConfig) -> TrainConfig {
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.lr {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.momentum {
            cfg.momentum = v;
        }
        if let Some(v) = self.cap {
            cfg.lipschitz_cap = Some(v);
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    #[command(flatten)]
    pub data: DataArgs,
    /// Held-out CSV for test accuracy.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, value_parser = parse_arch, default_value = "mlp2")]
    pub arch: Architecture,
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long, default_value = "model.json")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct ExplainerFlags {
    /// shap, shap_sampled, rise, rise_sampled or remove_individual.
    #[arg(long)]
    pub explainer: String,
    #[arg(long, default_value_t = 1000)]
    pub permutations: usize,
    /// Masks per feature for sampled RISE.
    #[arg(long, default_value_t = 1000)]
    pub masks: usize,
    #[arg(long, default_value_t = 0.5)]
    pub inclusion_prob: f64,
}

impl ExplainerFlags {
    fn build(&self, seed: u64) -> CliResult<astute_core::explain::Explainer> {
        let opts = ExplainerOptions {
            permutations: self.permutations,
            n_masks: self.masks,
            inclusion_prob: self.inclusion_prob,
            seed,
        };
        parse_explainer(&self.explainer, &opts)
    }
}

#[derive(Debug, Args)]
pub struct ExplainCmd {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub explainer: ExplainerFlags,
    /// File name; defaults to attributions_<explainer>.csv.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct PairFlags {
    /// Pair radius; defaults to the median pairwise distance.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub max_pairs: Option<usize>,
    /// Score every pair regardless of --max-pairs.
    #[arg(long)]
    pub exhaustive: bool,
    /// Norm order: a number >= 1 or inf.
    #[arg(long, value_parser = parse_norm)]
    pub p: Option<NormOrder>,
}

impl PairFlags {
    fn args(&self, seed: u64) -> PairArgs {
        PairArgs {
            radius: self.radius,
            max_pairs: self.max_pairs.unwrap_or(DEFAULT_MAX_PAIRS),
            exhaustive: self.exhaustive,
            seed,
            ord: self.p.unwrap_or_default(),
            ..PairArgs::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct LipschitzCmd {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub pairs: PairFlags,
    /// start:stop:step or a comma list.
    #[arg(long)]
    pub l_grid: Option<GridSpec>,
    #[arg(long, default_value = "lipschitz.csv")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct AstutenessCmd {
    #[arg(long)]
    pub attributions: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub pairs: PairFlags,
    #[arg(long)]
    pub lambda_grid: Option<GridSpec>,
    /// File name; defaults to astuteness_<explainer>.csv.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoundCmd {
    /// Lipschitzness profile CSV.
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub explainer: String,
    /// Input dimension; defaults to the profile's metadata.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub lambda_grid: Option<GridSpec>,
    /// File name; defaults to bound_<explainer>.csv.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportCmd {
    /// Astuteness and predicted-bound curve CSVs.
    #[arg(long = "curves", num_args = 0..)]
    pub curves: Vec<PathBuf>,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyCmd {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub explainer: ExplainerFlags,
    #[command(flatten)]
    pub pairs: PairFlags,
    #[arg(long, default_value = "verify.json")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct PipelineCmd {
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<GeneratorKind>,
    /// Use a CSV dataset instead of a generator.
    #[arg(long, conflicts_with = "kind")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Dataset seed (the global --seed picks the run seeds).
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Model architectures; repeat or comma-separate.
    #[arg(long, value_delimiter = ',', value_parser = parse_arch)]
    pub arch: Vec<Architecture>,
    /// Explainers; repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    pub explainer: Vec<String>,
    #[arg(long)]
    pub permutations: Option<usize>,
    #[arg(long)]
    pub masks: Option<usize>,
    #[command(flatten)]
    pub train: TrainFlags,
    #[command(flatten)]
    pub pairs: PairFlags,
    #[arg(long)]
    pub pair_seed: Option<u64>,
    #[arg(long)]
    pub l_grid: Option<GridSpec>,
    #[arg(long)]
    pub lambda_grid: Option<GridSpec>,
    /// Run seeds; comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Skip per-sample attribution files.
    #[arg(long)]
    pub no_attributions: bool,
}

fn parse_kind(s: &str) -> Result<GeneratorKind, String> {
    s.parse().map_err(|e: astute_core::Error| e.to_string())
}

fn parse_arch(s: &str) -> Result<Architecture, String> {
    s.parse().map_err(|e: astute_core::Error| e.to_string())
}

fn parse_norm(s: &str) -> Result<NormOrder, String> {
    s.parse().map_err(|e: astute_core::Error| e.to_string())
}

fn grid_or(spec: &Option<GridSpec>, default: Vec<f64>) -> CliResult<Vec<f64>> {
    match spec {
        Some(g) => g.values(),
        None => Ok(default),
    }
}

/// Reads `--config` when given; a missing file is a validation error.
fn base_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    match &cli.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out.clone().or_else(|| cli.config.as_ref().map(|_| cfg.out.clone())).unwrap_or_else(|| PathBuf::from("."))
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::runtime(e.to_string()))?;
    let mut stdout = std::io::stdout().lock();
    // a closed stdout is not worth failing a command whose files are written
    let _ = writeln!(stdout, "{text}");
    Ok(())
}

fn pipeline_config(cli: &Cli, cmd: &PipelineCmd) -> CliResult<ExperimentConfig> {
    let mut cfg = base_config(cli)?;
    if let Some(path) = &cmd.data {
        let mut src = match &cfg.dataset {
            DatasetSource::Csv(c) => c.clone(),
            DatasetSource::Generator(_) => CsvSource {
                path: path.clone(),
                label_column: "label".into(),
                standardize: true,
                test_fraction: 0.1,
                name: None,
            },
        };
        src.path = path.clone();
        if let Some(l) = &cmd.label_column {
            src.label_column = l.clone();
        }
        cfg.dataset = DatasetSource::Csv(src);
    } else if let DatasetSource::Csv(c) = &mut cfg.dataset {
        if let Some(l) = &cmd.label_column {
            c.label_column = l.clone();
        }
    }
    if cmd.kind.is_some()
        || cmd.n_train.is_some()
        || cmd.n_test.is_some()
        || cmd.dim.is_some()
        || cmd.data_seed.is_some()
    {
        let mut g = match &cfg.dataset {
            DatasetSource::Generator(g) => g.clone(),
            DatasetSource::Csv(_) if cmd.kind.is_none() => {
                return Err(CliError::validation("--n-train/--n-test/--dim/--data-seed apply to generated data only"))
            }
            DatasetSource::Csv(_) => GeneratedSource::default(),
        };
        if let Some(k) = cmd.kind {
            g.kind = k;
        }
        if let Some(v) = cmd.n_train {
            g.n_train = v;
        }
        if let Some(v) = cmd.n_test {
            g.n_test = v;
        }
        if let Some(v) = cmd.dim {
            g.dim = v;
        }
        if let Some(v) = cmd.data_seed {
            g.seed = v;
        }
        cfg.dataset = DatasetSource::Generator(g);
    }
    if !cmd.arch.is_empty() {
        cfg.models = cmd.arch.clone();
    }
    if !cmd.explainer.is_empty() {
        let defaults = ExplainerOptions::default();
        let opts = ExplainerOptions {
            permutations: cmd.permutations.unwrap_or(defaults.permutations),
            n_masks: cmd.masks.unwrap_or(defaults.n_masks),
            ..defaults
        };
        cfg.explainers = cmd.explainer.iter().map(|e| parse_explainer(e, &opts)).collect::<CliResult<_>>()?;
    }
    cfg.train = cmd.train.apply(cfg.train);
    if let Some(w) = cmd.train.width {
        cfg.hidden_width = Some(w);
    }
    if let Some(r) = cmd.pairs.radius {
        cfg.pairs.radius = Some(r);
    }
    if let Some(m) = cmd.pairs.max_pairs {
        cfg.pairs.max_pairs = m;
    }
    if cmd.pairs.exhaustive {
        cfg.pairs.mode = PairMode::Exhaustive;
    }
    if let Some(p) = cmd.pairs.p {
        cfg.norm_order = p;
    }
    if let Some(s) = cmd.pair_seed {
        cfg.pairs.seed = s;
    }
    if let Some(g) = &cmd.l_grid {
        cfg.lipschitz_grid = g.clone();
    }
    if let Some(g) = &cmd.lambda_grid {
        cfg.lambda_grid = g.clone();
    }
    if !cmd.seeds.is_empty() {
        cfg.seeds = cmd.seeds.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if cmd.no_attributions {
        cfg.save_attributions = false;
    }
    Ok(cfg)
}

fn run_command(cli: &Cli) -> CliResult<()> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Gen(a) => {
            let cfg = base_config(cli)?;
            let base = match &cfg.dataset {
                DatasetSource::Generator(g) => {
                    GeneratorSpec { kind: g.kind, n: g.n_train + g.n_test, dim: g.dim, seed: g.seed }
                }
                DatasetSource::Csv(_) => GeneratorSpec::new(GeneratorKind::OrangeSkin, 10_000, 0),
            };
            let spec = GeneratorSpec {
                kind: a.kind.unwrap_or(base.kind),
                n: a.n.unwrap_or(if cli.config.is_some() { base.n } else { 10_000 }),
                dim: a.dim.unwrap_or(if cli.config.is_some() { base.dim } else { DEFAULT_DIM }),
                seed: cli.seed.unwrap_or(base.seed),
            };
            let out = out_dir(cli, &cfg).join(&a.name);
            let meta = commands::cmd_gen(&spec, &out)?;
            print_json(&serde_json::json!({
                "path": out,
                "n": meta.n,
                "dim": meta.dim,
                "positive_rate": meta.positive_rate,
            }))
        }
        Command::Train(a) => {
            let cfg = base_config(cli)?;
            let train = TrainConfig {
                seed,
                ..a.train.apply(if cli.config.is_some() { cfg.train } else { TrainConfig::default() })
            };
            let out = out_dir(cli, &cfg).join(&a.name);
            let args = TrainArgs {
                data: &a.data.data,
                test: a.test.as_deref(),
                label: a.data.label(),
                arch: a.arch,
                config: train,
                hidden_width: a.train.width.or(cfg.hidden_width),
                out: &out,
            };
            let file = commands::cmd_train(&args)?;
            print_json(&serde_json::json!({
                "path": out,
                "architecture": file.architecture,
                "report": file.report,
                "lipschitz_upper": file.model.known_lipschitz_upper(NormOrder::L2),
            }))
        }
        Command::Explain(a) => {
            let e = a.explainer.build(seed)?;
            let name =
                a.name.clone().unwrap_or_else(|| format!("attributions_{}.csv", crate::config::explainer_label(&e)));
            let out = out_dir(cli, &base_config(cli)?).join(name);
            let meta = commands::cmd_explain(&a.model, &a.data.data, &a.data.label(), &e, &out)?;
            print_json(&serde_json::json!({ "path": out, "n": meta.n, "dim": meta.dim }))
        }
        Command::Lipschitz(a) => {
            let cfg = base_config(cli)?;
            let grid = grid_or(
                &a.l_grid,
                if cli.config.is_some() { cfg.lipschitz_grid.values()? } else { default_lipschitz_grid() },
            )?;
            let out = out_dir(cli, &cfg).join(&a.name);
            let curve =
                commands::cmd_lipschitz(&a.model, &a.data.data, &a.data.label(), &a.pairs.args(seed), &grid, &out)?;
            print_json(
                &serde_json::json!({ "path": out, "radius": curve.radius, "n_pairs": curve.n_pairs, "values": curve.values }),
            )
        }
        Command::Astuteness(a) => {
            let cfg = base_config(cli)?;
            let grid = grid_or(
                &a.lambda_grid,
                if cli.config.is_some() { cfg.lambda_grid.values()? } else { default_lambda_grid() },
            )?;
            let stem = a.attributions.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let default_name = match stem.strip_prefix("attributions_") {
                Some(e) => format!("astuteness_{e}.csv"),
                None => "astuteness.csv".into(),
            };
            let out = out_dir(cli, &cfg).join(a.name.clone().unwrap_or(default_name));
            let curve = commands::cmd_astuteness(
                &a.attributions,
                &a.data.data,
                &a.data.label(),
                &a.pairs.args(seed),
                &grid,
                &out,
            )?;
            print_json(
                &serde_json::json!({ "path": out, "radius": curve.radius, "n_pairs": curve.n_pairs, "values": curve.values }),
            )
        }
        Command::Bound(a) => {
            let cfg = base_config(cli)?;
            let grid = grid_or(
                &a.lambda_grid,
                if cli.config.is_some() { cfg.lambda_grid.values()? } else { default_lambda_grid() },
            )?;
            let out = out_dir(cli, &cfg).join(a.name.clone().unwrap_or_else(|| format!("bound_{}.csv", a.explainer)));
            let curve = commands::cmd_bound(&a.profile, &a.explainer, a.dim, &grid, &out)?;
            print_json(&serde_json::json!({ "path": out, "values": curve.values }))
        }
        Command::Report(a) => {
            let interval = match (a.lambda_min, a.lambda_max) {
                (Some(lo), Some(hi)) => Some((lo, hi)),
                (None, None) => None,
                _ => return Err(CliError::validation("give both --lambda-min and --lambda-max or neither")),
            };
            let out = out_dir(cli, &base_config(cli)?);
            let report = commands::cmd_report(&a.curves, interval, &out)?;
            print_json(&report.matrix)
        }
        Command::Verify(a) => {
            let e = a.explainer.build(seed)?;
            let out = out_dir(cli, &base_config(cli)?).join(&a.name);
            let report = commands::cmd_verify(&a.model, &a.data.data, &a.data.label(), &e, &a.pairs.args(seed), &out)?;
            print_json(&report)
        }
        Command::Pipeline(a) => {
            let cfg = pipeline_config(cli, a)?;
            let report = run_pipeline(&cfg)?;
            print_json(&serde_json::json!({ "out": cfg.out, "matrix": report.matrix }))
        }
    }
}

/// Runs the parsed command on a pool of `--jobs` workers.
pub fn run(cli: &Cli) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::validation("--jobs must be at least 1"));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::runtime(e.to_string()))?;
    pool.install(|| run_command(cli))
}

/// Parses `args`, runs, and returns the process exit code. Errors go to
/// stderr as one JSON document.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                // --help and --version
                let _ = e.print();
                return 0;
            }
            let err = CliError::validation(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
