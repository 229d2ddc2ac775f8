//! Experiment configuration: one JSON document, every field optional, with
//! command-line flags applied on top.

use std::path::{Path, PathBuf};

use astute_core::explain::{Explainer, RiseConfig};
use astute_core::generate::{GeneratorKind, GeneratorSpec, DEFAULT_DIM};
use astute_core::pairs::{PairMode, DEFAULT_MAX_PAIRS};
use astute_core::predict::{Architecture, TrainConfig};
use astute_core::robustness::{default_lambda_grid, default_lipschitz_grid, linear_grid};
use astute_core::NormOrder;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{read_json, LabelColumn};

/// Hidden width for generated data and for CSV data when none is configured.
pub const SYNTHETIC_WIDTH: usize = 200;
pub const TABULAR_WIDTH: usize = 32;

/// A grid given either as explicit ascending values or as a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridSpec {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        let v = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Range { start, stop, step } => linear_grid(*start, *stop, *step)?,
        };
        if v.is_empty() || v.windows(2).any(|w| !(w[0] < w[1])) || v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::validation("grid values must be finite and strictly ascending"));
        }
        Ok(v)
    }
}

/// `start:stop:step` or a comma-separated list.
impl std::str::FromStr for GridSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?} in grid {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [a, b, c] => Ok(GridSpec::Range { start: num(a)?, stop: num(b)?, step: num(c)? }),
            [_] => s.split(',').map(num).collect::<Result<_, _>>().map(GridSpec::Values),
            _ => Err(format!("grid {s:?} must be start:stop:step or a comma list")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    #[default]
    Test,
}

/// Generated data: `n_train + n_test` samples from one spec, split in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratedSource {
    pub kind: GeneratorKind,
    pub n_train: usize,
    pub n_test: usize,
    pub dim: usize,
    pub seed: u64,
}

impl Default for GeneratedSource {
    fn default() -> Self {
        GeneratedSource { kind: GeneratorKind::OrangeSkin, n_train: 10_000, n_test: 1_000, dim: DEFAULT_DIM, seed: 0 }
    }
}

impl GeneratedSource {
    pub fn spec(&self) -> GeneratorSpec {
        GeneratorSpec { kind: self.kind, n: self.n_train + self.n_test, dim: self.dim, seed: self.seed }
    }
}

/// Tabular data from a CSV; the last `test_fraction` of rows is held out and
/// both parts are standardized with training statistics when requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSource {
    pub path: PathBuf,
    #[serde(default = "default_label")]
    pub label_column: String,
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Name used in reports; defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
}

fn default_label() -> String {
    "label".into()
}
fn default_true() -> bool {
    true
}
fn default_test_fraction() -> f64 {
    0.1
}

impl CsvSource {
    pub fn label(&self) -> LabelColumn {
        self.label_column.parse().expect("infallible")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Generator(GeneratedSource),
    Csv(CsvSource),
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Generator(GeneratedSource::default())
    }
}

impl DatasetSource {
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Generator(g) => g.kind.name().to_string(),
            DatasetSource::Csv(c) => c.name.clone().unwrap_or_else(|| {
                c.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into())
            }),
        }
    }
}

/// How pairs are chosen for both the Lipschitzness profile and astuteness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairConfig {
    /// Fixed radius; `None` uses the median pairwise distance of the
    /// training split.
    pub radius: Option<f64>,
    pub max_pairs: usize,
    pub mode: PairMode,
    pub seed: u64,
    /// Split whose pairs are scored.
    pub split: Split,
    /// Pairs sampled when estimating the median radius.
    pub median_max_pairs: usize,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig {
            radius: None,
            max_pairs: DEFAULT_MAX_PAIRS,
            mode: PairMode::Sampled,
            seed: 0,
            split: Split::Test,
            median_max_pairs: DEFAULT_MAX_PAIRS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub models: Vec<Architecture>,
    pub train: TrainConfig,
    /// Hidden width; `None` picks 200 for generated data and 32 for CSV data.
    pub hidden_width: Option<usize>,
    pub explainers: Vec<Explainer>,
    pub pairs: PairConfig,
    pub norm_order: NormOrder,
    pub lipschitz_grid: GridSpec,
    pub lambda_grid: GridSpec,
    pub out: PathBuf,
    /// One run per seed; each seeds training and any sampled explainer.
    pub seeds: Vec<u64>,
    /// Write per-sample attribution CSVs.
    pub save_attributions: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSource::default(),
            models: vec![Architecture::Mlp2, Architecture::Linear],
            train: TrainConfig::default(),
            hidden_width: None,
            explainers: vec![
                Explainer::shap_exact(),
                Explainer::Rise(RiseConfig::default()),
                Explainer::RemoveIndividual,
            ],
            pairs: PairConfig::default(),
            norm_order: NormOrder::L2,
            lipschitz_grid: GridSpec::Values(default_lipschitz_grid()),
            lambda_grid: GridSpec::Values(default_lambda_grid()),
            out: PathBuf::from("out"),
            seeds: vec![0],
            save_attributions: true,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let width = self.hidden_width.unwrap_or(match self.dataset {
            DatasetSource::Generator(_) => SYNTHETIC_WIDTH,
            DatasetSource::Csv(_) => TABULAR_WIDTH,
        });
        TrainConfig { hidden_width: width, seed, ..self.train }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.models.is_empty() {
            return Err(CliError::validation("no models configured"));
        }
        if self.explainers.is_empty() {
            return Err(CliError::validation("no explainers configured"));
        }
        if self.seeds.is_empty() {
            return Err(CliError::validation("no seeds configured"));
        }
        let mut labels: Vec<String> = self.explainers.iter().map(explainer_label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::validation("explainers must have distinct labels"));
        }
        for e in &self.explainers {
            if let Explainer::Rise(cfg) = e {
                cfg.validate()?;
            }
        }
        self.train_config(0).validate()?;
        match &self.dataset {
            DatasetSource::Generator(g) => {
                if g.n_train < 2 || g.n_test < 2 {
                    return Err(CliError::validation("n_train and n_test must each be at least 2"));
                }
                g.spec().validate()?;
            }
            DatasetSource::Csv(c) => {
                if !(c.test_fraction > 0.0 && c.test_fraction < 1.0) {
                    return Err(CliError::validation("test_fraction must lie in (0, 1)"));
                }
            }
        }
        if let Some(r) = self.pairs.radius {
            if !(r > 0.0) || !r.is_finite() {
                return Err(CliError::validation("radius must be positive"));
            }
        }
        self.lipschitz_grid.values()?;
        self.lambda_grid.values()?;
        Ok(())
    }
}

/// Name of an explainer in file names, curve subjects, and reports.
pub fn explainer_label(e: &Explainer) -> String {
    match e {
        Explainer::ShapExact { .. } => "shap".into(),
        Explainer::ShapSampled { .. } => "shap_sampled".into(),
        Explainer::RemoveIndividual => "remove_individual".into(),
        Explainer::Rise(cfg) if cfg.exact => "rise".into(),
        Explainer::Rise(_) => "rise_sampled".into(),
    }
}

/// Options for building an explainer from a label on the command line.
#[derive(Debug, Clone, Copy)]
pub struct ExplainerOptions {
    pub permutations: usize,
    pub n_masks: usize,
    pub inclusion_prob: f64,
    pub seed: u64,
}

impl Default for ExplainerOptions {
    fn default() -> Self {
        ExplainerOptions { permutations: 1000, n_masks: 1000, inclusion_prob: 0.5, seed: 0 }
    }
}

pub fn parse_explainer(label: &str, opts: &ExplainerOptions) -> CliResult<Explainer> {
    let rise = RiseConfig {
        inclusion_prob: opts.inclusion_prob,
        n_masks: opts.n_masks,
        seed: opts.seed,
        ..RiseConfig::default()
    };
    Ok(match label {
        "shap" | "shap_exact" => Explainer::shap_exact(),
        "shap_sampled" => Explainer::ShapSampled { permutations: opts.permutations, seed: opts.seed },
        "rise" | "rise_exact" => Explainer::Rise(rise),
        "rise_sampled" => Explainer::Rise(RiseConfig { exact: false, ..rise }),
        "remove_individual" => Explainer::RemoveIndividual,
        other => {
            return Err(CliError::validation(format!(
                "unknown explainer {other:?} (expected shap, shap_sampled, rise, rise_sampled, remove_individual)"
            )))
        }
    })
}

/// Reseeds a sampled explainer for one run.
pub fn with_seed(e: &Explainer, seed: u64) -> Explainer {
    match *e {
        Explainer::ShapSampled { permutations, .. } => Explainer::ShapSampled { permutations, seed },
        Explainer::Rise(cfg) if !cfg.exact => Explainer::Rise(RiseConfig { seed, ..cfg }),
        other => other,
    }
}
