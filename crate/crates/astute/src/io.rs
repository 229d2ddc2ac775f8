//! File formats: dataset and curve CSVs with JSON sidecars, model and
//! attribution documents. Every write goes through a temporary file in the
//! destination directory followed by a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use astute_core::explain::{Attribution, AttributionMeta, Explainer, ExplainerKind};
use astute_core::generate::GeneratorSpec;
use astute_core::predict::{Architecture, TrainConfig, TrainReport};
use astute_core::robustness::{CurveKind, RobustnessCurve};
use astute_core::{Dataset, FeatureScaler, Model, NormOrder};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::write(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::write(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::write(path, e))?;
    tmp.persist(path).map_err(|e| CliError::write(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::runtime(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

/// `dir/stem.json` next to `dir/stem.csv`.
pub fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::runtime(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::runtime(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::runtime(e.to_string()))
}

/// Shortest decimal that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v}")
}

// ---------------------------------------------------------------- datasets

/// Which column of a CSV holds the labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(s.parse().map(LabelColumn::Index).unwrap_or_else(|_| LabelColumn::Name(s.to_string())))
    }
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("label".into())
    }
}

/// Reads a header-first CSV of numeric features and a 0/1 label column,
/// optionally z-scoring each feature with the file's own statistics.
pub fn load_csv(path: &Path, label: &LabelColumn, standardize: bool) -> CliResult<Dataset> {
    let bad = |msg: String| CliError::validation(format!("{}: {msg}", path.display()));
    let file = fs::File::open(path).map_err(|e| CliError::read(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let label_idx = match label {
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => return Err(bad(format!("label column {i} out of range ({} columns)", header.len()))),
        LabelColumn::Name(name) => {
            header.iter().position(|h| h.trim() == name).ok_or_else(|| bad(format!("no column named {name:?}")))?
        }
    };
    if header.len() < 2 {
        return Err(bad("need at least one feature column and a label column".into()));
    }
    let dim = header.len() - 1;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 2; // 1-based, after the header line
        let record = record.map_err(|e| bad(format!("row {row}: {e}")))?;
        if record.len() != header.len() {
            return Err(bad(format!("row {row}: expected {} fields, found {}", header.len(), record.len())));
        }
        for (c, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let column = &header[c];
            if c == label_idx {
                labels.push(match cell {
                    "0" | "0.0" => 0,
                    "1" | "1.0" => 1,
                    _ => return Err(bad(format!("row {row}, column {column:?}: label {cell:?} is not 0 or 1"))),
                });
                continue;
            }
            let v: f64 =
                cell.parse().map_err(|_| bad(format!("row {row}, column {column:?}: {cell:?} is not a number")))?;
            if !v.is_finite() {
                return Err(bad(format!("row {row}, column {column:?}: non-finite value {cell:?}")));
            }
            features.push(v);
        }
    }
    if labels.is_empty() {
        return Err(bad("no data rows".into()));
    }
    let data = Dataset::new(features, labels, dim)?;
    if standardize {
        Ok(FeatureScaler::fit(&data).transform(&data)?)
    } else {
        Ok(data)
    }
}

/// Writes `x1..xd,label`.
pub fn save_csv(path: &Path, data: &Dataset) -> CliResult<()> {
    let mut header: Vec<String> = (1..=data.dim()).map(|i| format!("x{i}")).collect();
    header.push("label".into());
    let rows = data.samples().zip(data.labels()).map(|(x, &y)| {
        let mut row: Vec<String> = x.iter().map(|&v| num(v)).collect();
        row.push(y.to_string());
        row
    });
    write_atomic(path, &csv_bytes(&header, rows)?)
}

/// Sidecar describing a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub generator: GeneratorSpec,
    pub n: usize,
    pub dim: usize,
    pub positive_rate: f64,
}

// ---------------------------------------------------------------- models

/// On-disk model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub architecture: Architecture,
    pub input_dim: usize,
    pub model: Model,
    pub train_config: TrainConfig,
    pub report: TrainReport,
    /// Dataset label carried into curve metadata and reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
}

impl ModelFile {
    pub fn load(path: &Path) -> CliResult<ModelFile> {
        let m: ModelFile = read_json(path)?;
        if astute_core::Predictor::input_dim(&m.model) != m.input_dim {
            return Err(CliError::validation(format!("{}: input_dim disagrees with the parameters", path.display())));
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------- attributions

/// Sidecar for an attribution CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionsMeta {
    pub explainer: Explainer,
    pub dim: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub samples: Vec<AttributionMeta>,
}

/// Writes `sample_index,explainer,phi_1..phi_d` and its sidecar.
pub fn save_attributions(path: &Path, attrs: &[Attribution], meta: &AttributionsMeta) -> CliResult<()> {
    let mut header = vec!["sample_index".to_string(), "explainer".to_string()];
    header.extend((1..=meta.dim).map(|i| format!("phi_{i}")));
    let rows = attrs.iter().map(|a| {
        let mut row = vec![a.sample_index.to_string(), a.explainer.name().to_string()];
        row.extend(a.scores.iter().map(|&v| num(v)));
        row
    });
    write_atomic(path, &csv_bytes(&header, rows)?)?;
    write_json(&sidecar(path), meta)
}

pub fn load_attributions(path: &Path) -> CliResult<(Vec<Attribution>, AttributionsMeta)> {
    let meta: AttributionsMeta = read_json(&sidecar(path))?;
    let bad = |msg: String| CliError::validation(format!("{}: {msg}", path.display()));
    let file = fs::File::open(path).map_err(|e| CliError::read(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() != meta.dim + 2 || &header[0] != "sample_index" || &header[1] != "explainer" {
        return Err(bad(format!("expected columns sample_index,explainer,phi_1..phi_{}", meta.dim)));
    }
    let mut out = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 2;
        let record = record.map_err(|e| bad(format!("row {row}: {e}")))?;
        let sample_index: usize =
            record[0].parse().map_err(|_| bad(format!("row {row}: bad sample_index {:?}", &record[0])))?;
        let explainer: ExplainerKind = record[1].parse().map_err(|e| bad(format!("row {row}: {e}")))?;
        let scores = record
            .iter()
            .skip(2)
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("row {row}, column phi_{}: {cell:?} is not a finite number", c + 1)))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        let sample_meta = meta.samples.get(out.len()).cloned().unwrap_or_default();
        out.push(Attribution { scores, explainer, sample_index, meta: sample_meta });
    }
    Ok((out, meta))
}

// ---------------------------------------------------------------- curves

/// Sidecar for a curve CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub kind: CurveKind,
    pub radius: f64,
    pub p: NormOrder,
    pub n_pairs: usize,
    pub seeds: Vec<u64>,
    pub subject_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Input dimension of the data the curve was measured on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl CurveMeta {
    pub fn of(curve: &RobustnessCurve, seeds: Vec<u64>) -> Self {
        CurveMeta {
            kind: curve.kind,
            radius: curve.radius,
            p: curve.norm_order,
            n_pairs: curve.n_pairs,
            seeds,
            subject_id: curve.subject_id.clone(),
            dataset: None,
            model: None,
            dim: None,
        }
    }
}

/// Writes `grid_value,probability` and its sidecar.
pub fn save_curve(path: &Path, curve: &RobustnessCurve, meta: &CurveMeta) -> CliResult<()> {
    let header = ["grid_value".to_string(), "probability".to_string()];
    let rows = curve.grid.iter().zip(&curve.values).map(|(&g, &v)| vec![num(g), num(v)]);
    write_atomic(path, &csv_bytes(&header, rows)?)?;
    write_json(&sidecar(path), meta)
}

pub fn load_curve(path: &Path) -> CliResult<(RobustnessCurve, CurveMeta)> {
    let meta: CurveMeta = read_json(&sidecar(path))?;
    let bad = |msg: String| CliError::validation(format!("{}: {msg}", path.display()));
    let file = fs::File::open(path).map_err(|e| CliError::read(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() != 2 || &header[0] != "grid_value" || &header[1] != "probability" {
        return Err(bad("expected columns grid_value,probability".into()));
    }
    let (mut grid, mut values) = (Vec::new(), Vec::new());
    for (r, record) in reader.records().enumerate() {
        let row = r + 2;
        let record = record.map_err(|e| bad(format!("row {row}: {e}")))?;
        let parse = |c: usize| {
            record[c].parse::<f64>().map_err(|_| bad(format!("row {row}: {:?} is not a number", &record[c])))
        };
        grid.push(parse(0)?);
        values.push(parse(1)?);
    }
    let curve =
        RobustnessCurve::new(meta.kind, grid, values, meta.radius, meta.p, meta.n_pairs, meta.subject_id.clone())
            .map_err(|e| bad(e.to_string()))?;
    Ok((curve, meta))
}
