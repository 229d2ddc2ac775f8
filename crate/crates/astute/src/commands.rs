//! One function per subcommand. Each is a thin wrapper over the core
//! operations that reads its inputs, writes its outputs atomically, and
//! returns a summary.

use std::path::{Path, PathBuf};

use astute_core::explain::{explain_sample, Attribution, Explainer, ExplainerKind};
use astute_core::generate::{generate, GeneratorSpec};
use astute_core::predict::{train, Architecture, TrainConfig};
use astute_core::robustness::{
    astuteness_on_pairs, plipschitz_on_pairs, predict_bound, verify_theorem, BoundSpec, RobustnessCurve, TheoremReport,
};
use astute_core::{
    median_pairwise_distance, sample_pairs, Dataset, NormOrder, PairMode, PairSamplePlan, PairSet, Predictor,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::explainer_label;
use crate::error::{CliError, CliResult};
use crate::io::{
    load_attributions, load_csv, load_curve, read_json, save_attributions, save_csv, save_curve, sidecar, write_json,
    AttributionsMeta, CurveMeta, DatasetMeta, LabelColumn, ModelFile,
};
use crate::report::{build_report, write_report, LabeledCurve, Report};

/// Explains every sample with each explainer, fanning samples out over the
/// current rayon pool. Output order is by sample index whatever the pool
/// size, and sampling streams are keyed by sample index, so results do not
/// depend on the number of workers.
pub fn explain_all<F: Predictor + Sync + ?Sized>(
    explainers: &[Explainer],
    f: &F,
    data: &Dataset,
) -> CliResult<Vec<Vec<Attribution>>> {
    let per_sample: Vec<Vec<Attribution>> = (0..data.len())
        .into_par_iter()
        .map(|i| explain_sample(explainers, f, data.sample(i), i))
        .collect::<Result<_, _>>()?;
    let mut out: Vec<Vec<Attribution>> = explainers.iter().map(|_| Vec::with_capacity(data.len())).collect();
    for sample in per_sample {
        for (slot, a) in out.iter_mut().zip(sample) {
            slot.push(a);
        }
    }
    Ok(out)
}

/// Pair-selection flags shared by the estimating commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairArgs {
    pub radius: Option<f64>,
    pub max_pairs: usize,
    pub exhaustive: bool,
    pub seed: u64,
    pub ord: NormOrder,
    pub median_max_pairs: usize,
}

impl Default for PairArgs {
    fn default() -> Self {
        PairArgs {
            radius: None,
            max_pairs: astute_core::pairs::DEFAULT_MAX_PAIRS,
            exhaustive: false,
            seed: 0,
            ord: NormOrder::L2,
            median_max_pairs: astute_core::pairs::DEFAULT_MAX_PAIRS,
        }
    }
}

impl PairArgs {
    /// Plan over `data`, taking the median pairwise distance of
    /// `radius_source` when no radius is given.
    pub fn plan(&self, radius_source: &Dataset) -> CliResult<PairSamplePlan> {
        let radius = match self.radius {
            Some(r) => r,
            None => median_pairwise_distance(radius_source, self.ord, self.median_max_pairs, self.seed)?,
        };
        let mode = if self.exhaustive { PairMode::Exhaustive } else { PairMode::Sampled };
        let plan = PairSamplePlan { radius, max_pairs: self.max_pairs, seed: self.seed, mode };
        plan.validate()?;
        Ok(plan)
    }

    pub fn pairs(&self, data: &Dataset) -> CliResult<PairSet> {
        Ok(sample_pairs(data, &self.plan(data)?, self.ord)?)
    }
}

/// Loads a dataset CSV and the label it goes by in reports: the generator
/// kind when a generator sidecar sits next to it, else the file stem.
pub fn load_dataset(path: &Path, label: &LabelColumn, standardize: bool) -> CliResult<(Dataset, String)> {
    let data = load_csv(path, label, standardize)?;
    Ok((data, dataset_label(path)))
}

fn generated_meta(path: &Path) -> Option<DatasetMeta> {
    let side = sidecar(path);
    side.exists().then(|| read_json::<DatasetMeta>(&side).ok()).flatten()
}

fn dataset_label(path: &Path) -> String {
    match generated_meta(path) {
        Some(meta) => meta.generator.kind.name().to_string(),
        None => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into()),
    }
}

fn check_dim(model: &ModelFile, data: &Dataset, what: &Path) -> CliResult<()> {
    if model.input_dim != data.dim() {
        return Err(CliError::validation(format!(
            "{}: model expects {} features, data has {}",
            what.display(),
            model.input_dim,
            data.dim()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------- gen

pub fn cmd_gen(spec: &GeneratorSpec, out: &Path) -> CliResult<DatasetMeta> {
    spec.validate()?;
    let data = generate(spec)?;
    let meta = DatasetMeta { generator: *spec, n: data.len(), dim: data.dim(), positive_rate: data.positive_rate() };
    save_csv(out, &data)?;
    write_json(&sidecar(out), &meta)?;
    Ok(meta)
}

// ---------------------------------------------------------------- train

pub struct TrainArgs<'a> {
    pub data: &'a Path,
    pub test: Option<&'a Path>,
    pub label: LabelColumn,
    pub arch: Architecture,
    /// `hidden_width` of `None` picks 200 for generated data, 32 otherwise.
    pub config: TrainConfig,
    pub hidden_width: Option<usize>,
    pub out: &'a Path,
}

pub fn cmd_train(args: &TrainArgs) -> CliResult<ModelFile> {
    let (data, name) = load_dataset(args.data, &args.label, false)?;
    let test = args.test.map(|p| load_csv(p, &args.label, false)).transpose()?;
    let width = args.hidden_width.unwrap_or(if generated_meta(args.data).is_some() {
        crate::config::SYNTHETIC_WIDTH
    } else {
        crate::config::TABULAR_WIDTH
    });
    let cfg = TrainConfig { hidden_width: width, ..args.config };
    let file = train_model(&data, test.as_ref(), args.arch, &cfg, Some(name))?;
    write_json(args.out, &file)?;
    Ok(file)
}

pub fn train_model(
    data: &Dataset,
    test: Option<&Dataset>,
    arch: Architecture,
    cfg: &TrainConfig,
    dataset: Option<String>,
) -> CliResult<ModelFile> {
    let trained = train(data, arch, cfg, test)?;
    Ok(ModelFile {
        architecture: arch,
        input_dim: data.dim(),
        model: trained.model,
        train_config: *cfg,
        report: trained.report,
        dataset,
    })
}

// ---------------------------------------------------------------- explain

pub fn cmd_explain(
    model: &Path,
    data: &Path,
    label: &LabelColumn,
    explainer: &Explainer,
    out: &Path,
) -> CliResult<AttributionsMeta> {
    let m = ModelFile::load(model)?;
    let (d, name) = load_dataset(data, label, false)?;
    check_dim(&m, &d, data)?;
    let attrs = explain_all(std::slice::from_ref(explainer), &m.model, &d)?.remove(0);
    let meta = AttributionsMeta {
        explainer: *explainer,
        dim: d.dim(),
        n: d.len(),
        dataset: m.dataset.clone().or(Some(name)),
        model: Some(m.architecture.name().to_string()),
        samples: attrs.iter().map(|a| a.meta.clone()).collect(),
    };
    save_attributions(out, &attrs, &meta)?;
    Ok(meta)
}

// ---------------------------------------------------------------- curves

fn labeled(
    curve: &RobustnessCurve,
    seeds: Vec<u64>,
    dataset: Option<String>,
    model: Option<String>,
    dim: usize,
) -> CurveMeta {
    CurveMeta { dataset, model, dim: Some(dim), ..CurveMeta::of(curve, seeds) }
}

pub fn cmd_lipschitz(
    model: &Path,
    data: &Path,
    label: &LabelColumn,
    pairs: &PairArgs,
    grid: &[f64],
    out: &Path,
) -> CliResult<RobustnessCurve> {
    let m = ModelFile::load(model)?;
    let (d, name) = load_dataset(data, label, false)?;
    check_dim(&m, &d, data)?;
    let set = pairs.pairs(&d)?;
    let curve = plipschitz_on_pairs(&m.model, &d, &set, grid)?.with_subject(m.architecture.name());
    let meta = labeled(
        &curve,
        vec![pairs.seed],
        m.dataset.clone().or(Some(name)),
        Some(m.architecture.name().into()),
        d.dim(),
    );
    save_curve(out, &curve, &meta)?;
    Ok(curve)
}

pub fn cmd_astuteness(
    attributions: &Path,
    data: &Path,
    label: &LabelColumn,
    pairs: &PairArgs,
    grid: &[f64],
    out: &Path,
) -> CliResult<RobustnessCurve> {
    let (attrs, ameta) = load_attributions(attributions)?;
    let (d, name) = load_dataset(data, label, false)?;
    if ameta.dim != d.dim() {
        return Err(CliError::validation(format!(
            "{}: attributions have {} features, data has {}",
            attributions.display(),
            ameta.dim,
            d.dim()
        )));
    }
    let set = pairs.pairs(&d)?;
    let curve = astuteness_on_pairs(&attrs, &d, &set, grid)?.with_subject(explainer_label(&ameta.explainer));
    let meta = labeled(&curve, vec![pairs.seed], ameta.dataset.clone().or(Some(name)), ameta.model.clone(), d.dim());
    save_curve(out, &curve, &meta)?;
    Ok(curve)
}

/// Predicted bound from a Lipschitzness profile. `dim` defaults to the one
/// recorded in the profile's sidecar.
pub fn cmd_bound(
    profile: &Path,
    explainer: &str,
    dim: Option<usize>,
    grid: &[f64],
    out: &Path,
) -> CliResult<RobustnessCurve> {
    let (curve, meta) = load_curve(profile)?;
    let kind: ExplainerKind = explainer
        .trim_end_matches("_sampled")
        .trim_end_matches("_exact")
        .parse()
        .map_err(|e: astute_core::Error| CliError::validation(e.to_string()))?;
    let dim = dim.or(meta.dim).ok_or_else(|| CliError::validation("profile metadata has no dim; pass --dim"))?;
    let bound =
        predict_bound(&curve, &BoundSpec::for_explainer(kind, dim, curve.norm_order)?, grid)?.with_subject(explainer);
    let out_meta = CurveMeta { subject_id: explainer.to_string(), kind: bound.kind, ..meta };
    save_curve(out, &bound, &out_meta)?;
    Ok(bound)
}

// ---------------------------------------------------------------- report

pub fn cmd_report(curves: &[PathBuf], interval: Option<(f64, f64)>, out: &Path) -> CliResult<Report> {
    if curves.is_empty() {
        return Err(CliError::validation("report needs at least one curve file"));
    }
    let loaded = curves
        .iter()
        .map(|p| load_curve(p).map(|(curve, meta)| LabeledCurve { curve, meta }))
        .collect::<CliResult<Vec<_>>>()?;
    let report = build_report(&loaded, interval, Some(&out.join("plots")))?;
    write_report(out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    #[serde(flatten)]
    pub theorem: TheoremReport,
    pub radius: f64,
    pub p: NormOrder,
    pub dim: usize,
}

pub fn cmd_verify(
    model: &Path,
    data: &Path,
    label: &LabelColumn,
    explainer: &Explainer,
    pairs: &PairArgs,
    out: &Path,
) -> CliResult<VerifyReport> {
    let m = ModelFile::load(model)?;
    let (d, _) = load_dataset(data, label, false)?;
    check_dim(&m, &d, data)?;
    let plan = pairs.plan(&d)?;
    let theorem = verify_theorem(explainer, &m.model, &d, &plan, pairs.ord)?;
    let report = VerifyReport { theorem, radius: plan.radius, p: pairs.ord, dim: d.dim() };
    write_json(out, &report)?;
    Ok(report)
}
