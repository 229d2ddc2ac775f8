//! gen → train → explain → lipschitz → astuteness → bound → report for one
//! dataset, every configured model and explainer, and every seed.

use std::path::Path;

use astute_core::generate::generate;
use astute_core::robustness::{astuteness_on_pairs, plipschitz_on_pairs, predict_bound, BoundSpec};
use astute_core::{median_pairwise_distance, sample_pairs, Dataset, FeatureScaler, PairSamplePlan};
use serde::Serialize;

use crate::commands::{explain_all, train_model};
use crate::config::{explainer_label, with_seed, DatasetSource, ExperimentConfig, Split};
use crate::error::{CliError, CliResult};
use crate::io::{
    load_csv, save_attributions, save_csv, save_curve, write_json, AttributionsMeta, CurveMeta, DatasetMeta,
};
use crate::report::{build_report, write_report, LabeledCurve, Report};

/// Training and evaluation splits plus the dataset's report label.
pub struct Prepared {
    pub name: String,
    pub train: Dataset,
    pub test: Dataset,
}

pub fn prepare_data(source: &DatasetSource) -> CliResult<Prepared> {
    match source {
        DatasetSource::Generator(g) => {
            let data = generate(&g.spec())?;
            let (train, test) = data.split_at(g.n_train)?;
            Ok(Prepared { name: g.kind.name().into(), train, test })
        }
        DatasetSource::Csv(c) => {
            let data = load_csv(&c.path, &c.label(), false)?;
            let n_test = ((data.len() as f64) * c.test_fraction).round() as usize;
            if n_test < 2 || data.len() - n_test < 2 {
                return Err(CliError::validation(format!(
                    "{}: {} rows are too few for a {} test fraction",
                    c.path.display(),
                    data.len(),
                    c.test_fraction
                )));
            }
            let (mut train, mut test) = data.split_at(data.len() - n_test)?;
            if c.standardize {
                let scaler = FeatureScaler::fit(&train);
                train = scaler.transform(&train)?;
                test = scaler.transform(&test)?;
            }
            Ok(Prepared { name: source.name(), train, test })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ModelSummary<'a> {
    dataset: &'a str,
    model: &'a str,
    seed: u64,
    train_accuracy: f64,
    test_accuracy: Option<f64>,
    lipschitz_upper: Option<f64>,
}

/// Runs the whole experiment, writing every artifact under `cfg.out`, and
/// returns the report.
pub fn run_pipeline(cfg: &ExperimentConfig) -> CliResult<Report> {
    cfg.validate()?;
    let out = cfg.out.as_path();
    let lgrid = cfg.lipschitz_grid.values()?;
    let lam = cfg.lambda_grid.values()?;
    let ord = cfg.norm_order;
    write_json(&out.join("config.json"), cfg)?;

    let data = prepare_data(&cfg.dataset)?;
    let data_dir = out.join("data");
    save_csv(&data_dir.join("train.csv"), &data.train)?;
    save_csv(&data_dir.join("test.csv"), &data.test)?;
    if let DatasetSource::Generator(g) = &cfg.dataset {
        let meta = DatasetMeta {
            generator: g.spec(),
            n: data.train.len() + data.test.len(),
            dim: data.train.dim(),
            positive_rate: (data.train.positive_rate() * data.train.len() as f64
                + data.test.positive_rate() * data.test.len() as f64)
                / (data.train.len() + data.test.len()) as f64,
        };
        write_json(&data_dir.join("generator.json"), &meta)?;
    }

    let radius = match cfg.pairs.radius {
        Some(r) => r,
        None => median_pairwise_distance(&data.train, ord, cfg.pairs.median_max_pairs, cfg.pairs.seed)?,
    };
    let plan = PairSamplePlan { radius, max_pairs: cfg.pairs.max_pairs, seed: cfg.pairs.seed, mode: cfg.pairs.mode };
    let eval = match cfg.pairs.split {
        Split::Test => &data.test,
        Split::Train => &data.train,
    };
    // One pair set serves every model, explainer and seed.
    let pairs = sample_pairs(eval, &plan, ord)?;
    let dim = eval.dim();

    let mut curves = Vec::new();
    let mut summaries = Vec::new();
    for &seed in &cfg.seeds {
        for &arch in &cfg.models {
            let dir = out.join(&data.name).join(arch.name()).join(format!("seed{seed}"));
            let model =
                train_model(&data.train, Some(&data.test), arch, &cfg.train_config(seed), Some(data.name.clone()))?;
            write_json(&dir.join("model.json"), &model)?;
            summaries.push(ModelSummary {
                dataset: &data.name,
                model: arch.name(),
                seed,
                train_accuracy: model.report.train_accuracy,
                test_accuracy: model.report.test_accuracy,
                lipschitz_upper: model.model.known_lipschitz_upper(ord),
            });
            let label = |curve: &astute_core::robustness::RobustnessCurve| CurveMeta {
                dataset: Some(data.name.clone()),
                model: Some(arch.name().into()),
                dim: Some(dim),
                ..CurveMeta::of(curve, vec![seed])
            };

            let profile = plipschitz_on_pairs(&model.model, eval, &pairs, &lgrid)?.with_subject(arch.name());
            save_curve(&dir.join("lipschitz.csv"), &profile, &label(&profile))?;

            let explainers: Vec<_> = cfg.explainers.iter().map(|e| with_seed(e, seed)).collect();
            let all = explain_all(&explainers, &model.model, eval)?;
            for (e, attrs) in explainers.iter().zip(all) {
                let name = explainer_label(e);
                if cfg.save_attributions {
                    let meta = AttributionsMeta {
                        explainer: *e,
                        dim,
                        n: eval.len(),
                        dataset: Some(data.name.clone()),
                        model: Some(arch.name().into()),
                        samples: attrs.iter().map(|a| a.meta.clone()).collect(),
                    };
                    save_attributions(&dir.join(format!("attributions_{name}.csv")), &attrs, &meta)?;
                }
                let emp = astuteness_on_pairs(&attrs, eval, &pairs, &lam)?.with_subject(name.clone());
                let spec = BoundSpec::for_explainer(e.kind(), dim, ord)?;
                let pred = predict_bound(&profile, &spec, &lam)?.with_subject(name.clone());
                save_curve(&dir.join(format!("astuteness_{name}.csv")), &emp, &label(&emp))?;
                save_curve(&dir.join(format!("bound_{name}.csv")), &pred, &label(&pred))?;
                curves.push(LabeledCurve { meta: label(&emp), curve: emp });
                curves.push(LabeledCurve { meta: label(&pred), curve: pred });
            }
        }
    }
    write_json(&out.join("models.json"), &summaries)?;
    let report = build_report(&curves, None, Some(&out.join("plots")))?;
    write_report(out, &report)?;
    Ok(report)
}

/// Convenience for tests and scripts: run with `out` replaced.
pub fn run_pipeline_in(cfg: &ExperimentConfig, out: &Path) -> CliResult<Report> {
    let cfg = ExperimentConfig { out: out.to_path_buf(), ..cfg.clone() };
    run_pipeline(&cfg)
}
