//! Table of AUC gaps per (dataset, model, explainer), with one chart each.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use astute_core::robustness::{auc, CurveKind, RobustnessCurve};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{write_atomic, write_json, CurveMeta};
use crate::svg;

/// A curve together with its sidecar labels.
#[derive(Debug, Clone)]
pub struct LabeledCurve {
    pub curve: RobustnessCurve,
    pub meta: CurveMeta,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Combination {
    pub dataset: String,
    pub model: String,
    pub explainer: String,
}

impl Combination {
    fn of(meta: &CurveMeta) -> Self {
        Combination {
            dataset: meta.dataset.clone().unwrap_or_else(|| "data".into()),
            model: meta.model.clone().unwrap_or_else(|| "model".into()),
            explainer: meta.subject_id.clone(),
        }
    }

    fn file_stem(&self) -> String {
        format!("{}_{}_{}", self.dataset, self.model, self.explainer)
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(flatten)]
    pub combination: Combination,
    pub seeds: Vec<u64>,
    pub auc_emp: f64,
    pub auc_pred: f64,
    /// `auc_emp − auc_pred` of the seed-averaged curves, which equals the
    /// mean of the per-seed gaps.
    pub auc_gap: f64,
    pub auc_gap_per_seed: Vec<f64>,
    pub radius: f64,
    pub n_pairs: usize,
    pub grid: Vec<f64>,
    pub empirical_mean: Vec<f64>,
    pub empirical_std: Vec<f64>,
    pub bound_mean: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub interval: [f64; 2],
    pub rows: Vec<ReportRow>,
    /// dataset → model → explainer → AUC gap.
    pub matrix: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>,
}

fn mean_curve(curves: &[&LabeledCurve]) -> CliResult<(RobustnessCurve, Vec<f64>)> {
    let first = &curves[0].curve;
    if curves.iter().any(|c| c.curve.grid != first.grid) {
        return Err(CliError::validation(format!("curves for {} disagree on their grid", first.subject_id)));
    }
    let n = curves.len() as f64;
    let mut mean = vec![0.0; first.len()];
    for c in curves {
        for (m, v) in mean.iter_mut().zip(&c.curve.values) {
            *m += v / n;
        }
    }
    let std = mean
        .iter()
        .enumerate()
        .map(|(k, m)| {
            if curves.len() < 2 {
                return 0.0;
            }
            (curves.iter().map(|c| (c.curve.values[k] - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        })
        .collect();
    // averaging can leave values a rounding error outside [0, 1]
    let mean: Vec<f64> = mean.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let curve = RobustnessCurve::new(
        first.kind,
        first.grid.clone(),
        mean,
        first.radius,
        first.norm_order,
        first.n_pairs,
        first.subject_id.clone(),
    )?;
    Ok((curve, std))
}

/// Pairs every astuteness curve with the predicted-bound curve of the same
/// combination, averaging across seeds. Lipschitzness curves are ignored.
/// With `plot_dir`, writes one SVG per combination.
pub fn build_report(
    curves: &[LabeledCurve],
    interval: Option<(f64, f64)>,
    plot_dir: Option<&Path>,
) -> CliResult<Report> {
    let relevant: Vec<&LabeledCurve> = curves.iter().filter(|c| c.curve.kind != CurveKind::Lipschitzness).collect();
    if relevant.is_empty() {
        return Err(CliError::validation("report needs at least one astuteness curve and its predicted bound"));
    }
    let mut groups: BTreeMap<Combination, (Vec<&LabeledCurve>, Vec<&LabeledCurve>)> = BTreeMap::new();
    for c in relevant {
        let slot = groups.entry(Combination::of(&c.meta)).or_default();
        match c.curve.kind {
            CurveKind::Astuteness => slot.0.push(c),
            _ => slot.1.push(c),
        }
    }
    let (lo, hi) = match interval {
        Some(iv) => iv,
        None => {
            let all = groups.values().flat_map(|(e, b)| e.iter().chain(b));
            let lo = all.clone().map(|c| c.curve.grid[0]).fold(f64::INFINITY, f64::min);
            let hi = all.map(|c| c.curve.grid[c.curve.len() - 1]).fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    if !(lo < hi) {
        return Err(CliError::validation(format!("empty λ interval [{lo}, {hi}]")));
    }

    let mut rows = Vec::new();
    let mut matrix: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>> = BTreeMap::new();
    for (combo, (emp, pred)) in groups {
        if emp.is_empty() || pred.is_empty() {
            let missing = if emp.is_empty() { "astuteness curve" } else { "predicted bound" };
            return Err(CliError::validation(format!(
                "{}/{}/{}: no {missing}",
                combo.dataset, combo.model, combo.explainer
            )));
        }
        let seeds_of = |cs: &[&LabeledCurve]| {
            let mut s: Vec<u64> = cs.iter().flat_map(|c| c.meta.seeds.iter().copied()).collect();
            s.sort_unstable();
            s
        };
        let seeds = seeds_of(&emp);
        if seeds != seeds_of(&pred) {
            return Err(CliError::validation(format!(
                "{}/{}/{}: astuteness and bound curves come from different seeds",
                combo.dataset, combo.model, combo.explainer
            )));
        }
        // per-seed gaps, matching curves by their seed lists
        let mut per_seed = Vec::new();
        for e in &emp {
            let p = pred.iter().find(|p| p.meta.seeds == e.meta.seeds).expect("seed sets match");
            per_seed.push(auc(&e.curve, lo, hi)? - auc(&p.curve, lo, hi)?);
        }
        let (emp_mean, emp_std) = mean_curve(&emp)?;
        let (pred_mean, _) = mean_curve(&pred)?;
        let auc_emp = auc(&emp_mean, lo, hi)?;
        let auc_pred = auc(&pred_mean, lo, hi)?;
        let plot = match plot_dir {
            Some(dir) => {
                let name = format!("{}.svg", combo.file_stem());
                let title = format!("{} / {} / {}", combo.dataset, combo.model, combo.explainer);
                let spread = (emp.len() > 1).then_some(emp_std.as_slice());
                let body = svg::chart(&title, &emp_mean, &pred_mean, lo, hi, spread);
                write_atomic(&dir.join(&name), body.as_bytes())?;
                Some(name)
            }
            None => None,
        };
        matrix
            .entry(combo.dataset.clone())
            .or_default()
            .entry(combo.model.clone())
            .or_default()
            .insert(combo.explainer.clone(), auc_emp - auc_pred);
        rows.push(ReportRow {
            combination: combo,
            seeds,
            auc_emp,
            auc_pred,
            auc_gap: auc_emp - auc_pred,
            auc_gap_per_seed: per_seed,
            radius: emp_mean.radius,
            n_pairs: emp_mean.n_pairs,
            grid: emp_mean.grid.clone(),
            empirical_mean: emp_mean.values,
            empirical_std: emp_std,
            bound_mean: pred_mean.values,
            plot,
        });
    }
    Ok(Report { interval: [lo, hi], rows, matrix })
}

/// Writes `report.json` and `report.csv` under `dir`.
pub fn write_report(dir: &Path, report: &Report) -> CliResult<(PathBuf, PathBuf)> {
    let json = dir.join("report.json");
    write_json(&json, report)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::runtime(e.to_string());
    w.write_record(["dataset", "model", "explainer", "auc_emp", "auc_pred", "auc_gap", "n_seeds", "n_pairs", "radius"])
        .map_err(err)?;
    for r in &report.rows {
        w.write_record([
            r.combination.dataset.clone(),
            r.combination.model.clone(),
            r.combination.explainer.clone(),
            format!("{}", r.auc_emp),
            format!("{}", r.auc_pred),
            format!("{}", r.auc_gap),
            r.seeds.len().to_string(),
            r.n_pairs.to_string(),
            format!("{}", r.radius),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::runtime(e.to_string()))?;
    let csv_path = dir.join("report.csv");
    write_atomic(&csv_path, &bytes)?;
    Ok((json, csv_path))
}
