use std::fs;
use std::path::Path;

use astute::config::{ExperimentConfig, GridSpec};
use astute::io::{load_csv, load_curve, save_csv, save_curve, CurveMeta, LabelColumn, ModelFile};
use astute::CliError;
use astute_core::generate::{generate, GeneratorKind, GeneratorSpec};
use astute_core::predict::{train, Architecture, KernelConfig, TrainConfig};
use astute_core::robustness::{CurveKind, RobustnessCurve};
use astute_core::NormOrder;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn validation_message(e: CliError) -> String {
    assert_eq!(e.exit_code(), 2, "{e}");
    e.to_string()
}

#[test]
fn csv_parses_by_name_or_index() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.csv", "f1,f2,y\n1,2,0\n3,4.5,1\n-1,0,1\n");
    let d = load_csv(&p, &LabelColumn::Name("y".into()), false).unwrap();
    assert_eq!((d.len(), d.dim()), (3, 2));
    assert_eq!(d.sample(1), &[3.0, 4.5]);
    assert_eq!(d.labels(), &[0, 1, 1]);
    let by_index = load_csv(&p, &"2".parse().unwrap(), false).unwrap();
    assert_eq!(d, by_index);
    // label in the first column
    let p = write(dir.path(), "b.csv", "y,f1\n1,0.5\n0,0.25\n");
    let d = load_csv(&p, &"y".parse().unwrap(), false).unwrap();
    assert_eq!(d.features(), &[0.5, 0.25]);
}

#[test]
fn csv_standardizes_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("a,b,label\n");
    for i in 0..50 {
        text.push_str(&format!("{},{},{}\n", i as f64 * 0.7 + 3.0, (i * i) as f64, i % 2));
    }
    let p = write(dir.path(), "s.csv", &text);
    let d = load_csv(&p, &LabelColumn::default(), true).unwrap();
    for j in 0..2 {
        let col: Vec<f64> = d.samples().map(|x| x[j]).collect();
        let mean = col.iter().sum::<f64>() / 50.0;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 49.0).sqrt();
        assert!(mean.abs() <= 1e-9);
        assert!((sd - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn csv_errors_name_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let label = LabelColumn::Name("y".into());
    let p = write(dir.path(), "c.csv", "f1,f2,y\n1,2,0\n1,2,2\n");
    let msg = validation_message(load_csv(&p, &label, false).unwrap_err());
    assert!(msg.contains("row 3") && msg.contains("\"y\""), "{msg}");

    let p = write(dir.path(), "d.csv", "f1,f2,y\n1,abc,0\n");
    let msg = validation_message(load_csv(&p, &label, false).unwrap_err());
    assert!(msg.contains("row 2") && msg.contains("\"f2\""), "{msg}");

    for bad in ["NaN", "inf", "-inf"] {
        let p = write(dir.path(), "e.csv", &format!("f1,f2,y\n1,{bad},0\n"));
        validation_message(load_csv(&p, &label, false).unwrap_err());
    }
    let p = write(dir.path(), "f.csv", "f1,f2,y\n1,2\n");
    validation_message(load_csv(&p, &label, false).unwrap_err());
    validation_message(load_csv(&p, &LabelColumn::Name("nope".into()), false).unwrap_err());
    validation_message(load_csv(&dir.path().join("missing.csv"), &label, false).unwrap_err());
}

#[test]
fn dataset_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(&GeneratorSpec::new(GeneratorKind::Switch, 200, 4)).unwrap();
    let p = dir.path().join("data.csv");
    save_csv(&p, &data).unwrap();
    assert_eq!(load_csv(&p, &LabelColumn::default(), false).unwrap(), data);
}

#[test]
fn model_json_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(&GeneratorSpec::new(GeneratorKind::OrangeSkin, 300, 1)).unwrap();
    for arch in Architecture::ALL {
        let cfg = TrainConfig {
            hidden_width: 16,
            epochs: 2,
            lipschitz_cap: Some(2.0),
            kernel: KernelConfig { max_centers: 50, ..KernelConfig::default() },
            ..TrainConfig::default()
        };
        let file = astute::commands::train_model(&data, None, arch, &cfg, Some("orange_skin".into())).unwrap();
        let p = dir.path().join(format!("{}.json", arch.name()));
        astute::io::write_json(&p, &file).unwrap();
        let back = ModelFile::load(&p).unwrap();
        assert_eq!(back, file, "{arch}");
        // equality of f64 is bitwise for finite non-zero values; check outputs too
        let x = data.sample(3);
        assert_eq!(
            astute_core::Predictor::eval(&back.model, x).to_bits(),
            astute_core::Predictor::eval(&file.model, x).to_bits()
        );
        // a second write is byte-identical
        let q = dir.path().join("again.json");
        astute::io::write_json(&q, &back).unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(&q).unwrap());
    }
    let retrained = train(&data, Architecture::Linear, &TrainConfig::default(), None).unwrap();
    assert!(retrained.report.steps > 0);
}

#[test]
fn curve_files_round_trip_with_infinite_norm() {
    let dir = tempfile::tempdir().unwrap();
    let curve = RobustnessCurve::new(
        CurveKind::Astuteness,
        vec![0.1, 0.2, 0.30000000000000004],
        vec![0.0, 0.5, 1.0],
        1.25,
        NormOrder::MAX,
        17,
        "rise",
    )
    .unwrap();
    let p = dir.path().join("c.csv");
    save_curve(&p, &curve, &CurveMeta::of(&curve, vec![3, 4])).unwrap();
    let text = fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("grid_value,probability\n"), "{text}");
    let side = fs::read_to_string(dir.path().join("c.json")).unwrap();
    assert!(side.contains("\"p\": \"inf\""), "{side}");
    let (back, meta) = load_curve(&p).unwrap();
    assert_eq!(back, curve);
    assert_eq!(meta.seeds, vec![3, 4]);
}

#[test]
fn config_accepts_partial_documents_and_grid_forms() {
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{
            "dataset": {"generator": {"kind": "switch", "n_train": 50}},
            "models": ["mlp4"],
            "train": {"epochs": 3, "lipschitz_cap": 0.5},
            "explainers": [{"method": "shap_sampled", "permutations": 20, "seed": 1}, {"method": "rise", "exact": false, "n_masks": 30}],
            "pairs": {"mode": "exhaustive"},
            "norm_order": "inf",
            "lambda_grid": {"start": 0.5, "stop": 2.0, "step": 0.5}
        }"#,
    )
    .unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.train.epochs, 3);
    assert_eq!(cfg.train.batch_size, 100);
    assert_eq!(cfg.norm_order, NormOrder::MAX);
    assert_eq!(cfg.lambda_grid.values().unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
    assert_eq!(cfg.train_config(9).hidden_width, 200);
    assert_eq!(cfg.train_config(9).seed, 9);

    assert_eq!("0.1:0.3:0.1".parse::<GridSpec>().unwrap().values().unwrap(), vec![0.1, 0.2, 0.3]);
    assert_eq!("1,2,4".parse::<GridSpec>().unwrap().values().unwrap(), vec![1.0, 2.0, 4.0]);
    assert!("2,1".parse::<GridSpec>().unwrap().values().is_err());
    assert!("a:b".parse::<GridSpec>().is_err());
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"norm_order": 0.5}"#).is_err());
    let short: ExperimentConfig = serde_json::from_str(
        r#"{"explainers": [{"method": "shap_exact"}, {"method": "shap_sampled", "permutations": 30}]}"#,
    )
    .unwrap();
    assert_eq!(short.explainers[0], astute_core::explain::Explainer::shap_exact());
    assert_eq!(short.explainers[1], astute_core::explain::Explainer::ShapSampled { permutations: 30, seed: 0 });
}
