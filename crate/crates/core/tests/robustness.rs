mod common;

use astute_core::explain::{explain_dataset, Explainer, ExplainerKind};
use astute_core::generate::{generate, GeneratorKind, GeneratorSpec};
use astute_core::predict::{sigmoid, FnPredictor, LinearModel};
use astute_core::robustness::*;
use astute_core::{median_pairwise_distance, rng, sample_pairs, Dataset, Model, NormOrder, PairSamplePlan, Predictor};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn small_data(n: usize, seed: u64) -> Dataset {
    generate(&GeneratorSpec { dim: 5, ..GeneratorSpec::new(GeneratorKind::OrangeSkin, n, seed) }).unwrap()
}

#[test]
fn curves_match_direct_pair_counting() {
    let data = small_data(60, 1);
    let ord = NormOrder::L2;
    let radius = median_pairwise_distance(&data, ord, usize::MAX, 0).unwrap();
    let plan = PairSamplePlan::exhaustive(radius);
    let net = random_mlp(2, 5, &[10], 3.0);
    let lgrid = linear_grid(0.0, 2.0, 0.05).unwrap();
    let profile = estimate_plipschitz(&net, &data, &plan, ord, &lgrid).unwrap();
    let points: Vec<Vec<f64>> = data.samples().map(<[f64]>::to_vec).collect();
    let outputs: Vec<Vec<f64>> = points.iter().map(|x| vec![net.eval(x)]).collect();
    for (&l, &v) in lgrid.iter().zip(&profile.values) {
        assert_eq!(v, satisfied_fraction_naive(&points, &outputs, radius, 2.0, l), "L={l}");
    }

    let attrs = explain_dataset(&[Explainer::shap_exact()], &net, &data).unwrap().remove(0);
    let phis: Vec<Vec<f64>> = attrs.iter().map(|a| a.scores.clone()).collect();
    let lam = default_lambda_grid();
    let curve = estimate_astuteness(&attrs, &data, &plan, ord, &lam).unwrap();
    assert_eq!(curve.subject_id, "shap");
    for (&t, &v) in lam.iter().zip(&curve.values) {
        assert_eq!(v, satisfied_fraction_naive(&points, &phis, radius, 2.0, t), "λ={t}");
    }
}

#[test]
fn median_radius_splits_pairs_in_half() {
    let data = small_data(41, 4);
    let r = median_pairwise_distance(&data, NormOrder::L1, usize::MAX, 0).unwrap();
    let pairs = sample_pairs(&data, &PairSamplePlan::exhaustive(r), NormOrder::L1).unwrap();
    let total = 41 * 40 / 2;
    assert_eq!(pairs.candidates, total);
    assert!((pairs.len() as f64 / total as f64 - 0.5).abs() < 0.01);
}

#[test]
fn sampled_plan_is_a_deterministic_subset() {
    let data = small_data(300, 2);
    let r = median_pairwise_distance(&data, NormOrder::L2, usize::MAX, 0).unwrap();
    let plan = PairSamplePlan::new(r, 8).with_max_pairs(5000);
    let a = sample_pairs(&data, &plan, NormOrder::L2).unwrap();
    assert_eq!(a, sample_pairs(&data, &plan, NormOrder::L2).unwrap());
    assert_eq!(a.candidates, 5000);
    assert!(a.pairs.windows(2).all(|w| (w[0].i, w[0].j) < (w[1].i, w[1].j)));
    assert!(a.pairs.iter().all(|p| p.i < p.j && p.j < 300 && p.distance <= r));
    let b = sample_pairs(&data, &PairSamplePlan { seed: 9, ..plan }, NormOrder::L2).unwrap();
    assert_ne!(a.pairs, b.pairs);
    assert!(sample_pairs(&data, &PairSamplePlan::exhaustive(1e-9), NormOrder::L2).is_err());
}

#[test]
fn curve_examples() {
    let data = Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![0, 1]).unwrap();
    let f = FnPredictor::new(1, |x: &[f64]| sigmoid(4.0 * x[0]));
    let plan = PairSamplePlan::exhaustive(2.0);
    let c = estimate_plipschitz(&f, &data, &plan, NormOrder::L2, &[0.4, 0.5]).unwrap();
    assert_eq!(c.values, vec![0.0, 1.0]);

    let constant = FnPredictor::new(1, |_: &[f64]| 0.7);
    let c = estimate_plipschitz(&constant, &data, &plan, NormOrder::L2, &[0.0, 0.1]).unwrap();
    assert_eq!(c.values, vec![1.0, 1.0]);

    let data = Dataset::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]], vec![0, 1]).unwrap();
    let attrs = [
        astute_core::explain::Attribution {
            scores: vec![0.0, 0.0],
            explainer: ExplainerKind::Shap,
            sample_index: 0,
            meta: Default::default(),
        },
        astute_core::explain::Attribution {
            scores: vec![0.0, 1.0],
            explainer: ExplainerKind::Shap,
            sample_index: 1,
            meta: Default::default(),
        },
    ];
    let c = estimate_astuteness(&attrs, &data, &plan, NormOrder::L2, &[0.4, 0.49, 0.5, 0.6]).unwrap();
    assert_eq!(c.values, vec![0.0, 0.0, 1.0, 1.0]);
    let err = estimate_astuteness(&attrs[..1], &data, &plan, NormOrder::L2, &[0.5]).unwrap_err();
    assert!(err.to_string().contains('1'), "{err}");
}

#[test]
fn linear_models_have_no_theorem_violations() {
    let data = generate(&GeneratorSpec::new(GeneratorKind::OrangeSkin, 120, 3)).unwrap();
    let mut r = rng::stream(3, 3);
    let model = Model::Linear(LinearModel::new(gaussian_vec(&mut r, 10), 0.2).unwrap());
    for p in [1.0, 1.5, 2.0, f64::INFINITY] {
        let ord = NormOrder::new(p).unwrap();
        let radius = median_pairwise_distance(&data, ord, usize::MAX, 0).unwrap();
        let plan = PairSamplePlan::exhaustive(radius);
        for e in [Explainer::shap_exact(), Explainer::rise_exact(), Explainer::RemoveIndividual] {
            let report = verify_theorem(&e, &model, &data, &plan, ord).unwrap();
            assert_eq!(report.violations, 0, "{:?} p={p}", e.kind());
            assert!(report.max_ratio <= report.bound);
            assert_eq!(report.n_pairs, sample_pairs(&data, &plan, ord).unwrap().len());
        }
    }
}

#[test]
fn predicted_bound_stays_below_empirical_for_trained_linear_model() {
    use astute_core::predict::{train, Architecture, TrainConfig};
    let data = generate(&GeneratorSpec::new(GeneratorKind::OrangeSkin, 500, 21)).unwrap();
    let model = train(&data, Architecture::Linear, &TrainConfig::default(), None).unwrap().model;
    let ord = NormOrder::L2;
    let radius = median_pairwise_distance(&data, ord, usize::MAX, 0).unwrap();
    let pairs = sample_pairs(&data, &PairSamplePlan::exhaustive(radius), ord).unwrap();
    let profile = plipschitz_on_pairs(&model, &data, &pairs, &default_lipschitz_grid()).unwrap();
    let lam = default_lambda_grid();
    let explainers = [Explainer::shap_exact(), Explainer::rise_exact(), Explainer::RemoveIndividual];
    for (e, attrs) in explainers.iter().zip(explain_dataset(&explainers, &model, &data).unwrap()) {
        let emp = astuteness_on_pairs(&attrs, &data, &pairs, &lam).unwrap();
        let pred = predict_bound(&profile, &BoundSpec::for_explainer(e.kind(), 10, ord).unwrap(), &lam).unwrap();
        for (k, (&a, &b)) in emp.values.iter().zip(&pred.values).enumerate() {
            assert!(b <= a, "{:?} λ={}: bound {b} > empirical {a}", e.kind(), lam[k]);
        }
        assert!(emp.is_nondecreasing() && pred.is_nondecreasing());
        assert!(auc_gap(&emp, &pred, 0.1, 1.1).unwrap() >= 0.0);
    }
}

#[test]
fn rise_bound_is_half_of_shap_bound() {
    let data = small_data(80, 6);
    let model = Model::Linear(LinearModel::new(vec![1.0, -2.0, 0.5, 0.0, 3.0], -0.1).unwrap());
    let radius = median_pairwise_distance(&data, NormOrder::L2, usize::MAX, 0).unwrap();
    let plan = PairSamplePlan::exhaustive(radius);
    let shap = verify_theorem(&Explainer::shap_exact(), &model, &data, &plan, NormOrder::L2).unwrap();
    let rise = verify_theorem(&Explainer::rise_exact(), &model, &data, &plan, NormOrder::L2).unwrap();
    assert_eq!(rise.violations, 0);
    assert!((rise.bound * 2.0 - shap.bound).abs() <= 1e-12 * shap.bound);
    assert!(rise.max_ratio <= shap.bound / 2.0);

    let constant = FnPredictor::new(5, |_: &[f64]| 0.25);
    let report =
        verify_with_lipschitz(&Explainer::RemoveIndividual, &constant, 0.0, &data, &plan, NormOrder::L2).unwrap();
    assert_eq!((report.violations, report.max_ratio), (0, 0.0));

    let kernel_like =
        Model::Kernel(astute_core::predict::KernelModel::new(vec![0.0; 5], 5, vec![1.0], 1.0, 0.0).unwrap());
    assert!(verify_theorem(&Explainer::shap_exact(), &kernel_like, &data, &plan, NormOrder::L2).is_err());
    let sampled = Explainer::ShapSampled { permutations: 10, seed: 0 };
    assert!(verify_theorem(&sampled, &model, &data, &plan, NormOrder::L2).is_err());
}

#[test]
fn bound_and_auc_examples() {
    let ord = NormOrder::L2;
    let profile = RobustnessCurve::new(CurveKind::Lipschitzness, vec![0.5], vec![0.9], 1.0, ord, 1, "").unwrap();
    let lam = linear_grid(0.0, 3.0, 0.5).unwrap();
    let b = predict_bound(&profile, &BoundSpec::new(2.0, 4, ord).unwrap(), &lam).unwrap();
    assert_eq!(b.values, vec![0.0, 0.0, 0.0, 0.0, 0.9, 0.9, 0.9]);
    let b1 = predict_bound(&profile, &BoundSpec::new(1.0, 4, ord).unwrap(), &lam).unwrap();
    assert_eq!(b1.first_reaching(0.9), Some(1.0));

    let grid = linear_grid(0.0, 2.0, 0.1).unwrap();
    let step: Vec<f64> = grid.iter().map(|&g| if g < 1.0 { 0.0 } else { 1.0 }).collect();
    let c = RobustnessCurve::new(CurveKind::Astuteness, grid.clone(), step, 1.0, ord, 1, "").unwrap();
    // the trapezoid error of a unit step at spacing 0.1 is exactly the tolerance
    assert!((auc(&c, 0.0, 2.0).unwrap() - 0.5).abs() <= 0.025 + 1e-12);
    let ones =
        RobustnessCurve::new(CurveKind::Astuteness, grid.clone(), vec![1.0; grid.len()], 1.0, ord, 1, "").unwrap();
    let zeros =
        RobustnessCurve::new(CurveKind::PredictedBound, grid.clone(), vec![0.0; grid.len()], 1.0, ord, 1, "").unwrap();
    assert_eq!(auc(&ones, 0.0, 2.0).unwrap(), 1.0);
    assert_eq!(auc(&zeros, 0.0, 2.0).unwrap(), 0.0);
    assert_eq!(auc_gap(&ones, &zeros, 0.0, 2.0).unwrap(), 1.0);
    assert_eq!(auc_gap(&ones, &ones, 0.5, 1.5).unwrap(), 0.0);
    assert!(auc(&ones, 1.0, 1.0).is_err());
    assert!(RobustnessCurve::new(CurveKind::Astuteness, vec![0.0, 0.0], vec![0.0, 0.0], 1.0, ord, 1, "").is_err());
}

fn random_problem(r: &mut impl Rng, d: usize) -> BetaStarProblem {
    let raw: Vec<f64> = (0..d).map(|_| r.random::<f64>()).collect();
    let total: f64 = raw.iter().sum::<f64>() / r.random_range(0.3..1.0);
    let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let alpha = r.random::<f64>() * p.iter().sum::<f64>();
    BetaStarProblem::new(p, alpha).unwrap()
}

#[test]
fn beta_star_matches_oracle() {
    let mut r = rng::stream(12, 0);
    for _ in 0..40 {
        let d = r.random_range(1..=3);
        let prob = random_problem(&mut r, d);
        let sol = beta_star(&prob).unwrap();
        let oracle = beta_star_oracle(&prob, 1e-2).unwrap();
        assert!((sol.beta - oracle).abs() <= 5e-2, "{prob:?}: {} vs {oracle}", sol.beta);
        assert!(sol.beta >= prob.alpha - 1e-12);
        assert!((prob.spent(&sol.gamma) - prob.alpha).abs() <= 1e-12);
        assert!((prob.objective(&sol.gamma) - sol.beta).abs() <= 1e-12);
    }
}

#[test]
fn beta_star_examples() {
    let s = beta_star(&BetaStarProblem::new(vec![0.5, 0.5], 0.5).unwrap()).unwrap();
    assert_eq!(s.gamma, vec![1.0, 0.0]);
    assert!((s.beta - 2.0 / 3.0).abs() <= 1e-15);
    let s = beta_star(&BetaStarProblem::new(vec![0.2, 0.3, 0.5], 1.0).unwrap()).unwrap();
    assert_eq!(s.gamma, vec![1.0; 3]);
    assert!((s.beta - 1.0).abs() <= 1e-15);
    let s = beta_star(&BetaStarProblem::new(vec![0.2, 0.3], 0.0).unwrap()).unwrap();
    assert_eq!((s.beta, s.gamma), (0.0, vec![0.0, 0.0]));
    for alpha in [0.0, 0.3, 1.0] {
        assert!(
            (beta_star(&BetaStarProblem::new(vec![1.0, 0.0], alpha).unwrap()).unwrap().beta - alpha).abs() <= 1e-15
        );
    }
    let eps = 1e-3;
    let d = 6;
    let mut p = vec![eps / (d - 1) as f64; d];
    p[0] = 1.0 - eps;
    for alpha in [0.05, 0.5, 0.9] {
        let b = beta_star(&BetaStarProblem::new(p.clone(), alpha).unwrap()).unwrap().beta;
        assert!((b - alpha).abs() <= 10.0 * eps);
    }
    assert!(BetaStarProblem::new(vec![0.2, 0.2], 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_star_dominates_alpha(raw in prop::collection::vec(0.0f64..1.0, 1..8), frac in 0.0f64..=1.0, scale in 0.1f64..=1.0) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-9);
        let p: Vec<f64> = raw.iter().map(|v| v / total * scale).collect();
        let alpha = frac * p.iter().sum::<f64>();
        let prob = BetaStarProblem::new(p, alpha.min(1.0)).unwrap();
        let sol = beta_star(&prob).unwrap();
        prop_assert!(sol.beta >= prob.alpha - 1e-12);
        prop_assert!(sol.beta <= 1.0 + 1e-12);
        prop_assert!(sol.gamma.iter().all(|g| (0.0..=1.0).contains(g)));
    }

    #[test]
    fn predicted_bound_is_monotone_and_bounded(values in prop::collection::vec(0.0f64..=1.0, 1..12), c in prop::sample::select(vec![1.0, 2.0]), d in 1usize..20) {
        let grid: Vec<f64> = (1..=values.len()).map(|i| i as f64 * 0.1).collect();
        let profile = RobustnessCurve::new(CurveKind::Lipschitzness, grid, values.clone(), 1.0, NormOrder::L2, 1, "").unwrap();
        let lam = linear_grid(0.05, 10.0, 0.05).unwrap();
        let b = predict_bound(&profile, &BoundSpec::new(c, d, NormOrder::L2).unwrap(), &lam).unwrap();
        prop_assert!(b.is_nondecreasing());
        prop_assert!(b.values.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(b.values.iter().all(|v| values.contains(v) || *v == 0.0));
    }
}
