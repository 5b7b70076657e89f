use proptest::prelude::*;

use super::*;
use crate::matrix::Matrix;

fn labels(v: &[u8]) -> Vec<bool> {
    v.iter().map(|&b| b == 1).collect()
}

/// Two noisy features plus a constant; deterministic pseudo-random layout.
fn noisy(n: usize, seed: u64) -> (Matrix, Vec<bool>) {
    use rand::Rng;
    let mut rng = crate::seeds::rng(seed, 0);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let a: f64 = rng.random_range(-2.0..2.0);
        let b: f64 = rng.random_range(-2.0..2.0);
        let p = 1.0 / (1.0 + (-(0.8 * a - 0.5 * b)).exp());
        y.push(rng.random_bool(p));
        rows.push(vec![a, b, 3.0]);
    }
    (Matrix::unnamed(3, &rows).unwrap(), y)
}

fn linear(model: &TrainedModel) -> &LinearModel {
    match &model.fitted {
        FittedModel::Linear(l) => l,
        _ => panic!("not a linear model"),
    }
}

#[test]
fn forest_separates_one_dimension() {
    let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
    let y: Vec<bool> = (0..20).map(|i| i >= 10).collect();
    let x = Matrix::unnamed(1, &xs).unwrap();
    let spec = ClassifierSpec::new(Family::RandomForest).with_param("n_trees", 50.0);
    let model = fit(&spec, &x, &y, 1).unwrap();
    let s = predict_scores(&model, &x).unwrap();
    for (i, v) in s.iter().enumerate() {
        if i < 10 {
            assert!(*v < 0.5, "row {i}: {v}");
        } else {
            assert!(*v > 0.5, "row {i}: {v}");
        }
    }
    assert_eq!(crate::eval::auc(&s, &y).unwrap(), 1.0);
}

#[test]
fn forest_single_node_trees_score_one_half() {
    let (x, y) = noisy(40, 3);
    let spec = ClassifierSpec::new(Family::RandomForest)
        .with_param("n_trees", 10.0)
        .with_param("min_node_size", 1000.0);
    let model = fit(&spec, &x, &y, 0).unwrap();
    // balanced bootstrap: every root holds as many positives as negatives
    for v in predict_scores(&model, &x).unwrap() {
        assert_eq!(v, 0.5);
    }
}

#[test]
fn forest_is_deterministic_and_pure_leaves_are_binary() {
    let (x3, y) = noisy(80, 4);
    // drop the constant column: a node that draws it alone cannot split
    let x = Matrix::from_rows(vec!["a".into(), "b".into()], &x3.rows().map(|r| r[..2].to_vec()).collect::<Vec<_>>()).unwrap();
    let spec = ClassifierSpec::new(Family::RandomForest).with_param("n_trees", 20.0);
    let a = fit(&spec, &x, &y, 9).unwrap();
    let b = fit(&spec, &x, &y, 9).unwrap();
    assert_eq!(a, b);
    let FittedModel::Forest(f) = &a.fitted else { panic!() };
    for t in &f.trees {
        for n in &t.nodes {
            if let Node::Leaf { value } = n {
                // no duplicate feature rows with conflicting labels, so leaves are pure
                assert!(*value == 0.0 || *value == 1.0);
            }
        }
    }
    assert_eq!(a.spec.param("mtry"), Some(1.0));
}

#[test]
fn forest_invariant_to_monotone_transform() {
    // thresholds are midpoints, so rows between two training values may
    // route differently; the grown trees and in-sample scores agree
    let (x, y) = noisy(60, 5);
    let spec = ClassifierSpec::new(Family::RandomForest).with_param("n_trees", 15.0);
    let xt = x.map_values(|_, v| v.exp() * 3.0 + 1.0);
    let (a, b) = (fit(&spec, &x, &y, 2).unwrap(), fit(&spec, &xt, &y, 2).unwrap());
    let (FittedModel::Forest(fa), FittedModel::Forest(fb)) = (&a.fitted, &b.fitted) else { panic!() };
    for (ta, tb) in fa.trees.iter().zip(&fb.trees) {
        assert_eq!(ta.nodes.len(), tb.nodes.len());
        for (na, nb) in ta.nodes.iter().zip(&tb.nodes) {
            match (na, nb) {
                (Node::Leaf { value: v1 }, Node::Leaf { value: v2 }) => assert_eq!(v1, v2),
                (Node::Split { feature: f1, left: l1, .. }, Node::Split { feature: f2, left: l2, .. }) => {
                    assert_eq!((f1, l1), (f2, l2))
                }
                _ => panic!("tree shapes differ"),
            }
        }
    }
}

#[test]
fn lasso_above_lambda_max_is_intercept_only() {
    let (x, y) = noisy(200, 6);
    let lmax = lambda_max(&x, &y).unwrap();
    let spec = ClassifierSpec::new(Family::LassoLogistic).with_param("lambda", lmax * 1.0001);
    let model = fit(&spec, &x, &y, 0).unwrap();
    let l = linear(&model);
    assert!(l.coefficients.iter().all(|&b| b == 0.0));
    let p = y.iter().filter(|&&v| v).count() as f64 / y.len() as f64;
    assert!((l.intercept - (p / (1.0 - p)).ln()).abs() < 1e-9);

    let just_below = spec.with_param("lambda", lmax * 0.9);
    let model = fit(&just_below, &x, &y, 0).unwrap();
    assert!(linear(&model).coefficients.iter().any(|&b| b != 0.0));
}

#[test]
fn lasso_grid_is_log_spaced() {
    let (x, y) = noisy(100, 7);
    let g = lambda_grid(&x, &y, 20).unwrap();
    assert_eq!(g.len(), 20);
    assert!((g[19] / g[0] - 1e-4).abs() < 1e-12);
    for w in g.windows(2) {
        assert!((w[1] / w[0] - g[1] / g[0]).abs() < 1e-9);
    }
}

#[test]
fn lasso_without_penalty_matches_logistic() {
    let (x, y) = noisy(300, 8);
    let lasso = fit(
        &ClassifierSpec::new(Family::LassoLogistic).with_param("lambda", 0.0),
        &x,
        &y,
        0,
    )
    .unwrap();
    let logit = fit(&ClassifierSpec::new(Family::Logistic), &x, &y, 0).unwrap();
    assert!(lasso.converged && logit.converged);
    // the constant column is dropped by the lasso and redundant with the
    // intercept for plain logistic regression, so compare fitted values
    let a = predict_scores(&lasso, &x).unwrap();
    let b = predict_scores(&logit, &x).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).abs() < 1e-4);
    }
    let (la, lb) = (linear(&lasso), linear(&logit));
    for j in 0..2 {
        assert!((la.coefficients[j] - lb.coefficients[j]).abs() < 1e-4);
    }
    assert_eq!(la.coefficients[2], 0.0);
}

/// Mean log-likelihood gradient on standardized columns, computed directly.
fn standardized_gradient(x: &Matrix, y: &[bool], fit: &logistic::StandardizedFit) -> Vec<f64> {
    let n = x.n_rows() as f64;
    let m = x.n_cols();
    let mut g = vec![0.0; m + 1];
    for (i, row) in x.rows().enumerate() {
        let z: Vec<f64> = (0..m).map(|j| fit.standardizer.apply(j, row[j])).collect();
        let eta = fit.intercept + z.iter().zip(&fit.coefficients).map(|(a, b)| a * b).sum::<f64>();
        let r = f64::from(u8::from(y[i])) - 1.0 / (1.0 + (-eta).exp());
        g[0] += r / n;
        for j in 0..m {
            g[j + 1] += r * z[j] / n;
        }
    }
    g
}

#[test]
fn lasso_satisfies_kkt_conditions() {
    let (x, y) = noisy(400, 10);
    let lmax = lambda_max(&x, &y).unwrap();
    for frac in [0.5, 0.1, 0.01] {
        let lambda = lmax * frac;
        let spec = ClassifierSpec::new(Family::LassoLogistic).with_param("lambda", lambda);
        let model = fit(&spec, &x, &y, 0).unwrap();
        assert!(model.converged);
        let sf = linear(&model).standardized.as_ref().unwrap();
        let g = standardized_gradient(&x, &y, sf);
        assert!(g[0].abs() < 1e-6);
        for j in 0..x.n_cols() {
            if sf.standardizer.is_constant(j) {
                continue;
            }
            let b = sf.coefficients[j];
            if b == 0.0 {
                assert!(g[j + 1].abs() <= lambda + 1e-6, "inactive {j}");
            } else {
                assert!((g[j + 1] - lambda * b.signum()).abs() < 1e-6, "active {j}");
            }
        }
    }
}

#[test]
fn logistic_intercept_only() {
    let x = Matrix::new(vec![], 10, vec![]).unwrap();
    let y = labels(&[1, 0, 0, 1, 0, 0, 0, 1, 0, 0]);
    let model = fit(&ClassifierSpec::new(Family::Logistic), &x, &y, 0).unwrap();
    assert!(model.converged);
    assert!((linear(&model).intercept - (0.3f64 / 0.7).ln()).abs() < 1e-10);
}

#[test]
fn logistic_meets_gradient_tolerance() {
    let (x, y) = noisy(150, 11);
    let x2 = Matrix::from_rows(
        vec!["a".into(), "b".into()],
        &x.rows().map(|r| vec![r[0], r[1]]).collect::<Vec<_>>(),
    )
    .unwrap();
    let model = fit(&ClassifierSpec::new(Family::Logistic), &x2, &y, 0).unwrap();
    assert!(model.converged);
    let l = linear(&model);
    let n = y.len() as f64;
    let mut g = [0.0; 3];
    for (row, &yi) in x2.rows().zip(&y) {
        let r = f64::from(u8::from(yi)) - 1.0 / (1.0 + (-l.linear_predictor(row)).exp());
        g[0] += r / n;
        g[1] += r * row[0] / n;
        g[2] += r * row[1] / n;
    }
    assert!(g.iter().all(|v| v.abs() < 1e-8));
}

#[test]
fn logistic_flags_separation_and_rank_deficiency() {
    let x = Matrix::unnamed(1, &(0..10).map(|i| vec![i as f64]).collect::<Vec<_>>()).unwrap();
    let y: Vec<bool> = (0..10).map(|i| i >= 5).collect();
    let sep = fit(&ClassifierSpec::new(Family::Logistic), &x, &y, 0).unwrap();
    assert!(!sep.converged);
    assert!(sep.notes.iter().any(|n| n.contains("separation")));

    // more columns than rows, with exact collinearity
    let base = [[1.0, 2.0, 3.0], [2.0, 1.0, 0.0], [0.0, 1.0, 1.0], [3.0, 0.0, 1.0]];
    let rows: Vec<Vec<f64>> = base.iter().map(|r| r.iter().chain(r.iter()).map(|v| v * 2.0).collect()).collect();
    let wide = Matrix::unnamed(6, &rows).unwrap();
    let m = fit(&ClassifierSpec::new(Family::Logistic), &wide, &labels(&[1, 0, 1, 0]), 0).unwrap();
    assert!(!m.converged);
    assert!(m.notes.iter().any(|n| n.contains("rank-deficient")));
}

#[test]
fn naive_bayes_closed_form() {
    // class 0: x = {0, 2}, mean 1, var 1; class 1: x = {3, 5}, mean 4, var 1.
    let x = Matrix::unnamed(1, &[vec![0.0], vec![2.0], vec![3.0], vec![5.0]]).unwrap();
    let y = labels(&[0, 0, 1, 1]);
    let model = fit(&ClassifierSpec::new(Family::NaiveBayes), &x, &y, 0).unwrap();
    let q = Matrix::unnamed(1, &[vec![2.5], vec![1.0]]).unwrap();
    let s = predict_scores(&model, &q).unwrap();
    // equal priors and variances: logit = ((v-1)^2 - (v-4)^2) / 2
    let expect = |v: f64| 1.0 / (1.0 + (-(((v - 1.0).powi(2) - (v - 4.0).powi(2)) / 2.0)).exp());
    assert!((s[0] - expect(2.5)).abs() < 1e-12);
    assert!((s[1] - expect(1.0)).abs() < 1e-12);
}

#[test]
fn naive_bayes_constant_feature_and_affine_invariance() {
    let (x, y) = noisy(100, 12);
    let model = fit(&ClassifierSpec::new(Family::NaiveBayes), &x, &y, 0).unwrap();
    let s = predict_scores(&model, &x).unwrap();
    assert!(s.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));

    let xt = x.map_values(|j, v| if j == 2 { v } else { 2.5 * v - 7.0 });
    let mt = fit(&ClassifierSpec::new(Family::NaiveBayes), &xt, &y, 0).unwrap();
    let st = predict_scores(&mt, &xt).unwrap();
    for (a, b) in s.iter().zip(&st) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn naive_bayes_score_monotone_in_separating_feature() {
    let x = Matrix::unnamed(1, &[vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0], vec![5.0]]).unwrap();
    let y = labels(&[0, 0, 1, 0, 1, 1]);
    let model = fit(&ClassifierSpec::new(Family::NaiveBayes), &x, &y, 0).unwrap();
    let q = Matrix::unnamed(1, &(0..30).map(|i| vec![1.0 + i as f64 * 0.1]).collect::<Vec<_>>()).unwrap();
    let s = predict_scores(&model, &q).unwrap();
    for w in s.windows(2) {
        assert!(w[1] >= w[0]);
    }
}

#[test]
fn knn_edge_cases() {
    let (x, y) = noisy(30, 13);
    let all = fit(&ClassifierSpec::new(Family::Knn).with_param("k", 30.0), &x, &y, 0).unwrap();
    let prev = y.iter().filter(|&&v| v).count() as f64 / 30.0;
    for v in predict_scores(&all, &x).unwrap() {
        assert!((v - prev).abs() < 1e-12);
    }
    let one = fit(&ClassifierSpec::new(Family::Knn).with_param("k", 1.0), &x, &y, 0).unwrap();
    let s = predict_scores(&one, &x).unwrap();
    for (v, &l) in s.iter().zip(&y) {
        assert_eq!(*v, f64::from(u8::from(l)));
    }
    assert!(fit(&ClassifierSpec::new(Family::Knn).with_param("k", 31.0), &x, &y, 0).is_err());
}

#[test]
fn knn_cross_validation_on_clusters() {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..40 {
        let c = if i % 2 == 0 { 0.0 } else { 10.0 };
        rows.push(vec![c + (i as f64) * 0.01, c - (i as f64) * 0.02]);
        y.push(i % 2 == 1);
    }
    let x = Matrix::unnamed(2, &rows).unwrap();
    let model = fit(&ClassifierSpec::new(Family::Knn), &x, &y, 5).unwrap();
    let FittedModel::Knn(k) = &model.fitted else { panic!() };
    assert_eq!(k.cv_auc[0].1, 1.0);
    // every candidate below n is considered
    assert_eq!(k.cv_auc.iter().map(|c| c.0).collect::<Vec<_>>(), vec![1, 5, 11, 21]);
    assert_eq!(model.spec.param("k"), Some(1.0));
}

#[test]
fn prediction_contract() {
    let (x, y) = noisy(60, 14);
    for family in Family::IMPLEMENTED {
        let mut spec = ClassifierSpec::new(family);
        if family == Family::RandomForest {
            spec.set_param("n_trees", 10.0);
        }
        let model = fit(&spec, &x, &y, 0).unwrap();
        let s = predict_scores(&model, &x).unwrap();
        assert!(s.iter().all(|v| (0.0..=1.0).contains(v)), "{family}");
        let empty = Matrix::new(x.names().to_vec(), 0, vec![]).unwrap();
        assert!(predict_scores(&model, &empty).unwrap().is_empty());
        let mut names = x.names().to_vec();
        names.swap(0, 1);
        let permuted = x.clone().with_names(names).unwrap();
        assert!(matches!(predict_scores(&model, &permuted), Err(Error::Schema(_))));
    }
}

#[test]
fn reserved_families_are_not_implemented() {
    let (x, y) = noisy(10, 15);
    for f in [Family::Svm, Family::NeuralNet] {
        assert!(matches!(fit(&ClassifierSpec::new(f), &x, &y, 0), Err(Error::NotImplemented(_))));
    }
}

#[test]
fn spec_validation() {
    let (x, y) = noisy(10, 16);
    let bad = ClassifierSpec::new(Family::RandomForest).with_param("mtry", 4.0);
    assert!(matches!(fit(&bad, &x, &y, 0), Err(Error::Validation(_))));
    let unknown = ClassifierSpec::new(Family::Logistic).with_param("lambda", 1.0);
    assert!(fit(&unknown, &x, &y, 0).is_err());
    let single = vec![true; 10];
    assert!(matches!(fit(&ClassifierSpec::new(Family::Logistic), &x, &single, 0), Err(Error::InvalidInput(_))));
    let spec = ClassifierSpec::parse(Family::RandomForest, "n_trees=5;mtry=2", Sampling::Down).unwrap();
    assert_eq!(spec.param("mtry"), Some(2.0));
    assert_eq!(ClassifierSpec::parse(Family::RandomForest, &spec.params_string(), Sampling::Down).unwrap(), spec);
}

#[test]
fn model_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = noisy(40, 17);
    let spec = ClassifierSpec::new(Family::RandomForest).with_param("n_trees", 5.0);
    let model = fit(&spec, &x, &y, 0).unwrap();
    let path = dir.path().join("m.json");
    save_model(&path, &model).unwrap();
    let loaded = load_model(&path).unwrap();
    assert_eq!(predict_scores(&loaded, &x).unwrap(), predict_scores(&model, &x).unwrap());

    let text = std::fs::read_to_string(&path).unwrap().replace("\"format_version\":1", "\"format_version\":99");
    std::fs::write(&path, text).unwrap();
    assert!(matches!(load_model(&path), Err(Error::Parse(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scores_stay_in_unit_interval(seed in 0u64..1000, family in 0usize..5) {
        let (x, y) = noisy(30, seed);
        prop_assume!(y.iter().any(|&v| v) && y.iter().any(|&v| !v));
        let mut spec = ClassifierSpec::new(Family::IMPLEMENTED[family]);
        if spec.family == Family::RandomForest {
            spec.set_param("n_trees", 5.0);
        }
        let model = fit(&spec, &x, &y, seed).unwrap();
        for v in predict_scores(&model, &x).unwrap() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}

