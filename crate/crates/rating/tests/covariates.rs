mod support;

use approx::assert_abs_diff_eq;

use sheetarena_rating::{
    compare_fits, fit_bt_with_features, segment_fit, significance_table, simulate, CategoryFilter, CovariateMode,
    EloConfig, FeatureTable, FitConfig, FitError, PlantedFeature, SimConfig, FINANCE, MIN_SEGMENT_VOTES,
};
use support::scenarios;

#[test]
fn planted_effect_within_three_standard_errors() {
    let p = scenarios::covariate_recovery(1.0, 10_000, 77);
    assert!((p.estimate - 1.0).abs() <= 3.0 * p.std_error, "{} ± {}", p.estimate, p.std_error);
    assert!(p.p_value < 1e-6);
}

#[test]
fn null_effect_rarely_significant() {
    assert!(scenarios::null_significance_count(0..20) <= 2);
}

#[test]
fn zeroed_features_nest_the_vanilla_fit() {
    let n = scenarios::nesting(4);
    assert!(n.max_theta_diff <= 1e-6, "{}", n.max_theta_diff);
    assert_abs_diff_eq!(n.ll_zeroed, n.ll_vanilla, epsilon = 1e-9);
    assert!(n.ll_features >= n.ll_vanilla);
}

#[test]
fn negating_a_feature_negates_its_coefficient() {
    let out = simulate(&SimConfig {
        n_models: 6,
        n_votes: 2000,
        seed: 8,
        features: vec![PlantedFeature::noise("a", 0.7), PlantedFeature::noise("b", 0.0)],
        ..SimConfig::default()
    })
    .unwrap();
    let mut flipped = FeatureTable::new(out.features.names().to_vec());
    for (id, row) in out.features.rows() {
        flipped.insert(id, vec![-row[0], row[1]]).unwrap();
    }
    let cfg = FitConfig::default();
    let f = fit_bt_with_features(&out.votes, &out.features, &cfg).unwrap();
    let g = fit_bt_with_features(&out.votes, &flipped, &cfg).unwrap();
    assert_abs_diff_eq!(f.coefficient("a").unwrap().estimate, -g.coefficient("a").unwrap().estimate, epsilon = 1e-8);
    for m in &f.models {
        assert_abs_diff_eq!(f.theta[m], g.theta[m], epsilon = 1e-8);
    }
}

#[test]
fn constant_and_duplicate_columns() {
    let out = simulate(&SimConfig {
        n_models: 4,
        n_votes: 500,
        seed: 1,
        features: vec![PlantedFeature::noise("x", 0.5)],
        ..SimConfig::default()
    })
    .unwrap();
    let mut table = FeatureTable::new(["x", "constant", "twice_x"]);
    for (id, row) in out.features.rows() {
        table.insert(id, vec![row[0], 3.0, 2.0 * row[0]]).unwrap();
    }
    let err = fit_bt_with_features(&out.votes, &table, &FitConfig::default()).unwrap_err();
    assert_eq!(err, FitError::SingularInformation(vec!["twice_x".into()]));

    let mut table = FeatureTable::new(["x", "constant"]);
    for (id, row) in out.features.rows() {
        table.insert(id, vec![row[0], 3.0]).unwrap();
    }
    let fit = fit_bt_with_features(&out.votes, &table, &FitConfig::default()).unwrap();
    assert_eq!(fit.dropped_features, ["constant"]);
    assert_eq!(fit.coefficients.as_ref().unwrap().len(), 1);

    let empty = FeatureTable::new(["x"]);
    assert!(matches!(
        fit_bt_with_features(&out.votes, &empty, &FitConfig::default()),
        Err(FitError::MissingFeatures(_))
    ));
}

#[test]
fn model_mean_mode_is_collinear_with_strengths() {
    let out = simulate(&SimConfig {
        n_models: 5,
        n_votes: 800,
        seed: 3,
        features: vec![PlantedFeature::noise("x", 0.5)],
        ..SimConfig::default()
    })
    .unwrap();
    let cfg = FitConfig {
        covariate_mode: CovariateMode::ModelMean,
        ..FitConfig::default()
    };
    assert_eq!(
        fit_bt_with_features(&out.votes, &out.features, &cfg),
        Err(FitError::SingularInformation(vec!["x".into()]))
    );
}

#[test]
fn adjustment_compresses_the_board() {
    let c = scenarios::compression(12);
    assert!(c.adjusted_spread < c.baseline_spread, "{} vs {}", c.adjusted_spread, c.baseline_spread);
}

#[test]
fn domain_effect_only_in_its_segment() {
    let out = simulate(&SimConfig {
        n_models: 6,
        n_votes: 24_000,
        seed: 17,
        features: vec![PlantedFeature {
            category: Some("Professional Finance".into()),
            ..PlantedFeature::noise("finance_color_convention", 1.0)
        }],
        ..SimConfig::default()
    })
    .unwrap();
    let cfg = FitConfig::default();
    let finance = segment_fit(
        &out.votes,
        &CategoryFilter::parse(FINANCE),
        Some(&out.features),
        &cfg,
        MIN_SEGMENT_VOTES,
    )
    .unwrap();
    let creative = segment_fit(
        &out.votes,
        &CategoryFilter::parse("Creative & Generative"),
        Some(&out.features),
        &cfg,
        MIN_SEGMENT_VOTES,
    )
    .unwrap();
    let f = &significance_table(&finance, 0.05)[0];
    let c = &significance_table(&creative, 0.05)[0];
    assert!(f.significant && f.coefficient > 0.0, "{f:?}");
    assert!(c.coefficient.abs() < 3.0 * c.std_error, "{c:?}");
}

#[test]
fn comparison_reports_movement() {
    let out = simulate(&SimConfig::compression(8, 4000, 5)).unwrap();
    let cfg = FitConfig::default();
    let base = sheetarena_rating::fit_bt(&out.votes, &cfg).unwrap();
    let adj = fit_bt_with_features(&out.votes, &out.features, &cfg).unwrap();
    let shifts = compare_fits(&base, &adj, &EloConfig::default()).unwrap();
    assert_eq!(shifts.len(), 8);
    assert_eq!(shifts.iter().map(|s| s.delta_rank).sum::<i64>(), 0);
    for s in &shifts {
        assert_abs_diff_eq!(s.delta_elo, s.adjusted_elo - s.baseline_elo, epsilon = 1e-12);
    }
}
