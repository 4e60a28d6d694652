mod support;

use support::formula_oracle::check;

#[test]
fn engine_matches_reference_evaluator() {
    let stats = check(0x5EED_F0F0, 500).unwrap_or_else(|e| panic!("{e}"));
    // Guard against a degenerate generator.
    assert!(stats.formula_cells > 1_500, "{stats:?}");
    assert!(stats.cycle_cells > 20, "{stats:?}");
    assert!(stats.error_cells < stats.formula_cells * 3 / 4, "{stats:?}");
}

#[test]
fn other_seeds_agree() {
    for seed in 1..=4 {
        check(seed, 200).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}
