use fdpnet_core::trex::{run_experiments, standardize};
use fdpnet_core::{
    analytical_fdp, calibrate, fdp_tpp, Analytical, CalibrationGrid, Deflation, OccurrenceTable, Seed, TrexConfig,
};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn design(n: usize, p: usize, values: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |(i, j)| values[(i * p + j) % values.len()] + (i * j) as f64 * 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_are_proportions(sel in proptest::collection::vec(0usize..40, 0..20),
                               truth in proptest::collection::btree_set(0usize..40, 0..10)) {
        let truth: Vec<usize> = truth.into_iter().collect();
        let (fdp, tpp) = fdp_tpp(&sel, &truth);
        prop_assert!((0.0..=1.0).contains(&fdp));
        prop_assert!((0.0..=1.0).contains(&tpp));
        let mut sorted = sel.clone();
        sorted.sort_unstable();
        prop_assert_eq!((fdp, tpp), fdp_tpp(&sorted, &truth));
    }

    #[test]
    fn standardized_columns_are_centered_unit_norm(values in proptest::collection::vec(-5.0f64..5.0, 37..80)) {
        let x = design(12, 5, &values);
        let y = Array1::from_iter((0..12).map(|i| values[i % values.len()] * 2.0 + i as f64));
        let data = standardize(x.view(), y.view()).unwrap();
        for col in data.x.columns() {
            prop_assert!(col.sum().abs() < 1e-9);
            prop_assert!((col.dot(&col) - 1.0).abs() < 1e-9);
        }
        prop_assert!(data.y.sum().abs() < 1e-9);
    }

    #[test]
    fn calibrated_selection_respects_alpha(seed in any::<u64>(), alpha in 0.05f64..0.5, linear in any::<bool>()) {
        let deflation = if linear { Deflation::Linear } else { Deflation::DummyRate };
        let cfg = TrexConfig { k: 8, l: Some(10), t_max: 5, deflation };
        let x = fdpnet_core::synth::sample_design(&fdpnet_core::DistributionSpec::standard_gaussian(), 20, 10, Seed(seed)).unwrap();
        let y = x.column(0).to_owned() * 3.0 + x.column(1);
        let runs = run_experiments(x.view(), y.view(), &cfg, Seed(seed ^ 1)).unwrap();
        let table = OccurrenceTable::build(&runs, 5, 10, 10, deflation).unwrap();
        let grid = CalibrationGrid::with_defaults(5, alpha).unwrap();
        for (t, v) in grid.points() {
            let e = analytical_fdp(&table, v, t);
            prop_assert!((0.0..=1.0).contains(&e));
        }
        let sel = calibrate(&table, &grid, &Analytical).unwrap();
        if sel.feasible {
            prop_assert!(sel.fdp_estimate.unwrap() <= alpha);
            prop_assert_eq!(&sel.selected, &table.selected(sel.v_star.unwrap(), sel.t_star.unwrap()));
        } else {
            prop_assert!(sel.selected.is_empty());
        }
    }
}
