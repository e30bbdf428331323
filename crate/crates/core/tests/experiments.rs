use frame_extend::domain::{rasterize, DomainSpec, Shape};
use frame_extend::experiments::{
    convergence_cell, default_suite, plunge_measure, run_convergence, run_experiment,
    run_plunge_study, run_robustness, run_spectrum, run_timing, run_topology, unit_disk,
};
use frame_extend::fourier::FrameOperator;
use frame_extend::solver::sample_on_mask;
use frame_extend::{
    solve_algorithm1, ExperimentConfig, ExperimentKind, GridSpec, SolverConfig, TestFunction,
};

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn convergence(shape: Shape, f: TestFunction, n_lambda: Vec<usize>) -> Vec<f64> {
    let cfg = ExperimentConfig {
        domains: vec![shape],
        functions: vec![f],
        n_lambda,
        n_samples: 1000,
        ..ExperimentConfig::new(ExperimentKind::Convergence)
    };
    run_convergence(&cfg).unwrap().floats("residual")
}

#[test]
fn smooth_function_residual_decreases_on_the_disk() {
    let r = convergence(Shape::Disk, TestFunction::ExpXy, vec![5, 9, 13, 17, 21]);
    assert!(strictly_decreasing(&r), "{r:?}");
}

#[test]
fn kinked_function_converges_only_algebraically() {
    let r = convergence(Shape::Disk, TestFunction::AbsXy, vec![5, 9, 13, 17, 21]);
    assert!(r[4] > 1e-10, "{r:?}");
}

#[test]
#[ignore = "needs n_lambda near 50; minutes of runtime"]
fn oscillatory_function_drops_once_resolved() {
    let cfg = ExperimentConfig {
        domains: vec![Shape::Disk],
        functions: vec![TestFunction::Oscillatory],
        n_lambda: vec![13, 21, 29, 53],
        half_width: 1.2,
        n_samples: 1000,
        ..ExperimentConfig::new(ExperimentKind::Convergence)
    };
    let r = run_convergence(&cfg).unwrap().floats("residual");
    let plateau = r[..3].iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(r[3] <= 1e-4 * plateau, "{r:?}");
}

#[test]
fn residual_column_matches_solver_report() {
    let cfg = ExperimentConfig {
        n_lambda: vec![9],
        n_samples: 100,
        ..ExperimentConfig::new(ExperimentKind::Convergence)
    };
    let cell = convergence_cell(&cfg, &Shape::Disk.into(), TestFunction::Pole, 9, 2.0).unwrap();
    let spec = GridSpec::square(36, 9).unwrap();
    let op = FrameOperator::new(rasterize(&Shape::Disk.into(), &spec).unwrap());
    let b = sample_on_mask(&op, |x| TestFunction::Pole.eval(x, 9));
    let (_, report) = solve_algorithm1(&op, &b, &SolverConfig::default()).unwrap();
    assert_eq!(cell.residual, report.residual_norm);
}

#[test]
fn full_box_has_no_plunge_region() {
    let spec = GridSpec::square(9, 9).unwrap();
    let op = FrameOperator::new(rasterize(&DomainSpec::predicate(|_| true), &spec).unwrap());
    let m = plunge_measure(&op, 1e-3).unwrap();
    assert_eq!(m.eta, 0);
    assert_eq!(m.ratio, 0.0);
}

#[test]
fn plunge_ratios_are_bounded_and_comparable() {
    let cfg = ExperimentConfig {
        domains: vec![Shape::Disk, Shape::Square, Shape::Diamond],
        n_lambda: vec![9, 13, 17, 21],
        eps: 1e-3,
        ..ExperimentConfig::new(ExperimentKind::Plunge)
    };
    let table = run_plunge_study(&cfg).unwrap();
    let ratio = table.floats("ratio");
    let disk = &ratio[0..4];
    let hi = disk.iter().cloned().fold(0.0, f64::max);
    let lo = disk.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(lo > 0.0 && hi / lo < 3.0, "{disk:?}");
    for i in 0..4 {
        let (square, diamond) = (ratio[4 + i], ratio[8 + i]);
        assert!(square.is_finite() && diamond.is_finite());
        assert!(square.max(diamond) / square.min(diamond) < 5.0);
    }
}

#[test]
fn robustness_errors_decrease_for_resolvable_widths() {
    let cfg = ExperimentConfig {
        n_lambda: vec![9, 13, 17, 21],
        half_widths: vec![1.2, 2.0],
        n_samples: 1000,
        ..ExperimentConfig::new(ExperimentKind::Robustness)
    };
    let err = run_robustness(&cfg).unwrap().floats("max_error");
    assert!(strictly_decreasing(&err[0..4]), "T=1.2: {:?}", &err[0..4]);
    assert!(strictly_decreasing(&err[4..8]), "T=2: {:?}", &err[4..8]);
}

#[test]
fn robustness_uses_the_unit_disk() {
    assert!(unit_disk().contains(&[1.0, 0.0]));
    assert!(!unit_disk().contains(&[0.8, 0.8]));
}

#[test]
fn timing_outputs_agree_except_for_times() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Timing,
        n_lambda: vec![5, 7, 9],
        repeats: 1,
        ..Default::default()
    };
    let a = run_timing(&cfg).unwrap();
    let b = run_timing(&cfg).unwrap();
    assert_eq!(a.to_csv_without_timing(), b.to_csv_without_timing());
    assert!(!a.to_csv_without_timing().contains("t_algorithm1"));
    assert!(a.to_csv().contains("slope_algorithm1="));
}

#[test]
fn csv_header_carries_hash_and_seed() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Spectrum,
        n_lambda: vec![5],
        seed: 17,
        ..Default::default()
    };
    let csv = run_spectrum(&cfg).unwrap().to_csv();
    let first = csv.lines().next().unwrap();
    assert_eq!(
        first,
        format!("# frame-extend v1, config_hash={}, seed=17", cfg.hash())
    );
    assert!(csv
        .lines()
        .any(|l| l.starts_with('#') && l.contains("eta=")));
    let value = csv.lines().find(|l| l.starts_with("disk,")).unwrap();
    let sigma = value.rsplit(',').next().unwrap();
    assert_eq!(
        sigma
            .split('e')
            .next()
            .unwrap()
            .replace(['.', '-'], "")
            .len(),
        17
    );
}

#[test]
fn topology_study_reports_ring_hole() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Topology,
        domains: vec![Shape::Ring],
        n_r: vec![64, 128, 256],
        ..Default::default()
    };
    let table = run_topology(&cfg).unwrap();
    assert_eq!(table.floats("components"), vec![1.0; 3]);
    assert_eq!(table.floats("holes"), vec![1.0; 3]);
    assert!(table.footer[0].contains("box_dimension="));
}

#[test]
fn configs_round_trip_through_json() {
    for cfg in default_suite(3) {
        let json = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }
    assert!(ExperimentConfig::from_json(r#"{"kind":"plunge","n_lambda":[9,5]}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"kind":"plunge","bogus":1}"#).is_err());
}

#[test]
fn small_runs_are_reproducible() {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Convergence,
        domains: vec![Shape::Star, Shape::Ring],
        functions: vec![TestFunction::ExpXy, TestFunction::Pole],
        n_lambda: vec![5, 9],
        n_samples: 200,
        seed: 42,
        ..Default::default()
    };
    let a = run_experiment(&cfg).unwrap().to_csv();
    let b = run_experiment(&cfg).unwrap().to_csv();
    assert_eq!(a, b);
}
