use ssmrpe::embed::{Method, SsmrpeParams};
use ssmrpe::eval::{run_experiment, sweep, synthesize, MethodConfig, SplitMode, SplitSpec, SynthConfig};
use ssmrpe::wmf::FilterConfig;

fn small_scene() -> (ssmrpe::HyperCube, ssmrpe::LabelRaster) {
    let cfg = SynthConfig {
        size: 16,
        bands: 8,
        ..SynthConfig::default()
    };
    synthesize(&cfg, 3).unwrap()
}

fn method(m: Method, w: usize, k: usize, d: usize) -> MethodConfig {
    MethodConfig {
        method: m,
        params: SsmrpeParams::new(w, k, d).unwrap(),
    }
}

#[test]
fn sweep_cells_match_independent_runs() {
    let (cube, labels) = small_scene();
    let spec = SplitSpec {
        mode: SplitMode::Count(6),
        seed: 11,
        repeats: 3,
    };
    let base = method(Method::Ssmrpe, 3, 4, 3);
    let cells = sweep(&cube, &labels, &[3, 5], &[4, 6], &base, &spec).unwrap();
    assert_eq!(cells.len(), 4);
    for cell in &cells {
        let mut cfg = base;
        cfg.params.filter = FilterConfig::with_window(cell.w).unwrap();
        cfg.params.k = cell.k;
        let r = run_experiment(&cube, &labels, &cfg, &spec).unwrap().report;
        assert_eq!((r.oa, r.aa, r.kappa), (cell.oa, cell.aa, cell.kappa), "w={} k={}", cell.w, cell.k);
    }
    assert_eq!(
        cells.iter().map(|c| (c.w, c.k)).collect::<Vec<_>>(),
        vec![(3, 4), (3, 6), (5, 4), (5, 6)]
    );
}

#[test]
fn full_rank_pca_matches_raw() {
    let (cube, labels) = small_scene();
    let spec = SplitSpec {
        mode: SplitMode::Count(5),
        seed: 2,
        repeats: 4,
    };
    let raw = run_experiment(&cube, &labels, &method(Method::Raw, 1, 1, 8), &spec).unwrap();
    let pca = run_experiment(&cube, &labels, &method(Method::Pca, 1, 1, 8), &spec).unwrap();
    for (a, b) in raw.trials.iter().zip(&pca.trials) {
        assert_eq!(a.scores.oa, b.scores.oa);
    }
    assert_eq!(raw.report.oa, pca.report.oa);
}

#[test]
fn single_repeat_has_zero_spread() {
    let (cube, labels) = small_scene();
    let spec = SplitSpec {
        mode: SplitMode::fraction(0.1),
        seed: 0,
        repeats: 1,
    };
    let r = run_experiment(&cube, &labels, &method(Method::Npe, 1, 5, 4), &spec).unwrap().report;
    assert_eq!((r.oa.std, r.aa.std, r.kappa.std), (0.0, 0.0, 0.0));
    for row in &r.classes {
        assert_eq!(row.train, 7);
        assert_eq!(row.train + row.test, 64);
    }
}

#[test]
fn trial_scores_are_consistent_with_predictions() {
    let (cube, labels) = small_scene();
    let spec = SplitSpec {
        mode: SplitMode::Count(4),
        seed: 5,
        repeats: 2,
    };
    let exp = run_experiment(&cube, &labels, &method(Method::Ssmrpe, 5, 3, 2), &spec).unwrap();
    for t in &exp.trials {
        let correct = t
            .split
            .test
            .iter()
            .zip(&t.predictions)
            .filter(|(&i, &p)| labels.get(i) == p)
            .count();
        assert_eq!(t.scores.oa, 100.0 * correct as f64 / t.split.test.len() as f64);
        assert!(t.split.train.iter().all(|i| !t.split.test.contains(i)));
    }
}

#[test]
fn oversized_dimension_is_a_config_error() {
    let (cube, labels) = small_scene();
    let spec = SplitSpec {
        mode: SplitMode::Count(4),
        seed: 0,
        repeats: 1,
    };
    for m in [Method::Pca, Method::Npe, Method::Ssmrpe] {
        let err = run_experiment(&cube, &labels, &method(m, 3, 3, 9), &spec).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{m:?}: {err}");
    }
}
