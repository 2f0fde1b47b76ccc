mod support;

use wfid::eval::{
    confidence_interval_99, cross_validate, emit_report, format_fixed, format_scientific, measure_model_memory,
    measure_throughput, nested_cv, pca, pca_project, render_records, repeated_holdout, write_projection,
    MetricSummary, RECORDS_FILE, TABLE_FILE,
};
use wfid::simgen::gen_nbiot_dataset;
use wfid::{
    fit, Algorithm, Error, HyperValue, HyperparameterSpace, Hyperparameters, LabeledDataset, NbIotScenario,
    SearchBudget, TabularFingerprint,
};

fn quick_budget() -> SearchBudget {
    SearchBudget {
        samples: 3,
        inner_folds: 3,
        outer_folds: 4,
        repeats: 9,
        benchmark: false,
        benchmark_repetitions: 1,
    }
}

fn small_nbiot() -> LabeledDataset {
    let scenario = NbIotScenario {
        packets_per_device: 60,
        ..NbIotScenario::default()
    };
    gen_nbiot_dataset(&scenario, 5).unwrap()
}

#[test]
fn nested_cv_is_deterministic_and_leak_free() {
    let ds = small_nbiot();
    let space = HyperparameterSpace::default_for(Algorithm::Dt);
    let a = nested_cv(Algorithm::Dt, &ds, &space, &quick_budget(), 3).unwrap();
    let b = nested_cv(Algorithm::Dt, &ds, &space, &quick_budget(), 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rounds.len(), 4);
    assert!(a.leakage().is_empty());
    let mut scored: Vec<usize> = a.rounds.iter().flat_map(|r| r.test.clone()).collect();
    scored.sort_unstable();
    assert_eq!(scored, (0..ds.len()).collect::<Vec<_>>());
    for r in &a.rounds {
        assert!(!r.seen.is_empty());
        assert!((0.0..=100.0).contains(&r.accuracy));
    }
}

#[test]
fn single_configuration_reduces_to_cross_validation() {
    let ds = small_nbiot();
    let hp = support::hyper(&[("k", HyperValue::Int(7))]);
    let nested = nested_cv(Algorithm::Knn, &ds, &HyperparameterSpace::single(&hp), &quick_budget(), 8).unwrap();
    let plain = cross_validate(Algorithm::Knn, &ds, &hp, &quick_budget(), 8).unwrap();
    assert_eq!(nested, plain);
}

#[test]
fn repeated_holdout_counts_and_repeats() {
    let ds = small_nbiot();
    let space = HyperparameterSpace::default_for(Algorithm::Nb);
    let a = repeated_holdout(Algorithm::Nb, &ds, &space, &quick_budget(), 40).unwrap();
    assert_eq!(a.accuracy.n, 9);
    assert_eq!(a.accuracy.samples.len(), 9);
    let b = repeated_holdout(Algorithm::Nb, &ds, &space, &quick_budget(), 40).unwrap();
    let tests = |e: &wfid::EvalEntry| e.rounds.iter().map(|r| r.test.clone()).collect::<Vec<_>>();
    assert_eq!(tests(&a), tests(&b));
    assert!(a.leakage().is_empty());
}

#[test]
fn separable_holdout_has_zero_width() {
    let records = (0..60)
        .map(|i| {
            let d = i % 3;
            TabularFingerprint::new([d as f64 * 10.0, 1.0, 2.0, 3.0, 4.0], d).unwrap()
        })
        .collect();
    let ds = LabeledDataset::tabular(records, 3).unwrap();
    let space = HyperparameterSpace::default_for(Algorithm::Dt);
    let e = repeated_holdout(Algorithm::Dt, &ds, &space, &quick_budget(), 1).unwrap();
    assert_eq!(e.accuracy.samples, vec![100.0; 9]);
    assert_eq!(e.accuracy.ci99, 0.0);
}

#[test]
fn confidence_interval_examples() {
    assert_eq!(confidence_interval_99(&[5.0, 5.0, 5.0]).unwrap(), (5.0, 0.0));
    let (m, h) = confidence_interval_99(&[0.0, 2.0]).unwrap();
    assert_eq!(m, 1.0);
    assert!((h - 63.657).abs() < 5e-4, "{h}");
    assert!(confidence_interval_99(&[1.0]).is_err());

    // Ten scores with a ~0.27 standard deviation give a Table-I-sized width.
    let samples: Vec<f64> = (0..10).map(|i| 99.19 + 0.27 * ((i as f64) - 4.5) / 3.03).collect();
    let s = MetricSummary::from_samples(samples).unwrap();
    assert!((s.mean - 99.19).abs() < 1e-9);
    assert!(s.ci99 > 0.1 && s.ci99 < 0.5, "{}", s.ci99);
}

#[test]
fn throughput_and_memory_are_positive() {
    let ds = small_nbiot();
    let all: Vec<usize> = (0..ds.len()).collect();
    let model = fit(Algorithm::Dt, &ds, &all, &Hyperparameters::new(), 0).unwrap();
    let t = measure_throughput(&model, &ds, 3).unwrap();
    assert!(t.ips > 0.0);
    assert_eq!(t.runs.len(), 3);
    let m = measure_model_memory(&model, &ds).unwrap();
    assert!(m.artifact_bytes > 0);
}

#[test]
fn forest_outweighs_a_single_tree() {
    let ds = small_nbiot();
    let all: Vec<usize> = (0..ds.len()).collect();
    let depth = ("max_depth", HyperValue::Int(8));
    let dt = fit(Algorithm::Dt, &ds, &all, &support::hyper(&[depth.clone()]), 0).unwrap();
    let rf = fit(Algorithm::Rf, &ds, &all, &support::hyper(&[depth, ("n_trees", HyperValue::Int(10))]), 0).unwrap();
    let dm = measure_model_memory(&dt, &ds).unwrap();
    let rm = measure_model_memory(&rf, &ds).unwrap();
    assert!(rm.artifact_mb() >= dm.artifact_mb());
}

fn axis_dataset() -> LabeledDataset {
    let records = (0..30)
        .map(|i| {
            TabularFingerprint::new([i as f64 - 10.0, 7.0, 3.0, 1.0, 1.0], i % 2).unwrap()
        })
        .collect();
    LabeledDataset::tabular(records, 2).unwrap()
}

#[test]
fn pca_examples() {
    let ds = axis_dataset();
    let p = pca(&ds, 2).unwrap();
    assert!((p.components[0][0].abs() - 1.0).abs() < 1e-9);
    assert!(p.variances[1].abs() < 1e-9);
    let dot: f64 = p.components[0].iter().zip(&p.components[1]).map(|(a, b)| a * b).sum();
    assert!(dot.abs() < 1e-9);
    for c in 0..2 {
        let mean = p.coordinates.iter().map(|r| r[c]).sum::<f64>() / p.coordinates.len() as f64;
        assert!(mean.abs() < 1e-9);
    }

    let ds = support::random_tabular(80, 3, 12);
    let full = pca(&ds, 5).unwrap();
    for i in 0..ds.len() {
        let x = ds.features(i);
        for j in 0..5 {
            let back = full.mean[j] + (0..5).map(|c| full.coordinates[i][c] * full.components[c][j]).sum::<f64>();
            assert!((back - x[j]).abs() < 1e-6 * x[j].abs().max(1.0));
        }
    }
    for comp in &full.components {
        let top = comp.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        assert!(top > 0.0);
    }

    assert!(pca_project(&ds, 4).is_err());
    let mut out = Vec::new();
    write_projection(&pca_project(&ds, 3).unwrap(), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("device_id,c1,c2,c3\n"));
    assert_eq!(text.lines().count(), ds.len() + 1);
}

#[test]
fn pca_needs_enough_varying_attributes() {
    let records = (0..10)
        .map(|i| TabularFingerprint::new([i as f64, 1.0, 1.0, 1.0, 1.0], i % 2).unwrap())
        .collect();
    let ds = LabeledDataset::tabular(records, 2).unwrap();
    assert!(matches!(pca_project(&ds, 2), Err(Error::NoVariance)));
}

#[test]
fn reports_render_table_formatting() {
    assert_eq!(format_fixed(99.19, 0.27), "99.19 ± 0.27");
    assert_eq!(format_scientific(1.05e6, 3.2e4), "1.05e6 ± 3.20e4");

    let ds = small_nbiot();
    let budget = SearchBudget {
        benchmark: true,
        ..quick_budget()
    };
    let space = HyperparameterSpace::default_for(Algorithm::Dt);
    let entry = nested_cv(Algorithm::Dt, &ds, &space, &budget, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (table, records) = emit_report(std::slice::from_ref(&entry), dir.path()).unwrap();
    assert_eq!(table.file_name().unwrap(), TABLE_FILE);
    assert_eq!(records.file_name().unwrap(), RECORDS_FILE);
    let text = std::fs::read_to_string(&table).unwrap();
    for column in ["Model", "Accuracy (%)", "F-measure (%)", "Throughput (IPS)", "Memory (MB)"] {
        assert!(text.contains(column), "{column}");
    }
    assert!(text.contains(&format_fixed(entry.accuracy.mean, entry.accuracy.ci99)));
    assert!(text.contains('e'));

    let jsonl = std::fs::read_to_string(&records).unwrap();
    assert_eq!(jsonl, render_records(std::slice::from_ref(&entry)).unwrap());
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let deterministic = v["deterministic"].as_bool().unwrap();
        let metric = v["metric"].as_str().unwrap();
        assert_eq!(deterministic, metric == "accuracy" || metric == "f_measure", "{metric}");
    }
    assert!(emit_report(&[], dir.path()).is_err());
}
