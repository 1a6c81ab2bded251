use std::path::Path;

use cotest::harness::*;

fn write_classification(dir: &Path, size: usize) {
    let mut spec = ClassificationSpec::new(size, 3);
    spec.noise_rate = 0.05;
    let d = generate_synthetic_classification(&spec).unwrap();
    let mut data = std::fs::File::create(dir.join("data.txt")).unwrap();
    let mut views = std::fs::File::create(dir.join("views.txt")).unwrap();
    d.write(&mut data, &mut views).unwrap();
}

fn load(dir: &Path, json: &str) -> ExperimentConfig {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    ExperimentConfig::load(&path).unwrap()
}

const BATCHED: &str = r#"{
    "task": {"kind": "classification", "data": "data.txt", "views": "views.txt"},
    "algorithms": [
        {"name": "conservative", "kind": "cotesting", "query": "conservative", "output": "majority_vote"},
        {"name": "uncertainty", "kind": "baseline", "sampler": "uncertainty"},
        {"name": "qbb", "kind": "baseline", "sampler": "query_by_bagging", "committee": 3}
    ],
    "folds": 4, "n_initial": 5, "episodes": 6, "batch": 3, "seed": 1, "output": "out",
    "svg": true, "compare": [["conservative", "uncertainty"], ["conservative", "qbb"]]
}"#;

#[test]
fn curves_follow_the_schedule() {
    let dir = tempfile::tempdir().unwrap();
    write_classification(dir.path(), 160);
    let c = load(dir.path(), BATCHED);
    let out = run_experiment(&c).unwrap();
    assert_eq!(out.records.len(), 3 * 4);
    for r in &out.records {
        let pts = &r.curve.points;
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0].0, 5 + 3);
        assert_eq!(pts.last().unwrap().0, 5 + 6 * 3);
        assert!(!r.exhausted);
    }
    // Records are ordered by algorithm, then fold.
    let order: Vec<(String, usize)> = out.records.iter().map(|r| (r.curve.algorithm.clone(), r.curve.fold)).collect();
    assert_eq!(order[0], ("conservative".into(), 0));
    assert_eq!(order[4], ("uncertainty".into(), 0));
    assert_eq!(order[11], ("qbb".into(), 3));

    for f in [
        "curves.csv",
        "conservative.csv",
        "uncertainty.csv",
        "qbb.csv",
        "run.log",
        "curves.svg",
        "compare_conservative_vs_uncertainty.json",
        "summary.csv",
        "summary.txt",
    ] {
        assert!(c.output.join(f).exists(), "{f} missing");
    }
    let curves = read_curves(&c.output.join("curves.csv")).unwrap();
    assert_eq!(curves.len(), 12);
    let report: ComparisonReport =
        serde_json::from_str(&std::fs::read_to_string(c.output.join("compare_conservative_vs_qbb.json")).unwrap())
            .unwrap();
    assert_eq!(report.counts.total(), 3);
    let summary = std::fs::read_to_string(c.output.join("summary.csv")).unwrap();
    assert!(summary.starts_with("a,b,loss,tie,win\n"));
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn pool_exhaustion_is_logged() {
    let dir = tempfile::tempdir().unwrap();
    write_classification(dir.path(), 40);
    let c = load(
        dir.path(),
        r#"{
        "task": {"kind": "classification", "data": "data.txt", "views": "views.txt"},
        "algorithms": [{"name": "random", "kind": "baseline", "sampler": "random"}],
        "folds": 2, "n_initial": 4, "episodes": 30, "output": "out"
    }"#,
    );
    let out = run_experiment(&c).unwrap();
    for r in &out.records {
        assert!(r.exhausted);
        // 20 training examples: 4 initial plus 16 queries.
        assert_eq!(r.curve.points.len(), 16);
        assert_eq!(r.curve.points.last().unwrap().0, 20);
    }
    let log = std::fs::read_to_string(c.output.join("run.log")).unwrap();
    assert!(log.contains("random fold 0: pool exhausted after 16 of 30 episodes"), "{log}");
}

#[test]
fn wrapper_experiments_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = WrapperSpec::new(Ambiguity::PrefixVariant, 40, 2);
    spec.folds = 4;
    generate_synthetic_wrapper(&spec).unwrap()[0].write(&dir.path().join("task.tsv")).unwrap();
    let c = load(
        dir.path(),
        r#"{
        "task": {"kind": "wrapper", "task": "task.tsv"},
        "algorithms": [
            {"name": "naive", "kind": "wrapper", "sampler": "naive_cotesting"},
            {"name": "random", "kind": "wrapper", "sampler": "random"}
        ],
        "folds": 4, "n_initial": 2, "episodes": 5, "output": "out", "compare": [["naive", "random"]]
    }"#,
    );
    let out = run_experiment(&c).unwrap();
    assert_eq!(out.records.len(), 8);
    assert!(out.records.iter().all(|r| r.curve.points.len() == 5 && r.curve.points[0].0 == 3));
    assert_eq!(out.reports.len(), 1);
}

#[test]
fn mismatched_algorithm_and_task_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write_classification(dir.path(), 40);
    let path = dir.path().join("c.json");
    std::fs::write(
        &path,
        r#"{
        "task": {"kind": "classification", "data": "data.txt", "views": "views.txt"},
        "algorithms": [{"name": "w", "kind": "wrapper", "sampler": "random"}],
        "n_initial": 4, "episodes": 3, "output": "out"
    }"#,
    )
    .unwrap();
    let c = ExperimentConfig::load(&path).unwrap();
    assert!(run_experiment(&c).unwrap_err().is_config_error());
}

#[test]
fn runtime_errors_name_the_algorithm_and_fold() {
    let dir = tempfile::tempdir().unwrap();
    write_classification(dir.path(), 40);
    // Uncertainty sampling needs confidences, which the tree does not give.
    let c = load(
        dir.path(),
        r#"{
        "task": {"kind": "classification", "data": "data.txt", "views": "views.txt"},
        "algorithms": [{"name": "unc", "kind": "baseline", "sampler": "uncertainty",
                        "learner": {"kind": "decision_tree"}}],
        "folds": 2, "n_initial": 4, "episodes": 3, "output": "out"
    }"#,
    );
    let task = LoadedTask::load(&c.task).unwrap();
    let err = run_loaded(&c, &task, Some(0)).unwrap_err();
    assert!(!err.is_config_error());
    assert!(err.to_string().contains("algorithm `unc`, fold 0"), "{err}");
}

#[test]
fn thread_caps_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    write_classification(dir.path(), 80);
    let c = load(dir.path(), &BATCHED.replace("\"svg\": true", "\"svg\": false"));
    let task = LoadedTask::load(&c.task).unwrap();
    let csv = |t| {
        let curves: Vec<LearningCurve> = run_loaded(&c, &task, t).unwrap().into_iter().map(|r| r.curve).collect();
        curves_to_csv(&curves)
    };
    let serial = csv(Some(0));
    assert_eq!(serial, csv(Some(3)));
    assert_eq!(serial, csv(None));
}
