use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use cotest::cotesting::{run_cotesting, CoTestConfig, OutputStrategy, QueryStrategy, Schedule};
use cotest::harness::{
    generate_synthetic_classification, generate_synthetic_wrapper, two_tailed_p, Ambiguity, ClassificationSpec,
    WrapperSpec,
};
use cotest::learners::{BaseLearnerSpec, Sample, TrainingData};
use cotest::wrapper::{learn_rule, Direction, Token};
use cotest::{split_initial, FeatureVector, LabelId, Labeled, SimulatedOracle};

fn naive_bayes(c: &mut Criterion) {
    let d = generate_synthetic_classification(&ClassificationSpec::new(1000, 1)).unwrap();
    let vocab = d.view_spec.views()[0].features.clone();
    let samples: Vec<Sample<'_>> =
        d.examples.iter().map(|e| Sample { x: &e.views[0], y: e.label.unwrap() }).collect();
    c.bench_function("nb_train_1000", |b| {
        b.iter(|| {
            let data = TrainingData::new(samples.clone(), 2, &vocab);
            black_box(BaseLearnerSpec::naive_bayes().train(&data).unwrap())
        })
    });
}

fn cotesting_run(c: &mut Criterion) {
    let d = generate_synthetic_classification(&ClassificationSpec::new(300, 2)).unwrap();
    let all: Vec<Labeled<&[FeatureVector], LabelId>> = d
        .examples
        .iter()
        .enumerate()
        .map(|(i, e)| Labeled { id: i, desc: e.views.as_slice(), label: e.label.unwrap() })
        .collect();
    let cfg = CoTestConfig {
        learners: vec![BaseLearnerSpec::naive_bayes()],
        query: QueryStrategy::Aggressive,
        output: OutputStrategy::WeightedVote,
    };
    c.bench_function("aggressive_cotesting_300x20", |b| {
        b.iter(|| {
            let (l0, u0) = split_initial(&all, 6, 0).unwrap();
            let mut oracle = SimulatedOracle::from_labeled(&all);
            black_box(run_cotesting(&d.view_spec, 2, &cfg, l0, u0, &mut oracle, Schedule::queries(20), 0).unwrap())
        })
    });
}

fn rule_learning(c: &mut Criterion) {
    let spec = WrapperSpec::new(Ambiguity::PrefixVariant, 100, 3);
    let task = generate_synthetic_wrapper(&spec).unwrap().remove(0);
    let train: Vec<(&[Token], usize)> =
        task.docs[..10].iter().map(|d| (d.doc.tokens.as_slice(), d.span.start)).collect();
    for dir in [Direction::Forward, Direction::Backward] {
        c.bench_function(&format!("learn_rule_{dir:?}_10docs").to_lowercase(), |b| {
            b.iter(|| black_box(learn_rule(&train, dir).unwrap()))
        });
    }
}

fn t_distribution(c: &mut Criterion) {
    c.bench_function("two_tailed_p_df19", |b| b.iter(|| black_box(two_tailed_p(black_box(2.093), 19.0))));
}

criterion_group!(benches, naive_bayes, cotesting_run, rule_learning, t_distribution);
criterion_main!(benches);
