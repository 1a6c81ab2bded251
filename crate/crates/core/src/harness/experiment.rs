//! Running configured experiments: every algorithm on every fold.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::baselines::run_baseline;
use crate::cotesting::{evaluate, run_cotesting, CoTestConfig, Snapshot};
use crate::data::{load_dataset, Dataset, FeatureVector, LabelId};
use crate::error::{Error, Result};
use crate::folds::{kfold, split_initial, stratified_kfold, Fold};
use crate::pool::{Labeled, SimulatedOracle};
use crate::rng::SeedStream;
use crate::wrapper::{evaluate_extractor, run_wrapper, Boundary, ItemSpan, RuleSearch, WrapperConfig, WrapperTask};

use super::config::{Algorithm, AlgorithmConfig, ExperimentConfig, TaskConfig};
use super::curves::{curves_to_csv, curves_to_svg, LearningCurve};
use super::stats::{paired_t_test, summary_csv, summary_text, summarize, ComparisonReport};

/// Environment variable capping concurrent runs; `0` runs serially.
pub const THREADS_ENV: &str = "COTEST_THREADS";

/// The loaded data an experiment runs on.
#[derive(Debug, Clone)]
pub enum LoadedTask {
    Classification(Dataset),
    Wrapper { task: WrapperTask, boundary: Boundary },
}

impl LoadedTask {
    pub fn load(config: &TaskConfig) -> Result<Self> {
        match config {
            TaskConfig::Classification { data, views } => Ok(LoadedTask::Classification(load_dataset(data, views)?)),
            TaskConfig::Wrapper { task, boundary } => Ok(LoadedTask::Wrapper {
                task: WrapperTask::load(task)?,
                boundary: *boundary,
            }),
        }
    }
}

/// Outcome of one `(algorithm, fold)` run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub curve: LearningCurve,
    /// Episodes whose queries were drawn at random.
    pub fallback_episodes: Vec<usize>,
    pub exhausted: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub reports: Vec<ComparisonReport>,
    pub files: Vec<PathBuf>,
}

impl ExperimentOutput {
    pub fn curves(&self) -> Vec<LearningCurve> {
        self.records.iter().map(|r| r.curve.clone()).collect()
    }
}

/// Reads `COTEST_THREADS`: `None` when unset.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
    }
}

/// Runs `f` over `jobs` with at most `threads` workers (`Some(0)` is
/// serial, `None` the default pool). Results keep job order.
pub fn run_jobs<J, T, F>(jobs: &[J], threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    J: Sync,
    T: Send,
    F: Fn(&J) -> Result<T> + Sync + Send,
{
    match threads {
        Some(0) => jobs.iter().map(&f).collect(),
        None => jobs.par_iter().map(&f).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(|| jobs.par_iter().map(&f).collect()),
    }
}

/// Cross-validation folds of the task.
pub fn task_folds(task: &LoadedTask, k: usize, seed: u64) -> Result<Vec<Fold>> {
    let seed = SeedStream::new(seed).child("folds").seed();
    match task {
        LoadedTask::Classification(d) => {
            let items: Vec<(usize, LabelId)> = d
                .labeled_indices()
                .into_iter()
                .map(|i| (i, d.examples[i].label.expect("labeled")))
                .collect();
            stratified_kfold(&items, k, seed)
        }
        LoadedTask::Wrapper { task, .. } => {
            let ids: Vec<usize> = (0..task.docs.len()).collect();
            kfold(&ids, k, seed)
        }
    }
}

/// Seed of the initial labeled set of `fold`, shared by all algorithms so
/// paired comparisons start from the same examples.
pub fn initial_seed(root: u64, fold: usize) -> u64 {
    SeedStream::new(root).child("initial").index(fold as u64).seed()
}

pub fn algorithm_seed(root: u64, name: &str, fold: usize) -> u64 {
    SeedStream::new(root)
        .child("algorithm")
        .child(name)
        .index(fold as u64)
        .seed()
}

/// Runs one algorithm on one fold and evaluates every snapshot after
/// episode 0.
pub fn run_fold(
    config: &ExperimentConfig,
    task: &LoadedTask,
    algorithm: &AlgorithmConfig,
    fold_id: usize,
    fold: &Fold,
) -> Result<RunRecord> {
    let l0_seed = initial_seed(config.seed, fold_id);
    let seed = algorithm_seed(config.seed, &algorithm.name, fold_id);
    let schedule = config.schedule();
    let (points, fallback_episodes, exhausted) = match (task, &algorithm.algorithm) {
        (LoadedTask::Classification(d), algo) => {
            let example = |i: usize| Labeled {
                id: i,
                desc: d.examples[i].views.as_slice(),
                label: d.examples[i].label.expect("folds hold labeled examples"),
            };
            let train: Vec<Labeled<&[FeatureVector], LabelId>> = fold.train.iter().map(|&i| example(i)).collect();
            let test: Vec<Labeled<&[FeatureVector], LabelId>> = fold.test.iter().map(|&i| example(i)).collect();
            let mut oracle = SimulatedOracle::from_labeled(&train);
            let (l0, u0) = split_initial(&train, config.n_initial, l0_seed)?;
            let (snapshots, fallback, exhausted): (Vec<Snapshot>, Vec<usize>, bool) = match algo {
                Algorithm::Cotesting { learners, query, output } => {
                    let cfg = CoTestConfig {
                        learners: learners.clone(),
                        query: *query,
                        output: *output,
                    };
                    let run = run_cotesting(&d.view_spec, d.n_classes(), &cfg, l0, u0, &mut oracle, schedule, seed)?;
                    (run.snapshots, run.fallback_episodes, run.exhausted)
                }
                Algorithm::Baseline { learner, sampler } => {
                    let run = run_baseline(*sampler, &d.view_spec, d.n_classes(), learner, l0, u0, &mut oracle, schedule, seed)?;
                    (run.snapshots, run.fallback_episodes, run.exhausted)
                }
                Algorithm::Wrapper { .. } => {
                    return Err(Error::Config(format!("`{}` needs a wrapper task", algorithm.name)))
                }
            };
            let mut points = Vec::with_capacity(snapshots.len());
            for s in snapshots.iter().skip(1) {
                points.push((s.labeled, evaluate(s.model.as_ref(), &test)?));
            }
            (points, fallback, exhausted)
        }
        (LoadedTask::Wrapper { task, boundary }, Algorithm::Wrapper { sampler }) => {
            let doc = |i: usize| Labeled {
                id: i,
                desc: &task.docs[i].doc,
                label: task.docs[i].span,
            };
            let train: Vec<Labeled<_, ItemSpan>> = fold.train.iter().map(|&i| doc(i)).collect();
            let test: Vec<Labeled<_, ItemSpan>> = fold.test.iter().map(|&i| doc(i)).collect();
            let mut oracle = SimulatedOracle::from_labeled(&train);
            let (l0, u0) = split_initial(&train, config.n_initial, l0_seed)?;
            let cfg = WrapperConfig {
                sampler: *sampler,
                boundary: *boundary,
                search: RuleSearch::default(),
            };
            let run = run_wrapper(&cfg, l0, u0, &mut oracle, schedule, seed)?;
            let mut points = Vec::with_capacity(run.snapshots.len());
            for s in run.snapshots.iter().skip(1) {
                points.push((s.labeled, evaluate_extractor(&s.model, &test)?));
            }
            (points, run.fallback_episodes, run.exhausted)
        }
        (LoadedTask::Wrapper { .. }, _) => {
            return Err(Error::Config(format!("`{}` cannot run on a wrapper task", algorithm.name)))
        }
    };
    let curve = LearningCurve {
        algorithm: algorithm.name.clone(),
        fold: fold_id,
        seed,
        points,
    };
    curve.check()?;
    Ok(RunRecord {
        curve,
        fallback_episodes,
        exhausted,
    })
}

/// Runs every `(algorithm, fold)` pair on an already loaded task. Results
/// are ordered by algorithm (config order), then fold.
pub fn run_loaded(config: &ExperimentConfig, task: &LoadedTask, threads: Option<usize>) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let folds = task_folds(task, config.folds, config.seed)?;
    let jobs: Vec<(usize, usize)> = (0..config.algorithms.len())
        .flat_map(|a| (0..folds.len()).map(move |f| (a, f)))
        .collect();
    run_jobs(&jobs, threads, |&(a, f)| {
        let algorithm = &config.algorithms[a];
        run_fold(config, task, algorithm, f, &folds[f])
            .map_err(|e| e.context(format!("algorithm `{}`, fold {f}", algorithm.name)))
    })
}

/// Loads the task, runs everything and writes `curves.csv`, one
/// `<algorithm>.csv` per algorithm, `run.log`, the configured comparison
/// reports and optionally `curves.svg` into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let task = LoadedTask::load(&config.task)?;
    let records = run_loaded(config, &task, thread_limit()?)?;
    let curves: Vec<LearningCurve> = records.iter().map(|r| r.curve.clone()).collect();

    let out = &config.output;
    std::fs::create_dir_all(out).map_err(|e| Error::Io(e).context(format!("creating {}", out.display())))?;
    let mut files = Vec::new();
    let mut write = |name: &str, text: &str| -> Result<()> {
        let p = out.join(name);
        std::fs::write(&p, text).map_err(|e| Error::Io(e).context(format!("writing {}", p.display())))?;
        files.push(p);
        Ok(())
    };
    write("curves.csv", &curves_to_csv(&curves))?;
    for a in &config.algorithms {
        let mine: Vec<LearningCurve> = curves.iter().filter(|c| c.algorithm == a.name).cloned().collect();
        write(&format!("{}.csv", a.name), &curves_to_csv(&mine))?;
    }
    write("run.log", &run_log(config, &records))?;
    if config.svg {
        write("curves.svg", &curves_to_svg(&curves, &title(config)))?;
    }
    let mut reports = Vec::new();
    for (x, y) in &config.compare {
        let pick = |n: &str| -> Vec<LearningCurve> { curves.iter().filter(|c| c.algorithm == n).cloned().collect() };
        let r = paired_t_test(&pick(x), &pick(y), &config.points, config.alpha)?;
        write(&format!("compare_{x}_vs_{y}.json"), &serde_json::to_string_pretty(&r)?)?;
        reports.push(r);
    }
    if !reports.is_empty() {
        let rows = summarize(&reports);
        write("summary.csv", &summary_csv(&rows))?;
        write("summary.txt", &summary_text(&rows))?;
    }
    Ok(ExperimentOutput { records, reports, files })
}

fn title(config: &ExperimentConfig) -> String {
    match &config.task {
        TaskConfig::Classification { data, .. } => file_name(data),
        TaskConfig::Wrapper { task, .. } => file_name(task),
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Fallback episodes and pool exhaustion per run, in record order.
pub fn run_log(config: &ExperimentConfig, records: &[RunRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let c = &r.curve;
        if !r.fallback_episodes.is_empty() {
            let eps: Vec<String> = r.fallback_episodes.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "{} fold {}: random fallback in episodes {}", c.algorithm, c.fold, eps.join(" "));
        }
        if r.exhausted {
            let _ = writeln!(
                s,
                "{} fold {}: pool exhausted after {} of {} episodes",
                c.algorithm,
                c.fold,
                c.points.len(),
                config.episodes
            );
        }
    }
    s
}
