use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use cotest::harness::{
    generate_synthetic_classification, generate_synthetic_wrapper, paired_t_test, read_curves, run_experiment,
    summarize, summary_csv, summary_text, ClassificationSpec, ComparisonPoints, ComparisonReport, ExperimentConfig,
    LearningCurve, WrapperSpec,
};
use cotest::Error;

/// Exit code for bad configs and input files.
const EXIT_CONFIG: u8 = 2;
/// Exit code for contract failures found while running.
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "cotest", version, about = "Multi-view active learning experiments")]
struct Cli {
    /// Overrides the root seed of the config or generator spec.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm on every fold and write the curves.
    Run { config: PathBuf },
    /// Generate a synthetic multi-view classification dataset.
    GenClass { spec: PathBuf, outdir: PathBuf },
    /// Generate synthetic wrapper-induction tasks.
    GenWrapper { spec: PathBuf, outdir: PathBuf },
    /// Paired t-tests between two curve files, one algorithm each.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// `second-half`, `all` or comma-separated point indices.
        #[arg(long, default_value = "second-half")]
        points: String,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Loss/tie/win totals per algorithm pair over comparison reports.
    Summarize {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.chain().find_map(|c| c.downcast_ref::<Error>()).is_none_or(Error::is_config_error);
            ExitCode::from(if config { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => run(&config, cli.seed),
        Command::GenClass { spec, outdir } => gen_class(&spec, &outdir, cli.seed),
        Command::GenWrapper { spec, outdir } => gen_wrapper(&spec, &outdir, cli.seed),
        Command::Compare { a, b, alpha, points, out } => compare(&a, &b, alpha, &points, out.as_deref()),
        Command::Summarize { reports, csv } => summarize_reports(&reports, csv),
    }
}

fn run(path: &Path, seed: Option<u64>) -> Result<()> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let out = run_experiment(&config)?;
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    for r in &out.reports {
        let c = r.counts;
        println!("{} vs {}: loss {} tie {} win {}", r.a, r.b, c.loss, c.tie, c.win);
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(Error::Io).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(Error::Json).with_context(|| format!("parsing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::Io).with_context(|| format!("creating {}", dir.display()))
}

fn gen_class(spec_path: &Path, outdir: &Path, seed: Option<u64>) -> Result<()> {
    let mut spec: ClassificationSpec = read_json(spec_path)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let dataset = generate_synthetic_classification(&spec)?;
    create_dir(outdir)?;
    let (data, views) = (outdir.join("data.txt"), outdir.join("views.txt"));
    let mut data_buf = Vec::new();
    let mut views_buf = Vec::new();
    dataset.write(&mut data_buf, &mut views_buf)?;
    for (p, bytes) in [(&data, data_buf), (&views, views_buf)] {
        std::fs::write(p, bytes).map_err(Error::Io).with_context(|| format!("writing {}", p.display()))?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn gen_wrapper(spec_path: &Path, outdir: &Path, seed: Option<u64>) -> Result<()> {
    let mut spec: WrapperSpec = read_json(spec_path)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let tasks = generate_synthetic_wrapper(&spec)?;
    create_dir(outdir)?;
    for (i, task) in tasks.iter().enumerate() {
        let p = outdir.join(format!("task_{i:02}.tsv"));
        task.write(&p)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

/// The curves of a file that holds exactly one algorithm.
fn single_algorithm(path: &Path) -> Result<Vec<LearningCurve>> {
    let curves = read_curves(path)?;
    let mut names: Vec<&str> = curves.iter().map(|c| c.algorithm.as_str()).collect();
    names.dedup();
    if names.len() != 1 {
        return Err(Error::Config(format!(
            "{} must hold the curves of exactly one algorithm, found {}",
            path.display(),
            names.len()
        ))
        .into());
    }
    Ok(curves)
}

fn compare(a: &Path, b: &Path, alpha: f64, points: &str, out: Option<&Path>) -> Result<()> {
    let points = ComparisonPoints::parse(points)?;
    let report = paired_t_test(&single_algorithm(a)?, &single_algorithm(b)?, &points, alpha)?;
    println!("{:>6} {:>8} {:>10} {:>9} {:>9}  verdict", "point", "labeled", "mean diff", "t", "p");
    for p in &report.points {
        let t = p.t.map_or_else(|| "-".to_string(), |t| format!("{t:.4}"));
        println!(
            "{:>6} {:>8} {:>10.4} {:>9} {:>9.4}  {:?}",
            p.point, p.labeled_count, p.mean_difference, t, p.p_value, p.verdict
        );
    }
    let c = report.counts;
    println!("{} vs {}: loss {} tie {} win {}", report.a, report.b, c.loss, c.tie, c.win);
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&report).map_err(Error::Json)?;
        std::fs::write(path, json).map_err(Error::Io).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn summarize_reports(paths: &[PathBuf], csv: bool) -> Result<()> {
    let reports = paths.iter().map(|p| read_json::<ComparisonReport>(p)).collect::<Result<Vec<_>>>()?;
    let rows = summarize(&reports);
    print!("{}", if csv { summary_csv(&rows) } else { summary_text(&rows) });
    Ok(())
}
