use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gfmm::dataio::{self, CsvOptions, LabelColumn};
use gfmm::predict::{predict_iol, predict_online_original};
use gfmm::verify::{oracle_lemma1, oracle_lemma2, OracleReport};
use gfmm::{Algorithm, HyperparamConfig, Pattern, SimilarityMeasure, TiePolicy};
use gfmm_cli::bench::{self, BenchConfig, BenchData};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "gfmm",
    version,
    about = "General fuzzy min-max hyperbox classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a CSV file and save it as JSON.
    Train(TrainArgs),
    /// Classify the rows of a CSV file with a saved model.
    Predict(PredictArgs),
    /// Repeated k-fold benchmark with and without candidate pruning.
    Bench(BenchArgs),
    /// Randomized check of the membership and similarity pruning bounds.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CsvArgs {
    /// The CSV file has no header row.
    #[arg(long)]
    no_header: bool,
    /// 0-based label column (default: last).
    #[arg(long)]
    label_column: Option<usize>,
    /// Use feature values as given; they must already lie in [0, 1].
    #[arg(long)]
    no_normalize: bool,
}

impl CsvArgs {
    fn options(&self) -> CsvOptions {
        CsvOptions {
            header: !self.no_header,
            label_column: self
                .label_column
                .map_or(LabelColumn::Last, LabelColumn::Index),
            normalize: !self.no_normalize,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a number > 0, got `{s}`")),
    }
}

fn unit(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if (0.0..=1.0).contains(&x) => Ok(x),
        _ => Err(format!("expected a number in [0, 1], got `{s}`")),
    }
}

#[derive(Clone, Debug)]
struct GammaList(Vec<f64>);

fn gamma_list(s: &str) -> Result<GammaList, String> {
    dataio::parse_gamma_list(s)
        .map(GammaList)
        .map_err(|e| e.to_string())
}

fn algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: gfmm::GfmmError| e.to_string())
}

fn measure(s: &str) -> Result<SimilarityMeasure, String> {
    s.parse().map_err(|e: gfmm::GfmmError| e.to_string())
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// onln, iol, agglo-sm or agglo-2.
    #[arg(long, value_parser = algorithm)]
    algo: Algorithm,
    /// Maximum hyperbox size.
    #[arg(long, default_value = "0.1", value_parser = positive)]
    theta: f64,
    /// Sensitivity: one value, or a comma-separated value per feature.
    #[arg(long, default_value = "1", value_parser = gamma_list)]
    gamma: GammaList,
    /// Minimum similarity for agglomerative merging.
    #[arg(long, default_value = "0", value_parser = unit)]
    sigma: f64,
    /// longest, shortest, mid-max or mid-min (agglomerative only).
    #[arg(long, value_parser = measure)]
    measure: Option<SimilarityMeasure>,
    #[arg(long, overrides_with = "no_accelerate")]
    accelerate: bool,
    /// Disable candidate pruning.
    #[arg(long)]
    no_accelerate: bool,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    epochs: u32,
    /// Shuffle the training order with this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Clone, Copy)]
enum TieArg {
    Eq8,
    First,
    Random(u64),
}

fn tie_arg(s: &str) -> Result<TieArg, String> {
    match s {
        "eq8" => Ok(TieArg::Eq8),
        "first" => Ok(TieArg::First),
        _ => s
            .strip_prefix("random:")
            .and_then(|n| n.parse().ok())
            .map(TieArg::Random)
            .ok_or_else(|| format!("expected eq8, first or random:SEED, got `{s}`")),
    }
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// eq8 (cardinality-weighted), first (lowest class) or random:SEED.
    #[arg(long, default_value = "eq8", value_parser = tie_arg)]
    tie: TieArg,
    /// Write predictions here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Every column is a feature.
    #[arg(long)]
    no_label: bool,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// A CSV file or a directory of CSV files.
    #[arg(long)]
    data: PathBuf,
    /// RxKcv: R repetitions of K-fold cross-validation.
    #[arg(long, default_value = "5x2cv")]
    protocol: String,
    #[arg(long, value_delimiter = ',', default_value = "onln,iol,agglo-sm,agglo-2", value_parser = algorithm)]
    algos: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "longest", value_parser = measure)]
    measures: Vec<SimilarityMeasure>,
    #[arg(long, default_value = "0.1", value_parser = positive)]
    theta: f64,
    #[arg(long, default_value = "1", value_parser = gamma_list)]
    gamma: GammaList,
    #[arg(long, default_value = "0", value_parser = unit)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-fold CSV report.
    #[arg(long)]
    report: PathBuf,
    /// Per-configuration aggregates as CSV (also printed).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Train every cell this many times and report the fastest.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    timing_repeats: u32,
    /// Fit min-max scaling on each training fold rather than the whole file.
    #[arg(long)]
    per_fold_normalize: bool,
    #[command(flatten)]
    csv: CsvArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "0.1", value_parser = positive)]
    theta: f64,
    #[arg(long, default_value = "1", value_parser = gamma_list)]
    gamma: GammaList,
    /// Dimensions per trial when a single gamma is given.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    dims: u64,
    /// Restrict the similarity check to one measure (default: all four).
    #[arg(long, value_parser = measure)]
    measure: Option<SimilarityMeasure>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Train(a) => cmd_train(a).map(|_| true),
        Command::Predict(a) => cmd_predict(a).map(|_| true),
        Command::Bench(a) => cmd_bench(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let ds = dataio::load_csv(&a.data, &a.csv.options())?;
    if ds.is_empty() {
        bail!("{}: no training rows", a.data.display());
    }
    let gamma = dataio::broadcast_gamma(&a.gamma.0, ds.feature_count)?;
    if a.measure.is_some() && !a.algo.is_agglomerative() {
        log::warn!(
            "--measure only affects agglomerative learners; ignored for {}",
            a.algo
        );
    }
    let config = HyperparamConfig {
        theta: a.theta,
        gamma,
        sigma: a.sigma,
        measure: a.measure.unwrap_or(SimilarityMeasure::Longest),
        accelerated: a.accelerate || !a.no_accelerate,
        epochs: a.epochs,
    };
    let mut data = ds.patterns;
    if let Some(seed) = a.seed {
        data.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let model = gfmm::train(&data, &config, a.algo)?;
    dataio::save_model_named(&model, Some(&ds.label_names), &a.out)?;
    let s = model.stats();
    println!(
        "boxes: {}  candidates: {}  seconds: {:.6}",
        model.boxes().len(),
        s.candidates_considered,
        s.train_seconds
    );
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let (model, names) = dataio::load_model_named(&a.model)?;
    let mut opts = a.csv.options();
    let table = if a.no_label {
        // a dummy label column keeps the parser's layout rules
        let text =
            std::fs::read_to_string(&a.data).with_context(|| a.data.display().to_string())?;
        let mut buf = String::with_capacity(text.len() + text.lines().count() * 2);
        for (i, line) in text.lines().enumerate() {
            buf.push_str(line);
            if !line.trim().is_empty() {
                buf.push_str(if i == 0 && opts.header {
                    ",label"
                } else {
                    ",?"
                });
            }
            buf.push('\n');
        }
        opts.label_column = LabelColumn::Last;
        dataio::parse_table(buf.as_bytes(), &opts)?
    } else {
        dataio::read_table(&a.data, &opts)?
    };
    let mut rows = table.rows;
    if opts.normalize {
        dataio::normalize_rows(&mut rows, table.feature_count);
    }
    let name_of = |id: usize| {
        names
            .as_ref()
            .and_then(|n| n.get(id).cloned())
            .unwrap_or_else(|| id.to_string())
    };
    let out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(File::create(p).with_context(|| p.display().to_string())?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(out);
    if a.no_label {
        w.write_record(["label", "score", "tie_broken"])?;
    } else {
        w.write_record(["label", "score", "tie_broken", "actual"])?;
    }
    let mut hits = 0usize;
    for (row, &actual) in rows.into_iter().zip(&table.labels) {
        let x = Pattern::point(row, 0)?;
        let p = match a.tie {
            TieArg::Eq8 => predict_iol(&model, &x)?,
            TieArg::First => predict_online_original(&model, &x, TiePolicy::FirstClass)?,
            TieArg::Random(s) => predict_online_original(&model, &x, TiePolicy::Random(s))?,
        };
        let label = name_of(p.label);
        let score = p.score.to_string();
        let tie = p.tie_broken.to_string();
        if a.no_label {
            w.write_record([&label, &score, &tie])?;
        } else {
            let actual = &table.label_names[actual];
            hits += usize::from(*actual == label);
            w.write_record([&label, &score, &tie, actual])?;
        }
    }
    w.flush()?;
    if !a.no_label && !table.labels.is_empty() {
        eprintln!("accuracy: {:.6}", hits as f64 / table.labels.len() as f64);
    }
    Ok(())
}

fn parse_protocol(s: &str) -> Result<(usize, usize)> {
    let body = s.strip_suffix("cv").unwrap_or(s);
    let (r, k) = body
        .split_once('x')
        .with_context(|| format!("protocol `{s}` is not of the form RxKcv"))?;
    Ok((
        r.parse().context("repetitions")?,
        k.parse().context("folds")?,
    ))
}

fn csv_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| path.display().to_string())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        if files.is_empty() {
            bail!("{}: no .csv files", path.display());
        }
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let (repeats, folds) = parse_protocol(&a.protocol)?;
    let cfg = BenchConfig {
        theta: a.theta,
        gamma: a.gamma.0,
        sigma: a.sigma,
        algos: a.algos,
        measures: a.measures,
        repeats,
        folds,
        seed: a.seed,
        timing_repeats: a.timing_repeats as usize,
    };
    let mut records = Vec::new();
    for file in csv_files(&a.data)? {
        let name = file
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let data = if a.per_fold_normalize {
            let table = dataio::read_table(&file, &a.csv.options())?;
            BenchData::Raw { name, table }
        } else {
            BenchData::Scaled(dataio::load_csv(&file, &a.csv.options())?)
        };
        log::info!("benchmarking {}", data.name());
        records.extend(bench::run_dataset(&data, &cfg)?);
    }
    let report = File::create(&a.report).with_context(|| a.report.display().to_string())?;
    bench::write_csv(&records, report)?;
    let summary = bench::summarize(&records);
    if let Some(p) = &a.summary {
        bench::write_csv(
            &summary,
            File::create(p).with_context(|| p.display().to_string())?,
        )?;
    }
    println!(
        "{:<16} {:<9} {:<9} {:>9} {:>13} {:>13} {:>9} {:>9}",
        "dataset", "algo", "measure", "speedup", "cand_on", "cand_off", "ratio", "accuracy"
    );
    for s in &summary {
        println!(
            "{:<16} {:<9} {:<9} {:>9.3} {:>13.1} {:>13.1} {:>9.5} {:>9.4}",
            s.dataset,
            s.algo,
            s.measure,
            s.speedup,
            s.candidates_on,
            s.candidates_off,
            s.candidate_ratio,
            s.accuracy
        );
    }
    Ok(())
}

fn print_report(r: &OracleReport) {
    let what = match r.measure {
        Some(m) => format!("{} ({m})", r.oracle),
        None => r.oracle.clone(),
    };
    println!(
        "{what}: trials: {}  filtered: {}  violations: {}",
        r.trials, r.filtered, r.violations
    );
    let cases: Vec<String> = r
        .case_coverage
        .iter()
        .map(|(c, n)| format!("{c}={n}"))
        .collect();
    println!("  cases: {}", cases.join(" "));
    if !r.subcase_coverage.is_empty() {
        let subs: Vec<String> = r
            .subcase_coverage
            .iter()
            .map(|(c, n)| format!("{c}={n}"))
            .collect();
        println!("  sub-cases: {}", subs.join(" "));
    }
    for v in &r.violation_samples {
        println!(
            "  violation: {}",
            serde_json::to_string(v).unwrap_or_default()
        );
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let dims = if a.gamma.0.len() > 1 {
        a.gamma.0.len()
    } else {
        a.dims as usize
    };
    let gamma = dataio::broadcast_gamma(&a.gamma.0, dims)?;
    let measures = a
        .measure
        .map_or(SimilarityMeasure::ALL.to_vec(), |m| vec![m]);
    let mut reports = vec![oracle_lemma1(a.trials, a.seed, a.theta, &gamma)?];
    for m in measures {
        reports.push(oracle_lemma2(a.trials, a.seed, a.theta, &gamma, m)?);
    }
    match a.format {
        Format::Text => reports.iter().for_each(print_report),
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports)?),
    }
    Ok(reports.iter().all(OracleReport::passed))
}
