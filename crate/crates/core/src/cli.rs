//! The `infrisk` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
//! Errors go to stderr as `error[<category>]: <message>`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{
    class_summaries, generate_synthetic, load_csv, pearson_correlation, train_test_split,
    write_csv, ClassSummary, Dataset, GeneratorConfig, PatientRecord,
};
use crate::error::{Error, ErrorCategory, Result};
use crate::eval::{
    compare_models, compute_metrics, cross_validate, overfit_sweep, MetricsReport, ModelOutcome,
    SweepGrid,
};
use crate::model::{ModelKind, ModelSpec, Pipeline};
use crate::persist::{load_model, save_model, PersistedModel};

#[derive(Debug, Parser)]
#[command(
    name = "infrisk",
    version,
    about = "Infection-risk classifiers: data, training, evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset.
    GenData(GenDataArgs),
    /// Correlation matrix and per-class feature summaries of a dataset.
    Inspect(InspectArgs),
    /// Train on a stratified split, report test metrics, save the model.
    Train(TrainArgs),
    /// Predict with a saved model.
    Predict(PredictArgs),
    /// Stratified k-fold cross-validation.
    Cv(CvArgs),
    /// Learning-rate by min_child_weight overfit sweep.
    Sweep(SweepArgs),
    /// Train and rank every model on one split.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct GenDataArgs {
    #[arg(long, default_value_t = 4000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the exact posterior P(infected | features) per record.
    #[arg(long)]
    bayes_out: Option<PathBuf>,
    #[arg(long)]
    class_balance: Option<f64>,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    corr_out: Option<PathBuf>,
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct Overrides {
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    min_child_weight: Option<f64>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Boosting rounds, forest trees, or training epochs.
    #[arg(long)]
    rounds: Option<usize>,
    /// Neighbours for k-NN.
    #[arg(long = "neighbors")]
    neighbors: Option<usize>,
}

impl Overrides {
    fn apply(&self, spec: &mut ModelSpec) -> Result<()> {
        if let Some(v) = self.learning_rate {
            if !spec.set_learning_rate(v)? {
                return Err(inert(spec, "--learning-rate"));
            }
        }
        if let Some(v) = self.min_child_weight {
            if !spec.set_min_child_weight(v)? {
                return Err(inert(spec, "--min-child-weight"));
            }
        }
        if let Some(v) = self.max_depth {
            spec.set_max_depth(v)?;
        }
        if let Some(v) = self.rounds {
            spec.set_rounds(v)?;
        }
        if let Some(v) = self.neighbors {
            spec.set_k(v)?;
        }
        Ok(())
    }
}

fn inert(spec: &ModelSpec, flag: &str) -> Error {
    Error::Unsupported {
        model: spec.kind.to_string(),
        message: format!("{flag} has no effect on this model"),
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    test_ratio: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch training trace CSV (mlp only).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Batch mode: predict every row of this CSV instead of one record.
    #[arg(long, conflicts_with_all = ["age", "temp", "fatigue", "cough", "body_pain", "sore_throat", "breathing_difficulty"])]
    data: Option<PathBuf>,
    /// Batch output CSV; stdout when absent.
    #[arg(long, requires = "data")]
    out: Option<PathBuf>,
    #[arg(long, required_unless_present = "data")]
    age: Option<f64>,
    #[arg(long, required_unless_present = "data")]
    temp: Option<f64>,
    #[arg(long, required_unless_present = "data")]
    fatigue: Option<u8>,
    #[arg(long, required_unless_present = "data")]
    cough: Option<u8>,
    #[arg(long, required_unless_present = "data")]
    body_pain: Option<u8>,
    #[arg(long, required_unless_present = "data")]
    sore_throat: Option<u8>,
    #[arg(long, required_unless_present = "data")]
    breathing_difficulty: Option<u8>,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Per-fold metrics CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value = "gbt")]
    model: String,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    test_ratio: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.1, 0.3])]
    lr: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 5.0, 10.0, 20.0])]
    mcw: Vec<f64>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Sweep CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Dataset CSV; a synthetic one is generated when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 4000, conflicts_with = "data")]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    test_ratio: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
    /// Comparison CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI with process stdout/stderr and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let text = e.to_string();
            let text = text.strip_prefix("error: ").unwrap_or(&text);
            let _ = write!(err, "error[usage]: {text}");
            return ErrorCategory::Usage.exit_code();
        }
    };
    let mut buf = String::new();
    match dispatch(cli.command, &mut buf) {
        Ok(()) => {
            let _ = out.write_all(buf.as_bytes());
            0
        }
        Err(e) => {
            let cat = e.category();
            let _ = writeln!(err, "error[{}]: {e}", cat.tag());
            cat.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut String) -> Result<()> {
    match command {
        Command::GenData(a) => gen_data(a, out),
        Command::Inspect(a) => inspect(a, out),
        Command::Train(a) => train(a, out),
        Command::Predict(a) => predict(a, out),
        Command::Cv(a) => cv(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Compare(a) => compare(a, out),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn spec_for(model: &str, seed: u64, overrides: &Overrides) -> Result<ModelSpec> {
    let mut spec = ModelSpec::new(model.parse::<ModelKind>()?, seed);
    overrides.apply(&mut spec)?;
    Ok(spec)
}

fn write_metrics(out: &mut String, m: &MetricsReport) {
    let c = m.confusion;
    writeln!(
        out,
        "accuracy={:.4} precision={:.4} recall={:.4} f1={:.4}",
        m.accuracy, m.precision, m.recall, m.f1
    )
    .unwrap();
    writeln!(
        out,
        "confusion tp={} fp={} fn={} tn={}",
        c.tp, c.fp, c.fn_, c.tn
    )
    .unwrap();
}

fn gen_data(a: GenDataArgs, out: &mut String) -> Result<()> {
    let mut config = GeneratorConfig {
        n: a.n,
        seed: a.seed,
        ..Default::default()
    };
    if let Some(b) = a.class_balance {
        config.class_balance = b;
    }
    let sample = generate_synthetic(&config)?;
    write_csv(&sample.dataset, &a.out)?;
    let labels = sample.dataset.labels()?;
    let bayes_correct = sample
        .bayes_probability
        .iter()
        .zip(&labels)
        .filter(|(&p, &y)| u8::from(p >= 0.5) == y)
        .count();
    if let Some(path) = &a.bayes_out {
        let mut text = String::from("bayes_probability\n");
        for p in &sample.bayes_probability {
            writeln!(text, "{p}").unwrap();
        }
        write_text(path, &text)?;
    }
    writeln!(
        out,
        "wrote {} records to {} (positive_rate={:.4} bayes_accuracy={:.4})",
        sample.dataset.len(),
        a.out.display(),
        sample.dataset.positive_rate()?,
        bayes_correct as f64 / labels.len() as f64
    )
    .unwrap();
    Ok(())
}

fn inspect(a: InspectArgs, out: &mut String) -> Result<()> {
    let data = load_csv(&a.data)?;
    let corr = pearson_correlation(&data)?.to_csv();
    let summaries = class_summaries(&data)?;
    let mut summary_csv = format!("{}\n", ClassSummary::CSV_HEADER);
    for s in &summaries {
        writeln!(summary_csv, "{}", s.csv_row()).unwrap();
    }
    writeln!(
        out,
        "records={} positive_rate={:.4}",
        data.len(),
        data.positive_rate()?
    )
    .unwrap();
    match &a.corr_out {
        Some(p) => write_text(p, &corr)?,
        None => out.push_str(&corr),
    }
    match &a.summary_out {
        Some(p) => write_text(p, &summary_csv)?,
        None => out.push_str(&summary_csv),
    }
    Ok(())
}

fn train(a: TrainArgs, out: &mut String) -> Result<()> {
    let spec = spec_for(&a.model, a.seed, &a.overrides)?;
    if a.trace.is_some() && spec.kind != ModelKind::Mlp {
        return Err(Error::Unsupported {
            model: spec.kind.to_string(),
            message: "--trace is only available for mlp".into(),
        });
    }
    let data = load_csv(&a.data)?;
    let (train, test) = train_test_split(&data, a.test_ratio, a.seed)?;
    let (pipeline, trace) = Pipeline::fit_traced(&spec, &train, Some(&test))?;
    let metrics = compute_metrics(&test.labels()?, &pipeline.predict_class_all(&test)?)?;
    writeln!(
        out,
        "model={} train={} test={}",
        spec.kind,
        train.len(),
        test.len()
    )
    .unwrap();
    write_metrics(out, &metrics);
    if let (Some(path), Some(trace)) = (&a.trace, trace) {
        write_text(path, &trace.to_csv())?;
    }
    save_model(&PersistedModel::new(&spec, pipeline, &train), &a.out)?;
    writeln!(out, "saved {}", a.out.display()).unwrap();
    Ok(())
}

fn predict(a: PredictArgs, out: &mut String) -> Result<()> {
    let model = load_model(&a.model)?;
    if let Some(path) = &a.data {
        let data = load_csv(path)?;
        let mut text = String::from("probability,class\n");
        for r in data.records() {
            let x = r.features();
            writeln!(
                text,
                "{:.4},{}",
                model.predict_proba(&x)?,
                model.predict_class(&x)?
            )
            .unwrap();
        }
        match &a.out {
            Some(p) => write_text(p, &text)?,
            None => out.push_str(&text),
        }
        return Ok(());
    }
    // clap guarantees every single-record field is present here.
    let record = PatientRecord {
        age: a.age.unwrap_or_default(),
        body_temperature: a.temp.unwrap_or_default(),
        symptoms: [
            a.fatigue.unwrap_or_default(),
            a.cough.unwrap_or_default(),
            a.body_pain.unwrap_or_default(),
            a.sore_throat.unwrap_or_default(),
            a.breathing_difficulty.unwrap_or_default(),
        ],
        infected: None,
    };
    record.validate().map_err(Error::Range)?;
    let x = record.features();
    writeln!(
        out,
        "probability={:.4} class={}",
        model.predict_proba(&x)?,
        model.predict_class(&x)?
    )
    .unwrap();
    Ok(())
}

fn cv(a: CvArgs, out: &mut String) -> Result<()> {
    let spec = spec_for(&a.model, a.seed, &a.overrides)?;
    let data = load_csv(&a.data)?;
    let report = cross_validate(&spec, &data, a.k, a.seed)?;
    let mut csv = String::from("fold,n,accuracy,precision,recall,f1\n");
    for (f, m) in report.folds.iter().enumerate() {
        writeln!(
            csv,
            "{f},{},{:.6},{:.6},{:.6},{:.6}",
            m.confusion.total(),
            m.accuracy,
            m.precision,
            m.recall,
            m.f1
        )
        .unwrap();
    }
    let evaluated: usize = report.folds.iter().map(|m| m.confusion.total()).sum();
    writeln!(
        out,
        "model={} k={} evaluated={} of {}",
        spec.kind,
        report.k(),
        evaluated,
        data.len()
    )
    .unwrap();
    out.push_str(&csv);
    for (name, s) in [
        ("accuracy", report.accuracy),
        ("precision", report.precision),
        ("recall", report.recall),
        ("f1", report.f1),
    ] {
        writeln!(out, "{name} mean={:.4} std={:.4}", s.mean, s.std).unwrap();
    }
    if let Some(p) = &a.out {
        write_text(p, &csv)?;
    }
    Ok(())
}

fn sweep(a: SweepArgs, out: &mut String) -> Result<()> {
    let mut spec = ModelSpec::new(a.model.parse::<ModelKind>()?, a.seed);
    if let Some(d) = a.max_depth {
        spec.set_max_depth(d)?;
    }
    if let Some(r) = a.rounds {
        spec.set_rounds(r)?;
    }
    let data = load_csv(&a.data)?;
    let (train, validation) = train_test_split(&data, a.test_ratio, a.seed)?;
    let grid = SweepGrid {
        learning_rates: a.lr,
        min_child_weights: a.mcw,
    };
    let result = overfit_sweep(&spec, &train, &validation, &grid, a.seed)?;
    let csv = result.to_csv();
    match &a.out {
        Some(p) => {
            write_text(p, &csv)?;
            writeln!(
                out,
                "model={} cells={} written to {}",
                spec.kind,
                result.cells.len(),
                p.display()
            )
            .unwrap();
            for &m in &grid.min_child_weights {
                if let Some(g) = result.mean_gap_at_mcw(m) {
                    writeln!(out, "min_child_weight={m} mean_gap={g:.4}").unwrap();
                }
            }
        }
        None => out.push_str(&csv),
    }
    Ok(())
}

fn compare(a: CompareArgs, out: &mut String) -> Result<()> {
    let data: Dataset = match &a.data {
        Some(p) => load_csv(p)?,
        None => {
            generate_synthetic(&GeneratorConfig {
                n: a.n,
                seed: a.seed,
                ..Default::default()
            })?
            .dataset
        }
    };
    let kinds: Vec<ModelKind> = if a.models.is_empty() {
        ModelKind::COMPARED.to_vec()
    } else {
        a.models.iter().map(|m| m.parse()).collect::<Result<_>>()?
    };
    let specs: Vec<ModelSpec> = kinds.iter().map(|&k| ModelSpec::new(k, a.seed)).collect();
    let (train, test) = train_test_split(&data, a.test_ratio, a.seed)?;
    let table = compare_models(&specs, &train, &test, a.seed)?;
    writeln!(
        out,
        "train={} test={} (positive class: infected; 0/0 metrics reported as 0)",
        train.len(),
        test.len()
    )
    .unwrap();
    for r in &table.rows {
        match &r.outcome {
            ModelOutcome::Ok(m) => writeln!(
                out,
                "{:<13} accuracy={:.4} precision={:.4} recall={:.4} f1={:.4}",
                r.model.name(),
                m.accuracy,
                m.precision,
                m.recall,
                m.f1
            ),
            ModelOutcome::Failed(e) => writeln!(out, "{:<13} failed: {e}", r.model.name()),
        }
        .unwrap();
    }
    if let Some(p) = &a.out {
        write_text(p, &table.to_csv())?;
    }
    Ok(())
}
