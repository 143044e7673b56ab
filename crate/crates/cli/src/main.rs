use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use relval::dataset::{write_canonical_csv, DatasetManifest};
use relval::harness::{
    half_counts, run_and_write, sanity_csv, sanity_markdown, sanity_table, ExperimentReport,
    Precision, ReportFormat, RunConfig,
};
use relval::Dataset;

#[derive(Parser)]
#[command(name = "relval", version, about = "Cross-release defect model validation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a dataset manifest, write the canonical CSV and print its summary.
    Ingest(IngestArgs),
    /// Compare defect rates between the first and second half of each project.
    SanityCheck(SanityArgs),
    /// Run the full experiment described by a config file.
    Run(RunArgs),
    /// Render tables and figures from a saved report.json.
    Report(ReportArgs),
}

#[derive(Args)]
struct IngestArgs {
    manifest: PathBuf,
    /// Directory for `<project>.csv`; defaults to the current directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary output: text or json.
    #[arg(long, default_value = "text")]
    format: String,
}

#[derive(Args)]
struct SanityArgs {
    manifests: Vec<PathBuf>,
    /// Take the dataset list from a run config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory to also write the table into.
    #[arg(long)]
    out: Option<PathBuf>,
    /// markdown, csv or json.
    #[arg(long, default_value = "markdown")]
    format: String,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated formats overriding the config (csv, json, markdown, svg).
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
}

#[derive(Args)]
struct ReportArgs {
    report: PathBuf,
    /// markdown, svg, csv or json.
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Output directory; markdown goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::SanityCheck(a) => sanity(a),
        Command::Run(a) => run(a),
        Command::Report(a) => report(a),
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn ingest(a: IngestArgs) -> Result<ExitCode> {
    let manifest = DatasetManifest::load(&a.manifest)?;
    let dataset: Dataset = manifest.load_dataset()?;
    let dir = a.out.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{}.csv", dataset.project_name));
    let mut buf = Vec::new();
    write_canonical_csv(&dataset, &mut buf)?;
    std::fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
    let summary = dataset.summary();
    match a.format.as_str() {
        "text" => println!("{summary}"),
        "json" => println!("{}", serde_json::to_string_pretty(&summary)?),
        other => bail!(relval::Error::UnknownFormat(other.to_string())),
    }
    eprintln!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn sanity(a: SanityArgs) -> Result<ExitCode> {
    let mut manifests = a.manifests;
    if let Some(config) = &a.config {
        manifests.extend(RunConfig::load(config)?.dataset_paths());
    }
    if manifests.is_empty() {
        bail!("no manifests given");
    }
    let mut names = Vec::new();
    let mut counts = Vec::new();
    for m in &manifests {
        let loaded = DatasetManifest::load(m).and_then(|m| m.load_dataset::<f64>());
        match loaded {
            Ok(d) => {
                names.push(d.project_name.clone());
                counts.push(half_counts(&d));
            }
            Err(e) => {
                names.push(m.display().to_string());
                counts.push(Err(e));
            }
        }
    }
    let table = sanity_table(counts, &names);
    let (body, ext) = match a.format.as_str() {
        "markdown" | "md" => (sanity_markdown(&table), "md"),
        "csv" => (sanity_csv(&table)?, "csv"),
        "json" => (serde_json::to_string_pretty(&table)?, "json"),
        other => bail!(relval::Error::UnknownFormat(other.to_string())),
    };
    print!("{body}");
    if let Some(dir) = a.out {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        write(&dir.join(format!("sanity.{ext}")), &body)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(a: RunArgs) -> Result<ExitCode> {
    let mut config = RunConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(out) = a.out {
        config.out_dir = std::path::absolute(&out).unwrap_or(out);
    }
    if let Some(formats) = a.format {
        config.formats = formats
            .iter()
            .map(|f| f.parse::<ReportFormat>())
            .collect::<relval::Result<_>>()?;
    }
    if let Some(w) = a.workers {
        config.workers = Some(w);
    }
    config.validate()?;
    let workers = config.worker_count();
    let (report, runtime, written) = match config.precision {
        Precision::F64 => run_and_write::<f64>(&config, workers)?,
        Precision::F32 => run_and_write::<f32>(&config, workers)?,
    };
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    eprintln!(
        "{} evaluations, {} exclusions, {} cells in {:.1}s on {} workers",
        report.evaluations.len(),
        report.exclusions.len(),
        runtime.cells,
        runtime.wall_secs,
        runtime.workers
    );
    if !report.fatal.is_empty() {
        eprintln!("no evaluable dataset for: {}", report.fatal.join(", "));
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn report(a: ReportArgs) -> Result<ExitCode> {
    let format: ReportFormat = a.format.parse()?;
    let report = ExperimentReport::load(&a.report)?;
    let figures = report.figures();
    let dir = a.out;
    if let Some(dir) = &dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let need_dir = || dir.clone().context("--out is required for this format");
    match format {
        ReportFormat::Markdown => match &dir {
            Some(d) => write(&d.join("report.md"), &report.markdown())?,
            None => print!("{}", report.markdown()),
        },
        ReportFormat::Svg => {
            let d = need_dir()?;
            for (name, svg) in figures.svgs() {
                write(&d.join(name), &svg)?;
            }
        }
        ReportFormat::Json => {
            let body = serde_json::to_string_pretty(&figures)?;
            match &dir {
                Some(d) => write(&d.join("figures.json"), &body)?,
                None => println!("{body}"),
            }
        }
        ReportFormat::Csv => {
            let d = need_dir()?;
            write(&d.join("results.csv"), &report.results_csv()?)?;
            write(&d.join("technique_auc.csv"), &to_csv(&figures.technique_auc)?)?;
            let labels = figures.strategy_labels();
            let mut per = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["dataset".to_string()];
            header.extend(labels.iter().cloned());
            per.write_record(&header)?;
            for row in &figures.per_dataset {
                let mut rec = vec![row.dataset.clone()];
                rec.extend(labels.iter().map(|l| row.values.get(l).map_or(String::new(), f64::to_string)));
                per.write_record(&rec)?;
            }
            write(&d.join("per_dataset_auc.csv"), &String::from_utf8(per.into_inner()?)?)?;
            let boxes: Vec<_> = figures
                .bias
                .iter()
                .map(|b| ("bias", b))
                .chain(figures.absolute_bias.iter().map(|b| ("absolute_bias", b)))
                .map(|(q, b)| BoxRow {
                    quantity: q,
                    technique: &b.label,
                    n: b.n,
                    q1: b.q1,
                    median: b.median,
                    q3: b.q3,
                    lower_whisker: b.lower_whisker,
                    upper_whisker: b.upper_whisker,
                    outliers: b.outliers.len(),
                })
                .collect();
            write(&d.join("bias_box.csv"), &to_csv(&boxes)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Serialize)]
struct BoxRow<'a> {
    quantity: &'a str,
    technique: &'a str,
    n: usize,
    q1: f64,
    median: f64,
    q3: f64,
    lower_whisker: f64,
    upper_whisker: f64,
    outliers: usize,
}

fn to_csv<S: serde::Serialize>(rows: &[S]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
