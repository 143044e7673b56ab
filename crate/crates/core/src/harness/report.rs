use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Precision, ReportFormat, RunConfig};
use super::figures::{self, FigureData};
use super::sanity::SanityTable;
use crate::classifiers::ClassifierSpec;
use crate::dataset::{DatasetSummary, EpvGroup};
use crate::error::{Error, Result};
use crate::metaval::{BaselineTriple, Rq1Table, SelectionResult, TechniqueEvaluation};
use crate::stats::{AnovaTable, StatReport};
use crate::validation::TechniqueConfig;

/// The parts of a [`RunConfig`] that determine results. Worker count and
/// output location are left out so they cannot change report bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub datasets: Vec<PathBuf>,
    pub roster: Vec<ClassifierSpec>,
    pub techniques: Vec<TechniqueConfig>,
    pub seed: u64,
    pub cell_budget_secs: f64,
    pub precision: Precision,
    pub formats: Vec<ReportFormat>,
}

impl ConfigEcho {
    pub fn of(config: &RunConfig) -> Result<Self> {
        Ok(ConfigEcho {
            datasets: config.datasets.clone(),
            roster: config.roster.resolve()?,
            techniques: config.techniques.clone(),
            seed: config.seed,
            cell_budget_secs: config.cell_budget_secs,
            precision: config.precision,
            formats: config.formats.clone(),
        })
    }
}

/// One classifier's estimate under one technique on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub dataset: String,
    pub technique: String,
    pub classifier: String,
    pub estimated_auc: Option<f64>,
    pub run_aucs: Vec<Option<f64>>,
    pub skipped_runs: usize,
    pub actual_auc: Option<f64>,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAnova {
    pub metric: String,
    pub table: Option<AnovaTable>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub hypothesis: String,
    pub metric: String,
    pub x: String,
    pub y: String,
    pub n: usize,
    pub report: Option<StatReport>,
    pub error: Option<String>,
}

/// A cell that produced no value, with a machine-readable reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionEntry {
    pub cell: String,
    pub dataset: String,
    pub technique: Option<String>,
    pub classifier: Option<String>,
    pub reason: String,
    pub detail: String,
}

impl ExclusionEntry {
    pub fn new(
        dataset: &str,
        technique: Option<&str>,
        classifier: Option<&str>,
        error: &Error,
    ) -> Self {
        let mut cell = dataset.to_string();
        for part in [technique, classifier].into_iter().flatten() {
            cell.push('/');
            cell.push_str(part);
        }
        ExclusionEntry {
            cell,
            dataset: dataset.to_string(),
            technique: technique.map(str::to_string),
            classifier: classifier.map(str::to_string),
            reason: error.kind().to_string(),
            detail: error.to_string(),
        }
    }
}

/// Headline comparisons of walk-forward against the median baseline and the
/// sign of every technique's median bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalChecks {
    pub walk_forward_mean_auc: f64,
    pub medium_mean_auc: f64,
    /// Mean over datasets of walk-forward AUC relative to the medium baseline.
    pub mean_relative_improvement: f64,
    pub exceeds_medium: bool,
    pub datasets_beating_medium: usize,
    pub datasets_compared: usize,
    /// At least three quarters of the datasets (9 of 12).
    pub beats_medium_on_three_quarters: bool,
    pub median_bias: BTreeMap<String, f64>,
    pub all_median_bias_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ConfigEcho,
    pub datasets: Vec<DatasetSummary>,
    pub epv_groups: BTreeMap<String, EpvGroup>,
    pub rq1: Rq1Table,
    pub anova: Vec<MetricAnova>,
    pub estimates: Vec<EstimateRow>,
    pub selections: Vec<SelectionResult>,
    pub evaluations: Vec<TechniqueEvaluation>,
    pub baselines: Vec<BaselineTriple>,
    pub comparisons: Vec<Comparison>,
    pub sanity: SanityTable,
    pub exclusions: Vec<ExclusionEntry>,
    pub directional: Option<DirectionalChecks>,
    /// Techniques without a single evaluable dataset.
    pub fatal: Vec<String>,
}

/// Row of the long-format results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub technique: String,
    pub classifier: String,
    pub estimated_auc: Option<f64>,
    pub actual_auc: Option<f64>,
    pub bias: Option<f64>,
    pub absolute_bias: Option<f64>,
    pub selected: bool,
    pub best_auc: Option<f64>,
    pub medium_auc: Option<f64>,
    pub worst_auc: Option<f64>,
}

/// Wall-clock facts about a run; kept apart from the report so reruns stay
/// byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeInfo {
    pub version: String,
    pub workers: usize,
    pub cells: usize,
    pub wall_secs: f64,
    pub slowest_cells: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json(context, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("report", e))
    }

    pub fn technique_ids(&self) -> Vec<String> {
        self.config.techniques.iter().map(TechniqueConfig::id).collect()
    }

    pub fn results(&self) -> Vec<ResultRow> {
        let baselines: BTreeMap<&str, &BaselineTriple> =
            self.baselines.iter().map(|b| (b.dataset.as_str(), b)).collect();
        self.estimates
            .iter()
            .map(|e| {
                let b = baselines.get(e.dataset.as_str());
                let bias = e.estimated_auc.zip(e.actual_auc).map(|(est, act)| est - act);
                ResultRow {
                    dataset: e.dataset.clone(),
                    technique: e.technique.clone(),
                    classifier: e.classifier.clone(),
                    estimated_auc: e.estimated_auc,
                    actual_auc: e.actual_auc,
                    bias,
                    absolute_bias: bias.map(f64::abs),
                    selected: e.selected,
                    best_auc: b.map(|b| b.best_auc),
                    medium_auc: b.map(|b| b.medium_auc),
                    worst_auc: b.map(|b| b.worst_auc),
                }
            })
            .collect()
    }

    pub fn results_csv(&self) -> Result<String> {
        to_csv(&self.results(), "results")
    }

    pub fn rq1_csv(&self) -> Result<String> {
        to_csv(&self.rq1.rows, "rq1")
    }

    pub fn sanity_csv(&self) -> Result<String> {
        sanity_csv(&self.sanity)
    }

    pub fn figures(&self) -> FigureData {
        FigureData::from_report(self)
    }

    pub fn markdown(&self) -> String {
        render_markdown(self)
    }

    /// Write every requested format into `dir`; returns the files written.
    pub fn write_all(&self, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: &str, body: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
            Ok(())
        };
        for format in formats {
            match format {
                ReportFormat::Csv => {
                    put("results.csv", self.results_csv()?)?;
                    put("rq1.csv", self.rq1_csv()?)?;
                    put("sanity.csv", self.sanity_csv()?)?;
                }
                ReportFormat::Json => {
                    put("report.json", self.to_json()?)?;
                    let rows = serde_json::to_string_pretty(&self.results())
                        .map_err(|e| Error::json("results", e))?;
                    put("results.json", rows)?;
                }
                ReportFormat::Markdown => put("report.md", self.markdown())?,
                ReportFormat::Svg => {
                    for (name, svg) in self.figures().svgs() {
                        put(&name, svg)?;
                    }
                }
            }
        }
        Ok(written)
    }
}

pub(crate) fn to_csv<S: Serialize>(rows: &[S], context: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Csv {
            file: context.to_string(),
            source: e,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io {
        path: PathBuf::from(context),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct SanityCsvRow<'a> {
    project: &'a str,
    first_rows: usize,
    first_defective: usize,
    second_rows: usize,
    second_defective: usize,
    first_rate: f64,
    second_rate: f64,
    difference: f64,
    relative_difference: Option<f64>,
    p_value: f64,
    odds_ratio: f64,
    odds_ratio_cmle: Option<f64>,
    significant: bool,
}

pub fn sanity_csv(table: &SanityTable) -> Result<String> {
    let rows: Vec<SanityCsvRow> = table
        .rows
        .iter()
        .map(|r| SanityCsvRow {
            project: &r.project,
            first_rows: r.first.0,
            first_defective: r.first.1,
            second_rows: r.second.0,
            second_defective: r.second.1,
            first_rate: r.first_rate,
            second_rate: r.second_rate,
            difference: r.difference,
            relative_difference: r.relative_difference,
            p_value: r.p_value,
            odds_ratio: r.odds_ratio,
            odds_ratio_cmle: r.odds_ratio_cmle,
            significant: r.significant,
        })
        .collect();
    to_csv(&rows, "sanity")
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.digits$}"))
}

fn p_text(p: f64) -> String {
    if p < 0.001 {
        "<0.001".into()
    } else {
        format!("{p:.3}")
    }
}

/// Table-5-style sanity rows as Markdown.
pub fn sanity_markdown(table: &SanityTable) -> String {
    let mut s = String::new();
    s.push_str("| Project | First half | Second half | Difference | Relative | p-value | Odds ratio | Odds ratio (cond. MLE) |\n");
    s.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in &table.rows {
        let _ = writeln!(
            s,
            "| {} | {:.3} | {:.3} | {:+.3} | {} | {} | {:.2} | {} |",
            r.project,
            r.first_rate,
            r.second_rate,
            r.difference,
            r.relative_difference
                .map_or("n/a".into(), |v| format!("{:+.0}%", 100.0 * v)),
            p_text(r.p_value),
            r.odds_ratio,
            opt(r.odds_ratio_cmle, 2),
        );
    }
    let _ = writeln!(
        s,
        "\n{} of {} projects differ significantly (p < 0.05).",
        table.significant_count,
        table.rows.len()
    );
    for f in &table.failures {
        let _ = writeln!(s, "- {}: {} ({})", f.project, f.reason, f.detail);
    }
    s
}

fn render_markdown(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Experiment report\n");
    let _ = writeln!(
        s,
        "Seed {}, {} datasets, {} classifiers, techniques: {}.\n",
        r.config.seed,
        r.datasets.len(),
        r.config.roster.len(),
        r.technique_ids().join(", ")
    );
    if !r.fatal.is_empty() {
        let _ = writeln!(s, "**Fatal:** no evaluable dataset for {}.\n", r.fatal.join(", "));
    }

    s.push_str("## Datasets\n\n| Project | Releases | Observations | Features | Defective | EPV | EPV group |\n|---|---|---|---|---|---|---|\n");
    for d in &r.datasets {
        let group = r.epv_groups.get(&d.project).map_or("-".into(), |g| g.to_string());
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {:.1} | {} |",
            d.project, d.releases, d.observations, d.features, d.defective, d.epv, group
        );
    }

    s.push_str("\n## Classifier and EPV effects (two-way ANOVA)\n\n| Metric | Factor | F | p-value | η² |\n|---|---|---|---|---|\n");
    for a in &r.anova {
        match &a.table {
            Some(t) => {
                for (name, f) in t.factor_names.iter().zip(&t.factors) {
                    let _ = writeln!(
                        s,
                        "| {} | {} | {:.3} | {} | {:.3} |",
                        a.metric,
                        name,
                        f.statistic,
                        p_text(f.p_value),
                        f.effect_value().unwrap_or(f64::NAN)
                    );
                }
                let _ = writeln!(s, "| {} | residual | | | {:.3} |", a.metric, t.eta_squared_residual);
            }
            None => {
                let _ = writeln!(s, "| {} | n/a | | | {} |", a.metric, a.error.as_deref().unwrap_or(""));
            }
        }
    }

    let figs = r.figures();
    s.push_str("\n## Accuracy of the recommended classifier\n\n| Strategy | Mean AUC | Median AUC | Datasets |\n|---|---|---|---|\n");
    for b in &figs.technique_auc {
        let _ = writeln!(s, "| {} | {:.3} | {:.3} | {} |", b.label, b.mean, b.median, b.n);
    }
    s.push_str("\n### Per dataset\n\n");
    let labels = figs.strategy_labels();
    let _ = writeln!(s, "| Dataset | {} |", labels.join(" | "));
    let _ = writeln!(s, "|---|{}", "---|".repeat(labels.len()));
    for row in &figs.per_dataset {
        let cells: Vec<String> = labels.iter().map(|l| opt(row.values.get(l).copied(), 3)).collect();
        let _ = writeln!(s, "| {} | {} |", row.dataset, cells.join(" | "));
    }

    s.push_str("\n### Selections\n\n| Dataset | Technique | Selected | Estimated | Actual | Bias |\n|---|---|---|---|---|---|\n");
    for e in &r.evaluations {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {:.3} | {:.3} | {:+.3} |",
            e.dataset, e.technique, e.selected, e.estimated_auc, e.actual_auc, e.bias
        );
    }

    s.push_str("\n## Bias and absolute bias\n\n| Quantity | Technique | n | Q1 | Median | Q3 | Whiskers |\n|---|---|---|---|---|---|---|\n");
    for (quantity, boxes) in [("bias", &figs.bias), ("absolute bias", &figs.absolute_bias)] {
        for b in boxes.iter() {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {:.3} | {:.3} | {:.3} | [{:.3}, {:.3}] |",
                quantity, b.label, b.n, b.q1, b.median, b.q3, b.lower_whisker, b.upper_whisker
            );
        }
    }

    s.push_str("\n## Paired comparisons\n\n| Hypothesis | Metric | Comparison | n | Test | Statistic | p-value | Cohen's d |\n|---|---|---|---|---|---|---|---|\n");
    for c in &r.comparisons {
        match &c.report {
            Some(rep) => {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} vs {} | {} | {} | {:.3} | {} | {} |",
                    c.hypothesis,
                    c.metric,
                    c.x,
                    c.y,
                    c.n,
                    rep.method,
                    rep.statistic,
                    p_text(rep.p_value),
                    opt(rep.effect_value(), 3)
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} vs {} | {} | n/a | | | {} |",
                    c.hypothesis,
                    c.metric,
                    c.x,
                    c.y,
                    c.n,
                    c.error.as_deref().unwrap_or("")
                );
            }
        }
    }

    s.push_str("\n## Defect-rate drift between release halves\n\n");
    s.push_str(&sanity_markdown(&r.sanity));

    if let Some(d) = &r.directional {
        s.push_str("\n## Directional checks\n\n");
        let yes = |b: bool| if b { "yes" } else { "no" };
        let _ = writeln!(
            s,
            "- (a) Walk-forward mean AUC {:.3} vs medium baseline {:.3} (mean relative improvement {:+.1}%): exceeds medium: {}",
            d.walk_forward_mean_auc,
            d.medium_mean_auc,
            100.0 * d.mean_relative_improvement,
            yes(d.exceeds_medium)
        );
        let _ = writeln!(
            s,
            "- (b) Walk-forward beats the medium baseline on {} of {} datasets: at least three quarters: {}",
            d.datasets_beating_medium,
            d.datasets_compared,
            yes(d.beats_medium_on_three_quarters)
        );
        let medians: Vec<String> = d
            .median_bias
            .iter()
            .map(|(t, m)| format!("{t} {m:+.3}"))
            .collect();
        let _ = writeln!(
            s,
            "- (c) Median bias per technique ({}): all positive: {}",
            medians.join(", "),
            yes(d.all_median_bias_positive)
        );
    }

    s.push_str("\n## Exclusions\n\n");
    if r.exclusions.is_empty() {
        s.push_str("None.\n");
    } else {
        s.push_str("| Cell | Reason | Detail |\n|---|---|---|\n");
        for e in &r.exclusions {
            let _ = writeln!(s, "| {} | {} | {} |", e.cell, e.reason, e.detail.replace('|', "/"));
        }
    }

    s.push_str("\n## Classifier parameters\n\n");
    for spec in &r.config.roster {
        let params = serde_json::to_string(&spec.classifier).unwrap_or_default();
        let _ = writeln!(s, "- {}: `{}`", spec.name, params);
    }
    s
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    figures::quantile(values, 0.5)
}
