//! Figure data and SVG rendering: technique AUC bars, per-dataset values and
//! bias box plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::report::ExperimentReport;

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman–Fan type 7). Sorts `values` in place.
pub fn quantile(values: &mut [f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let h = (values.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(values.len() - 1);
    values[lo] + (h - lo as f64) * (values[hi] - values[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub label: String,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Most extreme values within 1.5 IQR of the quartiles.
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

impl BoxStats {
    pub fn new(label: &str, values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        let q1 = quantile(&mut v, 0.25);
        let median = quantile(&mut v, 0.5);
        let q3 = quantile(&mut v, 0.75);
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside: Vec<f64> = v.iter().copied().filter(|x| (lo_fence..=hi_fence).contains(x)).collect();
        Some(BoxStats {
            label: label.to_string(),
            n: v.len(),
            min: v[0],
            q1,
            median,
            q3,
            max: v[v.len() - 1],
            lower_whisker: inside.first().copied().unwrap_or(q1),
            upper_whisker: inside.last().copied().unwrap_or(q3),
            outliers: v.iter().copied().filter(|x| !(lo_fence..=hi_fence).contains(x)).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarDatum {
    pub label: String,
    pub mean: f64,
    pub median: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerDatasetRow {
    pub dataset: String,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    /// Techniques in configured order, then the best, medium and worst
    /// baselines.
    pub technique_auc: Vec<BarDatum>,
    pub per_dataset: Vec<PerDatasetRow>,
    pub bias: Vec<BoxStats>,
    pub absolute_bias: Vec<BoxStats>,
}

pub const BASELINE_LABELS: [&str; 3] = ["best", "medium", "worst"];

impl FigureData {
    pub fn from_report(r: &ExperimentReport) -> Self {
        let techniques = r.technique_ids();
        let mut per: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for e in &r.evaluations {
            per.entry(e.dataset.clone())
                .or_default()
                .insert(e.technique.clone(), e.actual_auc);
        }
        for b in &r.baselines {
            let row = per.entry(b.dataset.clone()).or_default();
            row.insert("best".into(), b.best_auc);
            row.insert("medium".into(), b.medium_auc);
            row.insert("worst".into(), b.worst_auc);
        }
        let per_dataset: Vec<PerDatasetRow> = per
            .into_iter()
            .map(|(dataset, values)| PerDatasetRow { dataset, values })
            .collect();

        let labels: Vec<String> = techniques
            .iter()
            .cloned()
            .chain(BASELINE_LABELS.iter().map(|s| s.to_string()))
            .collect();
        let technique_auc = labels
            .iter()
            .map(|label| {
                let mut v: Vec<f64> = per_dataset
                    .iter()
                    .filter_map(|row| row.values.get(label).copied())
                    .collect();
                BarDatum {
                    label: label.clone(),
                    mean: if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 },
                    median: quantile(&mut v, 0.5),
                    n: v.len(),
                }
            })
            .collect();

        let boxes = |f: fn(&crate::metaval::TechniqueEvaluation) -> f64| -> Vec<BoxStats> {
            techniques
                .iter()
                .filter_map(|t| {
                    let v: Vec<f64> = r.evaluations.iter().filter(|e| &e.technique == t).map(f).collect();
                    BoxStats::new(t, &v)
                })
                .collect()
        };
        FigureData {
            technique_auc,
            per_dataset,
            bias: boxes(|e| e.bias),
            absolute_bias: boxes(|e| e.absolute_bias),
        }
    }

    pub fn strategy_labels(&self) -> Vec<String> {
        self.technique_auc.iter().map(|b| b.label.clone()).collect()
    }

    /// `(file name, document)` for every figure.
    pub fn svgs(&self) -> Vec<(String, String)> {
        vec![
            (
                "technique_auc.svg".into(),
                bar_chart_svg("AUC of the recommended classifier (mean over datasets)", &self.technique_auc),
            ),
            ("bias_box.svg".into(), box_plot_svg("Bias", &self.bias)),
            (
                "absolute_bias_box.svg".into(),
                box_plot_svg("Absolute bias", &self.absolute_bias),
            ),
        ]
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn around(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-9 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Axis { lo: lo - pad, hi: hi + pad }
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) * (self.hi - v) / (self.hi - self.lo)
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn y_axis(s: &mut String, axis: &Axis) {
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}" stroke="black"/>"#,
        HEIGHT - BOTTOM
    );
    for k in 0..=4 {
        let v = axis.lo + (axis.hi - axis.lo) * k as f64 / 4.0;
        let y = axis.y(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0
        );
    }
    if axis.lo < 0.0 && axis.hi > 0.0 {
        let y = axis.y(0.0);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            WIDTH - RIGHT
        );
    }
}

fn slot(i: usize, count: usize) -> (f64, f64) {
    let span = (WIDTH - LEFT - RIGHT) / count.max(1) as f64;
    (LEFT + span * (i as f64 + 0.5), span)
}

fn label(s: &mut String, x: f64, text: &str) {
    let _ = writeln!(
        s,
        r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        HEIGHT - BOTTOM + 18.0,
        escape(text)
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn bar_chart_svg(title: &str, bars: &[BarDatum]) -> String {
    let axis = Axis {
        lo: 0.0,
        hi: 1.0,
    };
    let mut s = header(title);
    y_axis(&mut s, &axis);
    for (i, b) in bars.iter().enumerate() {
        let (x, span) = slot(i, bars.len());
        if b.mean.is_finite() {
            let top = axis.y(b.mean);
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#4c78a8"/>"##,
                x - 0.3 * span,
                0.6 * span,
                axis.y(0.0) - top
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{:.3}</text>"#,
                top - 4.0,
                b.mean
            );
        }
        if b.median.is_finite() {
            let y = axis.y(b.median);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="2"/>"#,
                x - 0.3 * span,
                x + 0.3 * span
            );
        }
        label(&mut s, x, &b.label);
    }
    s.push_str("</svg>\n");
    s
}

pub fn box_plot_svg(title: &str, boxes: &[BoxStats]) -> String {
    let axis = Axis::around(
        boxes
            .iter()
            .flat_map(|b| [b.min, b.max].into_iter().chain(b.outliers.iter().copied())),
    );
    let mut s = header(title);
    y_axis(&mut s, &axis);
    for (i, b) in boxes.iter().enumerate() {
        let (x, span) = slot(i, boxes.len());
        let half = 0.25 * span;
        let (yq1, yq3, ymed) = (axis.y(b.q1), axis.y(b.q3), axis.y(b.median));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{yq3:.2}" stroke="black"/><line x1="{x:.2}" y1="{yq1:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            axis.y(b.upper_whisker),
            axis.y(b.lower_whisker)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{yq3:.2}" width="{:.2}" height="{:.2}" fill="#9ecae9" stroke="black"/>"##,
            x - half,
            2.0 * half,
            yq1 - yq3
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ymed:.2}" x2="{:.2}" y2="{ymed:.2}" stroke="black" stroke-width="2"/>"#,
            x - half,
            x + half
        );
        for o in &b.outliers {
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{:.2}" r="3" fill="none" stroke="black"/>"#,
                axis.y(*o)
            );
        }
        label(&mut s, x, &b.label);
    }
    s.push_str("</svg>\n");
    s
}
