//! Multi-release project datasets.
//!
//! A project is an ordered list of releases; each release is a table of code
//! units (one row per source class) carrying numeric metrics and a defect
//! count. Release order is positional and never used as a predictor.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::LabeledMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The twenty CK/OO metrics of the PROMISE class-level datasets, in file order.
pub const PROMISE_FEATURES: [&str; 20] = [
    "wmc", "dit", "noc", "cbo", "rfc", "lcom", "ca", "ce", "npm", "lcom3", "loc", "dam", "moa",
    "mfa", "cam", "ic", "cbm", "amc", "max_cc", "avg_cc",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeUnit<T> {
    pub unit_name: String,
    pub features: Vec<T>,
    pub defect_count: u64,
    pub defective: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleaseTable<T> {
    /// 1-based position within the project.
    pub release_id: usize,
    pub release_label: String,
    pub feature_names: Vec<String>,
    pub rows: Vec<CodeUnit<T>>,
}

impl<T> ReleaseTable<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn defective_count(&self) -> usize {
        self.rows.iter().filter(|r| r.defective).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectDataset<T> {
    pub project_name: String,
    pub releases: Vec<ReleaseTable<T>>,
    pub feature_names: Vec<String>,
    /// Defective units across all releases divided by the feature count.
    pub epv: f64,
}

/// How CSV headers map onto identifiers, features and the defect label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    /// Columns concatenated (with `:`) into the unit name. Every header
    /// occurrence of a listed name is used, so PROMISE's duplicated `name`
    /// column contributes both the project and class name.
    #[serde(default)]
    pub id_columns: Vec<String>,
    /// When set, a single file may hold several releases, grouped by this
    /// column in order of first appearance.
    #[serde(default)]
    pub release_column: Option<String>,
    pub feature_columns: Vec<String>,
    pub label_column: String,
}

impl ColumnMapping {
    /// The PROMISE class-level layout: `name,version,name,<20 metrics>,bug`.
    pub fn promise() -> Self {
        ColumnMapping {
            id_columns: vec!["name".into(), "version".into()],
            release_column: None,
            feature_columns: PROMISE_FEATURES.iter().map(|s| s.to_string()).collect(),
            label_column: "bug".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.feature_columns.is_empty() {
            return Err(Error::Config("column mapping needs at least one feature column".into()));
        }
        let mut reserved: Vec<&str> = self.id_columns.iter().map(String::as_str).collect();
        reserved.push(&self.label_column);
        if let Some(r) = &self.release_column {
            reserved.push(r);
        }
        reserved.extend(["release_id", "unit_name"]);
        for f in &self.feature_columns {
            if reserved.contains(&f.as_str()) {
                return Err(Error::Config(format!(
                    "column `{f}` cannot be both a feature and an identifier/label"
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for f in &self.feature_columns {
            if !seen.insert(f) {
                return Err(Error::Config(format!("feature column `{f}` listed twice")));
            }
        }
        Ok(())
    }
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self::promise()
    }
}

/// Per-file parsing policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOptions {
    /// Name used in error messages.
    pub source: String,
    /// A unit is defective iff its label exceeds this value.
    pub label_threshold: u64,
    /// Replace missing or non-finite feature cells with the column median of
    /// the same file instead of rejecting the file.
    pub impute_missing: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            source: "<memory>".into(),
            label_threshold: 0,
            impute_missing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRelease {
    pub label: String,
    pub path: PathBuf,
}

/// JSON description of one project: ordered release files plus the column
/// mapping. Relative paths resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub project_name: String,
    pub releases: Vec<ManifestRelease>,
    #[serde(default)]
    pub columns: ColumnMapping,
    #[serde(default)]
    pub label_threshold: u64,
    #[serde(default)]
    pub impute_missing: bool,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let manifest: DatasetManifest =
            serde_json::from_str(text).map_err(|e| Error::json(context, e))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest = Self::from_json(&text, &path.display().to_string())?;
        manifest.base_dir = path.parent().map(Path::to_path_buf);
        Ok(manifest)
    }

    fn validate(&self) -> Result<()> {
        if self.releases.is_empty() {
            return Err(Error::Empty);
        }
        let mut paths = std::collections::BTreeSet::new();
        for r in &self.releases {
            if !paths.insert(&r.path) {
                return Err(Error::Config(format!(
                    "manifest `{}` lists {} twice",
                    self.project_name,
                    r.path.display()
                )));
            }
        }
        self.columns.validate()
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if path.is_relative() => base.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn options_for(&self, source: String) -> ParseOptions {
        ParseOptions {
            source,
            label_threshold: self.label_threshold,
            impute_missing: self.impute_missing,
        }
    }

    /// Read every release file and merge them in manifest order.
    pub fn load_dataset<T: Scalar>(&self) -> Result<ProjectDataset<T>> {
        let mut tables = Vec::new();
        for release in &self.releases {
            let path = self.resolve(&release.path);
            let raw = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let opts = self.options_for(path.display().to_string());
            if self.columns.release_column.is_some() {
                tables.extend(parse_multi_release_csv(&raw, &self.columns, &opts)?);
            } else {
                let mut table = parse_release_csv(&raw, &self.columns, &opts)?;
                table.release_label = release.label.clone();
                tables.push(table);
            }
        }
        merge_releases(tables, &self.project_name)
    }
}

struct ParsedRow<T> {
    release: Option<String>,
    unit: CodeUnit<T>,
}

fn parse_label(raw: &str) -> Option<u64> {
    let s = raw.trim();
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "y" => return Some(1),
        "false" | "no" | "n" => return Some(0),
        _ => {}
    }
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 => Some(v as u64),
        _ => None,
    }
}

fn parse_rows<T: Scalar>(
    raw: &[u8],
    mapping: &ColumnMapping,
    opts: &ParseOptions,
) -> Result<Vec<ParsedRow<T>>> {
    mapping.validate()?;
    let text = std::str::from_utf8(raw).map_err(|e| Error::BadValue {
        file: opts.source.clone(),
        line: 0,
        column: "<bytes>".into(),
        value: format!("invalid UTF-8: {e}"),
    })?;
    let csv_err = |source| Error::Csv {
        file: opts.source.clone(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                file: opts.source.clone(),
                column: name.to_string(),
            })
    };

    let feature_idx: Vec<usize> = mapping
        .feature_columns
        .iter()
        .map(|f| find(f))
        .collect::<Result<_>>()?;
    let label_idx = find(&mapping.label_column)?;
    let release_idx = mapping.release_column.as_deref().map(find).transpose()?;
    for id in &mapping.id_columns {
        find(id)?;
    }
    let id_idx: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| mapping.id_columns.iter().any(|c| c == *h))
        .map(|(i, _)| i)
        .collect();

    // Cells are parsed as f64 first so that imputation can see the whole column.
    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    let mut rest: Vec<(u64, Option<String>, String, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| record.get(i).unwrap_or("");
        let mut row = Vec::with_capacity(feature_idx.len());
        for (&i, name) in feature_idx.iter().zip(&mapping.feature_columns) {
            let raw = cell(i);
            let parsed = raw.parse::<f64>().ok().filter(|v| v.is_finite());
            if parsed.is_none() && !opts.impute_missing {
                return Err(Error::BadValue {
                    file: opts.source.clone(),
                    line,
                    column: name.clone(),
                    value: raw.to_string(),
                });
            }
            row.push(parsed);
        }
        let label_raw = cell(label_idx);
        let label = parse_label(label_raw).ok_or_else(|| Error::BadValue {
            file: opts.source.clone(),
            line,
            column: mapping.label_column.clone(),
            value: label_raw.to_string(),
        })?;
        let name = if id_idx.is_empty() {
            format!("row{line}")
        } else {
            id_idx.iter().map(|&i| cell(i)).collect::<Vec<_>>().join(":")
        };
        let release = release_idx.map(|i| cell(i).to_string());
        cells.push(row);
        rest.push((line, release, name, label));
    }

    let medians: Vec<Option<f64>> = (0..feature_idx.len())
        .map(|j| {
            let mut col: Vec<f64> = cells.iter().filter_map(|r| r[j]).collect();
            if col.is_empty() {
                return None;
            }
            col.sort_by(f64::total_cmp);
            let m = col.len() / 2;
            Some(if col.len() % 2 == 1 {
                col[m]
            } else {
                (col[m - 1] + col[m]) / 2.0
            })
        })
        .collect();

    let mut out = Vec::with_capacity(cells.len());
    for (row, (line, release, unit_name, label)) in cells.into_iter().zip(rest) {
        let features = row
            .into_iter()
            .enumerate()
            .map(|(j, v)| {
                v.or(medians[j]).map(T::of).ok_or_else(|| Error::BadValue {
                    file: opts.source.clone(),
                    line,
                    column: mapping.feature_columns[j].clone(),
                    value: "<no finite value in column to impute from>".into(),
                })
            })
            .collect::<Result<Vec<T>>>()?;
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadValue {
                file: opts.source.clone(),
                line,
                column: "<feature>".into(),
                value: "value overflows the scalar type".into(),
            });
        }
        out.push(ParsedRow {
            release,
            unit: CodeUnit {
                unit_name,
                features,
                defect_count: label,
                defective: label > opts.label_threshold,
            },
        });
    }
    Ok(out)
}

/// Parse one release file. The returned table has `release_id` 1 and the
/// source name as its label; [`merge_releases`] renumbers.
pub fn parse_release_csv<T: Scalar>(
    raw: &[u8],
    mapping: &ColumnMapping,
    opts: &ParseOptions,
) -> Result<ReleaseTable<T>> {
    let rows = parse_rows(raw, mapping, opts)?;
    Ok(ReleaseTable {
        release_id: 1,
        release_label: opts.source.clone(),
        feature_names: mapping.feature_columns.clone(),
        rows: rows.into_iter().map(|r| r.unit).collect(),
    })
}

/// Parse a file holding several releases distinguished by
/// `mapping.release_column`; releases keep their order of first appearance.
pub fn parse_multi_release_csv<T: Scalar>(
    raw: &[u8],
    mapping: &ColumnMapping,
    opts: &ParseOptions,
) -> Result<Vec<ReleaseTable<T>>> {
    if mapping.release_column.is_none() {
        return Err(Error::Config("release_column is not set".into()));
    }
    let mut tables: Vec<ReleaseTable<T>> = Vec::new();
    for row in parse_rows(raw, mapping, opts)? {
        let label = row.release.unwrap_or_default();
        match tables.iter_mut().find(|t| t.release_label == label) {
            Some(t) => t.rows.push(row.unit),
            None => tables.push(ReleaseTable {
                release_id: tables.len() + 1,
                release_label: label,
                feature_names: mapping.feature_columns.clone(),
                rows: vec![row.unit],
            }),
        }
    }
    Ok(tables)
}

/// Merge release tables, in the given order, into one project.
pub fn merge_releases<T: Scalar>(
    tables: Vec<ReleaseTable<T>>,
    project_name: &str,
) -> Result<ProjectDataset<T>> {
    let first = tables.first().ok_or(Error::Empty)?;
    let feature_names = first.feature_names.clone();
    if feature_names.is_empty() {
        return Err(Error::Config("releases have no feature columns".into()));
    }
    let mut releases = Vec::with_capacity(tables.len());
    for (i, mut t) in tables.into_iter().enumerate() {
        if t.feature_names != feature_names {
            return Err(Error::SchemaMismatch {
                release: t.release_label,
            });
        }
        if let Some(bad) = t.rows.iter().find(|r| r.features.len() != feature_names.len()) {
            return Err(Error::WidthMismatch {
                expected: feature_names.len(),
                found: bad.features.len(),
            });
        }
        t.release_id = i + 1;
        releases.push(t);
    }
    Ok(ProjectDataset::from_parts(project_name, releases, feature_names))
}

impl<T: Scalar> ProjectDataset<T> {
    fn from_parts(
        project_name: &str,
        releases: Vec<ReleaseTable<T>>,
        feature_names: Vec<String>,
    ) -> Self {
        let defective: usize = releases.iter().map(ReleaseTable::defective_count).sum();
        let epv = defective as f64 / feature_names.len() as f64;
        ProjectDataset {
            project_name: project_name.to_string(),
            releases,
            feature_names,
            epv,
        }
    }

    pub fn n_releases(&self) -> usize {
        self.releases.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.releases.iter().map(ReleaseTable::len).sum()
    }

    pub fn defective_count(&self) -> usize {
        self.releases.iter().map(ReleaseTable::defective_count).sum()
    }

    /// Rows in release-major order, the indexing used by split plans.
    pub fn rows(&self) -> impl Iterator<Item = (&ReleaseTable<T>, &CodeUnit<T>)> {
        self.releases
            .iter()
            .flat_map(|r| r.rows.iter().map(move |u| (r, u)))
    }

    /// Flatten into a labeled matrix; release ids survive only as row tags.
    pub fn to_matrix(&self) -> LabeledMatrix<T> {
        LabeledMatrix::from_releases(self.releases.iter())
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            project: self.project_name.clone(),
            releases: self.n_releases(),
            observations: self.n_rows(),
            features: self.n_features(),
            defective: self.defective_count(),
            epv: self.epv,
        }
    }
}

/// At least three releases are needed: two for walk-forward on part A plus
/// the held-out last release.
pub fn eligible_for_experiment<T>(dataset: &ProjectDataset<T>) -> bool {
    dataset.releases.len() >= 3
}

/// Part A = releases 1..n-1, part B = release n.
pub fn split_last_release<T: Scalar>(
    dataset: &ProjectDataset<T>,
) -> Result<(ProjectDataset<T>, ReleaseTable<T>)> {
    let n = dataset.n_releases();
    if n < 2 {
        return Err(Error::TooFewReleases { needed: 2, found: n });
    }
    let mut releases = dataset.releases.clone();
    let part_b = releases.pop().expect("n >= 2");
    let part_a = ProjectDataset::from_parts(
        &dataset.project_name,
        releases,
        dataset.feature_names.clone(),
    );
    Ok((part_a, part_b))
}

/// The two release halves used by the defect-rate drift check.
#[derive(Debug, Clone)]
pub struct Halves<'a, T> {
    pub first: Vec<&'a ReleaseTable<T>>,
    pub second: Vec<&'a ReleaseTable<T>>,
}

impl<T> Halves<'_, T> {
    pub fn first_counts(&self) -> (usize, usize) {
        counts(&self.first)
    }

    pub fn second_counts(&self) -> (usize, usize) {
        counts(&self.second)
    }
}

/// `(rows, defective)` over a set of releases.
fn counts<T>(releases: &[&ReleaseTable<T>]) -> (usize, usize) {
    releases
        .iter()
        .fold((0, 0), |(n, d), r| (n + r.len(), d + r.defective_count()))
}

/// Number of leading releases tagged "first": release m is "second" iff
/// m > ceil(n/2).
pub fn first_half_len(n: usize) -> usize {
    n.div_ceil(2)
}

pub fn split_halves<T>(dataset: &ProjectDataset<T>) -> Result<Halves<'_, T>> {
    let n = dataset.releases.len();
    if n < 2 {
        return Err(Error::TooFewReleases { needed: 2, found: n });
    }
    let cut = first_half_len(n);
    Ok(Halves {
        first: dataset.releases[..cut].iter().collect(),
        second: dataset.releases[cut..].iter().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EpvGroup {
    Low,
    High,
}

impl fmt::Display for EpvGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EpvGroup::Low => "Low",
            EpvGroup::High => "High",
        })
    }
}

/// Median split on EPV. Ties break by project name; on odd counts the median
/// project is Low.
pub fn epv_group(projects: &[(&str, f64)]) -> BTreeMap<String, EpvGroup> {
    let mut sorted: Vec<&(&str, f64)> = projects.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let low = projects.len().div_ceil(2);
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, (name, _))| {
            let g = if i < low { EpvGroup::Low } else { EpvGroup::High };
            (name.to_string(), g)
        })
        .collect()
}

/// EPV grouping over datasets.
pub fn epv_group_datasets<T>(datasets: &[ProjectDataset<T>]) -> BTreeMap<String, EpvGroup> {
    let pairs: Vec<(&str, f64)> = datasets
        .iter()
        .map(|d| (d.project_name.as_str(), d.epv))
        .collect();
    epv_group(&pairs)
}

/// The per-project statistics reported by `ingest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub project: String,
    pub releases: usize,
    pub observations: usize,
    pub features: usize,
    pub defective: usize,
    pub epv: f64,
}

impl DatasetSummary {
    pub fn epv_rounded(&self) -> u64 {
        self.epv.round() as u64
    }

    /// Column count as printed in dataset tables: features plus the label.
    pub fn columns(&self) -> usize {
        self.features + 1
    }
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} releases, {} observations, {} columns ({} features + label), EPV {} (≈{})",
            self.project,
            self.releases,
            self.observations,
            self.columns(),
            self.features,
            self.epv,
            self.epv_rounded()
        )
    }
}

pub const CANONICAL_RELEASE_ID: &str = "release_id";
pub const CANONICAL_RELEASE_LABEL: &str = "release_label";
pub const CANONICAL_UNIT: &str = "unit_name";
pub const CANONICAL_LABEL: &str = "defect_count";

/// Write the merged project as one CSV:
/// `release_id,release_label,unit_name,<features>,defect_count`.
pub fn write_canonical_csv<T: Scalar, W: std::io::Write>(
    dataset: &ProjectDataset<T>,
    out: W,
) -> Result<()> {
    let file = format!("{} (canonical)", dataset.project_name);
    let err = |source| Error::Csv {
        file: file.clone(),
        source,
    };
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![CANONICAL_RELEASE_ID, CANONICAL_RELEASE_LABEL, CANONICAL_UNIT];
    header.extend(dataset.feature_names.iter().map(String::as_str));
    header.push(CANONICAL_LABEL);
    w.write_record(&header).map_err(err)?;
    for (release, unit) in dataset.rows() {
        let mut rec = vec![
            release.release_id.to_string(),
            release.release_label.clone(),
            unit.unit_name.clone(),
        ];
        rec.extend(unit.features.iter().map(|v| v.to_string()));
        rec.push(unit.defect_count.to_string());
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(&file, e))?;
    Ok(())
}

/// Read a file produced by [`write_canonical_csv`].
pub fn read_canonical_csv<T: Scalar>(
    raw: &[u8],
    project_name: &str,
    label_threshold: u64,
) -> Result<ProjectDataset<T>> {
    let source = format!("{project_name} (canonical)");
    let mut reader = csv::Reader::from_reader(raw);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            file: source.clone(),
            source: e,
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let fixed = [CANONICAL_RELEASE_ID, CANONICAL_RELEASE_LABEL, CANONICAL_UNIT];
    for (i, name) in fixed.iter().enumerate() {
        if headers.get(i).map(String::as_str) != Some(*name) {
            return Err(Error::MissingColumn {
                file: source,
                column: name.to_string(),
            });
        }
    }
    if headers.last().map(String::as_str) != Some(CANONICAL_LABEL) || headers.len() < 5 {
        return Err(Error::MissingColumn {
            file: source,
            column: CANONICAL_LABEL.into(),
        });
    }
    let mapping = ColumnMapping {
        id_columns: vec![CANONICAL_UNIT.into()],
        release_column: Some(CANONICAL_RELEASE_ID.into()),
        feature_columns: headers[3..headers.len() - 1].to_vec(),
        label_column: CANONICAL_LABEL.into(),
    };
    let opts = ParseOptions {
        source,
        label_threshold,
        impute_missing: false,
    };
    let mut tables = parse_multi_release_csv(raw, &mapping, &opts)?;
    // Grouping was by id; restore the human labels.
    let mut labels = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            file: opts.source.clone(),
            source: e,
        })?;
        labels
            .entry(record.get(0).unwrap_or("").to_string())
            .or_insert_with(|| record.get(1).unwrap_or("").to_string());
    }
    for t in &mut tables {
        if let Some(label) = labels.get(&t.release_label) {
            t.release_label = label.clone();
        }
    }
    merge_releases(tables, project_name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(label: &str, defects: &[u64]) -> ReleaseTable<f64> {
        ReleaseTable {
            release_id: 1,
            release_label: label.into(),
            feature_names: vec!["loc".into(), "wmc".into()],
            rows: defects
                .iter()
                .enumerate()
                .map(|(i, &d)| CodeUnit {
                    unit_name: format!("{label}.C{i}"),
                    features: vec![i as f64, 1.0],
                    defect_count: d,
                    defective: d > 0,
                })
                .collect(),
        }
    }

    fn mapping(features: &[&str]) -> ColumnMapping {
        ColumnMapping {
            id_columns: vec!["name".into()],
            release_column: None,
            feature_columns: features.iter().map(|s| s.to_string()).collect(),
            label_column: "bug".into(),
        }
    }

    #[test]
    fn parses_single_clean_row() {
        let raw = b"name,loc,bug\nFoo,10,0\n";
        let t: ReleaseTable<f64> =
            parse_release_csv(raw, &mapping(&["loc"]), &ParseOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].features, vec![10.0]);
        assert!(!t.rows[0].defective);
        assert_eq!(t.rows[0].unit_name, "Foo");
    }

    #[test]
    fn nan_cell_is_rejected() {
        let raw = b"name,loc,bug\nFoo,NaN,0\n";
        let err = parse_release_csv::<f64>(raw, &mapping(&["loc"]), &ParseOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::BadValue { ref column, line: 2, .. } if column == "loc"));
    }

    #[test]
    fn missing_cell_and_text_are_rejected() {
        for raw in [&b"name,loc,bug\nFoo,,0\n"[..], b"name,loc,bug\nFoo,abc,1\n", b"name,loc,bug\nFoo,inf,1\n"] {
            assert!(matches!(
                parse_release_csv::<f64>(raw, &mapping(&["loc"]), &ParseOptions::default()),
                Err(Error::BadValue { .. })
            ));
        }
    }

    #[test]
    fn missing_header_is_reported() {
        let raw = b"name,wmc,bug\nFoo,1,0\n";
        let err = parse_release_csv::<f64>(raw, &mapping(&["loc"]), &ParseOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::MissingColumn { ref column, .. } if column == "loc"));
    }

    #[test]
    fn impute_uses_column_median() {
        let raw = b"name,loc,bug\nA,1,0\nB,,1\nC,5,0\nD,3,2\n";
        let opts = ParseOptions {
            impute_missing: true,
            ..ParseOptions::default()
        };
        let t: ReleaseTable<f64> = parse_release_csv(raw, &mapping(&["loc"]), &opts).unwrap();
        assert_eq!(t.rows[1].features, vec![3.0]);
        assert_eq!(t.defective_count(), 2);
    }

    #[test]
    fn label_threshold_and_boolean_labels() {
        let raw = b"name,loc,bug\nA,1,1\nB,2,3\n";
        let opts = ParseOptions {
            label_threshold: 1,
            ..ParseOptions::default()
        };
        let t: ReleaseTable<f64> = parse_release_csv(raw, &mapping(&["loc"]), &opts).unwrap();
        assert_eq!(
            t.rows.iter().map(|r| r.defective).collect::<Vec<_>>(),
            vec![false, true]
        );
        let raw = b"loc,defects\n1,false\n2,true\n";
        let m = ColumnMapping {
            id_columns: vec![],
            release_column: None,
            feature_columns: vec!["loc".into()],
            label_column: "defects".into(),
        };
        let t: ReleaseTable<f64> = parse_release_csv(raw, &m, &ParseOptions::default()).unwrap();
        assert_eq!(t.defective_count(), 1);
        assert_eq!(t.rows[0].unit_name, "row2");
    }

    #[test]
    fn promise_duplicate_name_column() {
        let mut header = String::from("name,version,name");
        let mut row = String::from("ant,1.3,org.Foo");
        for (i, f) in PROMISE_FEATURES.iter().enumerate() {
            header.push(',');
            header.push_str(f);
            row.push_str(&format!(",{i}"));
        }
        let raw = format!("{header},bug\n{row},2\n");
        let t: ReleaseTable<f64> =
            parse_release_csv(raw.as_bytes(), &ColumnMapping::promise(), &ParseOptions::default())
                .unwrap();
        assert_eq!(t.rows[0].unit_name, "ant:1.3:org.Foo");
        assert_eq!(t.rows[0].features.len(), 20);
        assert_eq!(t.rows[0].defect_count, 2);
        assert!(t.rows[0].defective);
    }

    #[test]
    fn feature_cannot_be_label() {
        let m = ColumnMapping {
            feature_columns: vec!["bug".into()],
            ..mapping(&[])
        };
        assert!(matches!(m.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn merge_assigns_ids_and_epv() {
        let d = merge_releases(vec![table("a", &[0, 1, 2]), table("b", &[0, 0, 5, 1])], "p")
            .unwrap();
        assert_eq!(d.n_releases(), 2);
        assert_eq!(d.releases[1].release_id, 2);
        assert_eq!(d.n_rows(), 7);
        assert_eq!(d.epv, 4.0 / 2.0);
    }

    #[test]
    fn merge_single_table() {
        let d = merge_releases(vec![table("a", &[0; 10])], "p").unwrap();
        assert_eq!(d.n_releases(), 1);
        assert_eq!(d.n_rows(), 10);
    }

    #[test]
    fn merge_rejects_schema_mismatch_and_empty() {
        let mut b = table("b", &[0]);
        b.feature_names = vec!["loc".into(), "cbo".into()];
        assert!(matches!(
            merge_releases(vec![table("a", &[0]), b], "p"),
            Err(Error::SchemaMismatch { .. })
        ));
        assert!(matches!(merge_releases::<f64>(vec![], "p"), Err(Error::Empty)));
    }

    fn project(n: usize) -> ProjectDataset<f64> {
        let tables = (0..n).map(|i| table(&format!("r{i}"), &[0, 1, 0])).collect();
        merge_releases(tables, "p").unwrap()
    }

    #[test]
    fn eligibility_boundary() {
        assert!(!eligible_for_experiment(&project(2)));
        assert!(eligible_for_experiment(&project(3)));
        assert!(eligible_for_experiment(&project(5)));
    }

    #[test]
    fn split_last_release_partitions() {
        let d = project(4);
        let (a, b) = split_last_release(&d).unwrap();
        assert_eq!(a.releases.iter().map(|r| r.release_id).collect::<Vec<_>>(), [1, 2, 3]);
        assert_eq!(b.release_id, 4);
        assert_eq!(a.n_rows() + b.len(), d.n_rows());
        let (a, b) = split_last_release(&project(2)).unwrap();
        assert_eq!(a.n_releases(), 1);
        assert_eq!(b.release_id, 2);
        assert!(matches!(
            split_last_release(&project(1)),
            Err(Error::TooFewReleases { .. })
        ));
    }

    #[test]
    fn halves_follow_ceiling_rule() {
        let ids = |v: &[&ReleaseTable<f64>]| v.iter().map(|r| r.release_id).collect::<Vec<_>>();
        let d = project(5);
        let h = split_halves(&d).unwrap();
        assert_eq!(ids(&h.first), [1, 2, 3]);
        assert_eq!(ids(&h.second), [4, 5]);
        let d = project(4);
        let h = split_halves(&d).unwrap();
        assert_eq!(ids(&h.first), [1, 2]);
        assert_eq!(ids(&h.second), [3, 4]);
        let d = project(2);
        let h = split_halves(&d).unwrap();
        assert_eq!(ids(&h.first), [1]);
        assert_eq!(ids(&h.second), [2]);
        assert!(split_halves(&project(1)).is_err());
    }

    #[test]
    fn epv_groups() {
        let g = epv_group(&[("a", 2.0), ("b", 90.0)]);
        assert_eq!(g["a"], EpvGroup::Low);
        assert_eq!(g["b"], EpvGroup::High);
        let g = epv_group(&[("d", 5.0), ("b", 5.0), ("c", 5.0), ("a", 5.0)]);
        assert_eq!(g["a"], EpvGroup::Low);
        assert_eq!(g["b"], EpvGroup::Low);
        assert_eq!(g["c"], EpvGroup::High);
        assert_eq!(g["d"], EpvGroup::High);
        let g = epv_group(&[("x", 1.0), ("y", 2.0), ("z", 3.0)]);
        assert_eq!(g["y"], EpvGroup::Low);
    }

    #[test]
    fn canonical_csv_round_trips() {
        let mut d = project(3);
        d.releases[1].rows[0].features[0] = 0.1 + 0.2;
        let mut buf = Vec::new();
        write_canonical_csv(&d, &mut buf).unwrap();
        let back: ProjectDataset<f64> = read_canonical_csv(&buf, "p", 0).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn manifest_rejects_unknown_keys_and_duplicates() {
        let ok = r#"{"project_name":"p","releases":[{"label":"a","path":"a.csv"}]}"#;
        let m = DatasetManifest::from_json(ok, "m").unwrap();
        assert_eq!(m.columns, ColumnMapping::promise());
        let unknown = r#"{"project_name":"p","releases":[],"bogus":1}"#;
        assert!(DatasetManifest::from_json(unknown, "m").is_err());
        let empty = r#"{"project_name":"p","releases":[]}"#;
        assert!(matches!(DatasetManifest::from_json(empty, "m"), Err(Error::Empty)));
        let dup = r#"{"project_name":"p","releases":[{"label":"a","path":"a.csv"},{"label":"b","path":"a.csv"}]}"#;
        assert!(DatasetManifest::from_json(dup, "m").is_err());
    }
}
