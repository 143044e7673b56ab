use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{default_roster, ClassifierSpec};
use crate::error::{Error, Result};
use crate::validation::TechniqueConfig;

/// Thirty minutes.
pub const DEFAULT_CELL_BUDGET_SECS: f64 = 1800.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
    Svg,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 4] = [
        ReportFormat::Csv,
        ReportFormat::Json,
        ReportFormat::Markdown,
        ReportFormat::Svg,
    ];
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "svg" => Ok(ReportFormat::Svg),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "markdown",
            ReportFormat::Svg => "svg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

/// `"default"` or an explicit list of classifier specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RosterConfig {
    Named(String),
    Specs(Vec<ClassifierSpec>),
}

impl Default for RosterConfig {
    fn default() -> Self {
        RosterConfig::Named("default".into())
    }
}

impl RosterConfig {
    pub fn resolve(&self) -> Result<Vec<ClassifierSpec>> {
        let roster = match self {
            RosterConfig::Named(n) if n == "default" => default_roster(),
            RosterConfig::Named(n) => {
                return Err(Error::Config(format!("unknown roster {n:?}; use \"default\" or a list")))
            }
            RosterConfig::Specs(specs) => specs.clone(),
        };
        if roster.is_empty() {
            return Err(Error::Config("roster is empty".into()));
        }
        let mut names = BTreeSet::new();
        for spec in &roster {
            spec.validate()?;
            if !names.insert(spec.name.as_str()) {
                return Err(Error::Config(format!("duplicate classifier name {:?}", spec.name)));
            }
        }
        Ok(roster)
    }
}

fn default_techniques() -> Vec<TechniqueConfig> {
    TechniqueConfig::defaults()
}

fn default_budget() -> f64 {
    DEFAULT_CELL_BUDGET_SECS
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_formats() -> Vec<ReportFormat> {
    ReportFormat::ALL.to_vec()
}

/// A full experiment description. Relative paths resolve against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset manifest paths.
    pub datasets: Vec<PathBuf>,
    #[serde(default)]
    pub roster: RosterConfig,
    #[serde(default = "default_techniques")]
    pub techniques: Vec<TechniqueConfig>,
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub cell_budget_secs: f64,
    /// Worker threads; absent means one per available core.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    #[serde(default)]
    pub precision: Precision,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn new(datasets: Vec<PathBuf>, seed: u64) -> Self {
        RunConfig {
            datasets,
            roster: RosterConfig::default(),
            techniques: default_techniques(),
            seed,
            cell_budget_secs: DEFAULT_CELL_BUDGET_SECS,
            workers: None,
            out_dir: default_out_dir(),
            formats: default_formats(),
            precision: Precision::F64,
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::json(context, e))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text, &path.display().to_string())?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets listed".into()));
        }
        if self.techniques.is_empty() {
            return Err(Error::Config("no techniques listed".into()));
        }
        let mut ids = BTreeSet::new();
        for t in &self.techniques {
            t.validate()?;
            if !ids.insert(t.id()) {
                return Err(Error::Config(format!("technique {} listed twice", t.id())));
            }
        }
        self.roster.resolve()?;
        if !(self.cell_budget_secs > 0.0) {
            return Err(Error::Config("cell_budget_secs must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.formats.is_empty() {
            return Err(Error::Config("no report formats listed".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn dataset_paths(&self) -> Vec<PathBuf> {
        self.datasets.iter().map(|p| self.resolve(p)).collect()
    }

    pub fn out_path(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    pub fn wants(&self, format: ReportFormat) -> bool {
        self.formats.contains(&format)
    }

    pub fn worker_count(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("run config", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_json(r#"{"datasets":["a.json"],"seed":7}"#, "t").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.techniques.len(), 3);
        assert_eq!(c.roster.resolve().unwrap().len(), 9);
        assert_eq!(c.cell_budget_secs, 1800.0);
        assert_eq!(c.formats.len(), 4);
    }

    #[test]
    fn seed_is_mandatory_and_unknown_keys_rejected() {
        assert!(RunConfig::from_json(r#"{"datasets":["a.json"]}"#, "t").is_err());
        assert!(RunConfig::from_json(r#"{"datasets":["a.json"],"seed":1,"sede":2}"#, "t").is_err());
    }

    #[test]
    fn explicit_roster_and_validation() {
        let c = RunConfig::from_json(
            r#"{"datasets":["a.json"],"seed":1,
                "roster":[{"name":"RF-10","classifier":{"RandomForest":{"trees":10}}},
                          {"name":"NB","classifier":{"NaiveBayes":{}}}],
                "techniques":[{"kind":"walk_forward"}],
                "formats":["csv","md"]}"#,
            "t",
        );
        assert!(c.is_err(), "md is not a serde name");
        let c = RunConfig::from_json(
            r#"{"datasets":["a.json"],"seed":1,
                "roster":[{"name":"RF-10","classifier":{"RandomForest":{"trees":10}}}],
                "techniques":[{"kind":"walk_forward"}],
                "formats":["csv","markdown"]}"#,
            "t",
        )
        .unwrap();
        assert_eq!(c.roster.resolve().unwrap()[0].name, "RF-10");
        for bad in [
            r#"{"datasets":[],"seed":1}"#,
            r#"{"datasets":["a"],"seed":1,"techniques":[]}"#,
            r#"{"datasets":["a"],"seed":1,"roster":"fancy"}"#,
            r#"{"datasets":["a"],"seed":1,"workers":0}"#,
            r#"{"datasets":["a"],"seed":1,"techniques":[{"kind":"walk_forward"},{"kind":"walk_forward"}]}"#,
        ] {
            assert!(RunConfig::from_json(bad, "t").is_err(), "{bad}");
        }
    }

    #[test]
    fn format_parsing() {
        assert_eq!("md".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert!(matches!("pdf".parse::<ReportFormat>(), Err(Error::UnknownFormat(_))));
    }
}
