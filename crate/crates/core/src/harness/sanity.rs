//! Defect-rate drift between the first and second half of a project's
//! releases.

use serde::{Deserialize, Serialize};

use crate::dataset::{split_halves, ProjectDataset};
use crate::error::{Error, Result};
use crate::stats::{fisher_exact, odds_ratio_cmle, ContingencyTable2x2, ALPHA};

/// Per-half unit counts: `(rows, defective)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfCounts {
    pub project: String,
    pub first: (usize, usize),
    pub second: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityRow {
    pub project: String,
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub first_rate: f64,
    pub second_rate: f64,
    pub difference: f64,
    /// `(second − first) / first`; absent when the first half has no defects.
    pub relative_difference: Option<f64>,
    pub p_value: f64,
    /// Sample odds ratio, Haldane-corrected on zero cells.
    pub odds_ratio: f64,
    /// Conditional maximum-likelihood odds ratio; absent when unbounded.
    pub odds_ratio_cmle: Option<f64>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityFailure {
    pub project: String,
    pub reason: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SanityTable {
    pub rows: Vec<SanityRow>,
    pub failures: Vec<SanityFailure>,
    /// Rows with p below the significance level.
    pub significant_count: usize,
}

fn rate((n, d): (usize, usize)) -> f64 {
    d as f64 / n as f64
}

pub fn sanity_row(counts: &HalfCounts) -> Result<SanityRow> {
    for (n, d) in [counts.first, counts.second] {
        if n == 0 || d > n {
            return Err(Error::DegenerateData(format!(
                "half with {d} defective of {n} rows"
            )));
        }
    }
    let table = ContingencyTable2x2::halves(counts.first, counts.second);
    let report = fisher_exact(&table);
    let (r1, r2) = (rate(counts.first), rate(counts.second));
    let cmle = odds_ratio_cmle(&table);
    Ok(SanityRow {
        project: counts.project.clone(),
        first: counts.first,
        second: counts.second,
        first_rate: r1,
        second_rate: r2,
        difference: r2 - r1,
        relative_difference: (r1 > 0.0).then(|| (r2 - r1) / r1),
        p_value: report.p_value,
        odds_ratio: report.effect_value().unwrap_or(f64::NAN),
        odds_ratio_cmle: cmle.is_finite().then_some(cmle),
        significant: report.p_value < ALPHA,
    })
}

pub fn half_counts<T>(dataset: &ProjectDataset<T>) -> Result<HalfCounts> {
    let halves = split_halves(dataset)?;
    Ok(HalfCounts {
        project: dataset.project_name.clone(),
        first: halves.first_counts(),
        second: halves.second_counts(),
    })
}

/// One row per project; failures are recorded and the rest continue.
pub fn sanity_table(counts: impl IntoIterator<Item = Result<HalfCounts>>, names: &[String]) -> SanityTable {
    let mut table = SanityTable::default();
    for (i, c) in counts.into_iter().enumerate() {
        match c.and_then(|c| sanity_row(&c)) {
            Ok(row) => table.rows.push(row),
            Err(e) => table.failures.push(SanityFailure {
                project: names.get(i).cloned().unwrap_or_else(|| format!("#{i}")),
                reason: e.kind().to_string(),
                detail: e.to_string(),
            }),
        }
    }
    table.significant_count = table.rows.iter().filter(|r| r.significant).count();
    table
}

pub fn sanity_check<T>(datasets: &[ProjectDataset<T>]) -> SanityTable {
    let names: Vec<String> = datasets.iter().map(|d| d.project_name.clone()).collect();
    sanity_table(datasets.iter().map(half_counts), &names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ant_counts() {
        let r = sanity_row(&HalfCounts {
            project: "ant".into(),
            first: (596, 92),
            second: (1096, 258),
        })
        .unwrap();
        assert!((r.first_rate - 0.154).abs() < 5e-4);
        assert!((r.second_rate - 0.235).abs() < 5e-4);
        assert!((r.odds_ratio - 1.68).abs() < 0.01);
        assert!(r.p_value < 0.001 && r.significant);
        assert!((r.relative_difference.unwrap() - 0.52).abs() < 0.01);
    }

    #[test]
    fn failures_do_not_stop_the_table() {
        let t = sanity_table(
            vec![
                Ok(HalfCounts { project: "a".into(), first: (10, 2), second: (10, 8) }),
                Err(Error::TooFewReleases { needed: 2, found: 1 }),
            ],
            &["a".into(), "b".into()],
        );
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.failures[0].project, "b");
        assert_eq!(t.failures[0].reason, "too_few_releases");
    }

    #[test]
    fn zero_first_rate() {
        let r = sanity_row(&HalfCounts { project: "z".into(), first: (10, 0), second: (10, 5) }).unwrap();
        assert_eq!(r.relative_difference, None);
        assert_eq!(r.odds_ratio_cmle, None);
        assert!(r.odds_ratio.is_finite());
    }
}
