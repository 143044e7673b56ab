//! Hypothesis tests and effect sizes. All tests are two-sided.

use std::fmt;

use serde::{Deserialize, Serialize};

mod anova;
mod fisher;
mod paired;
mod shapiro;
mod ttest;
mod wilcoxon;

pub use anova::{two_way_anova, AnovaObservation, AnovaTable};
pub use fisher::{fisher_exact, fisher_p_value, odds_ratio_cmle, odds_ratio_sample, ContingencyTable2x2};
pub use paired::{cohens_d, compare_paired};
pub use shapiro::{normality_check, shapiro_wilk, ShapiroWilk, NORMALITY_ALPHA};
pub use ttest::paired_t_test;
pub use wilcoxon::{wilcoxon_signed_rank, EXACT_LIMIT};

/// Significance level used throughout.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    EtaSquared,
    CohensD,
    OddsRatio,
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EffectKind::EtaSquared => "eta_squared",
            EffectKind::CohensD => "cohens_d",
            EffectKind::OddsRatio => "odds_ratio",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    pub kind: EffectKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub method: String,
    pub statistic: f64,
    pub p_value: f64,
    pub effect: Option<EffectSize>,
    pub n: usize,
    pub notes: Vec<String>,
}

impl StatReport {
    pub(crate) fn new(method: impl Into<String>, statistic: f64, p_value: f64, n: usize) -> Self {
        StatReport {
            method: method.into(),
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            effect: None,
            n,
            notes: Vec::new(),
        }
    }

    pub(crate) fn with_effect(mut self, kind: EffectKind, value: f64) -> Self {
        self.effect = value.is_finite().then_some(EffectSize { kind, value });
        self
    }

    pub(crate) fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn significant(&self) -> bool {
        self.p_value < ALPHA
    }

    pub fn effect_value(&self) -> Option<f64> {
        self.effect.map(|e| e.value)
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}
