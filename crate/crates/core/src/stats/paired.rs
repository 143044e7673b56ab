use super::{mean, normality_check, paired_t_test, sample_sd, wilcoxon_signed_rank, EffectKind, StatReport};
use crate::error::{Error, Result};

/// Paired Cohen's d: mean difference over the standard deviation of the
/// differences. NaN when the differences have no spread.
pub fn cohens_d(differences: &[f64]) -> f64 {
    if differences.len() < 2 {
        return f64::NAN;
    }
    let sd = sample_sd(differences);
    if sd == 0.0 {
        f64::NAN
    } else {
        mean(differences) / sd
    }
}

/// Paired comparison of `x` against `y`: a t-test when both samples pass the
/// Shapiro–Wilk screen, the Wilcoxon signed-rank test otherwise. Identical
/// samples are reported as no difference.
pub fn compare_paired(x_name: &str, y_name: &str, pairs: &[(f64, f64)]) -> Result<StatReport> {
    let n = pairs.len();
    if n < 3 {
        return Err(Error::TooFew { needed: 3, found: n });
    }
    let label = format!("{x_name} vs {y_name}");
    if pairs.iter().all(|(x, y)| x == y) {
        return Ok(StatReport::new("no difference (identical samples)", 0.0, 1.0, n)
            .with_effect(EffectKind::CohensD, 0.0)
            .note(label));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (x_normal, x_sw) = normality_check(&xs)?;
    let (y_normal, y_sw) = normality_check(&ys)?;
    let test = if x_normal && y_normal {
        match paired_t_test(pairs) {
            Err(Error::ZeroVariance) => wilcoxon_signed_rank(pairs)?
                .note("constant nonzero differences; t-test undefined"),
            other => other?,
        }
    } else {
        wilcoxon_signed_rank(pairs)?
    };
    let d: Vec<f64> = pairs.iter().map(|(x, y)| x - y).collect();
    let mut report = test
        .with_effect(EffectKind::CohensD, cohens_d(&d))
        .note(label)
        .note(format!("Shapiro-Wilk {x_name}: W {:.4}, p {:.4}", x_sw.statistic, x_sw.p_value))
        .note(format!("Shapiro-Wilk {y_name}: W {:.4}, p {:.4}", y_sw.statistic, y_sw.p_value));
    report.notes.rotate_right(3);
    Ok(report)
}
