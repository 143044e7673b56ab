use statrs::distribution::{ContinuousCDF, Normal};

use super::paired::cohens_d;
use super::{EffectKind, StatReport};
use crate::error::{Error, Result};

/// Largest number of nonzero differences handled by exact enumeration.
pub const EXACT_LIMIT: usize = 20;

/// Average ranks of `values` (1-based), with the tie group sizes.
pub(crate) fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

/// Two-sided signed-rank test on `x − y`. Zero differences are dropped and
/// tied magnitudes share average ranks. The statistic is `W+ − W−`, so
/// swapping the samples flips its sign and leaves the p-value unchanged.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<StatReport> {
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Err(Error::AllZeroDifferences);
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = average_ranks(&magnitudes);
    let w_plus: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let statistic = 2.0 * w_plus - total;
    let dropped = pairs.len() - n;

    let (p, how) = if n <= EXACT_LIMIT {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        (exact_p(&doubled, (2.0 * w_plus).round() as usize), "exact")
    } else {
        let mean = total / 2.0;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = (n * (n + 1) * (2 * n + 1)) as f64 / 24.0 - tie_term;
        let z = w_plus - mean;
        let z = (z - 0.5 * z.signum()) / var.sqrt();
        let normal = Normal::standard();
        (
            2.0 * normal.cdf(z).min(normal.sf(z)),
            "normal approximation with continuity and tie correction",
        )
    };
    let d = cohens_d(&diffs_with_zeros(pairs));
    let mut report = StatReport::new("Wilcoxon signed-rank (two-sided)", statistic, p.min(1.0), n)
        .with_effect(EffectKind::CohensD, d)
        .note(how)
        .note(format!("W+ = {w_plus}"));
    if dropped > 0 {
        report = report.note(format!("{dropped} zero differences dropped"));
    }
    Ok(report)
}

fn diffs_with_zeros(pairs: &[(f64, f64)]) -> Vec<f64> {
    pairs.iter().map(|(x, y)| x - y).collect()
}

/// Null distribution of the doubled positive rank sum by dynamic programming
/// over the `2^n` equally likely sign patterns.
fn exact_p(doubled: &[usize], observed: usize) -> f64 {
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0f64; max + 1];
    counts[0] = 1.0;
    for &r in doubled {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = 2f64.powi(doubled.len() as i32);
    let lower: f64 = counts[..=observed].iter().sum();
    let upper: f64 = counts[observed..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_differences() {
        assert!(matches!(
            wilcoxon_signed_rank(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(Error::AllZeroDifferences)
        ));
    }

    #[test]
    fn five_positive_differences() {
        let pairs: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64 + 1.0, 0.5)).collect();
        let r = wilcoxon_signed_rank(&pairs).unwrap();
        assert!((r.p_value - 0.0625).abs() < 1e-15);
        assert_eq!(r.statistic, 15.0);
    }

    #[test]
    fn swapping_samples() {
        let pairs = [(1.0, 0.2), (0.3, 0.9), (2.0, 1.1), (0.4, 0.45), (3.0, 1.0), (0.7, 0.1)];
        let swapped: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (y, x)).collect();
        let a = wilcoxon_signed_rank(&pairs).unwrap();
        let b = wilcoxon_signed_rank(&swapped).unwrap();
        assert_eq!(a.p_value, b.p_value);
        assert_eq!(a.statistic, -b.statistic);
    }

    #[test]
    fn normal_branch_matches_reference() {
        // Differences 1..=25, every third one negative;
        // reference p from an independent implementation.
        let pairs: Vec<(f64, f64)> = (1..=25)
            .map(|i| {
                let d = i as f64 * if i % 3 == 0 { -1.0 } else { 1.0 };
                (d, 0.0)
            })
            .collect();
        let r = wilcoxon_signed_rank(&pairs).unwrap();
        assert!(r.notes[0].starts_with("normal"));
        assert!((r.p_value - REFERENCE_P25).abs() < 1e-10, "{}", r.p_value);
    }

    const REFERENCE_P25: f64 = 0.14623118542852126;

    #[test]
    fn normal_branch_with_ties() {
        let d = [
            1, 2, 2, 3, -4, 5, 5, -5, 6, 7, 8, 9, -10, 11, 12, 13, 14, -15, 16, 17, 18, 19, 20, 21,
            -22,
        ];
        let pairs: Vec<(f64, f64)> = d.iter().map(|&v| (v as f64, 0.0)).collect();
        let r = wilcoxon_signed_rank(&pairs).unwrap();
        assert!((r.p_value - 0.011412036386001651).abs() < 1e-10, "{}", r.p_value);
    }

    #[test]
    fn average_ranks_with_ties() {
        let (r, t) = average_ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(t, vec![1, 1, 2]);
    }
}
