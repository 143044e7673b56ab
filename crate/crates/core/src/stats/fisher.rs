use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{EffectKind, StatReport};

/// `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable2x2 { a, b, c, d }
    }

    /// Rows are the first and second half, columns are clean and defective,
    /// so the odds ratio reads as the second half's defect odds over the
    /// first half's. Each half is `(rows, defective)`.
    pub fn halves(first: (usize, usize), second: (usize, usize)) -> Self {
        let (n1, d1) = (first.0 as u64, first.1 as u64);
        let (n2, d2) = (second.0 as u64, second.1 as u64);
        ContingencyTable2x2::new(n1 - d1, d1, n2 - d2, d2)
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn swap_columns(&self) -> Self {
        ContingencyTable2x2::new(self.b, self.a, self.d, self.c)
    }

    pub fn swap_rows(&self) -> Self {
        ContingencyTable2x2::new(self.c, self.d, self.a, self.b)
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Support of `a` given the margins, with log hypergeometric probabilities.
fn log_pmf(t: &ContingencyTable2x2) -> (u64, Vec<f64>) {
    let r1 = t.a + t.b;
    let c1 = t.a + t.c;
    let n = t.total();
    let lo = (r1 + c1).saturating_sub(n);
    let hi = r1.min(c1);
    let denom = ln_choose(n, r1);
    let logs = (lo..=hi)
        .map(|x| ln_choose(c1, x) + ln_choose(n - c1, r1 - x) - denom)
        .collect();
    (lo, logs)
}

/// `(a·d)/(b·c)`, adding 0.5 to every cell when any cell is zero.
pub fn odds_ratio_sample(t: &ContingencyTable2x2) -> f64 {
    let cells = [t.a, t.b, t.c, t.d].map(|v| v as f64);
    let shift = if cells.contains(&0.0) { 0.5 } else { 0.0 };
    let [a, b, c, d] = cells.map(|v| v + shift);
    (a * d) / (b * c)
}

/// Conditional maximum-likelihood odds ratio: the noncentrality of the
/// hypergeometric whose mean equals the observed `a`. Zero or infinite at the
/// edges of the support.
pub fn odds_ratio_cmle(t: &ContingencyTable2x2) -> f64 {
    let (lo, logs) = log_pmf(t);
    let hi = lo + logs.len() as u64 - 1;
    if t.a == lo && t.a == hi {
        return f64::NAN;
    }
    if t.a == lo {
        return 0.0;
    }
    if t.a == hi {
        return f64::INFINITY;
    }
    let mean_at = |log_psi: f64| {
        let w: Vec<f64> = logs
            .iter()
            .enumerate()
            .map(|(i, l)| l + (lo + i as u64) as f64 * log_psi)
            .collect();
        let top = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for (i, wi) in w.iter().enumerate() {
            let e = (wi - top).exp();
            num += (lo + i as u64) as f64 * e;
            den += e;
        }
        num / den
    };
    let target = t.a as f64;
    let (mut left, mut right) = (-1.0, 1.0);
    while mean_at(left) > target {
        left *= 2.0;
    }
    while mean_at(right) < target {
        right *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (left + right);
        if mean_at(mid) < target {
            left = mid;
        } else {
            right = mid;
        }
    }
    (0.5 * (left + right)).exp()
}

/// The two-sided p-value alone, without the odds-ratio work.
pub fn fisher_p_value(t: &ContingencyTable2x2) -> f64 {
    let (lo, logs) = log_pmf(t);
    let observed = logs[(t.a - lo) as usize];
    // Relative slack so tables tied with the observed one count despite rounding.
    let cutoff = observed + 1e-7f64.ln_1p();
    let p: f64 = logs.iter().filter(|&&l| l <= cutoff).map(|l| l.exp()).sum();
    p.min(1.0)
}

/// Two-sided Fisher exact test: the probability of every margin-preserving
/// table no more likely than the observed one. Effect size is the sample odds
/// ratio; the conditional MLE is attached as a note.
pub fn fisher_exact(t: &ContingencyTable2x2) -> StatReport {
    let p = fisher_p_value(t);
    let or = odds_ratio_sample(t);
    let cmle = odds_ratio_cmle(t);
    let mut report = StatReport::new("Fisher exact (two-sided)", or, p, t.total() as usize)
        .with_effect(EffectKind::OddsRatio, or)
        .note(format!("table [[{}, {}], [{}, {}]]", t.a, t.b, t.c, t.d))
        .note(format!("conditional MLE odds ratio {cmle}"));
    if [t.a, t.b, t.c, t.d].contains(&0) {
        report = report.note("Haldane correction applied to odds ratio");
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_table() {
        let r = fisher_exact(&ContingencyTable2x2::new(10, 10, 10, 10));
        assert_eq!(r.effect_value(), Some(1.0));
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_table_matches_reference() {
        // Reference values from an independent implementation.
        let r = fisher_exact(&ContingencyTable2x2::new(1, 9, 11, 3));
        assert!((r.p_value - 0.0027594561852200836).abs() < 1e-12);
        assert!((r.effect_value().unwrap() - 1.0 * 3.0 / (9.0 * 11.0)).abs() < 1e-15);
        let cmle = odds_ratio_cmle(&ContingencyTable2x2::new(1, 9, 11, 3));
        assert!((cmle - 0.037209084832381056).abs() < 1e-8);
    }

    #[test]
    fn halves_orientation() {
        let t = ContingencyTable2x2::halves((596, 92), (1096, 258));
        assert_eq!(t, ContingencyTable2x2::new(504, 92, 838, 258));
        let r = fisher_exact(&t);
        assert!((r.effect_value().unwrap() - 1.6866244681954965).abs() < 1e-12);
        assert!((odds_ratio_cmle(&t) - 1.6861276524882958).abs() < 1e-8);
        assert!((r.p_value - 7.342268262583622e-05).abs() < 1e-12);
    }

    #[test]
    fn haldane_and_edges() {
        let t = ContingencyTable2x2::new(0, 5, 5, 0);
        assert!((odds_ratio_sample(&t) - 0.25 / 30.25).abs() < 1e-15);
        assert_eq!(odds_ratio_cmle(&t), 0.0);
        assert_eq!(odds_ratio_cmle(&t.swap_columns()), f64::INFINITY);
        let r = fisher_exact(&t);
        assert!(r.notes.iter().any(|n| n.contains("Haldane")));
        let r = fisher_exact(&ContingencyTable2x2::new(0, 0, 0, 1));
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }
}
