use statrs::distribution::{ContinuousCDF, StudentsT};

use super::paired::cohens_d;
use super::{mean, sample_sd, EffectKind, StatReport};
use crate::error::{Error, Result};

/// Two-sided paired t-test on `x − y` with `n − 1` degrees of freedom.
pub fn paired_t_test(pairs: &[(f64, f64)]) -> Result<StatReport> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::TooFew { needed: 2, found: n });
    }
    let d: Vec<f64> = pairs.iter().map(|(x, y)| x - y).collect();
    let sd = sample_sd(&d);
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::ZeroVariance);
    }
    let t = mean(&d) / (sd / (n as f64).sqrt());
    let df = (n - 1) as f64;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let p = 2.0 * dist.sf(t.abs());
    Ok(StatReport::new("paired t-test (two-sided)", t, p, n)
        .with_effect(EffectKind::CohensD, cohens_d(&d))
        .note(format!("{df} degrees of freedom")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(d: &[f64]) -> Vec<(f64, f64)> {
        d.iter().map(|&v| (v, 0.0)).collect()
    }

    #[test]
    fn examples() {
        assert!(matches!(paired_t_test(&pairs(&[1.0; 4])), Err(Error::ZeroVariance)));
        let r = paired_t_test(&pairs(&[1.0, -1.0, 1.0, -1.0])).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = paired_t_test(&pairs(&[2.0, 4.0, 6.0])).unwrap();
        assert!((r.statistic - 12f64.sqrt()).abs() < 1e-12);
        assert!((r.p_value - 0.07417990022744853).abs() < 1e-9);
        assert!((r.effect_value().unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(paired_t_test(&pairs(&[1.0])), Err(Error::TooFew { .. })));
    }
}
