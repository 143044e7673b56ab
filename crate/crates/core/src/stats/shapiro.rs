use std::f64::consts::PI;

use statrs::distribution::{ContinuousCDF, Normal};

use super::StatReport;
use crate::error::{Error, Result};

/// A sample is consistent with normality iff the Shapiro–Wilk p exceeds this.
pub const NORMALITY_ALPHA: f64 = 0.05;

const MAX_N: usize = 5000;

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapiroWilk {
    pub w: f64,
    pub p_value: f64,
}

/// Royston's AS R94 approximation of the Shapiro–Wilk test, `3 ≤ n ≤ 5000`.
pub fn shapiro_wilk(values: &[f64]) -> Result<ShapiroWilk> {
    let n = values.len();
    if n < 3 {
        return Err(Error::TooFew { needed: 3, found: n });
    }
    if n > MAX_N {
        return Err(Error::InvalidParameter(format!(
            "Shapiro-Wilk supports at most {MAX_N} values, got {n}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite value".into()));
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range == 0.0 {
        return Ok(ShapiroWilk { w: 1.0, p_value: 1.0 });
    }

    let half = n / 2;
    let mut a = vec![0.0; half];
    if n == 3 {
        a[0] = 0.5f64.sqrt();
    } else {
        let normal = Normal::standard();
        let an25 = n as f64 + 0.25;
        let m: Vec<f64> = (0..half)
            .map(|i| normal.inverse_cdf((i as f64 + 1.0 - 0.375) / an25))
            .collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / (n as f64).sqrt();
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (first, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            a[1] = a2;
            let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
                .sqrt();
            (2, fac)
        } else {
            (1, ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt())
        };
        a[0] = a1;
        for i in first..half {
            a[i] = -m[i] / fac;
        }
    }

    // Scale by the range for numerical stability; W is scale-invariant.
    let xs: Vec<f64> = x.iter().map(|v| v / range).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ssq: f64 = xs.iter().map(|v| (v - mean) * (v - mean)).sum();
    let lin: f64 = (0..half).map(|i| a[i] * (xs[n - 1 - i] - xs[i])).sum();
    let w = (lin * lin / ssq).min(1.0);

    let p_value = if n == 3 {
        (6.0 / PI * (w.sqrt().asin() - PI / 3.0)).max(0.0)
    } else {
        let w1 = (1.0 - w).ln();
        let nf = n as f64;
        let (y, mu, sigma) = if n <= 11 {
            let gamma = poly(&G, nf);
            if w1 >= gamma {
                return Ok(ShapiroWilk { w, p_value: 1e-99 });
            }
            (-(gamma - w1).ln(), poly(&C3, nf), poly(&C4, nf).exp())
        } else {
            let ln_n = nf.ln();
            (w1, poly(&C5, ln_n), poly(&C6, ln_n).exp())
        };
        Normal::new(mu, sigma)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sf(y)
    };
    Ok(ShapiroWilk {
        w,
        p_value: p_value.clamp(0.0, 1.0),
    })
}

/// Shapiro–Wilk screen at [`NORMALITY_ALPHA`]; `true` means consistent with
/// a normal distribution.
pub fn normality_check(values: &[f64]) -> Result<(bool, StatReport)> {
    let sw = shapiro_wilk(values)?;
    let normal = sw.p_value > NORMALITY_ALPHA;
    let report = StatReport::new("Shapiro-Wilk (Royston AS R94)", sw.w, sw.p_value, values.len())
        .note(format!(
            "alpha {NORMALITY_ALPHA}: {}",
            if normal { "consistent with normal" } else { "not normal" }
        ));
    Ok((normal, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(values: &[f64], w: f64, p: f64) {
        let r = shapiro_wilk(values).unwrap();
        assert!((r.w - w).abs() < 1e-5, "W {} vs {w}", r.w);
        assert!((r.p_value - p).abs() < 1e-4 * p.max(1e-3), "p {} vs {p}", r.p_value);
    }

    #[test]
    fn reference_values() {
        // Reference values from an independent implementation.
        close(&[1.0, 2.0, 3.0], 1.0, 1.0);
        close(&[1.0, 2.0, 4.0], 0.9642857142857142, 0.6368868450289689);
        close(&[2.1, 3.4, 1.9, 5.6, 4.4], 0.9320849391953863, 0.6106559022604845);
        let xs: Vec<f64> = (1..=11).map(f64::from).collect();
        close(&xs, 0.9683912804626188, 0.869842328207451);
        let xs: Vec<f64> = (1..=12).map(|i| 0.1 * f64::from(i * i)).collect();
        close(&xs, 0.9162924415139418, 0.25667346795552104);
        let xs: Vec<f64> = (1..=20).map(f64::from).collect();
        close(&xs, 0.9603751832429884, 0.5513717457916771);
        let xs: Vec<f64> = (1..=50).map(|i| f64::from(i).sin()).collect();
        close(&xs, 0.8968586641498492, 0.0003790244319822419);
    }

    #[test]
    fn gross_outlier_is_not_normal() {
        let mut xs = vec![0.0; 19];
        xs.push(100.0);
        let (normal, report) = normality_check(&xs).unwrap();
        assert!(!normal);
        assert!(report.p_value < 1e-6);
    }

    #[test]
    fn boundaries() {
        assert!(matches!(shapiro_wilk(&[1.0, 2.0]), Err(Error::TooFew { .. })));
        let (normal, r) = normality_check(&[4.0; 7]).unwrap();
        assert!(normal);
        assert_eq!((r.statistic, r.p_value), (1.0, 1.0));
        assert!(shapiro_wilk(&vec![0.5; MAX_N + 1]).is_err());
    }
}
