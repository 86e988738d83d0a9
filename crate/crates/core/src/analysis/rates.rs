use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Least-squares fit of `log y` against `log x`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Points used in the fit.
    pub used: usize,
    /// `x` values of points dropped for a nonpositive coordinate.
    pub dropped: Vec<f64>,
}

/// Fits the log-log slope of `(x, y)` pairs, dropping nonpositive points.
/// Needs at least three usable points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let mut dropped = Vec::new();
    let mut logs = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
            logs.push((math::ln(x), math::ln(y)));
        } else {
            dropped.push(x);
        }
    }
    if logs.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: logs.len(),
        });
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            got: 1,
        });
    }
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        used: logs.len(),
        dropped,
    })
}

/// Linear-interpolation quantile of an ascending slice (`q` in `[0, 1]`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = pos as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = pos - lo as f64;
            sorted[lo] + frac * (sorted[hi] - sorted[lo])
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    pub q90: f64,
}

/// Median, mean and 0.9-quantile.
pub fn summarize(values: &[f64]) -> Summary {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mean = if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    };
    Summary {
        count: v.len(),
        median: quantile(&v, 0.5),
        mean,
        q90: quantile(&v, 0.9),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exact_power_laws() {
        let ts = [100.0, 1000.0, 10_000.0];
        let fit = loglog_slope(&ts.map(|t| (t, 10.0 / t))).unwrap();
        assert!(libm::fabs(fit.slope + 1.0) <= 1e-9);
        let fit = loglog_slope(&ts.map(|t| (t, 1.0 / libm::sqrt(t)))).unwrap();
        assert!(libm::fabs(fit.slope + 0.5) <= 1e-9);
        let fit = loglog_slope(&ts.map(|t| (t, 0.3))).unwrap();
        assert!(libm::fabs(fit.slope) <= 1e-12);
    }

    #[test]
    fn nonpositive_points_are_dropped() {
        let pts = [(10.0, 1.0), (100.0, 0.0), (1000.0, 0.01), (10_000.0, -1.0), (100_000.0, 0.0001)];
        let fit = loglog_slope(&pts).unwrap();
        assert_eq!(fit.used, 3);
        assert_eq!(fit.dropped, vec![100.0, 10_000.0]);
        assert!(libm::fabs(fit.slope + 1.0) <= 1e-9);
        assert!(loglog_slope(&pts[..3]).is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = summarize(&[5.0, 1.0, 3.0, 2.0, 4.0]);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.mean, 3.0);
        assert!(libm::fabs(s.q90 - 4.6) < 1e-12);
        assert_eq!(summarize(&[7.0]).q90, 7.0);
    }
}
