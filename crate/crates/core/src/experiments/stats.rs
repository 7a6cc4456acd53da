//! Small statistics helpers for the studies.

use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n − 1).
pub fn sample_std(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

pub fn standard_error(x: &[f64]) -> f64 {
    sample_std(x) / (x.len() as f64).sqrt()
}

/// Ordinary least squares y = a + b·x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || n != y.len() || x.iter().chain(y).any(|v| !v.is_finite()) {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_se,
    })
}

/// Slope of ln|y| against ln x; `None` if any value is zero or non-finite.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    if y.iter().any(|v| v.abs() <= f64::MIN_POSITIVE) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    linear_fit(&lx, &ly)
}

/// Smallest group the batch estimator accepts.
pub const MIN_GROUP_SIZE: usize = 5;

/// Batch-means standard error of a statistic evaluated on contiguous groups.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchError {
    pub se: f64,
    pub groups: usize,
    /// Set when fewer groups than requested were possible.
    pub warning: Option<String>,
}

/// Splits `n` items into `requested` contiguous groups (fewer if the groups
/// would be smaller than [`MIN_GROUP_SIZE`]) and returns the standard error of
/// `stat` over them. With reduced groups the error is inflated by the
/// Student-t 1σ quantile.
pub fn batch_error(n: usize, requested: usize, mut stat: impl FnMut(std::ops::Range<usize>) -> f64) -> BatchError {
    let groups = requested.min(n / MIN_GROUP_SIZE);
    if groups < 2 {
        let v = stat(0..n).abs();
        return BatchError {
            se: v,
            groups: 1,
            warning: Some(format!(
                "{n} realizations are too few for error bars; reporting 100% uncertainty"
            )),
        };
    }
    let size = n / groups;
    let values: Vec<f64> = (0..groups).map(|g| stat(g * size..(g + 1) * size)).collect();
    let mut se = standard_error(&values);
    let mut warning = None;
    if groups < requested {
        let t = StudentsT::new(0.0, 1.0, (groups - 1) as f64)
            .map(|d| d.inverse_cdf(0.841_344_746))
            .unwrap_or(1.0);
        se *= t;
        warning = Some(format!(
            "only {groups} of {requested} bootstrap groups fit into {n} realizations; error inflated by {t:.3}"
        ));
    }
    BatchError { se, groups, warning }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 2.0).abs() < 1e-14);
        assert!(f.slope_se < 1e-14);
    }

    #[test]
    fn power_law_slope() {
        let x = [16.0, 32.0, 64.0];
        let y: Vec<f64> = x.iter().map(|n| 3.0 / n).collect();
        assert!((log_log_fit(&x, &y).unwrap().slope + 1.0).abs() < 1e-12);
        assert!(log_log_fit(&x, &[1.0, 0.0, 1.0]).is_none());
    }

    #[test]
    fn batch_error_warns_when_short() {
        let b = batch_error(20, 10, |r| r.start as f64);
        assert_eq!(b.groups, 4);
        assert!(b.warning.is_some());
        let full = batch_error(100, 10, |r| r.start as f64);
        assert!(full.warning.is_none());
        let none = batch_error(6, 10, |_| 2.0);
        assert_eq!(none.se, 2.0);
    }
}
