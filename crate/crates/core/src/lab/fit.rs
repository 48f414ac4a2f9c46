//! Least-squares power-law fits in log-log coordinates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// `y ≈ C x^order`, with the raw points it was fitted to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub order: f64,
    /// `ln C`
    pub intercept: f64,
    /// Half width of the 95% confidence interval of `order`; absent for two points.
    pub ci95: Option<f64>,
    pub points: Vec<(f64, f64)>,
}

impl PowerFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.order * x.ln()).exp()
    }

    /// Whether `lo <= order <= hi`.
    pub fn order_within(&self, lo: f64, hi: f64) -> bool {
        self.order >= lo && self.order <= hi
    }
}

/// Fit `ln y = a + b ln x` over `(x, y)` pairs with positive entries.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a power-law fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "power-law fit needs positive finite data, got ({x:e}, {y:e})"
        )));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("power-law fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let order = sxy / sxx;
    let intercept = my - order * mx;
    let ci95 = (points.len() > 2).then(|| {
        let sse: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(x, y)| {
                let r = y - intercept - order * x;
                r * r
            })
            .sum();
        let dof = n - 2.0;
        let se = (sse / dof / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, dof).expect("dof > 0").inverse_cdf(0.975);
        t * se
    });
    Ok(PowerFit {
        order,
        intercept,
        ci95,
        points: points.to_vec(),
    })
}

/// Whether `values` decreases strictly along the slice.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Whether `values` increases strictly along the slice.
pub fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let pts: Vec<(f64, f64)> = [1e-1f64, 1e-2, 1e-3, 1e-4].iter().map(|&e| (e, 3.0 * e.powf(0.5))).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.order - 0.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.ci95.unwrap() < 1e-10);
        assert!((f.predict(1e-5) - 3.0 * 1e-5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn confidence_interval_matches_tabulated_quantile() {
        // residuals ±δ about slope 1 with 4 points: se = sqrt(SSE/(2 Sxx))
        let d: f64 = 0.01;
        let xs = [1.0f64, 2.0, 4.0, 8.0];
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, x * (if i % 2 == 0 { d } else { -d }).exp()))
            .collect();
        let f = fit_power_law(&pts).unwrap();
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let m = lx.iter().sum::<f64>() / 4.0;
        let sxx: f64 = lx.iter().map(|x| (x - m).powi(2)).sum();
        let sse: f64 = pts
            .iter()
            .map(|(x, y)| (y.ln() - f.intercept - f.order * x.ln()).powi(2))
            .sum();
        let t_975_2dof = 4.302652729911275;
        let want = t_975_2dof * (sse / 2.0 / sxx).sqrt();
        assert!((f.ci95.unwrap() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn two_points_have_no_interval() {
        let f = fit_power_law(&[(1.0, 1.0), (2.0, 4.0)]).unwrap();
        assert!((f.order - 2.0).abs() < 1e-14);
        assert!(f.ci95.is_none());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_power_law(&[(1.0, 1.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 0.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn monotonicity() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0, 1.0]));
        assert!(strictly_increasing(&[1.0, 2.0]));
        assert!(strictly_decreasing(&[1.0]));
    }
}
