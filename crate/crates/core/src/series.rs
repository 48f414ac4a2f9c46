use crate::error::{Error, Result};

/// Uniformly time-sampled values (fields, scalars, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct Series<F> {
    pub times: Vec<f64>,
    pub values: Vec<F>,
}

impl<F> Series<F> {
    pub fn new(times: Vec<f64>, values: Vec<F>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::ShapeMismatch {
                expected: times.len(),
                actual: values.len(),
            });
        }
        Ok(Self { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sampling interval; errors if the sampling is not uniform.
    pub fn stride(&self) -> Result<f64> {
        uniform_stride(&self.times)
    }

    pub fn map<G, M: FnMut(&F) -> G>(&self, f: M) -> Series<G> {
        Series {
            times: self.times.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn span(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// Common spacing of `times`, checked to a relative 1e-9.
pub fn uniform_stride(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 time samples".into(),
        ));
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if h <= 0.0 {
        return Err(Error::InvalidArgument("time samples must increase".into()));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "time sampling is not uniform (expected stride {h:e}, found {:e})",
                w[1] - w[0]
            )));
        }
    }
    Ok(h)
}

/// Composite trapezoid rule on uniform samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

/// Composite Simpson rule on uniform samples, closing an odd number of
/// intervals with the 3/8 rule; trapezoid below three samples.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    if n < 2 {
        return trapezoid(values, h);
    }
    let simpson_even = |v: &[f64]| -> f64 {
        let m = v.len() - 1;
        let mut s = v[0] + v[m];
        for (i, x) in v.iter().enumerate().take(m).skip(1) {
            s += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
        }
        s * h / 3.0
    };
    if n % 2 == 0 {
        return simpson_even(values);
    }
    let tail = &values[n - 3..];
    let three_eighths = 3.0 * h / 8.0 * (tail[0] + 3.0 * tail[1] + 3.0 * tail[2] + tail[3]);
    if n == 3 {
        three_eighths
    } else {
        simpson_even(&values[..=n - 3]) + three_eighths
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stride_checks() {
        assert!(uniform_stride(&[0.0]).is_err());
        assert!((uniform_stride(&[0.0, 0.5, 1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(uniform_stride(&[0.0, 0.4, 1.0]).is_err());
    }

    #[test]
    fn trapezoid_exact_on_linear() {
        let v: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        assert!((trapezoid(&v, 0.1) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn simpson_exact_on_cubics() {
        for n in [3usize, 4, 5, 8, 11] {
            let h = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((simpson(&v, h) - 0.25).abs() < 1e-14, "n = {n}");
        }
        assert!((simpson(&[1.0, 3.0], 0.5) - 1.0).abs() < 1e-15);
    }
}
