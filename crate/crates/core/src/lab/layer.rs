//! Initial-layer probe: frequency and decay of the fast pressure transient
//! excited by an incompatible `p₀`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::uniform_stride;

use super::fit::{fit_power_law, PowerFit};
use super::sweep::{LayerTrace, SweepReport};

/// `|Σ w_j z_j e^{−iωt_j}|² + |Σ w_j z_j e^{iωt_j}|²`
fn power(times: &[f64], z: &[Complex64], w: &[f64], omega: f64) -> f64 {
    let mut plus = Complex64::default();
    let mut minus = Complex64::default();
    let t0 = times[0];
    for ((t, zj), wj) in times.iter().zip(z).zip(w) {
        let ph = Complex64::from_polar(1.0, -omega * (t - t0));
        plus += zj * ph * wj;
        minus += zj * ph.conj() * wj;
    }
    plus.norm_sqr() + minus.norm_sqr()
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Angular frequency of the strongest oscillation of a complex sample
/// series: linear trend removed, Hann window, peak of the discrete-time
/// spectrum above one cycle per record, refined by golden-section search.
/// `None` if the record holds no oscillation.
pub fn dominant_frequency(times: &[f64], z: &[Complex64]) -> Result<Option<f64>> {
    if times.len() != z.len() {
        return Err(Error::ShapeMismatch { expected: times.len(), actual: z.len() });
    }
    let h = uniform_stride(times)?;
    let n = times.len();
    if n < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 samples, got {n}")));
    }
    let span = times[n - 1] - times[0];
    let tm = times.iter().sum::<f64>() / n as f64;
    let zm = z.iter().sum::<Complex64>() / n as f64;
    let stt: f64 = times.iter().map(|t| (t - tm) * (t - tm)).sum();
    let slope = times.iter().zip(z).map(|(t, zj)| (zj - zm) * (t - tm)).sum::<Complex64>() / stt;
    let detrended: Vec<Complex64> = times.iter().zip(z).map(|(t, zj)| zj - zm - slope * (t - tm)).collect();
    let w: Vec<f64> = (0..n)
        .map(|j| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * j as f64 / (n - 1) as f64).cos())
        .collect();
    let omega_min = 2.0 * std::f64::consts::PI / span;
    let omega_max = std::f64::consts::PI / h;
    if omega_min >= omega_max {
        return Ok(None);
    }
    let step = omega_min / 8.0;
    let mut best = (0.0, f64::NEG_INFINITY);
    let mut omega = omega_min;
    while omega <= omega_max {
        let p = power(times, &detrended, &w, omega);
        if p > best.1 {
            best = (omega, p);
        }
        omega += step;
    }
    if !(best.1 > 0.0) {
        return Ok(None);
    }
    let a = (best.0 - step).max(omega_min);
    let b = (best.0 + step).min(omega_max);
    let f = |om: f64| power(times, &detrended, &w, om);
    Ok(Some(golden_max(f, a, b, 1e-10 * best.0.max(1.0))))
}

/// Angular frequency of the damped acoustic pair of a mode with `|k|² = k2`:
/// `√(k²/ε − μ²k⁴/4)`, or 0 when overdamped.
pub fn acoustic_frequency(k2: f64, eps: f64, mu: f64) -> f64 {
    (k2 / eps - 0.25 * mu * mu * k2 * k2).max(0.0).sqrt()
}

/// First time after the first maximum of `‖Qu‖` at which it has fallen to
/// half of that maximum.
pub fn half_drop_time(trace: &LayerTrace) -> Option<f64> {
    let q = &trace.qu_l2;
    let peak = (1..q.len().saturating_sub(1)).find(|&i| q[i] >= q[i - 1] && q[i] > q[i + 1])?;
    let target = 0.5 * q[peak];
    (peak + 1..q.len())
        .find(|&i| q[i] <= target)
        .map(|i| trace.times[i] - trace.times[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRow {
    pub eps: f64,
    pub sqrt_eps_p0: f64,
    pub frequency: Option<f64>,
    pub predicted_frequency: f64,
    pub qu_half_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub mode: [i64; 3],
    pub rows: Vec<LayerRow>,
    /// Fit of the measured frequency against `ε`; the acoustic scaling is `−½`.
    pub frequency_fit: Option<PowerFit>,
    pub warning: Option<String>,
}

pub fn initial_layer_probe(report: &SweepReport) -> Result<LayerReport> {
    let warning = (!report.family.has_initial_layer()).then(|| {
        format!(
            "data family '{}' has a compatible initial pressure; there is no initial layer to probe",
            report.family
        )
    });
    let mode = report.rows.first().map_or([1, 0, 0], |r| r.trace.mode);
    let k2 = report.grid.wavevector(mode).k2();
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let z: Vec<Complex64> = r
                .trace
                .mode_re
                .iter()
                .zip(&r.trace.mode_im)
                .map(|(a, b)| Complex64::new(*a, *b))
                .collect();
            Ok(LayerRow {
                eps: r.eps,
                sqrt_eps_p0: r.initial.sqrt_eps_p_l2,
                frequency: dominant_frequency(&r.trace.times, &z)?,
                predicted_frequency: acoustic_frequency(k2, r.eps, report.mu),
                qu_half_time: half_drop_time(&r.trace),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.frequency.map(|f| (r.eps, f)))
        .collect();
    let frequency_fit = if points.len() >= 2 { fit_power_law(&points).ok() } else { None };
    Ok(LayerReport {
        mode,
        rows,
        frequency_fit,
        warning,
    })
}
