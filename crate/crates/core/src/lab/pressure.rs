//! Time-averaged compressible pressure against the pressure of the limit
//! system. The average uses a Blackman window, whose transform is below
//! 1.2% of its mass at `ωw/2 >= 8`.

use serde::{Deserialize, Serialize};

use crate::ac::Trajectory;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::reference::{recover_pressure, RefTrajectory};
use crate::series::{trapezoid, uniform_stride};

/// Default window width in units of `√ε`.
pub const WINDOW_FACTOR: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLimit {
    pub eps: f64,
    pub window: f64,
    /// `‖p̄^ε − p‖_{L²_{t,x}}` over the samples whose window fits in `[0, T]`.
    pub difference: f64,
    pub limit_norm: f64,
    /// `difference / limit_norm`; absent when the limit pressure is below 1e-12.
    pub relative: Option<f64>,
    /// The same comparison with the window doubled, when it still fits.
    pub relative_doubled: Option<f64>,
    /// Window wider than a quarter of the run.
    pub out_of_asymptotic_range: bool,
}

/// Blackman weight on `[−1, 1]`.
fn kernel(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let a = std::f64::consts::PI * s;
        0.42 + 0.5 * a.cos() + 0.08 * (2.0 * a).cos()
    }
}

/// `(difference, limit norm)` for a window of width `w`.
fn compare<L>(ac: &Trajectory, w: f64, limit: &L) -> Result<(f64, f64)>
where
    L: Fn(usize, f64) -> SpectralField,
{
    let times = &ac.times;
    let h = uniform_stride(times)?;
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let half = 0.5 * w;
    let reach = (half / h).ceil() as usize;
    let mut diff = Vec::new();
    let mut norm = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        if t - half < t0 - 1e-12 || t + half > t1 + 1e-12 {
            continue;
        }
        let mut avg = SpectralField::zeros(ac.grid);
        let mut mass = 0.0;
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(times.len() - 1);
        for j in lo..=hi {
            let k = kernel((times[j] - t) / half);
            if k > 0.0 {
                avg.axpy(k, &ac.states[j].p);
                mass += k;
            }
        }
        avg.scale(1.0 / mass);
        let p = limit(i, t);
        diff.push(avg.sub(&p).l2_norm_sqr());
        norm.push(p.l2_norm_sqr());
    }
    let integrate = |v: &[f64]| -> f64 {
        if v.len() == 1 {
            (v[0] * h).sqrt()
        } else {
            trapezoid(v, h).sqrt()
        }
    };
    Ok((integrate(&diff), integrate(&norm)))
}

/// Compare the window-averaged `p^ε` with `limit(i, t)` at every sample `i`
/// whose window lies inside the run. The window is `factor·√ε` wide and must
/// span at least two strides and at most the whole run.
pub fn pressure_limit_against<L>(ac: &Trajectory, factor: f64, limit: L) -> Result<PressureLimit>
where
    L: Fn(usize, f64) -> SpectralField,
{
    let eps = ac.physics.eps;
    let stride = uniform_stride(&ac.times)?;
    let span = ac.times[ac.times.len() - 1] - ac.times[0];
    let w = factor * eps.sqrt();
    if w > span {
        return Err(Error::InvalidArgument(format!(
            "averaging window {w:e} is longer than the run ({span:e})"
        )));
    }
    if w < 2.0 * stride {
        return Err(Error::InvalidArgument(format!(
            "averaging window {w:e} is shorter than two save strides ({stride:e})"
        )));
    }
    let (difference, limit_norm) = compare(ac, w, &limit)?;
    let rel = |d: f64, n: f64| (n > 1e-12).then(|| d / n);
    let relative_doubled = if 2.0 * w <= span {
        let (d, n) = compare(ac, 2.0 * w, &limit)?;
        rel(d, n)
    } else {
        None
    };
    Ok(PressureLimit {
        eps,
        window: w,
        difference,
        limit_norm,
        relative: rel(difference, limit_norm),
        relative_doubled,
        out_of_asymptotic_range: w > 0.25 * span,
    })
}

/// [`pressure_limit_against`] with the limit pressure recovered from the
/// reference velocity at the same samples.
pub fn pressure_limit_check(ac: &Trajectory, reference: &RefTrajectory, factor: f64) -> Result<PressureLimit> {
    if ac.grid != reference.grid {
        return Err(Error::GridMismatch);
    }
    if ac.times.len() != reference.times.len()
        || ac.times.iter().zip(&reference.times).any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(Error::InvalidArgument(
            "compressible and reference runs must share their sample times".into(),
        ));
    }
    pressure_limit_against(ac, factor, |i, _| recover_pressure(&reference.states[i].u))
}
