//! Discrete Sobolev and mixed space-time norms.
//!
//! A fractional norm of order `s` in `L^r` is "multiplier then quadrature":
//! the Bessel multiplier `(1+|k|²)^{s/2}` (or the Riesz multiplier `|k|^s`
//! for the homogeneous variant) is applied in Fourier space and the result
//! is integrated on the grid. `L^∞` is the grid maximum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::series::{trapezoid, uniform_stride, Series};

/// Exponents of an `L^q_t W^{s,r}_x` norm; `f64::INFINITY` for `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub homogeneous: bool,
}

impl NormSpec {
    pub fn new(q: f64, r: f64, s: f64, homogeneous: bool) -> Result<Self> {
        if !(q >= 1.0) || !(r >= 1.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "norm exponents must be >= 1 (q = {q}, r = {r}, s = {s})"
            )));
        }
        Ok(Self { q, r, s, homogeneous })
    }

    /// Spatial `W^{s,r}` with a time exponent of 2.
    pub fn spatial(r: f64, s: f64) -> Self {
        Self { q: 2.0, r, s, homogeneous: false }
    }

    pub fn l2() -> Self {
        Self::spatial(2.0, 0.0)
    }

    pub fn with_q(self, q: f64) -> Self {
        Self { q, ..self }
    }

    pub fn homogeneous(self) -> Self {
        Self { homogeneous: true, ..self }
    }

    /// Short label such as `L4t_W-2,4x`.
    pub fn label(&self) -> String {
        let e = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x}") };
        let space = if self.s == 0.0 && !self.homogeneous {
            format!("L{}", e(self.r))
        } else if self.homogeneous {
            format!("Wdot{},{}", self.s, e(self.r))
        } else {
            format!("W{},{}", self.s, e(self.r))
        };
        format!("L{}t_{}x", e(self.q), space)
    }

    fn multiplier(&self, k2: f64) -> f64 {
        if self.s == 0.0 {
            1.0
        } else if self.homogeneous {
            if k2 == 0.0 {
                0.0
            } else {
                k2.powf(0.5 * self.s)
            }
        } else {
            (1.0 + k2).powf(0.5 * self.s)
        }
    }
}

/// `(∫|f|^r)^{1/r}` by grid quadrature with cell volume `dv`; max for `r = ∞`.
pub fn lr_quadrature(values: &[f64], dv: f64, r: f64) -> f64 {
    if r.is_infinite() {
        return values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    }
    let sum: f64 = if r == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else if r.fract() == 0.0 && r <= 8.0 {
        let p = r as i32;
        values.iter().map(|v| v.abs().powi(p)).sum()
    } else {
        values.iter().map(|v| v.abs().powf(r)).sum()
    };
    (sum * dv).powf(1.0 / r)
}

fn apply_order(f: &SpectralField, spec: &NormSpec) -> Result<SpectralField> {
    let grid = *f.grid();
    if spec.homogeneous && spec.s < 0.0 {
        let mean = f.coeffs()[0].norm();
        if mean > 1e-12 * f.coeff_norm() {
            return Err(Error::InvalidArgument(format!(
                "homogeneous norm of negative order needs a mean-zero field (mean {mean:e})"
            )));
        }
    }
    let mut g = f.clone();
    if spec.s != 0.0 || spec.homogeneous {
        g.apply_multiplier(|m| spec.multiplier(grid.wavevector(m).k2()));
    }
    Ok(g)
}

/// Fields with a spatial `W^{s,r}` norm.
pub trait SpatialNorm {
    fn spatial_norm(&self, spec: &NormSpec) -> Result<f64>;
}

impl SpatialNorm for SpectralField {
    fn spatial_norm(&self, spec: &NormSpec) -> Result<f64> {
        spatial_norm(self, spec)
    }
}

impl SpatialNorm for VectorField {
    fn spatial_norm(&self, spec: &NormSpec) -> Result<f64> {
        let grid = *self.grid();
        let comps = self
            .components()
            .iter()
            .map(|c| apply_order(c, spec))
            .collect::<Result<Vec<_>>>()?;
        let mag = VectorField::from_components(comps)?.magnitude_physical();
        Ok(lr_quadrature(&mag, grid.volume() / grid.len() as f64, spec.r))
    }
}

/// `‖f‖_{W^{s,r}}` (or the homogeneous variant).
pub fn spatial_norm(f: &SpectralField, spec: &NormSpec) -> Result<f64> {
    let grid = *f.grid();
    let g = apply_order(f, spec)?;
    let phys = g.to_physical();
    Ok(lr_quadrature(&phys, grid.volume() / grid.len() as f64, spec.r))
}

/// `(∫ v(t)^q dt)^{1/q}` on uniform samples (trapezoid), `max` for `q = ∞`.
pub fn time_norm(times: &[f64], values: &[f64], q: f64) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::ShapeMismatch {
            expected: times.len(),
            actual: values.len(),
        });
    }
    if q.is_infinite() {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty trajectory".into()));
        }
        return Ok(values.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    let h = uniform_stride(times)?;
    let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(q)).collect();
    Ok(trapezoid(&powered, h).powf(1.0 / q))
}

/// `‖f‖_{L^q_t W^{s,r}_x}` over a sampled trajectory.
pub fn space_time_norm<F: SpatialNorm>(series: &Series<F>, spec: &NormSpec) -> Result<f64> {
    if !spec.q.is_infinite() && series.len() < 2 {
        return Err(Error::InvalidArgument(
            "space-time norm with q < inf needs at least 2 samples".into(),
        ));
    }
    let vals = series
        .values
        .iter()
        .map(|f| f.spatial_norm(spec))
        .collect::<Result<Vec<_>>>()?;
    time_norm(&series.times, &vals, spec.q)
}

/// Result of [`wave_admissible`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Regularity index from `1/q + d/r = d/2 − γ`.
    pub gamma: f64,
}

/// Wave admissibility `2/q <= (d−1)(1/2 − 1/r)` with its scaling index.
pub fn wave_admissible(q: f64, r: f64, dim: usize) -> Result<Admissibility> {
    if !(q >= 2.0) || !(r >= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "wave-admissible exponents must be >= 2 (q = {q}, r = {r})"
        )));
    }
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {dim}")));
    }
    let d = dim as f64;
    let lhs = 2.0 / q;
    let rhs = (d - 1.0) * (0.5 - 1.0 / r);
    Ok(Admissibility {
        admissible: lhs <= rhs + 1e-12,
        gamma: 0.5 * d - 1.0 / q - d / r,
    })
}

/// Whether a dual pair `(q̃′, r̃′)` matches the scaling of `(q, r)`:
/// `1/q + d/r = 1/q̃′ + d/r̃′ − 2`.
pub fn dual_scaling_matches(q: f64, r: f64, q_dual_prime: f64, r_dual_prime: f64, dim: usize) -> bool {
    let d = dim as f64;
    let lhs = 1.0 / q + d / r;
    let rhs = 1.0 / q_dual_prime + d / r_dual_prime - 2.0;
    (lhs - rhs).abs() < 1e-12
}

/// Hölder conjugate exponent.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}
