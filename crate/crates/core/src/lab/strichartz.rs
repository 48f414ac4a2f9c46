//! `ε`-weighted pressure norms `ε^{3/8}‖p‖_{L⁴_t W^{−2,4}_x}` and
//! `ε^{7/8}‖∂ₜp‖_{L⁴_t W^{−3,4}_x}` over a sweep, next to the data-side
//! proxy `√ε‖p₀‖ + ‖div u₀‖_{H⁻¹} + √T‖div u‖_{L²L²} + ‖N‖_{L¹L^{3/2}}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::time_norm;

use super::fit::strictly_increasing;
use super::sweep::{NormRequest, SweepField, SweepReport};

pub const TORUS_CAVEAT: &str = "weighted norms are measured on a periodic box; the uniform bound is a whole-space dispersive estimate and is not claimed to carry over";

/// Largest tolerated ratio of a weighted norm to its value at the largest `ε`.
pub const GROWTH_ALLOWANCE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzRow {
    pub eps: f64,
    pub weighted_p: f64,
    /// With `∂ₜp = −div u/ε`.
    pub weighted_dtp: f64,
    /// With `∂ₜp` from differences of the samples, when recorded.
    pub weighted_dtp_fd: Option<f64>,
    pub rhs_proxy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzReport {
    pub caveat: String,
    pub rows: Vec<StrichartzRow>,
    pub p_bounded: bool,
    pub dtp_bounded: bool,
}

impl StrichartzReport {
    pub fn bounded(&self) -> bool {
        self.p_bounded && self.dtp_bounded
    }
}

/// Neither strictly growing along the sweep nor above
/// [`GROWTH_ALLOWANCE`] times the first value.
pub fn bounded_over_sweep(values: &[f64]) -> bool {
    match values.first() {
        None => true,
        Some(&v0) => {
            values.iter().all(|v| v.is_finite() && *v <= GROWTH_ALLOWANCE * v0)
                && !(values.len() > 1 && strictly_increasing(values))
        }
    }
}

/// `‖f‖_{L^q_τ}` over `τ = t/√ε` from samples in `t`: `ε^{−1/(2q)}‖f‖_{L^q_t}`.
pub fn tau_norm(times: &[f64], values: &[f64], eps: f64, q: f64) -> Result<f64> {
    Ok(eps.powf(-0.5 / q) * time_norm(times, values, q)?)
}

fn need(report: &SweepReport, field: SweepField, q: f64, r: f64, s: f64) -> Result<String> {
    report
        .find(field, |spec| spec.q == q && spec.r == r && spec.s == s && !spec.homogeneous)
        .map(|req| req.label())
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "sweep did not record {}",
                NormRequest::new(field, q, r, s).label()
            ))
        })
}

pub fn strichartz_scaling_report(report: &SweepReport) -> Result<StrichartzReport> {
    let p = need(report, SweepField::P, 4.0, 4.0, -2.0)?;
    let dtp = need(report, SweepField::DtP, 4.0, 4.0, -3.0)?;
    let div = need(report, SweepField::DivU, 2.0, 2.0, 0.0)?;
    let nl = need(report, SweepField::Nonlinear, 1.0, 1.5, 0.0)?;
    let dtp_fd = need(report, SweepField::DtPFd, 4.0, 4.0, -3.0).ok();
    let rows: Vec<StrichartzRow> = report
        .rows
        .iter()
        .map(|r| {
            let w_p = r.eps.powf(3.0 / 8.0);
            let w_dtp = r.eps.powf(7.0 / 8.0);
            StrichartzRow {
                eps: r.eps,
                weighted_p: w_p * r.norms[&p],
                weighted_dtp: w_dtp * r.norms[&dtp],
                weighted_dtp_fd: dtp_fd.as_ref().map(|l| w_dtp * r.norms[l]),
                rhs_proxy: r.initial.sqrt_eps_p_l2
                    + r.initial.div_u_hm1
                    + report.t_final.sqrt() * r.norms[&div]
                    + r.norms[&nl],
            }
        })
        .collect();
    let wp: Vec<f64> = rows.iter().map(|r| r.weighted_p).collect();
    let wd: Vec<f64> = rows.iter().map(|r| r.weighted_dtp).collect();
    Ok(StrichartzReport {
        caveat: TORUS_CAVEAT.to_string(),
        p_bounded: bounded_over_sweep(&wp),
        dtp_bounded: bounded_over_sweep(&wd),
        rows,
    })
}
