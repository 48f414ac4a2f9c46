//! Residual of the pressure wave equation in the acoustic time `τ = t/√ε`:
//!
//! ```text
//! ∂ττ p̃ − Δp̃ + μΔ div ũ − div((ũ·∇)ũ + ½(div ũ)ũ) = 0
//! ```
//!
//! with `p̃(τ) = p(√ε τ)` and `ũ(τ) = u(√ε τ)`. `∂ττ p̃ = ε ∂ₜₜp` is taken by
//! central differences of the saved samples; the spatial terms are spectral.

use serde::{Deserialize, Serialize};

use crate::ac::{NonlinearTerms, Trajectory};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::ops::{divergence, laplacian};
use crate::series::{trapezoid, uniform_stride};

/// `L²` norms over `τ` and space of each term and of their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveResidual {
    pub eps: f64,
    pub stride: f64,
    pub residual: f64,
    pub ptt: f64,
    pub laplacian_p: f64,
    /// `μΔ div ũ`
    pub f1: f64,
    /// `div((ũ·∇)ũ + ½(div ũ)ũ)`; zero for linear runs.
    pub f2: f64,
    /// `residual / max(term norms)`
    pub relative: f64,
}

impl WaveResidual {
    pub fn largest_term(&self) -> f64 {
        self.ptt.max(self.laplacian_p).max(self.f1).max(self.f2)
    }
}

/// Residual over the interior samples of `traj`; needs a save stride of at
/// most `√ε/8`.
pub fn pressure_wave_residual(traj: &Trajectory) -> Result<WaveResidual> {
    let eps = traj.physics.eps;
    let mu = traj.physics.mu;
    let stride = uniform_stride(&traj.times)?;
    let limit = eps.sqrt() / 8.0;
    if stride > limit * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "save stride {stride:e} is too coarse for the acoustic scale (needs <= sqrt(eps)/8 = {limit:e})"
        )));
    }
    if traj.len() < 3 {
        return Err(Error::InvalidArgument("wave residual needs at least 3 samples".into()));
    }
    let terms = traj.nonlinear.then(|| NonlinearTerms::compressible(traj.grid));
    let dtau = stride / eps.sqrt();
    let n = traj.len();
    let mut r2 = Vec::with_capacity(n - 2);
    let mut a2 = Vec::with_capacity(n - 2);
    let mut b2 = Vec::with_capacity(n - 2);
    let mut c2 = Vec::with_capacity(n - 2);
    let mut d2 = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let (pm, p0, pp) = (&traj.states[i - 1].p, &traj.states[i].p, &traj.states[i + 1].p);
        let mut ptt = pp.add(pm);
        ptt.axpy(-2.0, p0);
        ptt.scale(1.0 / (dtau * dtau));
        let lap = laplacian(p0);
        let u = &traj.states[i].u;
        let f1 = laplacian(&divergence(u)).scaled(mu);
        let f2 = match &terms {
            // the tendency is −((u·∇)u + ½(div u)u)
            Some(t) => divergence(&t.eval(u, &traj.states[i].theta).du).scaled(-1.0),
            None => SpectralField::zeros(traj.grid),
        };
        let mut res = ptt.sub(&lap);
        res.axpy(1.0, &f1);
        res.axpy(-1.0, &f2);
        r2.push(res.l2_norm_sqr());
        a2.push(ptt.l2_norm_sqr());
        b2.push(lap.l2_norm_sqr());
        c2.push(f1.l2_norm_sqr());
        d2.push(f2.l2_norm_sqr());
    }
    let norm = |v: &[f64]| trapezoid(v, dtau).sqrt();
    let (residual, ptt, laplacian_p, f1, f2) = if r2.len() == 1 {
        let s = dtau.sqrt();
        (r2[0].sqrt() * s, a2[0].sqrt() * s, b2[0].sqrt() * s, c2[0].sqrt() * s, d2[0].sqrt() * s)
    } else {
        (norm(&r2), norm(&a2), norm(&b2), norm(&c2), norm(&d2))
    };
    let largest = ptt.max(laplacian_p).max(f1).max(f2);
    Ok(WaveResidual {
        eps,
        stride,
        residual,
        ptt,
        laplacian_p,
        f1,
        f2,
        relative: if largest > 0.0 { residual / largest } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ac::{run, run_from, ACState, DataFamily, DataSpec, Physics, RunConfig, TimeStep};
    use crate::grid::GridSpec;

    fn acoustic(eps: f64, stride: f64, mu: f64) -> RunConfig {
        RunConfig {
            grid: GridSpec::periodic(2, 8).unwrap(),
            physics: Physics { eps, mu, kappa: 1.0 },
            t_final: 40.0 * stride,
            time_step: TimeStep::Fixed(stride),
            save_stride: stride,
            data: DataSpec::new(DataFamily::Acoustic, 0),
            nonlinear: false,
        }
    }

    #[test]
    fn zero_trajectory_has_zero_residual() {
        let c = acoustic(1e-2, 0.01, 1.0);
        let s = ACState::zeros(c.grid, c.physics).unwrap();
        let r = pressure_wave_residual(&run_from(&c, s).unwrap()).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.relative, 0.0);
    }

    #[test]
    fn linear_acoustic_residual_is_second_order() {
        let eps: f64 = 1e-2;
        let base = eps.sqrt() / 8.0;
        let mut prev: Option<f64> = None;
        for k in 0..3 {
            let stride = base / 2f64.powi(k);
            let mut c = acoustic(eps, stride, 0.0);
            c.t_final = 0.5;
            c.save_stride = 0.5 / (0.5 / stride).round();
            c.time_step = TimeStep::Fixed(c.save_stride);
            let r = pressure_wave_residual(&run(&c).unwrap()).unwrap();
            assert!(r.relative < 0.02);
            if let Some(p) = prev {
                let order = (p / r.relative).log2();
                assert!((order - 2.0).abs() < 0.2, "order {order}");
            }
            prev = Some(r.relative);
        }
    }

    #[test]
    fn coarse_stride_is_rejected() {
        let c = acoustic(1e-2, 0.05, 1.0);
        let t = run(&c).unwrap();
        assert!(pressure_wave_residual(&t).is_err());
    }
}
