//! Time integration of the artificial compressibility system.
//!
//! One step is a Strang composition: exact linear flow over `dt/2`
//! ([`propagator`]), an explicit midpoint step of the quadratic terms
//! ([`nonlinear`]), and another exact linear half step. The energy removed
//! by each linear substep is booked as dissipation, so `E + D − E(0)` only
//! collects the nonlinear substep error.

pub mod data;
pub mod nonlinear;
pub mod propagator;
mod run;

pub use data::{DataFamily, DataSpec};
pub use nonlinear::{nonlinear_rhs, NonlinearTerms, Tendencies};
pub use propagator::{linear_mode_propagator, LinearFlow, ModePropagator};
pub use run::{
    diagnostics, run, run_from, run_observed, step, DiagnosticsRecord, RunConfig, Stepper,
    TimeStep, Trajectory, CFL_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::GridSpec;

/// `(u, θ, p)` with the parameters of the system and the current time.
#[derive(Debug, Clone, PartialEq)]
pub struct ACState {
    pub u: VectorField,
    pub theta: SpectralField,
    pub p: SpectralField,
    pub eps: f64,
    pub mu: f64,
    pub kappa: f64,
    pub t: f64,
}

/// Scalar parameters shared by a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    pub eps: f64,
    pub mu: f64,
    pub kappa: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            eps: 1e-2,
            mu: 1.0,
            kappa: 1.0,
        }
    }
}

impl Physics {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps must be > 0, got {}", self.eps)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu must be >= 0, got {}", self.mu)));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kappa must be >= 0, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

impl ACState {
    pub fn new(u: VectorField, theta: SpectralField, p: SpectralField, physics: Physics) -> Result<Self> {
        physics.validate()?;
        let grid = *u.grid();
        if *theta.grid() != grid || *p.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let mean = p.mean().abs();
        if mean > 1e-12 * p.coeff_norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "pressure must be mean-zero (mean {mean:e})"
            )));
        }
        let mut p = p;
        p.coeffs_mut()[0] = Default::default();
        Ok(Self {
            u,
            theta,
            p,
            eps: physics.eps,
            mu: physics.mu,
            kappa: physics.kappa,
            t: 0.0,
        })
    }

    pub fn zeros(grid: GridSpec, physics: Physics) -> Result<Self> {
        Self::new(
            VectorField::zeros(grid),
            SpectralField::zeros(grid),
            SpectralField::zeros(grid),
            physics,
        )
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub fn physics(&self) -> Physics {
        Physics {
            eps: self.eps,
            mu: self.mu,
            kappa: self.kappa,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.theta.is_finite() && self.p.is_finite()
    }

    /// Largest Hermitian-symmetry defect over all fields.
    pub fn hermitian_defect(&self) -> f64 {
        self.u
            .hermitian_defect()
            .max(self.theta.hermitian_defect())
            .max(self.p.hermitian_defect())
    }

    /// Whether `ε >= 1`, outside the relaxation regime.
    pub fn is_degenerate(&self) -> bool {
        self.eps >= 1.0
    }
}

/// `E = ∫ ½|u|² + ½θ² + ε/2 p²`
pub fn energy(state: &ACState) -> f64 {
    0.5 * (state.u.l2_norm_sqr() + state.theta.l2_norm_sqr() + state.eps * state.p.l2_norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_examples() {
        let g = GridSpec::periodic(3, 16).unwrap();
        let ph = Physics { eps: 0.1, mu: 1.0, kappa: 1.0 };
        assert_eq!(energy(&ACState::zeros(g, ph).unwrap()), 0.0);
        let shear = ACState::new(
            VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
            ph,
        )
        .unwrap();
        let want = (2.0 * std::f64::consts::PI).powi(3) / 4.0;
        assert!((energy(&shear) - want).abs() < 1e-12 * want);
        assert!((want - 62.01).abs() < 0.01);
        let warm = ACState::new(
            VectorField::zeros(g),
            SpectralField::from_fn(g, |x| x[0].sin()),
            SpectralField::zeros(g),
            ph,
        )
        .unwrap();
        assert!((energy(&warm) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = GridSpec::periodic(2, 8).unwrap();
        assert!(ACState::zeros(g, Physics { eps: 0.0, mu: 1.0, kappa: 1.0 }).is_err());
        assert!(ACState::zeros(g, Physics { eps: 1e-2, mu: -1.0, kappa: 1.0 }).is_err());
        let p = SpectralField::constant(g, 1.0);
        let ph = Physics::default();
        assert!(ACState::new(VectorField::zeros(g), SpectralField::zeros(g), p, ph).is_err());
        assert!(ACState::zeros(g, Physics { eps: 2.0, ..ph }).unwrap().is_degenerate());
    }
}
