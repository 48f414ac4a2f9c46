//! Exact per-mode flow of the linear acoustic–diffusive part
//!
//! ```text
//! ∂ₜû = −μ|k|²û − i k p̂,    ε∂ₜp̂ = −i k·û,    ∂ₜθ̂ = −κ|k|²θ̂
//! ```
//!
//! The velocity splits into a transverse part, which only diffuses, and the
//! longitudinal scalar `s = i k·û`, which forms a damped oscillator with `p̂`:
//! `d/dt (s, p̂) = A (s, p̂)` with `A = [[−μ|k|², |k|²], [−1/ε, 0]]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::{SpectralField, VectorField};
use crate::grid::{GridSpec, Wavevector};

/// Update of one Fourier mode over a fixed time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModePropagator {
    /// Factor on the transverse velocity, `exp(−μ|k|²dt)`.
    pub transverse: f64,
    /// `exp(A dt)` acting on `(s, p̂)`.
    pub longitudinal: [[f64; 2]; 2],
}

impl ModePropagator {
    pub const IDENTITY: Self = Self {
        transverse: 1.0,
        longitudinal: [[1.0, 0.0], [0.0, 1.0]],
    };

    pub fn apply(&self, s: Complex64, p: Complex64) -> (Complex64, Complex64) {
        let m = &self.longitudinal;
        (m[0][0] * s + m[0][1] * p, m[1][0] * s + m[1][1] * p)
    }
}

/// `exp(t [[−a, b], [−c, 0]])` for `a, b, c >= 0`.
///
/// With `M = A + (a/2)I` one has `M² = δI`, `δ = a²/4 − bc`, so
/// `exp(At) = e^{−at/2}(C I + S M)` where `C, S` are `cosh, sinh/√δ` or
/// `cos, sin/√−δ` of `√|δ| t`.
pub fn damped_oscillator_exp(a: f64, b: f64, c: f64, t: f64) -> [[f64; 2]; 2] {
    let half = 0.5 * a;
    let delta = half * half - b * c;
    let z = delta * t * t;
    // (e^{−at/2} C, e^{−at/2} S)
    let (ec, es) = if z.abs() < 1e-4 {
        let decay = (-half * t).exp();
        let c_ser = 1.0 + z / 2.0 + z * z / 24.0 + z * z * z / 720.0;
        let s_ser = t * (1.0 + z / 6.0 + z * z / 120.0 + z * z * z / 5040.0);
        (decay * c_ser, decay * s_ser)
    } else if delta > 0.0 {
        let root = delta.sqrt();
        // λ₊ = −a/2 + √δ in cancellation-free form
        let lam_plus = -b * c / (half + root);
        let lam_minus = -half - root;
        let ep = (lam_plus * t).exp();
        let em = (lam_minus * t).exp();
        (0.5 * (ep + em), 0.5 * (ep - em) / root)
    } else {
        let omega = (-delta).sqrt();
        let decay = (-half * t).exp();
        let (sn, cs) = (omega * t).sin_cos();
        (decay * cs, decay * sn / omega)
    };
    // M = [[−a/2, b], [−c, a/2]]
    [
        [ec - es * half, es * b],
        [-es * c, ec + es * half],
    ]
}

/// Exact linear update of a single mode over `dt`.
pub fn linear_mode_propagator(k: &Wavevector, eps: f64, mu: f64, dt: f64) -> ModePropagator {
    let k2 = k.k2();
    if k2 == 0.0 {
        return ModePropagator::IDENTITY;
    }
    let transverse = (-mu * k2 * dt).exp();
    let k2_eff = k.k2_eff();
    let longitudinal = if k2_eff == 0.0 {
        [[transverse, 0.0], [0.0, 1.0]]
    } else {
        damped_oscillator_exp(mu * k2, k2_eff, 1.0 / eps, dt)
    };
    ModePropagator {
        transverse,
        longitudinal,
    }
}

/// Propagators for every mode of a grid at a fixed `(ε, μ, κ, dt)`.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    grid: GridSpec,
    dt: f64,
    modes: Vec<ModePropagator>,
    heat_theta: Vec<f64>,
}

impl LinearFlow {
    pub fn new(grid: GridSpec, eps: f64, mu: f64, kappa: f64, dt: f64) -> Self {
        let mut modes = vec![ModePropagator::IDENTITY; grid.len()];
        let mut heat_theta = vec![1.0; grid.len()];
        grid.for_each_mode(|idx, m| {
            let wv = grid.wavevector(m);
            modes[idx] = linear_mode_propagator(&wv, eps, mu, dt);
            heat_theta[idx] = (-kappa * wv.k2() * dt).exp();
        });
        Self {
            grid,
            dt,
            modes,
            heat_theta,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance `(u, θ, p)` in place by `dt`.
    pub fn apply(&self, u: &mut VectorField, theta: &mut SpectralField, p: &mut SpectralField) {
        let grid = self.grid;
        let dim = grid.dim();
        let pc = p.coeffs_mut();
        let mut comps: Vec<&mut [Complex64]> =
            u.components_mut().iter_mut().map(|c| c.coeffs_mut()).collect();
        grid.for_each_mode(|idx, m| {
            let prop = &self.modes[idx];
            let wv = grid.wavevector(m);
            let k2e = wv.k2_eff();
            if k2e == 0.0 {
                for c in comps.iter_mut() {
                    c[idx] *= prop.transverse;
                }
                return;
            }
            let mut kv = Complex64::default();
            for a in 0..dim {
                kv += wv.k_eff[a] * comps[a][idx];
            }
            let s = Complex64::i() * kv;
            let (s_new, p_new) = prop.apply(s, pc[idx]);
            pc[idx] = p_new;
            // û = û_T + û_L with û_L = k (k·û)/|k|² and k·û = −i s
            let old_l = kv / k2e;
            let new_l = -Complex64::i() * s_new / k2e;
            for a in 0..dim {
                let ka = wv.k_eff[a];
                let ut = comps[a][idx] - ka * old_l;
                comps[a][idx] = prop.transverse * ut + ka * new_l;
            }
        });
        for (c, h) in theta.coeffs_mut().iter_mut().zip(&self.heat_theta) {
            *c *= h;
        }
    }
}
