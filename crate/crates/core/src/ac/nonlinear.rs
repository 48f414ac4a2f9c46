//! Dealiased quadratic terms
//!
//! ```text
//! N_u = −(u·∇)u − ½(div u)u,    N_θ = −u·∇θ − ½(div u)θ
//! ```
//!
//! The `½ div u` corrections make `∫N_u·u = ∫N_θ θ = 0`.

use crate::field::{SpectralField, VectorField};
use crate::ops::{partial, Dealiaser};

use super::ACState;

/// Tendencies of the nonlinear substep.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendencies {
    pub du: VectorField,
    pub dtheta: SpectralField,
    /// Largest `|u|` on the padded grid.
    pub max_speed: f64,
}

/// Reusable evaluator holding the padded-grid maps.
#[derive(Debug, Clone)]
pub struct NonlinearTerms {
    dealiaser: Dealiaser,
    corrections: bool,
}

impl NonlinearTerms {
    /// Terms of the compressible system, including the `½ div u` corrections.
    pub fn compressible(grid: crate::grid::GridSpec) -> Self {
        Self {
            dealiaser: Dealiaser::new(grid),
            corrections: true,
        }
    }

    /// Plain advection `−(u·∇)u, −u·∇θ`.
    pub fn advective(grid: crate::grid::GridSpec) -> Self {
        Self {
            dealiaser: Dealiaser::new(grid),
            corrections: false,
        }
    }

    pub fn eval(&self, u: &VectorField, theta: &SpectralField) -> Tendencies {
        let dim = u.dim();
        let mut inputs: Vec<SpectralField> = Vec::with_capacity(dim * dim + 2 * dim + 1);
        inputs.extend(u.components().iter().cloned());
        for comp in u.components() {
            for axis in 0..dim {
                inputs.push(partial(comp, axis));
            }
        }
        inputs.push(theta.clone());
        for axis in 0..dim {
            inputs.push(partial(theta, axis));
        }
        let refs: Vec<&SpectralField> = inputs.iter().collect();
        let phys = self.dealiaser.to_physical(&refs);
        let len = self.dealiaser.padded_len();
        let uph = &phys[..dim];
        let grad = |i: usize, j: usize| &phys[dim + i * dim + j]; // ∂_j u_i
        let th = &phys[dim + dim * dim];
        let gth = &phys[dim + dim * dim + 1..];

        let mut max_speed2: f64 = 0.0;
        for x in 0..len {
            let s: f64 = uph.iter().map(|c| c[x] * c[x]).sum();
            max_speed2 = max_speed2.max(s);
        }

        let half_div: Vec<f64> = if self.corrections {
            (0..len)
                .map(|x| 0.5 * (0..dim).map(|i| grad(i, i)[x]).sum::<f64>())
                .collect()
        } else {
            Vec::new()
        };

        let mut outs: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        for i in 0..dim {
            let mut acc = vec![0.0; len];
            for j in 0..dim {
                let uj = &uph[j];
                let g = grad(i, j);
                for ((a, x), y) in acc.iter_mut().zip(uj).zip(g) {
                    *a -= x * y;
                }
            }
            if self.corrections {
                for ((a, h), ui) in acc.iter_mut().zip(&half_div).zip(&uph[i]) {
                    *a -= h * ui;
                }
            }
            outs.push(acc);
        }
        let mut acc = vec![0.0; len];
        for j in 0..dim {
            for ((a, x), y) in acc.iter_mut().zip(&uph[j]).zip(&gth[j]) {
                *a -= x * y;
            }
        }
        if self.corrections {
            for ((a, h), t) in acc.iter_mut().zip(&half_div).zip(th) {
                *a -= h * t;
            }
        }
        outs.push(acc);

        let mut spec = self.dealiaser.to_spectral(&outs);
        let dtheta = spec.pop().expect("theta tendency");
        Tendencies {
            du: VectorField::from_components(spec).expect("same grid"),
            dtheta,
            max_speed: max_speed2.sqrt(),
        }
    }
}

/// Nonlinear tendencies `(N_u, N_θ)` of a state (no pressure, no diffusion).
pub fn nonlinear_rhs(state: &ACState) -> (VectorField, SpectralField) {
    let t = NonlinearTerms::compressible(*state.u.grid()).eval(&state.u, &state.theta);
    (t.du, t.dtheta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, PadFactor};
    use crate::ops::gradient;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shear_mode_is_annihilated() {
        let g = GridSpec::periodic(3, 16).unwrap();
        let u = VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]);
        let t = NonlinearTerms::compressible(g).eval(&u, &SpectralField::zeros(g));
        assert!(t.du.l2_norm() < 1e-14);
        assert!(t.dtheta.l2_norm() < 1e-14);
        assert!((t.max_speed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_velocity_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = GridSpec::periodic(2, 16).unwrap();
        let th = SpectralField::random_band_limited(g, 5, &mut rng);
        let t = NonlinearTerms::compressible(g).eval(&VectorField::zeros(g), &th);
        assert_eq!(t.du.l2_norm(), 0.0);
        assert_eq!(t.dtheta.l2_norm(), 0.0);
    }

    #[test]
    fn corrections_make_terms_skew() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for pad in [PadFactor::ThreeHalves, PadFactor::Two] {
            let g = GridSpec::new(3, 16, 2.0 * std::f64::consts::PI, pad).unwrap();
            let u = VectorField::random_band_limited(g, 7, &mut rng);
            let th = SpectralField::random_band_limited(g, 7, &mut rng);
            let t = NonlinearTerms::compressible(g).eval(&u, &th);
            let grad_norm = (0..3)
                .map(|a| gradient(u.component(a)).l2_norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(t.du.inner(&u).unwrap().abs() <= 1e-10 * u.l2_norm() * grad_norm);
            assert!(t.dtheta.inner(&th).unwrap().abs() <= 1e-10 * th.l2_norm_sqr().max(1.0) * grad_norm);
            // without the corrections the energy exchange is generically nonzero
            let plain = NonlinearTerms::advective(g).eval(&u, &th);
            assert!(plain.du.inner(&u).unwrap().abs() > 1e-6 * u.l2_norm() * grad_norm);
        }
    }
}
