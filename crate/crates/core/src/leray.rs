//! Leray–Hodge splitting of vector fields into gradient (`Q`) and
//! divergence-free (`P`) parts, applied mode by mode as `k⊗k/|k|²`.
//!
//! Constant fields, and modes whose effective wavevector vanishes, are
//! divergence-free and go to `P`.

use num_complex::Complex64;

use crate::field::VectorField;

/// The pair `(Pv, Qv)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgePair {
    pub solenoidal: VectorField,
    pub gradient: VectorField,
}

pub fn hodge_decompose(v: &VectorField) -> HodgePair {
    let grid = *v.grid();
    let dim = grid.dim();
    let mut grad = VectorField::zeros(grid);
    let mut sol = v.clone();
    {
        let src: Vec<&[Complex64]> = v.components().iter().map(|c| c.coeffs()).collect();
        let mut gq: Vec<Vec<Complex64>> = (0..dim).map(|_| vec![Complex64::default(); grid.len()]).collect();
        grid.for_each_mode(|idx, m| {
            let wv = grid.wavevector(m);
            let k2 = wv.k2_eff();
            if k2 == 0.0 {
                return;
            }
            let mut kv = Complex64::default();
            for a in 0..dim {
                kv += wv.k_eff[a] * src[a][idx];
            }
            let s = kv / k2;
            for a in 0..dim {
                gq[a][idx] = wv.k_eff[a] * s;
            }
        });
        for (a, comp) in grad.components_mut().iter_mut().enumerate() {
            comp.coeffs_mut().copy_from_slice(&gq[a]);
        }
    }
    for (s, g) in sol.components_mut().iter_mut().zip(grad.components()) {
        s.axpy(-1.0, g);
    }
    HodgePair {
        solenoidal: sol,
        gradient: grad,
    }
}

/// `Q v = ∇Δ⁻¹div v`
pub fn project_q(v: &VectorField) -> VectorField {
    hodge_decompose(v).gradient
}

/// `P v = v − Q v`
pub fn project_p(v: &VectorField) -> VectorField {
    hodge_decompose(v).solenoidal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;
    use crate::grid::GridSpec;
    use crate::ops::{divergence, gradient};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: &VectorField, b: &VectorField) -> f64 {
        a.sub(b).l2_norm() / b.l2_norm().max(1e-300)
    }

    #[test]
    fn q_is_identity_on_gradients() {
        let g = GridSpec::periodic(3, 16).unwrap();
        let v = gradient(&SpectralField::from_fn(g, |x| x[0].sin()));
        assert!(rel(&project_q(&v), &v) < 1e-14);
        assert!(project_p(&v).l2_norm() < 1e-14 * v.l2_norm());
    }

    #[test]
    fn p_is_identity_on_shear() {
        let g = GridSpec::periodic(3, 16).unwrap();
        let v = VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]);
        assert!(project_q(&v).l2_norm() < 1e-14);
        assert!(rel(&project_p(&v), &v) < 1e-14);
    }

    #[test]
    fn decomposition_of_mixed_field() {
        let g = GridSpec::periodic(3, 16).unwrap();
        let v = VectorField::from_fn(g, |x| [x[0].cos() + x[1].sin(), 0.0, 0.0]);
        let h = hodge_decompose(&v);
        let grad = VectorField::from_fn(g, |x| [x[0].cos(), 0.0, 0.0]);
        let sol = VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]);
        assert!(rel(&h.gradient, &grad) < 1e-14);
        assert!(rel(&h.solenoidal, &sol) < 1e-14);
        let z = hodge_decompose(&VectorField::zeros(g));
        assert_eq!(z.gradient.l2_norm(), 0.0);
        assert_eq!(z.solenoidal.l2_norm(), 0.0);
    }

    #[test]
    fn constants_go_to_p() {
        let g = GridSpec::periodic(2, 8).unwrap();
        let v = VectorField::from_fn(g, |_| [1.0, -2.0, 0.0]);
        assert!(rel(&project_p(&v), &v) < 1e-15);
    }

    #[test]
    fn random_projector_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = GridSpec::periodic(3, 12).unwrap();
        let v = VectorField::from_components(
            (0..3).map(|_| SpectralField::random_physical(g, &mut rng)).collect(),
        )
        .unwrap();
        let h = hodge_decompose(&v);
        let n = v.l2_norm();
        assert!(project_q(&h.gradient).sub(&h.gradient).l2_norm() < 1e-12 * n);
        assert!(project_p(&h.solenoidal).sub(&h.solenoidal).l2_norm() < 1e-12 * n);
        assert!(project_p(&h.gradient).l2_norm() < 1e-12 * n);
        assert!(project_q(&h.solenoidal).l2_norm() < 1e-12 * n);
        assert!(divergence(&h.solenoidal).l2_norm() < 1e-12 * n);
        let cross = h.gradient.inner(&h.solenoidal).unwrap();
        assert!(cross.abs() < 1e-12 * n * n);
        let pyth = h.gradient.l2_norm_sqr() + h.solenoidal.l2_norm_sqr();
        assert!((pyth - n * n).abs() < 1e-12 * n * n);
    }
}
