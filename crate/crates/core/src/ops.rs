//! Exact Fourier-multiplier differential operators and dealiased products.
//!
//! Odd-order derivatives use the wavevector with its Nyquist components
//! zeroed (see [`GridSpec::wavevector`]); the Laplacian uses the full `|k|²`.
//! Products are formed on a padded grid and truncated back with the Nyquist
//! plane dropped, which makes them alias-free for quadratic terms of fields
//! without Nyquist content.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::field::{SpectralField, VectorField};
use crate::grid::GridSpec;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative size of the mean below which `Δ⁻¹` accepts a field.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// `∂_axis f`
pub fn partial(f: &SpectralField, axis: usize) -> SpectralField {
    let grid = *f.grid();
    let mut out = f.clone();
    let coeffs = out.coeffs_mut();
    grid.for_each_mode(|idx, m| {
        let k = grid.wavevector(m).k_eff[axis];
        coeffs[idx] *= I * k;
    });
    out
}

pub fn gradient(f: &SpectralField) -> VectorField {
    let comps = (0..f.grid().dim()).map(|a| partial(f, a)).collect();
    VectorField::from_components(comps).expect("gradient components share a grid")
}

pub fn divergence(v: &VectorField) -> SpectralField {
    let grid = *v.grid();
    let mut out = SpectralField::zeros(grid);
    let dim = grid.dim();
    let comps = v.components();
    let coeffs = out.coeffs_mut();
    grid.for_each_mode(|idx, m| {
        let k = grid.wavevector(m).k_eff;
        let mut acc = ZERO;
        for a in 0..dim {
            acc += I * k[a] * comps[a].coeffs()[idx];
        }
        coeffs[idx] = acc;
    });
    out
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    let grid = *f.grid();
    let mut out = f.clone();
    out.apply_multiplier(|m| -grid.wavevector(m).k2());
    out
}

/// `Δ⁻¹ f` with the zero mode mapped to zero. Rejects fields whose mean is
/// not negligible relative to their coefficient norm.
pub fn inverse_laplacian(f: &SpectralField) -> Result<SpectralField> {
    let mean = f.coeffs()[0].norm();
    let norm = f.coeff_norm();
    if mean > MEAN_TOLERANCE * norm {
        return Err(Error::NonZeroMean { mean, norm });
    }
    Ok(inverse_laplacian_unchecked(f))
}

/// `Δ⁻¹` on the mean-free part of `f` (quotient by constants).
pub fn inverse_laplacian_unchecked(f: &SpectralField) -> SpectralField {
    let grid = *f.grid();
    let mut out = f.clone();
    out.apply_multiplier(|m| {
        let k2 = grid.wavevector(m).k2();
        if k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    });
    out
}

pub fn laplacian_vec(v: &VectorField) -> VectorField {
    VectorField::from_components(v.components().iter().map(laplacian).collect())
        .expect("same grid")
}

pub fn inverse_laplacian_vec(v: &VectorField) -> Result<VectorField> {
    let comps = v
        .components()
        .iter()
        .map(inverse_laplacian)
        .collect::<Result<Vec<_>>>()?;
    VectorField::from_components(comps)
}

/// Scalar or vector operand for [`differential_operator`].
#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    Scalar(SpectralField),
    Vector(VectorField),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffKind {
    Gradient,
    Divergence,
    Laplacian,
    InverseLaplacian,
}

/// Apply a differential operator of the given kind. Gradient takes a
/// scalar, divergence a vector; the Laplacians act componentwise on both.
pub fn differential_operator(f: &AnyField, kind: DiffKind) -> Result<AnyField> {
    match (kind, f) {
        (DiffKind::Gradient, AnyField::Scalar(s)) => Ok(AnyField::Vector(gradient(s))),
        (DiffKind::Divergence, AnyField::Vector(v)) => Ok(AnyField::Scalar(divergence(v))),
        (DiffKind::Laplacian, AnyField::Scalar(s)) => Ok(AnyField::Scalar(laplacian(s))),
        (DiffKind::Laplacian, AnyField::Vector(v)) => Ok(AnyField::Vector(laplacian_vec(v))),
        (DiffKind::InverseLaplacian, AnyField::Scalar(s)) => {
            Ok(AnyField::Scalar(inverse_laplacian(s)?))
        }
        (DiffKind::InverseLaplacian, AnyField::Vector(v)) => {
            Ok(AnyField::Vector(inverse_laplacian_vec(v)?))
        }
        (kind, _) => Err(Error::InvalidArgument(format!(
            "{kind:?} is not defined for this field rank"
        ))),
    }
}

/// Moves fields between the base grid and the padded product grid.
///
/// Two real fields are transformed per complex FFT by packing them as the
/// real and imaginary parts of one array.
#[derive(Debug, Clone)]
pub struct Dealiaser {
    grid: GridSpec,
    m: usize,
    /// base flat index -> padded flat index, `usize::MAX` for dropped modes
    map: Vec<usize>,
    /// padded flat index of the Hermitian partner, for the retained modes
    partner: Vec<usize>,
}

impl Dealiaser {
    pub fn new(grid: GridSpec) -> Self {
        let m = grid.padded_n();
        let dim = grid.dim();
        let mut map = vec![usize::MAX; grid.len()];
        let mut partner = vec![usize::MAX; grid.len()];
        let pidx = |mi: i64| -> usize {
            if mi >= 0 {
                mi as usize
            } else {
                (m as i64 + mi) as usize
            }
        };
        grid.for_each_mode(|idx, modes| {
            if modes.iter().take(dim).any(|&mi| grid.is_nyquist(mi)) {
                return;
            }
            let mut flat = 0;
            let mut conj = 0;
            for &mi in modes.iter().take(dim) {
                flat = flat * m + pidx(mi);
                conj = conj * m + pidx(-mi);
            }
            map[idx] = flat;
            partner[idx] = conj;
        });
        Self {
            grid,
            m,
            map,
            partner,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn padded_len(&self) -> usize {
        self.m.pow(self.grid.dim() as u32)
    }

    fn scatter(&self, f: &SpectralField, g: Option<&SpectralField>) -> Vec<Complex64> {
        let mut buf = vec![ZERO; self.padded_len()];
        match g {
            None => {
                for (i, &p) in self.map.iter().enumerate() {
                    if p != usize::MAX {
                        buf[p] = f.coeffs()[i];
                    }
                }
            }
            Some(g) => {
                for (i, &p) in self.map.iter().enumerate() {
                    if p != usize::MAX {
                        buf[p] = f.coeffs()[i] + I * g.coeffs()[i];
                    }
                }
            }
        }
        buf
    }

    /// Physical values of every field on the padded grid.
    pub fn to_physical(&self, fields: &[&SpectralField]) -> Vec<Vec<f64>> {
        let dim = self.grid.dim();
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let mut buf = self.scatter(pair[0], pair.get(1).copied());
            fft::transform(&mut buf, dim, self.m, Direction::Inverse);
            out.push(buf.iter().map(|c| c.re).collect());
            if pair.len() == 2 {
                out.push(buf.iter().map(|c| c.im).collect());
            }
        }
        out
    }

    /// Transform padded physical values back to the base grid, keeping the
    /// retained (non-Nyquist) modes only.
    pub fn to_spectral(&self, values: &[Vec<f64>]) -> Vec<SpectralField> {
        let dim = self.grid.dim();
        let scale = 1.0 / self.padded_len() as f64;
        let mut out = Vec::with_capacity(values.len());
        for pair in values.chunks(2) {
            let mut buf: Vec<Complex64> = match pair {
                [a, b] => a
                    .iter()
                    .zip(b)
                    .map(|(&x, &y)| Complex64::new(x, y))
                    .collect(),
                [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                _ => unreachable!(),
            };
            fft::transform(&mut buf, dim, self.m, Direction::Forward);
            let mut first = vec![ZERO; self.grid.len()];
            if pair.len() == 2 {
                let mut second = vec![ZERO; self.grid.len()];
                for (i, (&p, &q)) in self.map.iter().zip(&self.partner).enumerate() {
                    if p != usize::MAX {
                        let z = buf[p] * scale;
                        let zc = buf[q].conj() * scale;
                        first[i] = 0.5 * (z + zc);
                        second[i] = -0.5 * I * (z - zc);
                    }
                }
                out.push(SpectralField::from_coeffs(self.grid, first).expect("shape"));
                out.push(SpectralField::from_coeffs(self.grid, second).expect("shape"));
            } else {
                for (i, &p) in self.map.iter().enumerate() {
                    if p != usize::MAX {
                        first[i] = buf[p] * scale;
                    }
                }
                out.push(SpectralField::from_coeffs(self.grid, first).expect("shape"));
            }
        }
        out
    }
}

/// Dealiased pointwise product `a b`.
pub fn dealias_product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.check_grid(b)?;
    let d = Dealiaser::new(*a.grid());
    let phys = d.to_physical(&[a, b]);
    let prod: Vec<f64> = phys[0].iter().zip(&phys[1]).map(|(x, y)| x * y).collect();
    Ok(d.to_spectral(&[prod]).pop().expect("one field"))
}

/// `(u·∇) v` for vector fields, dealiased.
pub fn advect_vector(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    u.check_grid(v)?;
    let dim = u.dim();
    let d = Dealiaser::new(*u.grid());
    let mut inputs: Vec<SpectralField> = u.components().to_vec();
    for comp in v.components() {
        for axis in 0..dim {
            inputs.push(partial(comp, axis));
        }
    }
    let refs: Vec<&SpectralField> = inputs.iter().collect();
    let phys = d.to_physical(&refs);
    let len = d.padded_len();
    let mut outs = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut acc = vec![0.0; len];
        for j in 0..dim {
            let uj = &phys[j];
            let dvi = &phys[dim + i * dim + j];
            for ((a, x), y) in acc.iter_mut().zip(uj).zip(dvi) {
                *a += x * y;
            }
        }
        outs.push(acc);
    }
    VectorField::from_components(d.to_spectral(&outs))
}

/// `Σ_ij ∂_i u_j ∂_j u_i`, the trace of `(Du)²`, dealiased.
pub fn trace_grad_squared(u: &VectorField) -> SpectralField {
    let dim = u.dim();
    let d = Dealiaser::new(*u.grid());
    let mut inputs = Vec::with_capacity(dim * dim);
    for comp in u.components() {
        for axis in 0..dim {
            inputs.push(partial(comp, axis));
        }
    }
    let refs: Vec<&SpectralField> = inputs.iter().collect();
    let phys = d.to_physical(&refs);
    let mut acc = vec![0.0; d.padded_len()];
    for i in 0..dim {
        for j in 0..dim {
            // ∂_i u_j is stored at j*dim + i
            let a = &phys[j * dim + i];
            let b = &phys[i * dim + j];
            for ((s, x), y) in acc.iter_mut().zip(a).zip(b) {
                *s += x * y;
            }
        }
    }
    d.to_spectral(&[acc]).pop().expect("one field")
}
