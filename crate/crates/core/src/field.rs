//! Real fields stored as Fourier coefficients on a [`GridSpec`].

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::GridSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A real scalar field held as mean-normalized Fourier coefficients:
/// `f(x) = Σ_k c_k exp(i k·x)` with `c_0` the spatial mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                actual: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Forward transform of physical samples (row-major, axis 0 slowest).
    pub fn from_physical(grid: GridSpec, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self {
            grid,
            coeffs: fft::forward_real(values, grid.dim(), grid.n()),
        })
    }

    /// Sample an analytic function on the grid and transform it.
    pub fn from_fn<F: Fn([f64; 3]) -> f64>(grid: GridSpec, f: F) -> Self {
        let values = grid.sample(f);
        Self {
            grid,
            coeffs: fft::forward_real(&values, grid.dim(), grid.n()),
        }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        let mut out = Self::zeros(grid);
        out.coeffs[0] = Complex64::new(value, 0.0);
        out
    }

    /// White noise in physical space, standard normal per point.
    pub fn random_physical<R: Rng>(grid: GridSpec, rng: &mut R) -> Self {
        let values: Vec<f64> = (0..grid.len()).map(|_| rng.sample(StandardNormal)).collect();
        Self {
            grid,
            coeffs: fft::forward_real(&values, grid.dim(), grid.n()),
        }
    }

    /// Random field with every retained mode bounded by `|m_a| <= band`
    /// on every axis; the Nyquist plane is empty.
    pub fn random_band_limited<R: Rng>(grid: GridSpec, band: i64, rng: &mut R) -> Self {
        let mut f = Self::random_physical(grid, rng);
        f.apply_mode_filter(|m| m.iter().all(|&mi| mi.abs() <= band));
        f
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn to_physical(&self) -> Vec<f64> {
        fft::inverse_real(&self.coeffs, self.grid.dim(), self.grid.n())
    }

    /// Coefficient of the signed integer mode `m`, if present on the grid.
    pub fn coeff(&self, m: [i64; 3]) -> Option<Complex64> {
        self.grid.mode_index(m).map(|i| self.coeffs[i])
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Multiply every coefficient by a real function of its mode.
    pub fn apply_multiplier<F: Fn([i64; 3]) -> f64>(&mut self, f: F) {
        let coeffs = &mut self.coeffs;
        self.grid.for_each_mode(|idx, m| coeffs[idx] *= f(m));
    }

    /// Zero every coefficient for which `keep` is false.
    pub fn apply_mode_filter<F: Fn([i64; 3]) -> bool>(&mut self, keep: F) {
        let coeffs = &mut self.coeffs;
        self.grid.for_each_mode(|idx, m| {
            if !keep(m) {
                coeffs[idx] = ZERO;
            }
        });
    }

    /// Zero the Nyquist plane of every axis.
    pub fn drop_nyquist(&mut self) {
        let half = (self.grid.n() / 2) as i64;
        self.apply_mode_filter(|m| m.iter().all(|&mi| mi != half));
    }

    /// Coefficient-space ℓ² norm (Parseval: `‖f‖_{L²}² = V Σ|c_k|²`).
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `∫ f² dx` by Parseval.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sqr().sqrt()
    }

    /// `∫ f g dx` by Parseval.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.grid.volume()
            * self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>())
    }

    /// Largest violation of `c(-k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let partner = self.coeffs[self.grid.conjugate_index(idx)];
            worst = worst.max((c - partner.conj()).norm());
        }
        worst
    }

    /// Replace every coefficient pair by its Hermitian average.
    pub fn symmetrize(&mut self) {
        let grid = self.grid;
        let src = self.coeffs.clone();
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            let partner = src[grid.conjugate_index(idx)];
            *c = 0.5 * (src[idx] + partner.conj());
        }
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// A `dim`-tuple of scalar fields on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn from_components(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("vector field needs components".into()))?;
        let grid = *first.grid();
        if components.len() != grid.dim() {
            return Err(Error::ShapeMismatch {
                expected: grid.dim(),
                actual: components.len(),
            });
        }
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { components })
    }

    pub fn from_fn<F: Fn([f64; 3]) -> [f64; 3]>(grid: GridSpec, f: F) -> Self {
        Self {
            components: (0..grid.dim())
                .map(|a| SpectralField::from_fn(grid, |x| f(x)[a]))
                .collect(),
        }
    }

    pub fn from_physical(grid: GridSpec, values: &[Vec<f64>]) -> Result<Self> {
        if values.len() != grid.dim() {
            return Err(Error::ShapeMismatch {
                expected: grid.dim(),
                actual: values.len(),
            });
        }
        Ok(Self {
            components: values
                .iter()
                .map(|v| SpectralField::from_physical(grid, v))
                .collect::<Result<_>>()?,
        })
    }

    pub fn random_band_limited<R: Rng>(grid: GridSpec, band: i64, rng: &mut R) -> Self {
        Self {
            components: (0..grid.dim())
                .map(|_| SpectralField::random_band_limited(grid, band, rng))
                .collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [SpectralField] {
        &mut self.components
    }

    pub fn component(&self, a: usize) -> &SpectralField {
        &self.components[a]
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        self.components.iter().map(|c| c.to_physical()).collect()
    }

    pub fn l2_norm_sqr(&self) -> f64 {
        self.components.iter().map(|c| c.l2_norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sqr().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::GridMismatch);
        }
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid() == other.grid() && self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn apply_multiplier<F: Fn([i64; 3]) -> f64 + Copy>(&mut self, f: F) {
        for c in self.components.iter_mut() {
            c.apply_multiplier(f);
        }
    }

    pub fn drop_nyquist(&mut self) {
        for c in self.components.iter_mut() {
            c.drop_nyquist();
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.components.iter_mut() {
            c.scale(a);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.components.iter_mut().zip(&other.components) {
            x.axpy(a, y);
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.hermitian_defect())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    /// Pointwise Euclidean magnitude on the grid.
    pub fn magnitude_physical(&self) -> Vec<f64> {
        let phys = self.to_physical();
        let mut out = vec![0.0; self.grid().len()];
        for comp in &phys {
            for (o, v) in out.iter_mut().zip(comp) {
                *o += v * v;
            }
        }
        out.iter_mut().for_each(|o| *o = o.sqrt());
        out
    }
}
