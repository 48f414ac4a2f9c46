//! Periodic box descriptors and the discrete wavevector set.
//!
//! Modes are stored in FFT order along every axis: index `i` carries the
//! signed integer wavenumber `i` for `i <= n/2` and `i - n` above, so the set
//! per axis is `{-n/2+1, ..., n/2}`. Physical wavenumbers are the integers
//! scaled by `2π / length`. Flat arrays are row-major with axis 0 slowest.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Padding rule for dealiased products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PadFactor {
    /// 3/2 rule: quadratic products are alias-free.
    #[default]
    ThreeHalves,
    /// 2 rule: cubic products are alias-free.
    Two,
}

impl PadFactor {
    pub fn padded_size(self, n: usize) -> usize {
        match self {
            PadFactor::ThreeHalves => 3 * n / 2,
            PadFactor::Two => 2 * n,
        }
    }

    pub fn from_ratio(num: u32, den: u32) -> Result<Self> {
        match (num, den) {
            (3, 2) => Ok(PadFactor::ThreeHalves),
            (2, 1) | (4, 2) => Ok(PadFactor::Two),
            _ => Err(Error::InvalidGrid(format!(
                "pad_factor must be 3/2 or 2, got {num}/{den}"
            ))),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            PadFactor::ThreeHalves => 1.5,
            PadFactor::Two => 2.0,
        }
    }
}

impl std::fmt::Display for PadFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PadFactor::ThreeHalves => write!(f, "3/2"),
            PadFactor::Two => write!(f, "2"),
        }
    }
}

/// A validated periodic box: `dim` axes of `n` points on a side of `length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    length: f64,
    pad: PadFactor,
}

/// Build a validated grid.
pub fn make_grid(dim: usize, n: usize, length: f64, pad: PadFactor) -> Result<GridSpec> {
    GridSpec::new(dim, n, length, pad)
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, length: f64, pad: PadFactor) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid("n must be even".into()));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!("n must be at least 8, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("length must be > 0, got {length}")));
        }
        Ok(Self { dim, n, length, pad })
    }

    /// Side-2π grid with the default 3/2 padding.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 2.0 * PI, PadFactor::ThreeHalves)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn pad(&self) -> PadFactor {
        self.pad
    }

    pub fn with_pad(&self, pad: PadFactor) -> Self {
        Self { pad, ..*self }
    }

    /// Number of grid points (and of Fourier modes).
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn padded_n(&self) -> usize {
        self.pad.padded_size(self.n)
    }

    pub fn padded_len(&self) -> usize {
        self.padded_n().pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Physical wavenumber per unit integer mode.
    pub fn k_unit(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed integer mode carried by FFT index `i`.
    #[inline]
    pub fn mode_of_index(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// FFT index holding signed mode `m`, if it is on the grid.
    pub fn index_of_mode(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m > half || m <= -half {
            None
        } else if m >= 0 {
            Some(m as usize)
        } else {
            Some((self.n as i64 + m) as usize)
        }
    }

    /// Signed integer modes per axis in FFT order.
    pub fn axis_modes(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.mode_of_index(i)).collect()
    }

    /// Physical wavenumbers per axis in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let ku = self.k_unit();
        self.axis_modes().iter().map(|&m| m as f64 * ku).collect()
    }

    #[inline]
    pub fn is_nyquist(&self, m: i64) -> bool {
        m == (self.n / 2) as i64
    }

    /// Flat index of a multi-index of FFT positions.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Flat index of the mode `m` (trailing entries ignored past `dim`).
    pub fn mode_index(&self, m: [i64; 3]) -> Option<usize> {
        let mut flat = 0;
        for &mi in m.iter().take(self.dim) {
            flat = flat * self.n + self.index_of_mode(mi)?;
        }
        Some(flat)
    }

    /// Flat index of the mode `-m`, the Hermitian partner of `m`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let n = self.n;
        let mut rem = flat;
        let mut stride = self.len();
        let mut out = 0;
        for _ in 0..self.dim {
            stride /= n;
            let i = rem / stride;
            rem %= stride;
            out = out * n + (n - i) % n;
        }
        out
    }

    /// Visit every mode with its flat index and signed integer wavevector.
    /// Unused trailing components of the wavevector are zero.
    pub fn for_each_mode<F: FnMut(usize, [i64; 3])>(&self, mut f: F) {
        let n = self.n;
        let modes = self.axis_modes();
        match self.dim {
            2 => {
                for i in 0..n {
                    for j in 0..n {
                        f(i * n + j, [modes[i], modes[j], 0]);
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        let base = (i * n + j) * n;
                        for l in 0..n {
                            f(base + l, [modes[i], modes[j], modes[l]]);
                        }
                    }
                }
            }
        }
    }

    /// Visit every grid point with its flat index and coordinates.
    pub fn for_each_point<F: FnMut(usize, [f64; 3])>(&self, mut f: F) {
        let n = self.n;
        let h = self.spacing();
        match self.dim {
            2 => {
                for i in 0..n {
                    for j in 0..n {
                        f(i * n + j, [i as f64 * h, j as f64 * h, 0.0]);
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        let base = (i * n + j) * n;
                        for l in 0..n {
                            f(base + l, [i as f64 * h, j as f64 * h, l as f64 * h]);
                        }
                    }
                }
            }
        }
    }

    /// Sample `f(x)` at every grid point.
    pub fn sample<F: Fn([f64; 3]) -> f64>(&self, f: F) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.for_each_point(|idx, x| out[idx] = f(x));
        out
    }

    /// Wavevector data for a mode: full physical vector and the "effective"
    /// vector used by odd-order derivatives, whose components sitting on the
    /// Nyquist plane are zeroed so that derivatives of real fields stay real.
    #[inline]
    pub fn wavevector(&self, m: [i64; 3]) -> Wavevector {
        let ku = self.k_unit();
        let mut k = [0.0; 3];
        let mut k_eff = [0.0; 3];
        for a in 0..self.dim {
            k[a] = m[a] as f64 * ku;
            if !self.is_nyquist(m[a]) {
                k_eff[a] = k[a];
            }
        }
        Wavevector { k, k_eff }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Wavevector {
    pub k: [f64; 3],
    pub k_eff: [f64; 3],
}

impl Wavevector {
    #[inline]
    pub fn k2(&self) -> f64 {
        self.k.iter().map(|x| x * x).sum()
    }

    #[inline]
    pub fn k2_eff(&self) -> f64 {
        self.k_eff.iter().map(|x| x * x).sum()
    }
}
