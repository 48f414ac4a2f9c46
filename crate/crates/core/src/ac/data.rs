//! Initial-data families.
//!
//! - `taylor-green`: Taylor–Green velocity, a periodic blob for `θ`, `p₀ = 0`.
//! - `random`: random divergence-free velocity and random `θ` with a
//!   Gaussian spectrum envelope, `p₀ = 0`.
//! - `incompatible`: `random` plus an O(1) random mean-zero `p₀`.
//! - `compatible`: `random` with `p₀` the incompressible pressure of `u₀`.
//! - `shear`: `u₀ = (sin x₂, 0, 0)`, `θ₀ = p₀ = 0`.
//! - `acoustic`: `u₀ = 0`, `θ₀ = 0`, `p₀ = sin x₁`.
//!
//! Coordinates are scaled so that the patterns have one period per box side.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::GridSpec;
use crate::leray::project_p;
use crate::reference::recover_pressure;

use super::{ACState, Physics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFamily {
    TaylorGreen,
    Random,
    Incompatible,
    Compatible,
    Shear,
    Acoustic,
}

impl DataFamily {
    pub const ALL: [DataFamily; 6] = [
        DataFamily::TaylorGreen,
        DataFamily::Random,
        DataFamily::Incompatible,
        DataFamily::Compatible,
        DataFamily::Shear,
        DataFamily::Acoustic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DataFamily::TaylorGreen => "taylor-green",
            DataFamily::Random => "random",
            DataFamily::Incompatible => "incompatible",
            DataFamily::Compatible => "compatible",
            DataFamily::Shear => "shear",
            DataFamily::Acoustic => "acoustic",
        }
    }

    /// Whether `p₀` departs from the incompressible pressure at O(1).
    pub fn has_initial_layer(self) -> bool {
        matches!(self, DataFamily::Incompatible | DataFamily::Acoustic)
    }

    /// Families with smooth deterministic data, where monotone trends are asserted.
    pub fn is_smooth(self) -> bool {
        matches!(self, DataFamily::TaylorGreen | DataFamily::Shear | DataFamily::Acoustic)
    }
}

impl fmt::Display for DataFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DataFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|f| f.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown data family '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSpec {
    pub family: DataFamily,
    pub seed: u64,
}

impl DataSpec {
    pub fn new(family: DataFamily, seed: u64) -> Self {
        Self { family, seed }
    }

    /// `(u₀, θ₀, p₀)` on `grid`; the Nyquist planes are empty.
    pub fn fields(&self, grid: GridSpec) -> Result<(VectorField, SpectralField, SpectralField)> {
        let s = grid.k_unit();
        let zero = SpectralField::zeros(grid);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (mut u, mut theta, mut p) = match self.family {
            DataFamily::TaylorGreen => (taylor_green(grid), blob(grid), zero),
            DataFamily::Shear => (
                VectorField::from_fn(grid, |x| [(s * x[1]).sin(), 0.0, 0.0]),
                zero.clone(),
                zero,
            ),
            DataFamily::Acoustic => (
                VectorField::zeros(grid),
                zero.clone(),
                SpectralField::from_fn(grid, |x| (s * x[0]).sin()),
            ),
            DataFamily::Random | DataFamily::Incompatible | DataFamily::Compatible => {
                let u = random_solenoidal(grid, &mut rng);
                let theta = random_scalar(grid, &mut rng, true);
                let p = match self.family {
                    DataFamily::Incompatible => random_scalar(grid, &mut rng, false),
                    DataFamily::Compatible => recover_pressure(&u),
                    _ => zero,
                };
                (u, theta, p)
            }
        };
        u.drop_nyquist();
        theta.drop_nyquist();
        p.drop_nyquist();
        p.coeffs_mut()[0] = Default::default();
        Ok((u, theta, p))
    }

    pub fn state(&self, grid: GridSpec, physics: Physics) -> Result<ACState> {
        let (u, theta, p) = self.fields(grid)?;
        ACState::new(u, theta, p, physics)
    }
}

/// Envelope scale (in integer modes) of the random families.
const RANDOM_SCALE: f64 = 3.0;

fn envelope() -> impl Fn([i64; 3]) -> f64 + Copy {
    |m: [i64; 3]| {
        let m2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
        if m2 == 0.0 {
            0.0
        } else {
            (-m2 / (2.0 * RANDOM_SCALE * RANDOM_SCALE)).exp()
        }
    }
}

/// Root-mean-square normalization to 1.
fn normalize_rms(norm: f64, volume: f64) -> f64 {
    if norm == 0.0 {
        1.0
    } else {
        volume.sqrt() / norm
    }
}

fn random_solenoidal(grid: GridSpec, rng: &mut ChaCha8Rng) -> VectorField {
    let comps = (0..grid.dim())
        .map(|_| SpectralField::random_physical(grid, rng))
        .collect();
    let mut u = VectorField::from_components(comps).expect("same grid");
    u.apply_multiplier(envelope());
    let mut u = project_p(&u);
    let scale = normalize_rms(u.l2_norm(), grid.volume());
    u.scale(scale);
    u
}

fn random_scalar(grid: GridSpec, rng: &mut ChaCha8Rng, keep_mean: bool) -> SpectralField {
    let mut f = SpectralField::random_physical(grid, rng);
    let mean = f.coeffs()[0];
    f.apply_multiplier(envelope());
    if keep_mean {
        f.coeffs_mut()[0] = mean;
    }
    let scale = normalize_rms(f.l2_norm(), grid.volume());
    f.scale(scale);
    f
}

/// Taylor–Green velocity. In 2D `(cos x sin y, −sin x cos y)`, whose
/// incompressible pressure is `−¼(cos 2x + cos 2y)`; in 3D
/// `(sin x cos y cos z, −cos x sin y cos z, 0)`.
pub fn taylor_green(grid: GridSpec) -> VectorField {
    let s = grid.k_unit();
    match grid.dim() {
        2 => VectorField::from_fn(grid, |x| {
            let (a, b) = (s * x[0], s * x[1]);
            [a.cos() * b.sin(), -a.sin() * b.cos(), 0.0]
        }),
        _ => VectorField::from_fn(grid, |x| {
            let (a, b, c) = (s * x[0], s * x[1], s * x[2]);
            [a.sin() * b.cos() * c.cos(), -a.cos() * b.sin() * c.cos(), 0.0]
        }),
    }
}

/// Taylor–Green in the orientation `(sin x cos y, −cos x sin y)`.
pub fn taylor_green_sine(grid: GridSpec) -> VectorField {
    let s = grid.k_unit();
    VectorField::from_fn(grid, |x| {
        let (a, b) = (s * x[0], s * x[1]);
        [a.sin() * b.cos(), -a.cos() * b.sin(), 0.0]
    })
}

/// Periodic bump `exp(3 Σ (cos(x_a − π) − 1))` centred in the box.
pub fn blob(grid: GridSpec) -> SpectralField {
    let s = grid.k_unit();
    let dim = grid.dim();
    SpectralField::from_fn(grid, |x| {
        let e: f64 = (0..dim)
            .map(|a| (s * x[a] - std::f64::consts::PI).cos() - 1.0)
            .sum();
        (3.0 * e).exp()
    })
}
