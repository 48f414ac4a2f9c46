//! Artificial compressibility approximation of the incompressible
//! Navier–Stokes–Fourier system on periodic boxes, with the diagnostics
//! needed to study its `ε → 0` limit.
//!
//! The approximating system advanced by [`ac`] is
//!
//! ```text
//! ∂ₜu + ∇p = μΔu − (u·∇)u − ½(div u)u
//! ∂ₜθ + u·∇θ = κΔθ − ½(div u)θ
//! ε∂ₜp + div u = 0
//! ```
//!
//! and [`reference`] integrates its incompressible limit with the same
//! spectral machinery, so that differences between the two measure
//! `ε`-effects rather than scheme differences. [`lab`] turns pairs of runs
//! into sweeps, fitted rates and residual checks; [`io`] holds the config,
//! checkpoint and diagnostics formats used by the command-line front end.

pub mod ac;
pub mod error;
mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod lab;
pub mod leray;
pub mod mollifier;
pub mod norms;
pub mod ops;
pub mod reference;
pub mod series;

pub use error::{Error, Result};
pub use field::{SpectralField, VectorField};
pub use grid::{make_grid, GridSpec, PadFactor};
pub use leray::{hodge_decompose, project_p, project_q, HodgePair};
pub use norms::NormSpec;
pub use series::Series;
