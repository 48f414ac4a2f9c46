//! Binary checkpoints of an [`ACState`].
//!
//! Layout, all little-endian:
//!
//! ```text
//! b"ACNSF1"            magic
//! u32                  version (1)
//! u32                  dim
//! u32 × dim            points per axis
//! f64 × 5              length, eps, mu, kappa, t
//! f64 × (dim+2)·N      u₀ … u_{d−1}, θ, p on the physical grid, row-major
//! ```

use std::fs;
use std::path::Path;

use crate::ac::{ACState, Physics};
use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::{GridSpec, PadFactor};

pub const MAGIC: &[u8; 6] = b"ACNSF1";
pub const VERSION: u32 = 1;

/// Largest Hermitian defect, relative to the field size, accepted on load.
const DRIFT_TOLERANCE: f64 = 1e-10;

fn put_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_checkpoint(state: &ACState) -> Vec<u8> {
    let g = state.grid();
    let mut out = Vec::with_capacity(64 + 8 * (g.dim() + 2) * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    for _ in 0..g.dim() {
        out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    }
    put_f64s(&mut out, &[g.length(), state.eps, state.mu, state.kappa, state.t]);
    for c in state.u.components() {
        put_f64s(&mut out, &c.to_physical());
    }
    put_f64s(&mut out, &state.theta.to_physical());
    put_f64s(&mut out, &state.p.to_physical());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len()).ok_or_else(|| {
            Error::Checkpoint(format!(
                "truncated checkpoint: needed {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            ))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

fn symmetrized(mut f: SpectralField, what: &str) -> Result<SpectralField> {
    let scale = f.coeff_norm().max(1.0);
    let defect = f.hermitian_defect();
    if !(defect <= DRIFT_TOLERANCE * scale) {
        return Err(Error::Checkpoint(format!(
            "{what} is not real to working precision (Hermitian defect {defect:e})"
        )));
    }
    f.symmetrize();
    Ok(f)
}

/// Decode a checkpoint; the dealiasing pad is not stored and comes from `pad`.
pub fn decode_checkpoint(bytes: &[u8], pad: PadFactor) -> Result<ACState> {
    let mut r = Reader { bytes, pos: 0 };
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Checkpoint("not an ACNSF1 checkpoint".into()));
    }
    r.pos = MAGIC.len();
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version {version} (expected {VERSION})"
        )));
    }
    let dim = r.u32()? as usize;
    if !(dim == 2 || dim == 3) {
        return Err(Error::Checkpoint(format!("unsupported dimension {dim}")));
    }
    let ns: Vec<usize> = (0..dim).map(|_| r.u32().map(|v| v as usize)).collect::<Result<_>>()?;
    if ns.iter().any(|&v| v != ns[0]) {
        return Err(Error::Checkpoint(format!("anisotropic grids are not supported: {ns:?}")));
    }
    let length = r.f64()?;
    let physics = Physics {
        eps: r.f64()?,
        mu: r.f64()?,
        kappa: r.f64()?,
    };
    let t = r.f64()?;
    let grid = GridSpec::new(dim, ns[0], length, pad).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let len = grid.len();
    let u = (0..dim)
        .map(|_| r.f64s(len))
        .collect::<Result<Vec<_>>>()?;
    let theta = r.f64s(len)?;
    let p = r.f64s(len)?;
    if let Some(bad) = u.iter().chain([&theta, &p]).flatten().find(|v| !v.is_finite()) {
        return Err(Error::Checkpoint(format!("non-finite value {bad} in field data")));
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after the pressure field",
            bytes.len() - r.pos
        )));
    }
    let u = VectorField::from_components(
        VectorField::from_physical(grid, &u)?
            .components()
            .iter()
            .enumerate()
            .map(|(i, c)| symmetrized(c.clone(), &format!("u{i}")))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let theta = symmetrized(SpectralField::from_physical(grid, &theta)?, "theta")?;
    let p = symmetrized(SpectralField::from_physical(grid, &p)?, "p")?;
    let mut state = ACState::new(u, theta, p, physics).map_err(|e| Error::Checkpoint(e.to_string()))?;
    state.t = t;
    Ok(state)
}

pub fn write_checkpoint(path: &Path, state: &ACState) -> Result<()> {
    fs::write(path, encode_checkpoint(state))?;
    Ok(())
}

/// Load a checkpoint for a run on `grid`, which must match the stored dimension,
/// resolution and box length.
pub fn read_checkpoint(path: &Path, grid: &GridSpec) -> Result<ACState> {
    let bytes = fs::read(path)?;
    let state = decode_checkpoint(&bytes, grid.pad())?;
    let g = state.grid();
    if g.dim() != grid.dim() {
        return Err(Error::Checkpoint(format!(
            "dimension mismatch: checkpoint is {}D, run is {}D",
            g.dim(),
            grid.dim()
        )));
    }
    if g.n() != grid.n() || (g.length() - grid.length()).abs() > 1e-12 * grid.length() {
        return Err(Error::Checkpoint(format!(
            "grid mismatch: checkpoint has n = {}, L = {}; run has n = {}, L = {}",
            g.n(),
            g.length(),
            grid.n(),
            grid.length()
        )));
    }
    Ok(state)
}
