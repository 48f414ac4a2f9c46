//! Friedrichs mollifiers `j_α = α^{-d} j(x/α)` built on the bump
//! `exp(−1/(1−|x|²))`, and sweeps of the two smoothing inequalities
//!
//! ```text
//! ‖f − f∗j_α‖_{L^p} ≤ C α^{1−σ} ‖∇f‖_{L²},        σ = d(1/2 − 1/p)
//! ‖f∗j_α‖_{L^p}     ≤ C α^{−s−d(1/q−1/p)} ‖f‖_{W^{−s,q}}
//! ```
//!
//! Convolution is applied as the Fourier multiplier `ĵ(α|k|)`. The kernel
//! transform is computed once by quadrature on the reference bump.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::norms::{lr_quadrature, spatial_norm, NormSpec};

/// Quadrature nodes per unit radius for the kernel transform.
const QUAD_NODES: usize = 2048;

fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Transform of the unit-mass reference bump in `dim` dimensions,
/// `ĵ(ξ) = ∫ j(x) e^{−iξ·x₁} dx`, which is real, even and radial.
#[derive(Debug, Clone)]
pub struct KernelTransform {
    dim: usize,
    /// Nodes on [0, 1] and weights (trapezoid, mass-normalized).
    nodes: Vec<f64>,
    weights: Vec<f64>,
    mass: f64,
}

impl KernelTransform {
    pub fn new(dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!("dim must be 2 or 3, got {dim}")));
        }
        let h = 1.0 / QUAD_NODES as f64;
        let nodes: Vec<f64> = (0..=QUAD_NODES).map(|i| i as f64 * h).collect();
        // Both forms integrate an even integrand that is flat at the support
        // edge, so the trapezoid rule is spectrally accurate.
        let raw: Vec<f64> = match dim {
            // radial form: ĵ(ξ) = 4π ∫ j(r) r² sinc(ξr) dr
            3 => nodes
                .iter()
                .map(|&r| 4.0 * std::f64::consts::PI * bump(r * r) * r * r * h)
                .collect(),
            // marginal form: ĵ(ξ) = 2 ∫₀¹ g(x) cos(ξx) dx, g(x) = ∫ j(x, y) dy
            _ => nodes
                .iter()
                .map(|&x| {
                    let ymax2 = 1.0 - x * x;
                    if ymax2 <= 0.0 {
                        return 0.0;
                    }
                    let m = QUAD_NODES;
                    let hy = ymax2.sqrt() / m as f64;
                    let inner: f64 = (0..=m)
                        .map(|j| {
                            let y = j as f64 * hy;
                            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                            w * bump(x * x + y * y)
                        })
                        .sum();
                    4.0 * inner * hy * h
                })
                .collect(),
        };
        let weights: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(i, w)| if i == 0 || i == QUAD_NODES { 0.5 * w } else { *w })
            .collect();
        let mass: f64 = weights.iter().sum();
        let weights = weights.iter().map(|w| w / mass).collect();
        Ok(Self { dim, nodes, weights, mass })
    }

    /// Unnormalized mass `∫ exp(−1/(1−|x|²)) dx` of the bump.
    pub fn raw_mass(&self) -> f64 {
        self.mass
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `ĵ(ξ)` for the unit-mass kernel; `ĵ(0) = 1`.
    pub fn eval(&self, xi: f64) -> f64 {
        let xi = xi.abs();
        match self.dim {
            3 => self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&r, &w)| {
                    let z = xi * r;
                    let sinc = if z.abs() < 1e-8 { 1.0 - z * z / 6.0 } else { z.sin() / z };
                    w * sinc
                })
                .sum(),
            _ => self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * (xi * x).cos())
                .sum(),
        }
    }

    /// Unit-mass kernel value `j(x)` at radius `r`.
    pub fn kernel(&self, r: f64) -> f64 {
        bump(r * r) / self.mass
    }
}

/// A mollifier at scale `alpha` with the standard bump kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub alpha: f64,
}

impl MollifierSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "mollifier scale must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    /// The scale `α = ε^{1/18}`.
    pub fn from_eps(eps: f64) -> Result<Self> {
        Self::new(eps.powf(1.0 / 18.0))
    }

    /// Check that the kernel is resolved by and fits inside `grid`.
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let min_alpha = 4.0 * grid.spacing();
        if self.alpha < min_alpha * (1.0 - 1e-12) {
            return Err(Error::UnderResolvedKernel {
                alpha: self.alpha,
                min_alpha,
            });
        }
        if self.alpha > grid.length() / 4.0 {
            return Err(Error::InvalidArgument(format!(
                "mollifier support {} exceeds a quarter of the box side {}",
                self.alpha,
                grid.length()
            )));
        }
        Ok(())
    }

    /// Dilated kernel `α^{-d} j(x/α)` at radius `r`.
    pub fn kernel_at(&self, transform: &KernelTransform, r: f64) -> f64 {
        transform.kernel(r / self.alpha) / self.alpha.powi(transform.dim() as i32)
    }
}

/// Multiplier table `ĵ(α|k|)` keyed by the integer `|m|²`.
fn multiplier_table(grid: &GridSpec, transform: &KernelTransform, alpha: f64) -> HashMap<i64, f64> {
    let mut table = HashMap::from([(0, 1.0)]);
    let ku = grid.k_unit();
    grid.for_each_mode(|_, m| {
        let m2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
        table
            .entry(m2)
            .or_insert_with(|| transform.eval(alpha * ku * (m2 as f64).sqrt()));
    });
    table
}

fn apply_table(f: &SpectralField, table: &HashMap<i64, f64>) -> SpectralField {
    let mut out = f.clone();
    out.apply_multiplier(|m| table[&(m[0] * m[0] + m[1] * m[1] + m[2] * m[2])]);
    out
}

/// `f ∗ j_α`
pub fn mollify(f: &SpectralField, spec: &MollifierSpec) -> Result<SpectralField> {
    let grid = *f.grid();
    spec.validate(&grid)?;
    let transform = KernelTransform::new(grid.dim())?;
    Ok(apply_table(f, &multiplier_table(&grid, &transform, spec.alpha)))
}

/// One α row of a ratio table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub alpha: f64,
    pub numerator: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub rows: Vec<RatioRow>,
    pub max_ratio: f64,
    /// Log-log slope of the numerator against α; `None` when a numerator
    /// vanishes or fewer than two scales were tested.
    pub numerator_slope: Option<f64>,
}

impl RatioTable {
    fn from_rows(rows: Vec<RatioRow>) -> Self {
        let max_ratio = rows.iter().fold(0.0_f64, |m, r| m.max(r.ratio));
        let numerator_slope = if rows.len() >= 2 && rows.iter().all(|r| r.numerator > 0.0) {
            let xs: Vec<f64> = rows.iter().map(|r| r.alpha.ln()).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.numerator.ln()).collect();
            Some(least_squares_slope(&xs, &ys))
        } else {
            None
        };
        Self { rows, max_ratio, numerator_slope }
    }

    pub fn all_finite(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.numerator.is_finite() && r.bound.is_finite() && r.ratio.is_finite())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,numerator,bound,ratio\n");
        for r in &self.rows {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", r.alpha, r.numerator, r.bound, r.ratio);
        }
        s
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn ratio(numerator: f64, bound: f64) -> f64 {
    if numerator == 0.0 {
        0.0
    } else {
        numerator / bound
    }
}

fn checked_alphas(grid: &GridSpec, alphas: &[f64]) -> Result<Vec<MollifierSpec>> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("empty alpha list".into()));
    }
    alphas
        .iter()
        .map(|&a| {
            let spec = MollifierSpec::new(a)?;
            spec.validate(grid)?;
            Ok(spec)
        })
        .collect()
}

/// Sweeps parallelize over α only while the field stays small.
const PARALLEL_LEN_LIMIT: usize = 1 << 20;

fn map_alphas<T: Send, F: Fn(&MollifierSpec) -> Result<T> + Sync>(
    grid: &GridSpec,
    specs: &[MollifierSpec],
    f: F,
) -> Result<Vec<T>> {
    if grid.len() <= PARALLEL_LEN_LIMIT {
        specs.par_iter().map(&f).collect()
    } else {
        specs.iter().map(&f).collect()
    }
}

/// `‖∇f‖_{L²}` with the full wavevector.
fn gradient_l2(f: &SpectralField) -> f64 {
    let grid = *f.grid();
    let c = f.coeffs();
    let mut acc = 0.0;
    grid.for_each_mode(|idx, m| acc += grid.wavevector(m).k2() * c[idx].norm_sqr());
    (acc * grid.volume()).sqrt()
}

fn sigma(dim: usize, p: f64) -> f64 {
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    dim as f64 * (0.5 - inv_p)
}

fn check_y1_range(dim: usize, p: f64) -> Result<()> {
    let ok = match dim {
        3 => (2.0..=6.0).contains(&p),
        _ => p >= 2.0 && p.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "p = {p} outside the admissible range for d = {dim}"
        )))
    }
}

/// Ratios `‖f − f∗j_α‖_{L^p} / (α^{1−σ}‖∇f‖_{L²})` for each α.
pub fn check_friedrichs_y1(f: &SpectralField, alphas: &[f64], p: f64) -> Result<RatioTable> {
    Ok(check_friedrichs_y1_multi(f, alphas, &[p])?.remove(0))
}

/// [`check_friedrichs_y1`] for several exponents, sharing one mollification
/// per scale.
pub fn check_friedrichs_y1_multi(f: &SpectralField, alphas: &[f64], ps: &[f64]) -> Result<Vec<RatioTable>> {
    let grid = *f.grid();
    for &p in ps {
        check_y1_range(grid.dim(), p)?;
    }
    let specs = checked_alphas(&grid, alphas)?;
    let transform = KernelTransform::new(grid.dim())?;
    let grad = gradient_l2(f);
    let dv = grid.volume() / grid.len() as f64;
    let per_alpha: Vec<Vec<RatioRow>> = map_alphas(&grid, &specs, |spec| {
        let table = multiplier_table(&grid, &transform, spec.alpha);
        let diff = f.sub(&apply_table(f, &table)).to_physical();
        Ok(ps
            .iter()
            .map(|&p| {
                let numerator = lr_quadrature(&diff, dv, p);
                let bound = spec.alpha.powf(1.0 - sigma(grid.dim(), p)) * grad;
                RatioRow { alpha: spec.alpha, numerator, bound, ratio: ratio(numerator, bound) }
            })
            .collect())
    })?;
    Ok((0..ps.len())
        .map(|j| RatioTable::from_rows(per_alpha.iter().map(|rows| rows[j]).collect()))
        .collect())
}

/// Ratios `‖f∗j_α‖_{L^p} / (α^{−s−d(1/q−1/p)}‖f‖_{W^{−s,q}})` for each α.
pub fn check_friedrichs_y2(f: &SpectralField, alphas: &[f64], s: f64, q: f64, p: f64) -> Result<RatioTable> {
    if !(q >= 1.0) || !(p >= q) {
        return Err(Error::InvalidArgument(format!("need 1 <= q <= p (q = {q}, p = {p})")));
    }
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("need s >= 0, got {s}")));
    }
    let grid = *f.grid();
    let specs = checked_alphas(&grid, alphas)?;
    let transform = KernelTransform::new(grid.dim())?;
    let base = spatial_norm(f, &NormSpec::spatial(q, -s))?;
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let gain = s + grid.dim() as f64 * (inv(q) - inv(p));
    let dv = grid.volume() / grid.len() as f64;
    let rows = map_alphas(&grid, &specs, |spec| {
        let table = multiplier_table(&grid, &transform, spec.alpha);
        let smooth = apply_table(f, &table).to_physical();
        let numerator = lr_quadrature(&smooth, dv, p);
        let bound = spec.alpha.powf(-gain) * base;
        Ok(RatioRow { alpha: spec.alpha, numerator, bound, ratio: ratio(numerator, bound) })
    })?;
    Ok(RatioTable::from_rows(rows))
}

/// Mean-zero random field with amplitude spectrum `|k|^{−decay}`.
pub fn power_law_field<R: Rng>(grid: GridSpec, decay: f64, rng: &mut R) -> SpectralField {
    let mut f = SpectralField::random_physical(grid, rng);
    f.apply_multiplier(|m| {
        let k2 = grid.wavevector(m).k2();
        if k2 == 0.0 {
            0.0
        } else {
            k2.powf(-0.5 * decay)
        }
    });
    f
}

/// Spectrum exponent making a field just barely `H¹` in `dim` dimensions.
pub fn h1_decay(dim: usize) -> f64 {
    dim as f64 / 2.0 + 1.0 + 0.01
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PadFactor;
    use crate::leray::{project_p, project_q};
    use crate::field::VectorField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn unit_mass_and_bounded_transform() {
        for d in [2, 3] {
            let t = KernelTransform::new(d).unwrap();
            assert!((t.eval(0.0) - 1.0).abs() < 1e-14);
            let mut prev = 1.0;
            for i in 1..200 {
                let v = t.eval(i as f64 * 0.25);
                assert!(v.abs() <= 1.0);
                if i < 8 {
                    assert!(v < prev);
                }
                prev = v;
            }
        }
    }

    #[test]
    fn kernel_mass_by_independent_quadrature() {
        // Cartesian tensor trapezoid over [-1,1]^d, unrelated to the radial weights.
        let m = 400;
        let h = 2.0 / m as f64;
        let t2 = KernelTransform::new(2).unwrap();
        let mut mass2 = 0.0;
        for i in 0..=m {
            for j in 0..=m {
                let x = -1.0 + i as f64 * h;
                let y = -1.0 + j as f64 * h;
                mass2 += t2.kernel((x * x + y * y).sqrt());
            }
        }
        assert!((mass2 * h * h - 1.0).abs() < 1e-10);
        let t3 = KernelTransform::new(3).unwrap();
        let m = 160;
        let h = 2.0 / m as f64;
        let mut mass3 = 0.0;
        for i in 0..=m {
            for j in 0..=m {
                for l in 0..=m {
                    let x = -1.0 + i as f64 * h;
                    let y = -1.0 + j as f64 * h;
                    let z = -1.0 + l as f64 * h;
                    mass3 += t3.kernel((x * x + y * y + z * z).sqrt());
                }
            }
        }
        assert!((mass3 * h * h * h - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constants_are_fixed() {
        let g = GridSpec::periodic(2, 32).unwrap();
        let f = SpectralField::constant(g, 2.5);
        let out = mollify(&f, &MollifierSpec::new(0.9).unwrap()).unwrap();
        assert!(out.sub(&f).coeff_norm() < 1e-14);
    }

    #[test]
    fn sine_matches_quadrature_convolution() {
        // (f∗j_α)(x) = ∫ sin(x₁ − y₁) j_α(y) dy by a tensor trapezoid on the support.
        let g = GridSpec::periodic(2, 32).unwrap();
        let spec = MollifierSpec::new(0.9).unwrap();
        let f = SpectralField::from_fn(g, |x| x[0].sin());
        let out = mollify(&f, &spec).unwrap().to_physical();
        let t = KernelTransform::new(2).unwrap();
        let m = 300;
        let h = 2.0 * spec.alpha / m as f64;
        let mut w = Vec::new();
        for i in 0..=m {
            for j in 0..=m {
                let y1 = -spec.alpha + i as f64 * h;
                let y2 = -spec.alpha + j as f64 * h;
                w.push((y1, spec.kernel_at(&t, (y1 * y1 + y2 * y2).sqrt()) * h * h));
            }
        }
        let mut err: f64 = 0.0;
        g.for_each_point(|idx, x| {
            let v: f64 = w.iter().map(|(y1, wt)| (x[0] - y1).sin() * wt).sum();
            err = err.max((v - out[idx]).abs());
        });
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn resolution_preconditions() {
        let g = GridSpec::periodic(2, 16).unwrap();
        let f = SpectralField::constant(g, 1.0);
        assert!(matches!(
            mollify(&f, &MollifierSpec::new(0.5).unwrap()),
            Err(Error::UnderResolvedKernel { .. })
        ));
        assert!(MollifierSpec::new(1.0).is_err());
        assert!(MollifierSpec::new(0.0).is_err());
        let small = GridSpec::new(2, 64, 1.0, PadFactor::ThreeHalves).unwrap();
        assert!(MollifierSpec::new(0.3).unwrap().validate(&small).is_err());
    }

    #[test]
    fn error_shrinks_with_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = GridSpec::new(2, 64, 1.0, PadFactor::ThreeHalves).unwrap();
        let f = SpectralField::random_band_limited(g, 6, &mut rng);
        let mut prev = f64::INFINITY;
        for a in [0.25, 0.2, 0.15, 0.1, 0.0625] {
            let e = f.sub(&mollify(&f, &MollifierSpec::new(a).unwrap()).unwrap()).l2_norm();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn commutes_with_projectors_and_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = GridSpec::periodic(3, 32).unwrap();
        let spec = MollifierSpec::new(0.9).unwrap();
        let v = VectorField::from_components(
            (0..3).map(|_| SpectralField::random_physical(g, &mut rng)).collect(),
        )
        .unwrap();
        let mv = |w: &VectorField| {
            VectorField::from_components(
                w.components().iter().map(|c| mollify(c, &spec).unwrap()).collect(),
            )
            .unwrap()
        };
        let n = v.l2_norm();
        assert!(mv(&project_p(&v)).sub(&project_p(&mv(&v))).l2_norm() < 1e-12 * n);
        assert!(mv(&project_q(&v)).sub(&project_q(&mv(&v))).l2_norm() < 1e-12 * n);
        assert!(mv(&v).l2_norm() <= n);
    }

    #[test]
    fn y1_tables() {
        let g = GridSpec::new(2, 64, 1.0, PadFactor::ThreeHalves).unwrap();
        let alphas = [0.25, 0.125, 0.0625];
        let c = check_friedrichs_y1(&SpectralField::constant(g, 1.0), &alphas, 2.0).unwrap();
        assert!(c.rows.iter().all(|r| r.ratio == 0.0));
        assert!(c.numerator_slope.is_none());

        let f = SpectralField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
        let t = check_friedrichs_y1(&f, &alphas, 2.0).unwrap();
        assert!(t.all_finite());
        assert!(t.rows.windows(2).all(|w| w[1].ratio < w[0].ratio));
        let kt = KernelTransform::new(2).unwrap();
        for r in &t.rows {
            let closed = (1.0 - kt.eval(2.0 * PI * r.alpha)).abs() / (r.alpha * 2.0 * PI);
            assert!((r.ratio - closed).abs() < 1e-10 * closed);
        }
        assert!(check_friedrichs_y1(&f, &alphas, 1.5).is_err());
        assert!(t.to_csv().lines().count() == 4);
    }

    #[test]
    fn y2_tables() {
        let g = GridSpec::periodic(3, 32).unwrap();
        let alphas = [0.9, 0.8];
        let f = SpectralField::from_fn(g, |x| x[0].sin());
        let t = check_friedrichs_y2(&f, &alphas, 0.0, 2.0, 2.0).unwrap();
        let kt = KernelTransform::new(3).unwrap();
        for r in &t.rows {
            assert!((r.ratio - kt.eval(r.alpha)).abs() < 1e-12);
            assert!(r.ratio <= 1.0);
        }
        let g = GridSpec::new(3, 32, 1.0, PadFactor::ThreeHalves).unwrap();
        let f = SpectralField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
        let t = check_friedrichs_y2(&f, &[0.25, 0.125], 0.0, 2.0, f64::INFINITY).unwrap();
        assert!(t.rows[1].ratio < t.rows[0].ratio);
        assert!(check_friedrichs_y2(&f, &[0.25], 0.0, 4.0, 2.0).is_err());
    }
}
