//! Property suites over random fields, reported as pass/fail tables.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{SpectralField, VectorField};
use crate::grid::{GridSpec, PadFactor};
use crate::leray::{hodge_decompose, project_p, project_q};
use crate::mollifier::{
    check_friedrichs_y1_multi, check_friedrichs_y2, h1_decay, mollify, power_law_field, KernelTransform,
    MollifierSpec, RatioTable,
};
use crate::ops::{divergence, laplacian_vec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtMost,
    AtLeast,
    /// The value only has to be finite; the threshold is unused.
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyRow {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PropertyTable {
    pub rows: Vec<PropertyRow>,
}

impl PropertyTable {
    fn push(&mut self, name: impl Into<String>, value: f64, bound: Bound, threshold: f64) {
        let pass = match bound {
            Bound::AtMost => value <= threshold,
            Bound::AtLeast => value >= threshold,
            Bound::Finite => value.is_finite(),
        };
        self.rows.push(PropertyRow { name: name.into(), value, bound, threshold, pass });
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for PropertyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(8).max(8);
        writeln!(f, "{:<width$}  {:>12}  {:>14}  result", "property", "value", "bound")?;
        for r in &self.rows {
            let bound = match r.bound {
                Bound::AtMost => format!("<= {:>11.4e}", r.threshold),
                Bound::AtLeast => format!(">= {:>11.4e}", r.threshold),
                Bound::Finite => format!("{:>14}", "finite"),
            };
            writeln!(
                f,
                "{:<width$}  {:>12.4e}  {bound}  {}",
                r.name,
                r.value,
                if r.pass { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

fn random_vector(grid: GridSpec, rng: &mut ChaCha8Rng) -> VectorField {
    VectorField::from_components((0..grid.dim()).map(|_| SpectralField::random_physical(grid, rng)).collect())
        .expect("components share the grid")
}

/// Relative tolerance of the projector suite.
pub const PROJECTOR_TOLERANCE: f64 = 1e-11;

/// Worst relative defects of the Leray projector algebra over `trials` random fields.
pub fn projector_suite(grid: GridSpec, trials: usize, seed: u64) -> PropertyTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = [
        "|P²v − Pv|/|v|",
        "|Q²v − Qv|/|v|",
        "|QPv|/|v|",
        "|PQv|/|v|",
        "|v − Pv − Qv|/|v|",
        "|div Pv|/|v|",
        "|ΔPv − PΔv|/|Δv|",
        "|<Pv, Qv>|/|v|²",
        "||Pv|² + |Qv|² − |v|²|/|v|²",
    ];
    let mut worst = [0.0_f64; 9];
    for _ in 0..trials {
        let v = random_vector(grid, &mut rng);
        let n = v.l2_norm();
        let h = hodge_decompose(&v);
        let (pv, qv) = (&h.solenoidal, &h.gradient);
        let lap = laplacian_vec(&v);
        let vals = [
            project_p(pv).sub(pv).l2_norm() / n,
            project_q(qv).sub(qv).l2_norm() / n,
            project_q(pv).l2_norm() / n,
            project_p(qv).l2_norm() / n,
            v.sub(pv).sub(qv).l2_norm() / n,
            divergence(pv).l2_norm() / n,
            laplacian_vec(pv).sub(&project_p(&lap)).l2_norm() / lap.l2_norm(),
            pv.inner(qv).expect("same grid").abs() / (n * n),
            (pv.l2_norm_sqr() + qv.l2_norm_sqr() - n * n).abs() / (n * n),
        ];
        for (w, x) in worst.iter_mut().zip(vals) {
            *w = w.max(x);
        }
    }
    let mut t = PropertyTable::default();
    for (name, w) in names.iter().zip(worst) {
        t.push(*name, w, Bound::AtMost, PROJECTOR_TOLERANCE);
    }
    t
}

/// Scales `2^{-2}, 2^{-3}, …` on a box of side `length` down to the
/// resolution limit `4h`.
pub fn dyadic_alphas(grid: &GridSpec) -> Vec<f64> {
    let lo = 4.0 * grid.spacing() / grid.length();
    (2..)
        .map(|k| 0.5f64.powi(k))
        .take_while(|a| *a >= lo * (1.0 - 1e-12))
        .map(|a| a * grid.length())
        .collect()
}

/// Mollifier properties on a 3D box of side 1 with `n` points per axis:
/// kernel mass, contraction, commutation with `P` and `Q`, finite (y1)/(y2)
/// tables, and (y1) numerator slopes `≥ 1 − σ − 0.1` for `p ∈ {2, 4, 6}` on
/// a field with spectrum `|k|^{−d/2−1−0.01}`.
pub fn mollifier_suite(n: usize, seed: u64) -> Result<MollifierSuite> {
    let dim = 3;
    let grid = GridSpec::new(dim, n, 1.0, PadFactor::ThreeHalves)?;
    let alphas = dyadic_alphas(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = PropertyTable::default();

    let kt = KernelTransform::new(dim)?;
    t.push("|kernel mass − 1|", (kt.eval(0.0) - 1.0).abs(), Bound::AtMost, 1e-10);
    let sup = (1..400).map(|i| kt.eval(0.1 * i as f64).abs()).fold(0.0, f64::max);
    t.push("max |ĵ(ξ)|, ξ > 0", sup, Bound::AtMost, 1.0);

    let small = GridSpec::new(dim, 16, 1.0, PadFactor::ThreeHalves)?;
    let v = random_vector(small, &mut rng);
    let spec = MollifierSpec::new(0.25)?;
    let mv = |w: &VectorField| -> Result<VectorField> {
        VectorField::from_components(w.components().iter().map(|c| mollify(c, &spec)).collect::<Result<_>>()?)
    };
    let nv = v.l2_norm();
    let cp = mv(&project_p(&v))?.sub(&project_p(&mv(&v)?)).l2_norm() / nv;
    let cq = mv(&project_q(&v))?.sub(&project_q(&mv(&v)?)).l2_norm() / nv;
    t.push("|Pj∗v − j∗Pv|/|v|", cp, Bound::AtMost, 1e-12);
    t.push("|Qj∗v − j∗Qv|/|v|", cq, Bound::AtMost, 1e-12);
    t.push("|j∗v|/|v|", mv(&v)?.l2_norm() / nv, Bound::AtMost, 1.0);

    let f = power_law_field(grid, h1_decay(dim), &mut rng);
    let ps = [2.0, 4.0, 6.0];
    let tables = check_friedrichs_y1_multi(&f, &alphas, &ps)?;
    for (p, tab) in ps.iter().zip(&tables) {
        let sigma = dim as f64 * (0.5 - 1.0 / p);
        let worst = if tab.all_finite() { tab.max_ratio } else { f64::NAN };
        t.push(format!("y1 p={p} max ratio"), worst, Bound::Finite, 0.0);
        t.push(
            format!("y1 p={p} numerator slope"),
            tab.numerator_slope.unwrap_or(f64::NEG_INFINITY),
            Bound::AtLeast,
            1.0 - sigma - 0.1,
        );
    }
    let y2 = check_friedrichs_y2(&f, &alphas, 1.0, 2.0, 2.0)?;
    let worst = if y2.all_finite() { y2.max_ratio } else { f64::NAN };
    t.push("y2 s=1 q=p=2 max ratio", worst, Bound::Finite, 0.0);
    Ok(MollifierSuite {
        table: t,
        y1: ps.into_iter().zip(tables).collect(),
        y2,
    })
}

/// Outcome of [`mollifier_suite`] with the raw ratio tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierSuite {
    pub table: PropertyTable,
    /// `(p, table)` for each tested exponent.
    pub y1: Vec<(f64, RatioTable)>,
    /// `s = 1, q = p = 2`.
    pub y2: RatioTable,
}
