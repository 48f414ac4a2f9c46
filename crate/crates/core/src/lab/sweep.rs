//! `ε`-sweeps: one compressible run per `ε` plus an optional run of the
//! limit system from the same `(u₀, θ₀)`, reduced on the fly to space-time
//! norms and fitted against `ε`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ac::{run_observed, ACState, DataFamily, DiagnosticsRecord, NonlinearTerms, RunConfig};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::leray::{project_p, project_q};
use crate::norms::{time_norm, NormSpec, SpatialNorm};
use crate::ops::divergence;
use crate::reference::{ref_run, RefState, RefTrajectory};

use super::fit::{fit_power_law, strictly_decreasing, PowerFit};

/// Quantity whose space-time norm a sweep records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SweepField {
    Qu,
    Pu,
    U,
    Theta,
    P,
    /// `∂ₜp = −div u / ε`
    DtP,
    /// `∂ₜp` by second-order differences of the saved pressure samples.
    DtPFd,
    DivU,
    /// `Pu^ε − u_ref`
    PuError,
    /// `θ^ε − θ_ref`
    ThetaError,
    /// `(u·∇)u + ½(div u)u`
    Nonlinear,
}

impl SweepField {
    pub const ALL: [SweepField; 11] = [
        SweepField::Qu,
        SweepField::Pu,
        SweepField::U,
        SweepField::Theta,
        SweepField::P,
        SweepField::DtP,
        SweepField::DtPFd,
        SweepField::DivU,
        SweepField::PuError,
        SweepField::ThetaError,
        SweepField::Nonlinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepField::Qu => "Qu",
            SweepField::Pu => "Pu",
            SweepField::U => "u",
            SweepField::Theta => "theta",
            SweepField::P => "p",
            SweepField::DtP => "dtp",
            SweepField::DtPFd => "dtp-fd",
            SweepField::DivU => "div-u",
            SweepField::PuError => "Pu-err",
            SweepField::ThetaError => "theta-err",
            SweepField::Nonlinear => "nonlinear",
        }
    }

    pub fn needs_reference(self) -> bool {
        matches!(self, SweepField::PuError | SweepField::ThetaError)
    }
}

impl fmt::Display for SweepField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|f| f.name()).collect();
            Error::InvalidArgument(format!(
                "unknown sweep field '{s}' (expected one of {})",
                names.join(", ")
            ))
        })
    }
}

/// A field and the `L^q_t W^{s,r}_x` norm to take of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRequest {
    pub field: SweepField,
    pub spec: NormSpec,
}

impl NormRequest {
    pub fn new(field: SweepField, q: f64, r: f64, s: f64) -> Self {
        Self {
            field,
            spec: NormSpec { q, r, s, homogeneous: false },
        }
    }

    /// e.g. `Qu:L2t_L4x`
    pub fn label(&self) -> String {
        format!("{}:{}", self.field, self.spec.label())
    }
}

impl fmt::Display for NormRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses `field:q:r:s`, e.g. `Qu:2:4:0` or `p:4:4:-2`.
impl FromStr for NormRequest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "norm '{s}' must have the form field:q:r:s"
            )));
        }
        let field: SweepField = parts[0].parse()?;
        let num = |t: &str| -> Result<f64> {
            match t {
                "inf" => Ok(f64::INFINITY),
                _ => t
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad exponent '{t}' in norm '{s}'"))),
            }
        };
        let spec = NormSpec::new(num(parts[1])?, num(parts[2])?, num(parts[3])?, false)?;
        Ok(Self { field, spec })
    }
}

/// Inputs of [`epsilon_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Strictly decreasing, positive.
    pub eps_list: Vec<f64>,
    /// Run settings shared by every `ε`; its own `eps` is ignored.
    pub template: RunConfig,
    pub reference: bool,
    pub norms: Vec<NormRequest>,
    /// Pressure mode tracked for the initial-layer probe.
    pub probe_mode: [i64; 3],
}

impl SweepConfig {
    pub fn new(eps_list: Vec<f64>, template: RunConfig) -> Self {
        Self {
            eps_list,
            template,
            reference: true,
            norms: Self::default_norms(),
            probe_mode: [1, 0, 0],
        }
    }

    /// The norms used by the convergence, Strichartz and layer reports.
    pub fn default_norms() -> Vec<NormRequest> {
        use SweepField::*;
        vec![
            NormRequest::new(Qu, 2.0, 4.0, 0.0),
            NormRequest::new(PuError, 2.0, 2.0, 0.0),
            NormRequest::new(ThetaError, 2.0, 2.0, 0.0),
            NormRequest::new(P, 4.0, 4.0, -2.0),
            NormRequest::new(DtP, 4.0, 4.0, -3.0),
            NormRequest::new(DtPFd, 4.0, 4.0, -3.0),
            NormRequest::new(DivU, 2.0, 2.0, 0.0),
            NormRequest::new(Nonlinear, 1.0, 1.5, 0.0),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.template.validate()?;
        if self.eps_list.is_empty() {
            return Err(Error::InvalidArgument("eps_list is empty".into()));
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidArgument(format!("eps_list entries must be > 0, got {e}")));
        }
        if !strictly_decreasing(&self.eps_list) {
            return Err(Error::InvalidArgument("eps_list must be strictly decreasing".into()));
        }
        if !self.reference {
            if let Some(r) = self.norms.iter().find(|r| r.field.needs_reference()) {
                return Err(Error::InvalidArgument(format!(
                    "norm {} needs the reference run",
                    r.label()
                )));
            }
        }
        if self.template.grid.mode_index(self.probe_mode).is_none() {
            return Err(Error::InvalidArgument(format!(
                "probe mode {:?} is not on the grid",
                self.probe_mode
            )));
        }
        Ok(())
    }

    pub fn run_config(&self, eps: f64) -> RunConfig {
        let mut c = self.template;
        c.physics.eps = eps;
        c
    }
}

/// Per-sample scalars kept for the initial-layer probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerTrace {
    pub times: Vec<f64>,
    pub sqrt_eps_p_l2: Vec<f64>,
    pub qu_l2: Vec<f64>,
    pub mode: [i64; 3],
    pub mode_re: Vec<f64>,
    pub mode_im: Vec<f64>,
}

/// Norms of the data that enter the weighted pressure bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialNorms {
    pub sqrt_eps_p_l2: f64,
    pub div_u_hm1: f64,
}

/// Outcome of one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub dt: f64,
    pub samples: usize,
    /// Keyed by [`NormRequest::label`].
    pub norms: BTreeMap<String, f64>,
    pub max_balance_residual: f64,
    pub initial: InitialNorms,
    pub trace: LayerTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub family: DataFamily,
    pub seed: u64,
    pub grid: GridSpec,
    pub mu: f64,
    pub kappa: f64,
    pub t_final: f64,
    pub save_stride: f64,
    pub requests: Vec<NormRequest>,
    pub rows: Vec<SweepRow>,
    /// Log-log fits of each recorded norm against `ε`.
    pub fits: BTreeMap<String, PowerFit>,
}

/// Monotone-decay verdict for one recorded norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub label: String,
    pub decreasing: bool,
    /// Only smooth data families make monotonicity a pass/fail property.
    pub asserted: bool,
}

impl SweepReport {
    pub fn eps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.eps).collect()
    }

    /// `(ε, value)` pairs of a recorded norm, in sweep order.
    pub fn values(&self, label: &str) -> Option<Vec<(f64, f64)>> {
        self.rows
            .iter()
            .map(|r| r.norms.get(label).map(|v| (r.eps, *v)))
            .collect()
    }

    pub fn find(&self, field: SweepField, pred: impl Fn(&NormSpec) -> bool) -> Option<NormRequest> {
        self.requests.iter().copied().find(|r| r.field == field && pred(&r.spec))
    }

    /// Decay checks for the quantities that vanish as `ε ↓ 0`.
    pub fn monotonicity(&self) -> Vec<MonotoneCheck> {
        let asserted = self.family.is_smooth();
        self.requests
            .iter()
            .filter(|r| matches!(r.field, SweepField::Qu | SweepField::PuError | SweepField::ThetaError))
            .filter_map(|r| {
                let vals: Vec<f64> = self.values(&r.label())?.into_iter().map(|p| p.1).collect();
                Some(MonotoneCheck {
                    label: r.label(),
                    decreasing: strictly_decreasing(&vals),
                    asserted,
                })
            })
            .collect()
    }

    /// CSV with one row per `ε` and one column per recorded norm.
    pub fn norms_csv(&self) -> String {
        let labels: Vec<String> = self.requests.iter().map(|r| r.label()).collect();
        let mut out = format!("eps,dt,max_balance_residual,{}\n", labels.join(","));
        for r in &self.rows {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}", r.eps, r.dt, r.max_balance_residual));
            for l in &labels {
                out.push_str(&format!(",{:.16e}", r.norms.get(l).copied().unwrap_or(f64::NAN)));
            }
            out.push('\n');
        }
        out
    }

    /// CSV of the fitted orders with their confidence half widths.
    pub fn fits_csv(&self) -> String {
        let mut out = String::from("norm,order,ci95,points\n");
        for (label, f) in &self.fits {
            let ci = f.ci95.map_or(String::new(), |c| format!("{c:.16e}"));
            out.push_str(&format!("{label},{:.16e},{ci},{}\n", f.order, f.points.len()));
        }
        out
    }
}

/// Derivative of the pressure at each sample from a sliding three-sample window.
struct FdTrack {
    spec: NormSpec,
    h: f64,
    window: VecDeque<SpectralField>,
    count: usize,
    values: Vec<f64>,
}

impl FdTrack {
    fn new(spec: NormSpec, h: f64) -> Self {
        Self { spec, h, window: VecDeque::with_capacity(3), count: 0, values: Vec::new() }
    }

    fn combo(&self, c: [f64; 3]) -> Result<f64> {
        let mut d = SpectralField::zeros(*self.window[0].grid());
        for (w, f) in c.iter().zip(&self.window) {
            if *w != 0.0 {
                d.axpy(w / (2.0 * self.h), f);
            }
        }
        d.spatial_norm(&self.spec)
    }

    fn push(&mut self, p: &SpectralField) -> Result<()> {
        if self.window.len() == 3 {
            self.window.pop_front();
        }
        self.window.push_back(p.clone());
        self.count += 1;
        if self.count == 3 {
            let v = self.combo([-3.0, 4.0, -1.0])?;
            self.values.push(v);
        }
        if self.count >= 3 {
            let v = self.combo([-1.0, 0.0, 1.0])?;
            self.values.push(v);
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<f64>> {
        match self.count {
            0 => {}
            1 => self.values.push(0.0),
            2 => {
                let v = self.combo([-2.0, 2.0, 0.0])?;
                self.values.extend([v, v]);
            }
            _ => {
                let v = self.combo([1.0, -4.0, 3.0])?;
                self.values.push(v);
            }
        }
        Ok(self.values)
    }
}

fn sample_value(
    req: &NormRequest,
    state: &ACState,
    reference: Option<&RefState>,
    terms: &NonlinearTerms,
) -> Result<f64> {
    let missing = || Error::InvalidArgument(format!("norm {} needs the reference run", req.label()));
    match req.field {
        SweepField::Qu => project_q(&state.u).spatial_norm(&req.spec),
        SweepField::Pu => project_p(&state.u).spatial_norm(&req.spec),
        SweepField::U => state.u.spatial_norm(&req.spec),
        SweepField::Theta => state.theta.spatial_norm(&req.spec),
        SweepField::P => state.p.spatial_norm(&req.spec),
        SweepField::DtP => divergence(&state.u).scaled(-1.0 / state.eps).spatial_norm(&req.spec),
        SweepField::DivU => divergence(&state.u).spatial_norm(&req.spec),
        SweepField::PuError => {
            let r = reference.ok_or_else(missing)?;
            project_p(&state.u).sub(&r.u).spatial_norm(&req.spec)
        }
        SweepField::ThetaError => {
            let r = reference.ok_or_else(missing)?;
            state.theta.sub(&r.theta).spatial_norm(&req.spec)
        }
        // the solver's tendency is minus the quadratic term; norms are sign-blind
        SweepField::Nonlinear => terms.eval(&state.u, &state.theta).du.spatial_norm(&req.spec),
        SweepField::DtPFd => unreachable!("handled by FdTrack"),
    }
}

fn hm1() -> NormSpec {
    NormSpec::spatial(2.0, -1.0)
}

fn sweep_one(cfg: &SweepConfig, eps: f64, reference: Option<&RefTrajectory>) -> Result<SweepRow> {
    let rc = cfg.run_config(eps);
    let state = rc.initial_state()?;
    run_with_norms(&rc, state, &cfg.norms, cfg.probe_mode, reference, |_, _| {})
}

/// Run `rc` from `state`, accumulating the requested space-time norms
/// sample by sample; `observe` sees every saved state as well. Reference
/// samples are matched by index.
pub fn run_with_norms<F>(
    rc: &RunConfig,
    state: ACState,
    requests: &[NormRequest],
    probe_mode: [i64; 3],
    reference: Option<&RefTrajectory>,
    mut observe: F,
) -> Result<SweepRow>
where
    F: FnMut(&ACState, &DiagnosticsRecord),
{
    let eps = state.eps;
    let grid = rc.grid;
    let initial = InitialNorms {
        sqrt_eps_p_l2: eps.sqrt() * state.p.l2_norm(),
        div_u_hm1: divergence(&state.u).spatial_norm(&hm1())?,
    };
    let terms = NonlinearTerms::compressible(grid);
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); requests.len()];
    let mut fd: Vec<(usize, FdTrack)> = requests
        .iter()
        .enumerate()
        .filter(|(_, r)| r.field == SweepField::DtPFd)
        .map(|(i, r)| (i, FdTrack::new(r.spec, rc.save_stride)))
        .collect();
    let mut trace = LayerTrace {
        times: Vec::new(),
        sqrt_eps_p_l2: Vec::new(),
        qu_l2: Vec::new(),
        mode: probe_mode,
        mode_re: Vec::new(),
        mode_im: Vec::new(),
    };
    let mut max_balance: f64 = 0.0;
    let mut failure: Option<Error> = None;
    let mut index = 0usize;
    let dt = run_observed(rc, state, |s, rec| {
        observe(s, rec);
        if failure.is_some() {
            return;
        }
        let res = (|| -> Result<()> {
            let r = match reference {
                Some(tr) => Some(tr.states.get(index).ok_or_else(|| {
                    Error::InvalidArgument("reference run has fewer samples than the sweep run".into())
                })?),
                None => None,
            };
            for (k, req) in requests.iter().enumerate() {
                if req.field != SweepField::DtPFd {
                    series[k].push(sample_value(req, s, r, &terms)?);
                }
            }
            for (_, track) in fd.iter_mut() {
                track.push(&s.p)?;
            }
            let c = s.p.coeff(probe_mode).unwrap_or_default();
            trace.times.push(s.t);
            trace.sqrt_eps_p_l2.push(rec.sqrt_eps_p_l2);
            trace.qu_l2.push(rec.qu_l2);
            trace.mode_re.push(c.re);
            trace.mode_im.push(c.im);
            max_balance = max_balance.max(rec.balance_residual);
            Ok(())
        })();
        if let Err(e) = res {
            failure = Some(e);
        }
        index += 1;
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    for (k, track) in fd {
        series[k] = track.finish()?;
    }
    let mut norms = BTreeMap::new();
    for (req, vals) in requests.iter().zip(&series) {
        norms.insert(req.label(), time_norm(&trace.times, vals, req.spec.q)?);
    }
    Ok(SweepRow {
        eps,
        dt,
        samples: trace.times.len(),
        norms,
        max_balance_residual: max_balance,
        initial,
        trace,
    })
}

/// Run the sweep; per-`ε` runs execute in parallel, and the report is
/// assembled in `eps_list` order.
pub fn epsilon_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let reference = if cfg.reference {
        Some(ref_run(&cfg.template)?)
    } else {
        None
    };
    let rows = cfg
        .eps_list
        .par_iter()
        .map(|&eps| {
            sweep_one(cfg, eps, reference.as_ref()).map_err(|e| Error::Sweep {
                eps,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = SweepReport {
        family: cfg.template.data.family,
        seed: cfg.template.data.seed,
        grid: cfg.template.grid,
        mu: cfg.template.physics.mu,
        kappa: cfg.template.physics.kappa,
        t_final: cfg.template.t_final,
        save_stride: cfg.template.save_stride,
        requests: cfg.norms.clone(),
        rows,
        fits: BTreeMap::new(),
    };
    if report.rows.len() >= 2 {
        for req in &cfg.norms {
            let label = req.label();
            if let Some(points) = report.values(&label) {
                if let Ok(fit) = fit_power_law(&points) {
                    report.fits.insert(label, fit);
                }
            }
        }
    }
    Ok(report)
}

/// Exponent `(6 − p)/(36p)` of the decay bound for `‖Qu^ε‖_{L²_t L^p_x}`.
pub fn paper_q_exponent(p: f64) -> f64 {
    (6.0 - p) / (36.0 * p)
}

/// Fitted decay of `‖Qu^ε‖_{L²_t L^p_x}` next to the reference exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QDecay {
    pub p: f64,
    pub fit: PowerFit,
    pub decreasing: bool,
    pub reference_exponent: f64,
}

impl QDecay {
    /// Positive order with strictly decreasing values.
    pub fn passes(&self) -> bool {
        self.fit.order > 0.0 && self.decreasing
    }
}

pub fn q_component_decay(report: &SweepReport, p: f64) -> Result<QDecay> {
    if !(4.0..6.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [4, 6), got {p}")));
    }
    if report.rows.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "q_component_decay needs at least 3 eps values, got {}",
            report.rows.len()
        )));
    }
    let req = report
        .find(SweepField::Qu, |s| s.q == 2.0 && s.r == p && s.s == 0.0 && !s.homogeneous)
        .ok_or_else(|| Error::InvalidArgument(format!("report has no Qu:L2t_L{p}x norm")))?;
    let points = report.values(&req.label()).expect("requested norms are recorded");
    let vals: Vec<f64> = points.iter().map(|p| p.1).collect();
    Ok(QDecay {
        p,
        fit: fit_power_law(&points)?,
        decreasing: strictly_decreasing(&vals),
        reference_exponent: paper_q_exponent(p),
    })
}
