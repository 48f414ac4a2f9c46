use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::leray::project_q;
use crate::norms::lr_quadrature;
use crate::ops::divergence;

use super::data::DataSpec;
use super::nonlinear::NonlinearTerms;
use super::propagator::LinearFlow;
use super::{energy, ACState, Physics};

/// Largest admissible `dt max|u| / dx`.
pub const CFL_LIMIT: f64 = 0.5;

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeStep {
    /// Largest step; shrunk so that saves fall on whole steps.
    Fixed(f64),
    /// Courant number against `max|u₀|`.
    Cfl(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub physics: Physics,
    pub t_final: f64,
    pub time_step: TimeStep,
    /// Time between saved samples.
    pub save_stride: f64,
    pub data: DataSpec,
    /// `false` drops the quadratic terms and evolves the linear system only.
    pub nonlinear: bool,
}

/// Step size and save cadence of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub dt: f64,
    pub steps_per_save: usize,
    pub saves: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.physics.validate()?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!("T must be > 0, got {}", self.t_final)));
        }
        match self.time_step {
            TimeStep::Fixed(dt) if !(dt > 0.0 && dt.is_finite()) => {
                return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")))
            }
            TimeStep::Cfl(c) if !(c > 0.0 && c <= CFL_LIMIT) => {
                return Err(Error::InvalidArgument(format!(
                    "cfl must lie in (0, {CFL_LIMIT}], got {c}"
                )))
            }
            _ => {}
        }
        if !(self.save_stride > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "save_stride must be > 0, got {}",
                self.save_stride
            )));
        }
        Ok(())
    }

    /// Step size for a run over `duration` starting from speed `u_max`.
    pub fn schedule(&self, duration: f64, u_max: f64) -> Result<Schedule> {
        self.validate()?;
        let ratio = duration / self.save_stride;
        let saves = ratio.round();
        if saves < 1.0 || (ratio - saves).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "run length {duration} is not a whole number of save strides {}",
                self.save_stride
            )));
        }
        let dt_max = match self.time_step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl(c) if u_max > 0.0 => c * self.grid.spacing() / u_max,
            TimeStep::Cfl(_) => self.save_stride,
        };
        let steps_per_save = ((self.save_stride / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(Schedule {
            dt: self.save_stride / steps_per_save as f64,
            steps_per_save,
            saves: saves as usize,
        })
    }

    pub fn initial_state(&self) -> Result<ACState> {
        self.data.state(self.grid, self.physics)
    }
}

/// Per-sample scalar diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "D")]
    pub dissipation: f64,
    pub balance_residual: f64,
    #[serde(rename = "div_u_L2")]
    pub div_u_l2: f64,
    #[serde(rename = "Qu_L2")]
    pub qu_l2: f64,
    #[serde(rename = "Qu_L4")]
    pub qu_l4: f64,
    #[serde(rename = "sqrt_eps_p_L2")]
    pub sqrt_eps_p_l2: f64,
    #[serde(rename = "u_L2")]
    pub u_l2: f64,
    #[serde(rename = "theta_L2")]
    pub theta_l2: f64,
}

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.energy,
            self.dissipation,
            self.balance_residual,
            self.div_u_l2,
            self.qu_l2,
            self.qu_l4,
            self.sqrt_eps_p_l2,
            self.u_l2,
            self.theta_l2,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Diagnostics of `state` given the initial energy and the dissipation so far.
pub fn diagnostics(state: &ACState, e0: f64, dissipation: f64) -> DiagnosticsRecord {
    let grid = *state.grid();
    let e = energy(state);
    let qu = project_q(&state.u);
    let dv = grid.volume() / grid.len() as f64;
    DiagnosticsRecord {
        t: state.t,
        energy: e,
        dissipation,
        balance_residual: (e + dissipation - e0).abs(),
        div_u_l2: divergence(&state.u).l2_norm(),
        qu_l2: qu.l2_norm(),
        qu_l4: lr_quadrature(&qu.magnitude_physical(), dv, 4.0),
        sqrt_eps_p_l2: state.eps.sqrt() * state.p.l2_norm(),
        u_l2: state.u.l2_norm(),
        theta_l2: state.theta.l2_norm(),
    }
}

/// Strang stepper with the linear flow precomputed for `dt/2`.
#[derive(Debug, Clone)]
pub struct Stepper {
    half: LinearFlow,
    terms: Option<NonlinearTerms>,
    dt: f64,
    max_dt_per_speed: f64,
}

impl Stepper {
    pub fn new(grid: GridSpec, physics: Physics, dt: f64, nonlinear: bool) -> Self {
        Self {
            half: LinearFlow::new(grid, physics.eps, physics.mu, physics.kappa, 0.5 * dt),
            terms: nonlinear.then(|| NonlinearTerms::compressible(grid)),
            dt,
            max_dt_per_speed: CFL_LIMIT * grid.spacing(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance one step in place; returns the energy removed by the linear
    /// substeps, which is the exact dissipation over the step.
    pub fn advance(&self, state: &mut ACState) -> Result<f64> {
        let e0 = energy(state);
        self.half.apply(&mut state.u, &mut state.theta, &mut state.p);
        let e1 = energy(state);
        if let Some(terms) = &self.terms {
            let k1 = terms.eval(&state.u, &state.theta);
            if k1.max_speed > 0.0 {
                let admissible = self.max_dt_per_speed / k1.max_speed;
                if self.dt > admissible * (1.0 + 1e-12) {
                    return Err(Error::Cfl {
                        dt: self.dt,
                        admissible,
                    });
                }
            }
            let h = 0.5 * self.dt;
            let mut um = state.u.clone();
            um.axpy(h, &k1.du);
            let mut tm = state.theta.clone();
            tm.axpy(h, &k1.dtheta);
            let k2 = terms.eval(&um, &tm);
            state.u.axpy(self.dt, &k2.du);
            state.theta.axpy(self.dt, &k2.dtheta);
        }
        let e2 = energy(state);
        self.half.apply(&mut state.u, &mut state.theta, &mut state.p);
        let e3 = energy(state);
        state.t += self.dt;
        if !e3.is_finite() {
            return Err(Error::Blowup { t: state.t });
        }
        Ok((e0 - e1) + (e2 - e3))
    }
}

/// One Strang step of size `dt`.
pub fn step(state: &ACState, dt: f64) -> Result<ACState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    let mut next = state.clone();
    Stepper::new(*state.grid(), state.physics(), dt, true).advance(&mut next)?;
    Ok(next)
}

/// Saved samples of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub physics: Physics,
    pub dt: f64,
    pub save_stride: f64,
    pub nonlinear: bool,
    pub times: Vec<f64>,
    pub states: Vec<ACState>,
    pub records: Vec<DiagnosticsRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &ACState {
        self.states.last().expect("trajectory has the initial sample")
    }

    pub fn max_balance_residual(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.balance_residual))
    }
}

/// Integrate `state` to `config.t_final`, calling `observe` at every save
/// (including the initial one). Returns the step size used.
pub fn run_observed<F>(config: &RunConfig, state: ACState, mut observe: F) -> Result<f64>
where
    F: FnMut(&ACState, &DiagnosticsRecord),
{
    config.validate()?;
    if *state.grid() != config.grid {
        return Err(Error::GridMismatch);
    }
    let mut state = state;
    let t0 = state.t;
    let duration = config.t_final - t0;
    let u_max = state
        .u
        .magnitude_physical()
        .iter()
        .fold(0.0_f64, |m, v| m.max(*v));
    let sched = config.schedule(duration, u_max)?;
    let stepper = Stepper::new(config.grid, state.physics(), sched.dt, config.nonlinear);
    let e0 = energy(&state);
    let mut dissipation = 0.0;
    let first = diagnostics(&state, e0, dissipation);
    if !first.is_finite() {
        return Err(Error::Blowup { t: t0 });
    }
    observe(&state, &first);
    for save in 1..=sched.saves {
        for _ in 0..sched.steps_per_save {
            dissipation += stepper.advance(&mut state)?;
        }
        state.t = t0 + save as f64 * config.save_stride;
        let rec = diagnostics(&state, e0, dissipation);
        if !rec.is_finite() || !state.is_finite() {
            return Err(Error::Blowup { t: state.t });
        }
        observe(&state, &rec);
    }
    Ok(sched.dt)
}

/// Run from `state` and keep every saved sample.
pub fn run_from(config: &RunConfig, state: ACState) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut records = Vec::new();
    let physics = state.physics();
    let dt = run_observed(config, state, |s, r| {
        times.push(s.t);
        states.push(s.clone());
        records.push(*r);
    })?;
    Ok(Trajectory {
        grid: config.grid,
        physics,
        dt,
        save_stride: config.save_stride,
        nonlinear: config.nonlinear,
        times,
        states,
        records,
    })
}

/// Run from the configured initial data.
pub fn run(config: &RunConfig) -> Result<Trajectory> {
    run_from(config, config.initial_state()?)
}
