//! Incompressible limit system
//!
//! ```text
//! ∂ₜu + (u·∇)u + ∇p = μΔu,   div u = 0,   ∂ₜθ + u·∇θ = κΔθ
//! ```
//!
//! integrated with the same spectral operators and padding as [`crate::ac`]:
//! exact diffusion factors over half steps around an explicit midpoint step
//! of `P[−(u·∇)u]` and `−u·∇θ`. Also hosts pressure recovery and the weak
//! formulation residual.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ac::{NonlinearTerms, RunConfig, Trajectory, CFL_LIMIT};
use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::GridSpec;
use crate::leray::project_p;
use crate::ops::{advect_vector, divergence, inverse_laplacian_unchecked, partial, trace_grad_squared, Dealiaser};
use crate::series::{trapezoid, uniform_stride};

/// Divergence-free velocity and temperature of the limit system.
#[derive(Debug, Clone, PartialEq)]
pub struct RefState {
    pub u: VectorField,
    pub theta: SpectralField,
    pub mu: f64,
    pub kappa: f64,
    pub t: f64,
}

impl RefState {
    /// Project `u` onto divergence-free fields and wrap it.
    pub fn new(u: VectorField, theta: SpectralField, mu: f64, kappa: f64) -> Result<Self> {
        if *theta.grid() != *u.grid() {
            return Err(Error::GridMismatch);
        }
        if !(mu >= 0.0) || !(kappa >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mu and kappa must be >= 0 (mu = {mu}, kappa = {kappa})"
            )));
        }
        Ok(Self {
            u: project_p(&u),
            theta,
            mu,
            kappa,
            t: 0.0,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    /// `½‖u‖² + ½‖θ‖²`
    pub fn energy(&self) -> f64 {
        0.5 * (self.u.l2_norm_sqr() + self.theta.l2_norm_sqr())
    }
}

/// Stepper with the half-step diffusion factors precomputed.
#[derive(Debug, Clone)]
pub struct RefStepper {
    heat_u: Vec<f64>,
    heat_theta: Vec<f64>,
    terms: NonlinearTerms,
    dt: f64,
    max_dt_per_speed: f64,
}

impl RefStepper {
    pub fn new(grid: GridSpec, mu: f64, kappa: f64, dt: f64) -> Self {
        let mut heat_u = vec![1.0; grid.len()];
        let mut heat_theta = vec![1.0; grid.len()];
        grid.for_each_mode(|idx, m| {
            let k2 = grid.wavevector(m).k2();
            heat_u[idx] = (-mu * k2 * 0.5 * dt).exp();
            heat_theta[idx] = (-kappa * k2 * 0.5 * dt).exp();
        });
        Self {
            heat_u,
            heat_theta,
            terms: NonlinearTerms::advective(grid),
            dt,
            max_dt_per_speed: CFL_LIMIT * grid.spacing(),
        }
    }

    fn diffuse(&self, s: &mut RefState) {
        for c in s.u.components_mut() {
            for (x, h) in c.coeffs_mut().iter_mut().zip(&self.heat_u) {
                *x *= h;
            }
        }
        for (x, h) in s.theta.coeffs_mut().iter_mut().zip(&self.heat_theta) {
            *x *= h;
        }
    }

    /// Advance in place; returns the energy removed by diffusion.
    pub fn advance(&self, s: &mut RefState) -> Result<f64> {
        let e0 = s.energy();
        self.diffuse(s);
        let e1 = s.energy();
        let k1 = self.terms.eval(&s.u, &s.theta);
        if k1.max_speed > 0.0 {
            let admissible = self.max_dt_per_speed / k1.max_speed;
            if self.dt > admissible * (1.0 + 1e-12) {
                return Err(Error::Cfl { dt: self.dt, admissible });
            }
        }
        let h = 0.5 * self.dt;
        let mut um = s.u.clone();
        um.axpy(h, &project_p(&k1.du));
        let mut tm = s.theta.clone();
        tm.axpy(h, &k1.dtheta);
        let k2 = self.terms.eval(&project_p(&um), &tm);
        s.u.axpy(self.dt, &project_p(&k2.du));
        s.u = project_p(&s.u);
        s.theta.axpy(self.dt, &k2.dtheta);
        let e2 = s.energy();
        self.diffuse(s);
        let e3 = s.energy();
        s.t += self.dt;
        if !e3.is_finite() {
            return Err(Error::Blowup { t: s.t });
        }
        Ok((e0 - e1) + (e2 - e3))
    }
}

/// One step of the limit system.
pub fn ref_step(state: &RefState, dt: f64) -> Result<RefState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    let mut next = state.clone();
    RefStepper::new(*state.grid(), state.mu, state.kappa, dt).advance(&mut next)?;
    Ok(next)
}

/// Per-sample diagnostics of a reference run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    /// `E(t) + D(t) − E(0)`; the energy inequality asks for this to be <= 0.
    pub energy_excess: f64,
    pub div_u_l2: f64,
    pub theta_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefTrajectory {
    pub grid: GridSpec,
    pub mu: f64,
    pub kappa: f64,
    pub dt: f64,
    pub save_stride: f64,
    pub times: Vec<f64>,
    pub states: Vec<RefState>,
    pub records: Vec<RefRecord>,
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn ref_record(s: &RefState, e0: f64, dissipation: f64) -> RefRecord {
    let e = s.energy();
    RefRecord {
        t: s.t,
        energy: e,
        dissipation,
        energy_excess: e + dissipation - e0,
        div_u_l2: divergence(&s.u).l2_norm(),
        theta_max: max_abs(&s.theta.to_physical()),
    }
}

/// Run the limit system from `state` with the cadence of `config`
/// (`ε` is ignored).
pub fn ref_run_from(config: &RunConfig, state: RefState) -> Result<RefTrajectory> {
    config.validate()?;
    if *state.grid() != config.grid {
        return Err(Error::GridMismatch);
    }
    let mut state = state;
    let t0 = state.t;
    let u_max = max_abs(&state.u.magnitude_physical());
    let sched = config.schedule(config.t_final - t0, u_max)?;
    let stepper = RefStepper::new(config.grid, state.mu, state.kappa, sched.dt);
    let e0 = state.energy();
    let mut dissipation = 0.0;
    let mut out = RefTrajectory {
        grid: config.grid,
        mu: state.mu,
        kappa: state.kappa,
        dt: sched.dt,
        save_stride: config.save_stride,
        times: vec![t0],
        states: vec![state.clone()],
        records: vec![ref_record(&state, e0, 0.0)],
    };
    for save in 1..=sched.saves {
        for _ in 0..sched.steps_per_save {
            dissipation += stepper.advance(&mut state)?;
        }
        state.t = t0 + save as f64 * config.save_stride;
        out.times.push(state.t);
        out.records.push(ref_record(&state, e0, dissipation));
        out.states.push(state.clone());
    }
    Ok(out)
}

/// Reference run from the configured initial `(u₀, θ₀)`.
pub fn ref_run(config: &RunConfig) -> Result<RefTrajectory> {
    let (u, theta, _) = config.data.fields(config.grid)?;
    ref_run_from(
        config,
        RefState::new(u, theta, config.physics.mu, config.physics.kappa)?,
    )
}

/// Pressure of the limit system, `p = −Δ⁻¹ div((u·∇)u)`, so that
/// `∇p = −Q[(u·∇)u]`. Mean-zero.
pub fn recover_pressure(u: &VectorField) -> SpectralField {
    let adv = advect_vector(u, u).expect("same field");
    let mut p = inverse_laplacian_unchecked(&divergence(&adv));
    p.scale(-1.0);
    p
}

/// `(Δ⁻¹ div((u·∇)u), Δ⁻¹ tr((Du)²))`, equal for divergence-free `u`.
pub fn pressure_source_forms(u: &VectorField) -> (SpectralField, SpectralField) {
    let adv = advect_vector(u, u).expect("same field");
    (
        inverse_laplacian_unchecked(&divergence(&adv)),
        inverse_laplacian_unchecked(&trace_grad_squared(u)),
    )
}

/// Samples of a velocity–temperature history.
pub trait FlowHistory {
    fn grid(&self) -> GridSpec;
    fn times(&self) -> &[f64];
    fn velocity(&self, i: usize) -> &VectorField;
    fn temperature(&self, i: usize) -> &SpectralField;
    fn mu(&self) -> f64;
    fn kappa(&self) -> f64;
}

impl FlowHistory for RefTrajectory {
    fn grid(&self) -> GridSpec {
        self.grid
    }
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn velocity(&self, i: usize) -> &VectorField {
        &self.states[i].u
    }
    fn temperature(&self, i: usize) -> &SpectralField {
        &self.states[i].theta
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn kappa(&self) -> f64 {
        self.kappa
    }
}

impl FlowHistory for Trajectory {
    fn grid(&self) -> GridSpec {
        self.grid
    }
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn velocity(&self, i: usize) -> &VectorField {
        &self.states[i].u
    }
    fn temperature(&self, i: usize) -> &SpectralField {
        &self.states[i].theta
    }
    fn mu(&self) -> f64 {
        self.physics.mu
    }
    fn kappa(&self) -> f64 {
        self.physics.kappa
    }
}

/// Space-time test pair `φ = η(t)ψ(x)`, `χ = η(t)ζ(x)` with `η` a smooth
/// bump supported on `[center − half_width, center + half_width]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestField {
    pub psi: VectorField,
    pub zeta: SpectralField,
    pub center: f64,
    pub half_width: f64,
}

impl TestField {
    /// `(η(t), η'(t))`
    pub fn time_factor(&self, t: f64) -> (f64, f64) {
        let s = (t - self.center) / self.half_width;
        if s.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let q = 1.0 - s * s;
        let eta = (-1.0 / q).exp();
        // d/dt exp(−1/(1−s²)) = −2s/(1−s²)² · η · ds/dt
        let deta = -2.0 * s / (q * q) * eta / self.half_width;
        (eta, deta)
    }
}

/// Random test fields with spatial modes `|m_a| <= 2` and time support
/// inside `(0, t_final)`.
pub fn random_test_fields(grid: GridSpec, t_final: f64, count: usize, seed: u64) -> Vec<TestField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let psi = project_p(&VectorField::random_band_limited(grid, 2, &mut rng));
            let zeta = SpectralField::random_band_limited(grid, 2, &mut rng);
            let half_width = t_final * rng.random_range(0.2..0.45);
            let center = rng.random_range(half_width * 1.05..t_final - half_width * 1.05);
            TestField { psi, zeta, center, half_width }
        })
        .collect()
}

/// Weak-form residuals for one test field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidualRow {
    pub velocity: f64,
    pub velocity_normalized: f64,
    pub temperature: f64,
    pub temperature_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakResidualTable {
    pub rows: Vec<WeakResidualRow>,
    pub max_normalized: f64,
}

fn normalized(r: f64, scale: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r.abs() / scale
    }
}

/// Spatial integrals at one time for one test field:
/// velocity `(∫μ∇u:∇ψ − u_iu_j∂_iψ_j, ∫u·ψ, |·| scales)` and the θ analogue.
struct SpatialTerms {
    vel_a: f64,
    vel_c: f64,
    vel_scale_a: f64,
    vel_scale_c: f64,
    th_a: f64,
    th_c: f64,
    th_scale_a: f64,
    th_scale_c: f64,
}

fn spatial_terms(
    d: &Dealiaser,
    u: &VectorField,
    theta: &SpectralField,
    tf: &TestField,
    mu: f64,
    kappa: f64,
) -> SpatialTerms {
    let dim = u.dim();
    let grid = *u.grid();
    // Solution and test quantities are kept out of shared FFT pairs so that
    // a vanishing solution gives exactly vanishing integrands.
    let mut inputs: Vec<SpectralField> = Vec::new();
    inputs.extend(u.components().iter().cloned());
    for c in u.components() {
        for a in 0..dim {
            inputs.push(partial(c, a));
        }
    }
    inputs.push(theta.clone());
    for a in 0..dim {
        inputs.push(partial(theta, a));
    }
    if inputs.len() % 2 == 1 {
        inputs.push(SpectralField::zeros(grid));
    }
    let o_test = inputs.len();
    inputs.extend(tf.psi.components().iter().cloned());
    for c in tf.psi.components() {
        for a in 0..dim {
            inputs.push(partial(c, a));
        }
    }
    inputs.push(tf.zeta.clone());
    for a in 0..dim {
        inputs.push(partial(&tf.zeta, a));
    }
    let refs: Vec<&SpectralField> = inputs.iter().collect();
    let ph = d.to_physical(&refs);
    let len = d.padded_len();
    let dv = grid.volume() / len as f64;
    let o_u = 0;
    let o_gu = dim; // ∂_a u_j at o_gu + j*dim + a
    let o_th = dim + dim * dim;
    let o_gth = o_th + 1;
    let o_psi = o_test;
    let o_gpsi = o_psi + dim;
    let o_z = o_gpsi + dim * dim;
    let o_gz = o_z + 1;
    let mut t = SpatialTerms {
        vel_a: 0.0,
        vel_c: 0.0,
        vel_scale_a: 0.0,
        vel_scale_c: 0.0,
        th_a: 0.0,
        th_c: 0.0,
        th_scale_a: 0.0,
        th_scale_c: 0.0,
    };
    for x in 0..len {
        let mut visc = 0.0;
        let mut conv = 0.0;
        let mut pair = 0.0;
        for j in 0..dim {
            pair += ph[o_u + j][x] * ph[o_psi + j][x];
            for a in 0..dim {
                visc += ph[o_gu + j * dim + a][x] * ph[o_gpsi + j * dim + a][x];
                // u_a u_j ∂_a ψ_j
                conv += ph[o_u + a][x] * ph[o_u + j][x] * ph[o_gpsi + j * dim + a][x];
            }
        }
        t.vel_a += mu * visc - conv;
        t.vel_scale_a += mu * visc.abs() + conv.abs();
        t.vel_c += pair;
        t.vel_scale_c += pair.abs();

        let mut tvisc = 0.0;
        let mut tconv = 0.0;
        for a in 0..dim {
            tvisc += ph[o_gth + a][x] * ph[o_gz + a][x];
            tconv += ph[o_th][x] * ph[o_u + a][x] * ph[o_gz + a][x];
        }
        let tpair = ph[o_th][x] * ph[o_z][x];
        t.th_a += kappa * tvisc - tconv;
        t.th_scale_a += kappa * tvisc.abs() + tconv.abs();
        t.th_c += tpair;
        t.th_scale_c += tpair.abs();
    }
    for v in [
        &mut t.vel_a,
        &mut t.vel_c,
        &mut t.vel_scale_a,
        &mut t.vel_scale_c,
        &mut t.th_a,
        &mut t.th_c,
        &mut t.th_scale_a,
        &mut t.th_scale_c,
    ] {
        *v *= dv;
    }
    t
}

/// Residuals of the weak formulation
///
/// ```text
/// ∫∫ μ∇u:∇φ − u_iu_j∂_iφ_j − u·∂ₜφ = 0,   ∫∫ κ∇θ·∇χ − θu·∇χ − θ∂ₜχ = 0
/// ```
///
/// for test fields vanishing near `t = 0` and `t = T`, by trapezoid in time
/// and padded-grid quadrature in space. The normalized residual divides by
/// the same integral taken over absolute values of the integrands.
pub fn weak_residual<H: FlowHistory>(traj: &H, tests: &[TestField]) -> Result<WeakResidualTable> {
    let times = traj.times();
    let h = uniform_stride(times)?;
    let grid = traj.grid();
    // cubic integrands need the doubled grid to be alias-free
    let d = Dealiaser::new(grid.with_pad(crate::grid::PadFactor::Two));
    let t0 = times[0];
    let t1 = times[times.len() - 1];
    for tf in tests {
        if *tf.psi.grid() != grid || *tf.zeta.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let div = divergence(&tf.psi).l2_norm();
        if div > 1e-12 * tf.psi.l2_norm().max(1e-300) {
            return Err(Error::InvalidArgument(format!(
                "velocity test field is not divergence-free (‖div ψ‖ = {div:e})"
            )));
        }
        if tf.center - tf.half_width < t0 || tf.center + tf.half_width > t1 {
            return Err(Error::InvalidArgument(
                "test field time support must lie inside the trajectory".into(),
            ));
        }
    }
    let mut rows = Vec::with_capacity(tests.len());
    for tf in tests {
        let mut vel = Vec::with_capacity(times.len());
        let mut vel_s = Vec::with_capacity(times.len());
        let mut th = Vec::with_capacity(times.len());
        let mut th_s = Vec::with_capacity(times.len());
        for (i, &t) in times.iter().enumerate() {
            let (eta, deta) = tf.time_factor(t);
            if eta == 0.0 && deta == 0.0 {
                vel.push(0.0);
                vel_s.push(0.0);
                th.push(0.0);
                th_s.push(0.0);
                continue;
            }
            let st = spatial_terms(&d, traj.velocity(i), traj.temperature(i), tf, traj.mu(), traj.kappa());
            vel.push(eta * st.vel_a - deta * st.vel_c);
            vel_s.push(eta.abs() * st.vel_scale_a + deta.abs() * st.vel_scale_c);
            th.push(eta * st.th_a - deta * st.th_c);
            th_s.push(eta.abs() * st.th_scale_a + deta.abs() * st.th_scale_c);
        }
        let rv = trapezoid(&vel, h);
        let rt = trapezoid(&th, h);
        rows.push(WeakResidualRow {
            velocity: rv,
            velocity_normalized: normalized(rv, trapezoid(&vel_s, h)),
            temperature: rt,
            temperature_normalized: normalized(rt, trapezoid(&th_s, h)),
        });
    }
    let max_normalized = rows
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.velocity_normalized).max(r.temperature_normalized));
    Ok(WeakResidualTable { rows, max_normalized })
}

/// Energy inequality check of a reference run against `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyInequalityReport {
    pub tolerance: f64,
    pub max_excess: f64,
    pub holds: bool,
}

/// `½‖u(t)‖² + ½‖θ(t)‖² + ∫₀ᵗ μ‖∇u‖² + κ‖∇θ‖² <= E(0) + E(0)·dt²` per sample.
pub fn energy_inequality(traj: &RefTrajectory) -> EnergyInequalityReport {
    let e0 = traj.records.first().map_or(0.0, |r| r.energy);
    let tolerance = e0 * traj.dt * traj.dt;
    let max_excess = traj
        .records
        .iter()
        .fold(f64::NEG_INFINITY, |m, r| m.max(r.energy_excess));
    EnergyInequalityReport {
        tolerance,
        max_excess,
        holds: max_excess <= tolerance,
    }
}

/// Growth of `max|θ|` above its initial value (maximum principle check).
pub fn theta_max_growth(traj: &RefTrajectory) -> f64 {
    let m0 = traj.records.first().map_or(0.0, |r| r.theta_max);
    traj.records.iter().fold(0.0, |m, r| m.max(r.theta_max - m0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ac::data::{taylor_green, taylor_green_sine};
    use crate::ac::{DataFamily, DataSpec, Physics, TimeStep};
    use crate::leray::{project_q};
    use crate::ops::gradient;

    fn cfg(grid: GridSpec, family: DataFamily, dt: f64, t_final: f64, stride: f64) -> RunConfig {
        RunConfig {
            grid,
            physics: Physics { eps: 1.0, mu: 1.0, kappa: 1.0 },
            t_final,
            time_step: TimeStep::Fixed(dt),
            save_stride: stride,
            data: DataSpec::new(family, 3),
            nonlinear: true,
        }
    }

    #[test]
    fn shear_decays_exactly() {
        let g = GridSpec::periodic(2, 16).unwrap();
        let traj = ref_run(&cfg(g, DataFamily::Shear, 0.01, 1.0, 0.25)).unwrap();
        for s in &traj.states {
            let exact = VectorField::from_fn(g, |x| [(-s.t).exp() * x[1].sin(), 0.0, 0.0]);
            assert!(s.u.sub(&exact).l2_norm() < 1e-12 * exact.l2_norm());
        }
        let z = RefState::new(VectorField::zeros(g), SpectralField::zeros(g), 1.0, 1.0).unwrap();
        assert_eq!(ref_step(&z, 0.1).unwrap().u.l2_norm(), 0.0);
    }

    #[test]
    fn taylor_green_decays_in_shape() {
        let g = GridSpec::periodic(2, 64).unwrap();
        let traj = ref_run(&cfg(g, DataFamily::TaylorGreen, 1e-2, 1.0, 0.5)).unwrap();
        let exact = taylor_green(g).scaled((-2.0f64).exp());
        let err = traj.states.last().unwrap().u.sub(&exact).l2_norm() / exact.l2_norm();
        assert!(err < 1e-8, "err = {err}");
        for r in &traj.records {
            assert!(r.div_u_l2 < 1e-12);
        }
    }

    #[test]
    fn taylor_green_pressure_sign() {
        let g = GridSpec::periodic(2, 32).unwrap();
        let want = SpectralField::from_fn(g, |x| -0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos()));
        let p = recover_pressure(&taylor_green(g));
        for m in [[2, 0, 0], [-2, 0, 0], [0, 2, 0], [0, -2, 0]] {
            assert!((p.coeff(m).unwrap() - want.coeff(m).unwrap()).norm() < 1e-14);
        }
        assert!(p.sub(&want).coeff_norm() < 1e-14);
        // the other orientation has the opposite pressure
        let q = recover_pressure(&taylor_green_sine(g));
        assert!(q.add(&want).coeff_norm() < 1e-14);
        let shear = VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]);
        assert!(recover_pressure(&shear).coeff_norm() < 1e-15);
    }

    #[test]
    fn pressure_closes_the_projected_balance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = GridSpec::periodic(3, 16).unwrap();
        let u = project_p(&VectorField::random_band_limited(g, 5, &mut rng));
        let p = recover_pressure(&u);
        let grad_p = gradient(&p);
        let adv = advect_vector(&u, &u).unwrap();
        assert!(project_p(&grad_p).l2_norm() < 1e-12 * grad_p.l2_norm());
        assert!(project_q(&adv).add(&grad_p).l2_norm() <= 1e-10 * adv.l2_norm());
        let (a, b) = pressure_source_forms(&u);
        assert!(a.sub(&b).l2_norm() <= 1e-10 * a.l2_norm());
    }

    #[test]
    fn weak_residual_of_exact_heat_decay() {
        let g = GridSpec::periodic(2, 16).unwrap();
        let tests = random_test_fields(g, 1.0, 3, 9);
        let zero_traj = |n: usize| RefTrajectory {
            grid: g,
            mu: 1.0,
            kappa: 1.0,
            dt: 1.0 / n as f64,
            save_stride: 1.0 / n as f64,
            times: (0..=n).map(|i| i as f64 / n as f64).collect(),
            states: (0..=n)
                .map(|i| RefState::new(VectorField::zeros(g), SpectralField::zeros(g), 1.0, 1.0)
                    .map(|mut s| {
                        s.t = i as f64 / n as f64;
                        s
                    })
                    .unwrap())
                .collect(),
            records: Vec::new(),
        };
        let z = weak_residual(&zero_traj(10), &tests).unwrap();
        assert_eq!(z.max_normalized, 0.0);

        let exact = |n: usize| {
            let mut tr = zero_traj(n);
            for s in tr.states.iter_mut() {
                s.u = VectorField::from_fn(g, |x| [(-s.t).exp() * x[1].sin(), 0.0, 0.0]);
                s.theta = SpectralField::from_fn(g, |x| (-s.t).exp() * x[1].cos());
            }
            tr
        };
        let mut prev = f64::INFINITY;
        for n in [20, 40, 80] {
            let r = weak_residual(&exact(n), &tests).unwrap().max_normalized;
            assert!(r < prev.max(1e-13) || r < 1e-13, "n = {n}: {r} vs {prev}");
            prev = r;
        }
        assert!(prev < 1e-5, "{prev}");
    }

    #[test]
    fn weak_residual_rejects_compressible_tests() {
        let g = GridSpec::periodic(2, 16).unwrap();
        let traj = ref_run(&cfg(g, DataFamily::Shear, 0.01, 1.0, 0.1)).unwrap();
        let mut tests = random_test_fields(g, 1.0, 1, 1);
        tests[0].psi = gradient(&SpectralField::from_fn(g, |x| x[0].sin()));
        assert!(weak_residual(&traj, &tests).is_err());
    }

    #[test]
    fn energy_inequality_and_max_principle_on_random_data() {
        let g = GridSpec::periodic(2, 32).unwrap();
        let traj = ref_run(&cfg(g, DataFamily::Random, 2e-3, 0.5, 0.05)).unwrap();
        let rep = energy_inequality(&traj);
        assert!(rep.holds, "{rep:?}");
        assert!(theta_max_growth(&traj) < 1e-2);
    }
}
