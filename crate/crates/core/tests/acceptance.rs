//! Acceptance criteria, one line each. Runs as a plain binary so the
//! verdict table is printed in order; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use acflow_core::ac::{
    energy, nonlinear_rhs, run, run_from, ACState, DataFamily, DataSpec, Physics, RunConfig, Stepper, TimeStep,
};
use acflow_core::io::{decode_checkpoint, encode_checkpoint};
use acflow_core::lab::{
    epsilon_sweep, fit_power_law, initial_layer_probe, mollifier_suite, paper_q_exponent, pressure_limit_against,
    pressure_wave_residual, projector_suite, q_component_decay, strichartz_scaling_report, strictly_decreasing,
    time_modulus, ModulusField, NormRequest, SweepConfig, SweepField, SweepReport, WINDOW_FACTOR,
};
use acflow_core::ops::gradient;
use acflow_core::reference::{energy_inequality, pressure_source_forms, random_test_fields, ref_run, weak_residual};
use acflow_core::{project_p, project_q, GridSpec, PadFactor, SpectralField, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn config(dim: usize, n: usize, family: DataFamily, eps: f64, t_final: f64, dt: f64, stride: f64) -> RunConfig {
    RunConfig {
        grid: GridSpec::periodic(dim, n).unwrap(),
        physics: Physics { eps, mu: 1.0, kappa: 1.0 },
        t_final,
        time_step: TimeStep::Fixed(dt),
        save_stride: stride,
        data: DataSpec::new(family, 0),
        nonlinear: true,
    }
}

fn random_vector(grid: GridSpec, band: i64, rng: &mut ChaCha8Rng) -> VectorField {
    VectorField::random_band_limited(grid, band, rng)
}

fn c1_projectors() -> Verdict {
    let t0 = Instant::now();
    let table = projector_suite(GridSpec::periodic(3, 32).unwrap(), 50, 1);
    let secs = t0.elapsed().as_secs_f64();
    let worst = table.rows.iter().map(|r| r.value).fold(0.0, f64::max);
    verdict(
        table.all_pass() && secs < 10.0,
        format!("50 fields 3D n=32, worst relative defect {worst:.2e} (<= 1e-11), {secs:.1}s"),
    )
}

fn c2_energy() -> Verdict {
    let g = GridSpec::periodic(3, 16).unwrap();
    let phys = Physics { eps: 1e-2, mu: 1.0, kappa: 1.0 };
    let theta = SpectralField::from_fn(g, |x| x[0].sin() + 0.5 * (2.0 * x[1]).cos());
    let state = ACState::new(VectorField::zeros(g), theta, SpectralField::zeros(g), phys).unwrap();
    let mut c = config(3, 16, DataFamily::Shear, 1e-2, 1.0, 0.01, 0.01);
    c.physics = phys;
    let heat = run_from(&c, state).unwrap();
    let heat_res = heat.records.iter().map(|r| r.balance_residual).fold(0.0, f64::max);

    let mut points = Vec::new();
    for dt in [4e-3, 2e-3, 1e-3] {
        let c = config(2, 32, DataFamily::Random, 1e-2, 0.4, dt, 0.04);
        points.push((dt, run(&c).unwrap().max_balance_residual()));
    }
    let fit = fit_power_law(&points).unwrap();
    verdict(
        heat_res <= 1e-8 && fit.order >= 1.9,
        format!(
            "heat max |E+D-E0| = {heat_res:.2e}; random data residuals {:.2e}, {:.2e}, {:.2e}, order {:.3}",
            points[0].1, points[1].1, points[2].1, fit.order
        ),
    )
}

fn c3_skew() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = GridSpec::new(3, 16, 2.0 * PI, PadFactor::Two).unwrap();
    let phys = Physics { eps: 1e-2, mu: 1.0, kappa: 1.0 };
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u = random_vector(g, 7, &mut rng);
        let th = SpectralField::random_band_limited(g, 7, &mut rng);
        let s = ACState::new(u, th, SpectralField::zeros(g), phys).unwrap();
        let (du, _) = nonlinear_rhs(&s);
        let grad = (0..3).map(|a| gradient(s.u.component(a)).l2_norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(du.inner(&s.u).unwrap().abs() / (s.u.l2_norm() * grad));
    }
    verdict(worst <= 1e-10, format!("20 states, pad 2, max |<N(u),u>|/(|u||grad u|) = {worst:.2e}"))
}

fn c4_stiffness() -> Verdict {
    let dts: Vec<f64> = [1e-1, 1e-4]
        .iter()
        .map(|&eps| {
            let mut c = config(2, 32, DataFamily::TaylorGreen, eps, 0.5, 0.0, 0.05);
            c.time_step = TimeStep::Cfl(0.4);
            run(&c).unwrap().dt
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = GridSpec::periodic(3, 16).unwrap();
    let mut worst: f64 = 0.0;
    for eps in [1e-1, 1e-4] {
        let phys = Physics { eps, mu: 0.0, kappa: 1.0 };
        let mut p = SpectralField::random_band_limited(g, 7, &mut rng);
        p.apply_mode_filter(|m| m != [0, 0, 0]);
        let mut s = ACState::new(random_vector(g, 7, &mut rng), SpectralField::zeros(g), p, phys).unwrap();
        let inv = |s: &ACState| 0.5 * project_q(&s.u).l2_norm_sqr() + 0.5 * eps * s.p.l2_norm_sqr();
        let stepper = Stepper::new(g, phys, 1e-2, false);
        for _ in 0..50 {
            let before = inv(&s);
            stepper.advance(&mut s).unwrap();
            worst = worst.max((inv(&s) - before).abs() / before);
        }
    }
    verdict(
        dts[0] == dts[1] && worst <= 1e-12,
        format!("dt at eps=1e-1 {:.4e}, at eps=1e-4 {:.4e}; mu=0 invariant drift {worst:.2e} per step", dts[0], dts[1]),
    )
}

fn main_sweep() -> SweepReport {
    let template = config(2, 32, DataFamily::TaylorGreen, 1e-1, 1.0, 0.005, 0.005);
    let mut sc = SweepConfig::new(vec![1e-1, 1e-2, 1e-3, 1e-4], template);
    sc.norms = SweepConfig::default_norms();
    epsilon_sweep(&sc).unwrap()
}

fn c5_convergence(report: &SweepReport) -> Verdict {
    let labels = [
        NormRequest::new(SweepField::Qu, 2.0, 4.0, 0.0).label(),
        NormRequest::new(SweepField::PuError, 2.0, 2.0, 0.0).label(),
        NormRequest::new(SweepField::ThetaError, 2.0, 2.0, 0.0).label(),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for l in &labels {
        let vals: Vec<f64> = report.values(l).unwrap().iter().map(|p| p.1).collect();
        let order = report.fits[l].order;
        pass &= strictly_decreasing(&vals) && order > 0.0;
        parts.push(format!("{l} order {order:.3}"));
    }
    let q = q_component_decay(report, 4.0).unwrap();
    pass &= q.passes();
    verdict(
        pass,
        format!("{}; reference exponent {:.5} (non-binding)", parts.join(", "), paper_q_exponent(4.0)),
    )
}

fn c6_equicontinuity() -> Verdict {
    let c = config(2, 32, DataFamily::TaylorGreen, 1e-3, 1.0, 0.005, 0.005);
    let traj = run(&c).unwrap();
    let hs = [0.01, 0.02, 0.04, 0.08, 0.16];
    let pu = time_modulus(&traj, ModulusField::Pu, &hs).unwrap().exponent().unwrap();
    let th = time_modulus(&traj, ModulusField::Theta, &hs).unwrap().exponent().unwrap();

    let g = GridSpec::periodic(3, 8).unwrap();
    let phys = Physics { eps: 1e-2, mu: 1.0, kappa: 1.0 };
    let s = ACState::new(
        VectorField::zeros(g),
        SpectralField::from_fn(g, |x| x[0].sin()),
        SpectralField::zeros(g),
        phys,
    )
    .unwrap();
    let mut hc = config(3, 8, DataFamily::Shear, 1e-2, 1.0, 0.005, 0.005);
    hc.physics = phys;
    let heat = run_from(&hc, s).unwrap();
    let m = time_modulus(&heat, ModulusField::Theta, &[0.05, 0.1, 0.2, 0.4]).unwrap();
    let vol = (2.0 * PI).powi(3);
    let err = m
        .h
        .iter()
        .zip(&m.modulus)
        .map(|(h, got)| {
            let want = (1.0 - (-h).exp()) * ((1.0 - (-2.0 * (1.0 - h)).exp()) / 2.0).sqrt() * (vol / 2.0).sqrt();
            (got - want).abs() / want
        })
        .fold(0.0, f64::max);
    verdict(
        pu >= 0.2 && th >= 0.2 && err <= 1e-8,
        format!("eps=1e-3 exponents Pu {pu:.3}, theta {th:.3} (>= 0.2); heat modulus relative error {err:.2e}"),
    )
}

fn c7_wave() -> Verdict {
    let eps: f64 = 1e-2;
    let mut lin = Vec::new();
    for k in 0..3 {
        let stride = eps.sqrt() / 8.0 / 2f64.powi(k);
        let stride = 0.5 / (0.5 / stride).ceil();
        let mut c = config(2, 8, DataFamily::Acoustic, eps, 0.5, stride, stride);
        c.physics.mu = 0.0;
        c.nonlinear = false;
        lin.push(pressure_wave_residual(&run(&c).unwrap()).unwrap().relative);
    }
    let orders: Vec<f64> = lin.windows(2).map(|w| (w[0] / w[1]).log2()).collect();

    let eps: f64 = 1e-3;
    let mut nl = Vec::new();
    for k in 0..3 {
        let stride = eps.sqrt() / 8.0 / 2f64.powi(k);
        let stride = 0.1 / (0.1 / stride).ceil();
        let c = config(2, 32, DataFamily::TaylorGreen, eps, 0.1, stride, stride);
        nl.push(pressure_wave_residual(&run(&c).unwrap()).unwrap().relative);
    }
    let finest = *nl.last().unwrap();
    verdict(
        orders.iter().all(|o| (o - 2.0).abs() <= 0.2) && finest <= 0.05,
        format!(
            "linear orders {:.3}, {:.3}; nonlinear eps=1e-3 relative residual {:.2e}, {:.2e}, {:.2e}",
            orders[0], orders[1], nl[0], nl[1], nl[2]
        ),
    )
}

fn c8_layer() -> Verdict {
    let mut template = config(2, 32, DataFamily::Incompatible, 1e-2, 2.0, 0.0025, 0.0025);
    template.physics.mu = 0.01;
    template.physics.kappa = 0.01;
    let mut sc = SweepConfig::new(vec![1e-2, 1e-3, 1e-4], template);
    sc.reference = false;
    sc.norms = vec![NormRequest::new(SweepField::Qu, 2.0, 2.0, 0.0)];
    let report = epsilon_sweep(&sc).unwrap();
    let layer = initial_layer_probe(&report).unwrap();
    let fit = layer.frequency_fit.as_ref().unwrap();
    let freqs: Vec<String> = layer
        .rows
        .iter()
        .map(|r| format!("{:.2}", r.frequency.unwrap_or(f64::NAN)))
        .collect();
    verdict(
        (fit.order + 0.5).abs() <= 0.05,
        format!("frequencies {} at eps 1e-2..1e-4, slope {:.4}", freqs.join(", "), fit.order),
    )
}

fn c9_limit_pressure() -> Verdict {
    let mut rel = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let c = config(2, 32, DataFamily::TaylorGreen, eps, 1.0, 0.001, 0.001);
        let traj = run(&c).unwrap();
        let g = c.grid;
        let shape = SpectralField::from_fn(g, |x| -0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos()));
        let r = pressure_limit_against(&traj, WINDOW_FACTOR, |_, t| shape.scaled((-4.0 * t).exp())).unwrap();
        rel.push(r.relative.unwrap());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = GridSpec::periodic(3, 16).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u = project_p(&random_vector(g, 7, &mut rng));
        let (a, b) = pressure_source_forms(&u);
        worst = worst.max(a.sub(&b).l2_norm() / a.l2_norm());
    }
    verdict(
        strictly_decreasing(&rel) && rel[2] < 0.05 && worst <= 1e-10,
        format!(
            "averaged pressure error {:.2}%, {:.2}%, {:.2}% at eps 1e-2..1e-4; source identity {worst:.2e}",
            100.0 * rel[0],
            100.0 * rel[1],
            100.0 * rel[2]
        ),
    )
}

fn c10_strichartz(report: &SweepReport) -> Verdict {
    let s = strichartz_scaling_report(report).unwrap();
    let p: Vec<String> = s.rows.iter().map(|r| format!("{:.3e}", r.weighted_p)).collect();
    let d: Vec<String> = s.rows.iter().map(|r| format!("{:.3e}", r.weighted_dtp)).collect();
    verdict(
        s.bounded(),
        format!("eps^3/8 |p| = [{}], eps^7/8 |dtp| = [{}]; {}", p.join(", "), d.join(", "), s.caveat),
    )
}

fn c11_mollifier() -> Verdict {
    let suite = mollifier_suite(256, 11).unwrap();
    let slopes: Vec<String> = [2, 4, 6]
        .iter()
        .map(|p| format!("{:.3}", suite.table.get(&format!("y1 p={p} numerator slope")).unwrap().value))
        .collect();
    verdict(
        suite.table.all_pass(),
        format!("3D n=256, alpha 2^-2..2^-6, y1 slopes p=2,4,6: {}; all tables finite", slopes.join(", ")),
    )
}

fn c12_weak() -> Verdict {
    let mut c = config(2, 64, DataFamily::Random, 1e-2, 1.0, 1e-3, 2e-3);
    c.data = DataSpec::new(DataFamily::Random, 12);
    let traj = ref_run(&c).unwrap();
    let tests = random_test_fields(c.grid, c.t_final, 10, 12);
    let w = weak_residual(&traj, &tests).unwrap();
    let e = energy_inequality(&traj);
    verdict(
        w.max_normalized <= 1e-6 && e.holds,
        format!(
            "max normalized weak residual {:.2e}; energy inequality excess {:.2e} (tolerance {:.2e})",
            w.max_normalized, e.max_excess, e.tolerance
        ),
    )
}

fn c13_determinism(report: &SweepReport) -> Verdict {
    let again = main_sweep();
    let same = serde_json::to_string(report).unwrap() == serde_json::to_string(&again).unwrap();

    let c = config(2, 32, DataFamily::Random, 1e-2, 0.4, 0.005, 0.02);
    let full = run(&c).unwrap();
    let restored = decode_checkpoint(&encode_checkpoint(&full.states[10]), c.grid.pad()).unwrap();
    let rest = run_from(&c, restored).unwrap();
    let (a, b) = (full.last(), rest.last());
    let drift = (a.u.sub(&b.u).l2_norm_sqr() + a.theta.sub(&b.theta).l2_norm_sqr() + a.p.sub(&b.p).l2_norm_sqr())
        .sqrt()
        / energy(a).sqrt();
    verdict(
        same && drift <= 1e-12 && a.t == b.t,
        format!("repeated sweep identical: {same}; restart drift {drift:.2e}"),
    )
}

fn main() {
    let t0 = Instant::now();
    let report = main_sweep();
    let sweep_secs = t0.elapsed().as_secs_f64();
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (1, "projector algebra", Box::new(c1_projectors)),
        (2, "energy identity", Box::new(c2_energy)),
        (3, "skew-symmetric corrections", Box::new(c3_skew)),
        (4, "stiffness removal", Box::new(c4_stiffness)),
        (5, "convergence as eps -> 0", Box::new(|| c5_convergence(&report))),
        (6, "equicontinuity in time", Box::new(c6_equicontinuity)),
        (7, "pressure wave structure", Box::new(c7_wave)),
        (8, "initial layer frequency", Box::new(c8_layer)),
        (9, "limit pressure", Box::new(c9_limit_pressure)),
        (10, "weighted pressure norms", Box::new(|| c10_strichartz(&report))),
        (11, "mollifier lemma", Box::new(c11_mollifier)),
        (12, "weak solution", Box::new(c12_weak)),
        (13, "determinism and persistence", Box::new(|| c13_determinism(&report))),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        let t = Instant::now();
        let v = check();
        let mut secs = t.elapsed().as_secs_f64();
        if n == 5 {
            secs += sweep_secs;
        }
        println!(
            "criterion {n:>2} {} {name}: {} [{secs:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
