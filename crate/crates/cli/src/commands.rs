use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use acflow_core::ac::{self, RunConfig};
use acflow_core::io::{
    diagnostics_row, parse_run_config, parse_sweep_config, read_checkpoint, write_checkpoint, write_ndjson,
    RunSettings, DIAGNOSTICS_HEADER,
};
use acflow_core::lab::{
    epsilon_sweep, initial_layer_probe, mollifier_suite, pressure_limit_check, pressure_wave_residual,
    projector_suite, run_with_norms, strichartz_scaling_report, PropertyTable,
};
use acflow_core::reference::{recover_pressure, ref_run};
use acflow_core::{project_p, project_q, Error, GridSpec};

pub enum Failure {
    /// Bad arguments, configuration or input files.
    Usage { op: &'static str, msg: String },
    /// The computation itself failed.
    Numerical { op: &'static str, msg: String },
    /// A property suite ran but some rows failed.
    Checks(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage { op, msg } | Failure::Numerical { op, msg } => write!(f, "{op}: {msg}"),
            Failure::Checks(msg) => f.write_str(msg),
        }
    }
}

fn numerical(e: &Error) -> bool {
    match e {
        Error::Cfl { .. } | Error::Blowup { .. } => true,
        Error::Sweep { source, .. } => numerical(source),
        _ => false,
    }
}

/// Tag a core error with the operation that raised it.
fn at(op: &'static str) -> impl FnOnce(Error) -> Failure {
    move |e| {
        let msg = e.to_string();
        if numerical(&e) {
            Failure::Numerical { op, msg }
        } else {
            Failure::Usage { op, msg }
        }
    }
}

fn io(op: &'static str) -> impl FnOnce(std::io::Error) -> Failure {
    move |e| Failure::Usage { op, msg: e.to_string() }
}

type Outcome = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage {
        op: "read_config",
        msg: format!("{}: {e}", path.display()),
    })
}

fn create_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::Usage {
        op: "create_output_dir",
        msg: format!("{}: {e}", dir.display()),
    })
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Usage {
        op: "write_output",
        msg: format!("{}: {e}", path.display()),
    })
}

fn load_run(path: &Path) -> Result<RunSettings, Failure> {
    parse_run_config(&read_text(path)?).map_err(at("parse_config"))
}

pub fn run(config: &Path, out: &Path, restart: Option<&Path>, checkpoint_every: Option<usize>) -> Outcome {
    let settings = load_run(config)?;
    let rc = settings.config;
    let every = checkpoint_every.unwrap_or(settings.checkpoint_every);
    let state = match restart {
        None => rc.initial_state().map_err(at("initial_state"))?,
        Some(p) => {
            let s = read_checkpoint(p, &rc.grid).map_err(at("read_checkpoint"))?;
            if s.physics() != rc.physics {
                return Err(Failure::Usage {
                    op: "read_checkpoint",
                    msg: format!("checkpoint parameters {:?} differ from the config {:?}", s.physics(), rc.physics),
                });
            }
            if s.t >= rc.t_final {
                return Err(Failure::Usage {
                    op: "read_checkpoint",
                    msg: format!("checkpoint time {} is not before T = {}", s.t, rc.t_final),
                });
            }
            s
        }
    };
    let needs_reference = settings.norms.iter().any(|r| r.field.needs_reference());
    if needs_reference && restart.is_some() {
        return Err(Failure::Usage {
            op: "parse_config",
            msg: "norms against the reference run are not available on restart".into(),
        });
    }
    create_dir(out)?;
    let reference = if needs_reference { Some(ref_run(&rc).map_err(at("ref_run"))?) } else { None };
    let ck_dir = out.join("checkpoints");
    if every > 0 {
        create_dir(&ck_dir)?;
    }
    let csv_path = out.join("diagnostics.csv");
    let mut csv = BufWriter::new(File::create(&csv_path).map_err(io("write_diagnostics"))?);
    writeln!(csv, "{DIAGNOSTICS_HEADER}").map_err(io("write_diagnostics"))?;
    let mut io_error: Option<Failure> = None;
    let mut save = 0usize;
    let mut last = None;
    let row = run_with_norms(&rc, state, &settings.norms, [1, 0, 0], reference.as_ref(), |s, rec| {
        if io_error.is_some() {
            return;
        }
        if let Err(e) = writeln!(csv, "{}", diagnostics_row(rec)) {
            io_error = Some(io("write_diagnostics")(e));
        }
        if every > 0 && save > 0 && save % every == 0 {
            if let Err(e) = write_checkpoint(&ck_dir.join(format!("save_{save:06}.acnsf")), s) {
                io_error = Some(at("write_checkpoint")(e));
            }
        }
        if every > 0 {
            last = Some(s.clone());
        }
        save += 1;
    })
    .map_err(at("run"))?;
    if let Some(e) = io_error {
        return Err(e);
    }
    csv.flush().map_err(io("write_diagnostics"))?;
    if let Some(s) = last {
        write_checkpoint(&ck_dir.join("final.acnsf"), &s).map_err(at("write_checkpoint"))?;
    }
    if !row.norms.is_empty() {
        let mut text = String::from("norm,value\n");
        for (label, v) in &row.norms {
            text.push_str(&format!("{label},{v:.16e}\n"));
        }
        write_file(&out.join("norms.csv"), &text)?;
    }
    println!(
        "eps = {:e}: {} samples, dt = {:e}, max balance residual {:.3e}",
        rc.physics.eps, row.samples, row.dt, row.max_balance_residual
    );
    for (label, v) in &row.norms {
        println!("  {label:<24} {v:.6e}");
    }
    Ok(())
}

pub fn sweep(config: &Path, out: &Path) -> Outcome {
    let cfg = parse_sweep_config(&read_text(config)?).map_err(at("parse_config"))?;
    create_dir(out)?;
    let report = epsilon_sweep(&cfg).map_err(at("epsilon_sweep"))?;

    let mut nd = Vec::new();
    write_ndjson(&mut nd, &report.rows).map_err(at("write_ndjson"))?;
    fs::write(out.join("sweep.ndjson"), nd).map_err(io("write_ndjson"))?;
    write_file(&out.join("norms.csv"), &report.norms_csv())?;
    write_file(&out.join("fits.csv"), &report.fits_csv())?;
    for (i, row) in report.rows.iter().enumerate() {
        let dir = out.join(format!("eps_{i:02}"));
        create_dir(&dir)?;
        let tr = &row.trace;
        let mut text = String::from("t,sqrt_eps_p_L2,Qu_L2,mode_re,mode_im\n");
        for k in 0..tr.times.len() {
            text.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                tr.times[k], tr.sqrt_eps_p_l2[k], tr.qu_l2[k], tr.mode_re[k], tr.mode_im[k]
            ));
        }
        write_file(&dir.join("trace.csv"), &text)?;
    }

    let monotone = report.monotonicity();
    let layer = initial_layer_probe(&report).ok();
    let strichartz = strichartz_scaling_report(&report).ok();
    let summary = serde_json::json!({
        "family": report.family,
        "seed": report.seed,
        "eps": report.eps(),
        "fits": report.fits,
        "monotonicity": monotone,
        "initial_layer": layer,
        "weighted_pressure": strichartz,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| at("write_summary")(e.into()))?;
    write_file(&out.join("summary.json"), &text)?;

    println!("{:<24} {:>10} {:>10}  decreasing", "norm", "order", "ci95");
    for m in &monotone {
        let fit = report.fits.get(&m.label);
        println!(
            "{:<24} {:>10} {:>10}  {}",
            m.label,
            fit.map_or("-".into(), |f| format!("{:.4}", f.order)),
            fit.and_then(|f| f.ci95).map_or("-".into(), |c| format!("{c:.4}")),
            m.decreasing
        );
    }
    if let Some(s) = &strichartz {
        println!("weighted pressure norms bounded over the sweep: {} ({})", s.bounded(), s.caveat);
    }
    if let Some(l) = layer.as_ref().and_then(|l| l.warning.as_ref()) {
        println!("initial layer: {l}");
    }
    Ok(())
}

fn report_table(table: &PropertyTable) -> Outcome {
    print!("{table}");
    if table.all_pass() {
        Ok(())
    } else {
        let failed: Vec<&str> = table.rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
        Err(Failure::Checks(format!("failed properties: {}", failed.join("; "))))
    }
}

pub fn check_projectors(dim: usize, n: usize, trials: usize, seed: u64) -> Outcome {
    let grid = GridSpec::periodic(dim, n).map_err(at("make_grid"))?;
    if trials == 0 {
        return Err(Failure::Usage { op: "check_projectors", msg: "trials must be positive".into() });
    }
    println!("{dim}D, n = {n}, {trials} random fields, seed {seed}");
    report_table(&projector_suite(grid, trials, seed))
}

pub fn mollifier_test(n: usize, seed: u64, out: Option<&Path>) -> Outcome {
    let suite = mollifier_suite(n, seed).map_err(at("mollifier_suite"))?;
    if let Some(dir) = out {
        create_dir(dir)?;
        for (p, table) in &suite.y1 {
            write_file(&dir.join(format!("y1_p{p}.csv")), &table.to_csv())?;
        }
        write_file(&dir.join("y2_s1_q2_p2.csv"), &suite.y2.to_csv())?;
    }
    println!("3D unit box, n = {n}, seed {seed}");
    report_table(&suite.table)
}

pub fn wave_residual(config: &Path, out: Option<&Path>) -> Outcome {
    let rc: RunConfig = load_run(config)?.config;
    let traj = ac::run(&rc).map_err(at("run"))?;
    let w = pressure_wave_residual(&traj).map_err(at("pressure_wave_residual"))?;
    println!("eps = {:e}, stride = {:e}", w.eps, w.stride);
    println!("  residual      {:.6e}", w.residual);
    println!("  relative      {:.6e}", w.relative);
    println!("  |p_tt|        {:.6e}", w.ptt);
    println!("  |lap p|       {:.6e}", w.laplacian_p);
    println!("  |F1|          {:.6e}", w.f1);
    println!("  |F2|          {:.6e}", w.f2);
    if let Some(dir) = out {
        create_dir(dir)?;
        let text = serde_json::to_string_pretty(&w).map_err(|e| at("write_output")(e.into()))?;
        write_file(&dir.join("wave_residual.json"), &text)?;
    }
    Ok(())
}

pub fn compare(config: &Path, out: &Path, window_factor: f64) -> Outcome {
    let rc = load_run(config)?.config;
    let ac = ac::run(&rc).map_err(at("run"))?;
    let rf = ref_run(&rc).map_err(at("ref_run"))?;
    let limit = pressure_limit_check(&ac, &rf, window_factor).map_err(at("pressure_limit_check"))?;
    create_dir(out)?;
    let mut text = String::from("t,Pu_err_L2,theta_err_L2,Qu_L2,p_err_L2,ref_p_L2\n");
    for (s, r) in ac.states.iter().zip(&rf.states) {
        let p_ref = recover_pressure(&r.u);
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            s.t,
            project_p(&s.u).sub(&r.u).l2_norm(),
            s.theta.sub(&r.theta).l2_norm(),
            project_q(&s.u).l2_norm(),
            s.p.sub(&p_ref).l2_norm(),
            p_ref.l2_norm()
        ));
    }
    write_file(&out.join("compare.csv"), &text)?;
    let json = serde_json::to_string_pretty(&limit).map_err(|e| at("write_output")(e.into()))?;
    write_file(&out.join("pressure_limit.json"), &json)?;
    println!("eps = {:e}, window = {:.4e}", limit.eps, limit.window);
    println!(
        "  averaged pressure error {:.6e} of {:.6e} ({})",
        limit.difference,
        limit.limit_norm,
        limit.relative.map_or("limit pressure vanishes".into(), |r| format!("{:.3}%", 100.0 * r))
    );
    if let Some(r) = limit.relative_doubled {
        println!("  with the window doubled: {:.3}%", 100.0 * r);
    }
    if limit.out_of_asymptotic_range {
        println!("  window exceeds a quarter of the run; eps is outside the asymptotic range");
    }
    Ok(())
}
