//! Sectioned `key = value` run and sweep configurations.
//!
//! ```text
//! # comment
//! [grid]
//! dim = 2
//! n = 32
//! length = 2pi        # default 2pi
//! pad = 3/2           # or 2
//! [physics]
//! eps = 1e-2          # required for `run`
//! mu = 1
//! kappa = 1
//! nonlinear = true
//! [time]
//! T = 1
//! dt = 1e-3           # or cfl = 0.4
//! save_stride = 1e-2
//! [data]
//! family = taylor-green
//! seed = 0
//! [sweep]
//! eps_list = 1e-1, 1e-2, 1e-3
//! reference = true
//! probe_mode = 1, 0, 0
//! [diagnostics]
//! norms = Qu:2:4:0, p:4:4:-2
//! checkpoint_every = 0
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::ac::{DataFamily, DataSpec, Physics, RunConfig, TimeStep, CFL_LIMIT};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, PadFactor};
use crate::lab::{NormRequest, SweepConfig};

const SCHEMA: &[(&str, &[&str])] = &[
    ("grid", &["dim", "n", "length", "pad"]),
    ("physics", &["eps", "mu", "kappa", "nonlinear"]),
    ("time", &["T", "dt", "cfl", "save_stride"]),
    ("data", &["family", "seed"]),
    ("sweep", &["eps_list", "reference", "probe_mode"]),
    ("diagnostics", &["norms", "checkpoint_every"]),
];

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

/// Raw sections after syntax and schema checks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

fn err(section: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("[{section}] {msg}"))
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ConfigFile::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("malformed section header '{body}' (line {line})")))?
                    .trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(Error::Config(format!("unknown section [{name}] (line {line})")));
                }
                out.sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let section = current
                .clone()
                .ok_or_else(|| Error::Config(format!("key outside of any section (line {line})")))?;
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(&section, format!("expected key = value (line {line})")))?;
            let (key, value) = (key.trim(), value.trim());
            let allowed = SCHEMA.iter().find(|(s, _)| *s == section).expect("known section").1;
            if !allowed.contains(&key) {
                return Err(err(&section, format!("unknown key '{key}' (line {line})")));
            }
            let map = out.sections.get_mut(&section).expect("section entered");
            if let Some(prev) = map.get(key) {
                return Err(err(
                    &section,
                    format!("duplicate key '{key}' (line {line}, first on line {})", prev.line),
                ));
            }
            map.insert(key.to_string(), Entry { value: value.to_string(), line });
        }
        Ok(out)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|m| m.get(key))
    }

    fn required(&self, section: &str, key: &str) -> Result<&Entry> {
        self.entry(section, key)
            .ok_or_else(|| err(section, format!("missing required key '{key}'")))
    }

    fn number(&self, section: &str, key: &str) -> Result<Option<(f64, usize)>> {
        self.entry(section, key)
            .map(|e| parse_number(&e.value).map(|v| (v, e.line)).ok_or_else(|| {
                err(section, format!("{key} must be a number, got '{}' (line {})", e.value, e.line))
            }))
            .transpose()
    }

    fn integer(&self, section: &str, key: &str) -> Result<Option<(u64, usize)>> {
        self.entry(section, key)
            .map(|e| {
                e.value.parse::<u64>().map(|v| (v, e.line)).map_err(|_| {
                    err(section, format!("{key} must be a non-negative integer, got '{}' (line {})", e.value, e.line))
                })
            })
            .transpose()
    }

    fn boolean(&self, section: &str, key: &str) -> Result<Option<bool>> {
        self.entry(section, key)
            .map(|e| match e.value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                v => Err(err(section, format!("{key} must be true or false, got '{v}' (line {})", e.line))),
            })
            .transpose()
    }
}

/// Numbers, with `pi` accepted as a factor: `2pi`, `0.5*pi`, `pi`.
fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(head) = s.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let factor = if head.is_empty() { 1.0 } else { head.parse::<f64>().ok()? };
        return Some(factor * PI);
    }
    s.parse::<f64>().ok()
}

fn check(cond: bool, section: &str, msg: impl std::fmt::Display, line: usize) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(err(section, format!("{msg} (line {line})")))
    }
}

/// A parsed run configuration with its output options.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub config: RunConfig,
    pub norms: Vec<NormRequest>,
    /// Write a checkpoint every this many saves; 0 disables.
    pub checkpoint_every: usize,
}

/// Either kind of configuration, decided by the presence of `[sweep]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Run(RunSettings),
    Sweep(SweepConfig),
}

fn template(cf: &ConfigFile, need_eps: bool) -> Result<RunConfig> {
    let (dim, line) = cf
        .integer("grid", "dim")?
        .ok_or_else(|| err("grid", "missing required key 'dim'"))?;
    check(dim == 2 || dim == 3, "grid", format!("dim must be 2 or 3, got {dim}"), line)?;
    let (n, line) = cf
        .integer("grid", "n")?
        .ok_or_else(|| err("grid", "missing required key 'n'"))?;
    check(n >= 8 && n % 2 == 0, "grid", format!("n must be an even integer >= 8, got {n}"), line)?;
    let length = match cf.number("grid", "length")? {
        Some((l, line)) => {
            check(l > 0.0 && l.is_finite(), "grid", format!("length must be > 0, got {l}"), line)?;
            l
        }
        None => 2.0 * PI,
    };
    let pad = match cf.entry("grid", "pad") {
        None => PadFactor::ThreeHalves,
        Some(e) => match e.value.replace(' ', "").as_str() {
            "3/2" | "1.5" => PadFactor::ThreeHalves,
            "2" | "2/1" => PadFactor::Two,
            v => return Err(err("grid", format!("pad must be 3/2 or 2, got '{v}' (line {})", e.line))),
        },
    };
    let grid = GridSpec::new(dim as usize, n as usize, length, pad)?;

    let eps = match cf.number("physics", "eps")? {
        Some((e, line)) => {
            check(e > 0.0 && e.is_finite(), "physics", "eps must be > 0", line)?;
            e
        }
        None if need_eps => return Err(err("physics", "missing required key 'eps'")),
        None => Physics::default().eps,
    };
    let mut physics = Physics { eps, mu: 1.0, kappa: 1.0 };
    for (key, slot) in [("mu", &mut physics.mu), ("kappa", &mut physics.kappa)] {
        if let Some((v, line)) = cf.number("physics", key)? {
            check(v >= 0.0 && v.is_finite(), "physics", format!("{key} must be >= 0"), line)?;
            *slot = v;
        }
    }
    let nonlinear = cf.boolean("physics", "nonlinear")?.unwrap_or(true);

    let t_final = {
        let (t, line) = cf
            .number("time", "T")?
            .ok_or_else(|| err("time", "missing required key 'T'"))?;
        check(t > 0.0 && t.is_finite(), "time", "T must be > 0", line)?;
        t
    };
    let time_step = match (cf.number("time", "dt")?, cf.number("time", "cfl")?) {
        (Some(_), Some((_, line))) => {
            return Err(err("time", format!("give either dt or cfl, not both (line {line})")))
        }
        (Some((dt, line)), None) => {
            check(dt > 0.0 && dt.is_finite(), "time", "dt must be > 0", line)?;
            TimeStep::Fixed(dt)
        }
        (None, Some((c, line))) => {
            check(c > 0.0 && c <= CFL_LIMIT, "time", format!("cfl must lie in (0, {CFL_LIMIT}]"), line)?;
            TimeStep::Cfl(c)
        }
        (None, None) => return Err(err("time", "missing required key 'dt' (or 'cfl')")),
    };
    let save_stride = {
        let (s, line) = cf
            .number("time", "save_stride")?
            .ok_or_else(|| err("time", "missing required key 'save_stride'"))?;
        check(s > 0.0 && s <= t_final, "time", "save_stride must lie in (0, T]", line)?;
        let ratio = t_final / s;
        check(
            (ratio - ratio.round()).abs() <= 1e-9 * ratio,
            "time",
            "T must be a whole number of save strides",
            line,
        )?;
        s
    };

    let family = {
        let e = cf.required("data", "family")?;
        e.value
            .parse::<DataFamily>()
            .map_err(|x| err("data", format!("{x} (line {})", e.line)))?
    };
    let seed = cf.integer("data", "seed")?.map_or(0, |(s, _)| s);

    Ok(RunConfig {
        grid,
        physics,
        t_final,
        time_step,
        save_stride,
        data: DataSpec::new(family, seed),
        nonlinear,
    })
}

fn norms(cf: &ConfigFile) -> Result<Option<Vec<NormRequest>>> {
    cf.entry("diagnostics", "norms")
        .map(|e| {
            e.value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<NormRequest>()
                        .map_err(|x| err("diagnostics", format!("{x} (line {})", e.line)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()
}

/// Parse a `run` configuration (`[physics] eps` required; `[sweep]` not allowed).
pub fn parse_run_config(text: &str) -> Result<RunSettings> {
    let cf = ConfigFile::parse(text)?;
    if cf.has_section("sweep") {
        return Err(Error::Config("[sweep] is not allowed in a run configuration".into()));
    }
    run_settings(&cf)
}

fn run_settings(cf: &ConfigFile) -> Result<RunSettings> {
    let config = template(cf, true)?;
    let checkpoint_every = cf.integer("diagnostics", "checkpoint_every")?.map_or(0, |(k, _)| k as usize);
    Ok(RunSettings {
        config,
        norms: norms(cf)?.unwrap_or_default(),
        checkpoint_every,
    })
}

/// Parse a sweep configuration (`[sweep] eps_list` required).
pub fn parse_sweep_config(text: &str) -> Result<SweepConfig> {
    let cf = ConfigFile::parse(text)?;
    sweep_config(&cf)
}

fn sweep_config(cf: &ConfigFile) -> Result<SweepConfig> {
    let tmpl = template(cf, false)?;
    let e = cf.required("sweep", "eps_list")?;
    let eps_list = e
        .value
        .split(',')
        .map(|s| {
            parse_number(s).ok_or_else(|| err("sweep", format!("eps_list entry '{}' is not a number (line {})", s.trim(), e.line)))
        })
        .collect::<Result<Vec<f64>>>()?;
    check(!eps_list.is_empty(), "sweep", "eps_list is empty", e.line)?;
    check(eps_list.iter().all(|v| *v > 0.0 && v.is_finite()), "sweep", "eps_list entries must be > 0", e.line)?;
    check(
        eps_list.windows(2).all(|w| w[1] < w[0]),
        "sweep",
        "eps_list must be strictly decreasing",
        e.line,
    )?;
    let mut sc = SweepConfig::new(eps_list, tmpl);
    if let Some(r) = cf.boolean("sweep", "reference")? {
        sc.reference = r;
    }
    if let Some(e) = cf.entry("sweep", "probe_mode") {
        let m = e
            .value
            .split(',')
            .map(|s| s.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| err("sweep", format!("probe_mode must be integers (line {})", e.line)))?;
        check(m.len() == tmpl.grid.dim(), "sweep", format!("probe_mode needs {} entries", tmpl.grid.dim()), e.line)?;
        let mut mode = [0i64; 3];
        mode[..m.len()].copy_from_slice(&m);
        sc.probe_mode = mode;
    }
    if let Some(list) = norms(cf)? {
        sc.norms = list;
    }
    if !sc.reference {
        sc.norms.retain(|r| !r.field.needs_reference());
    }
    sc.validate().map_err(|x| Error::Config(format!("[sweep] {x}")))?;
    Ok(sc)
}

/// Parse either kind of configuration.
pub fn parse_config(text: &str) -> Result<Config> {
    let cf = ConfigFile::parse(text)?;
    if cf.has_section("sweep") {
        sweep_config(&cf).map(Config::Sweep)
    } else {
        run_settings(&cf).map(Config::Run)
    }
}
