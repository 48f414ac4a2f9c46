//! Time-shift moduli `M(h) = ‖f(·+h) − f‖_{L²([0,T−h]×Ω)}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::leray::project_p;
use crate::reference::FlowHistory;
use crate::series::{simpson, uniform_stride};

use super::fit::{fit_power_law, PowerFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusField {
    Theta,
    Pu,
}

impl fmt::Display for ModulusField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModulusField::Theta => "theta",
            ModulusField::Pu => "Pu",
        })
    }
}

impl FromStr for ModulusField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta" => Ok(ModulusField::Theta),
            "Pu" | "pu" => Ok(ModulusField::Pu),
            _ => Err(Error::InvalidArgument(format!(
                "unknown modulus field '{s}' (expected theta or Pu)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusTable {
    pub field: ModulusField,
    pub h: Vec<f64>,
    pub modulus: Vec<f64>,
    /// Fit of `M(h)` against `h`; absent when fewer than two moduli are positive.
    pub fit: Option<PowerFit>,
}

impl ModulusTable {
    pub fn exponent(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.order)
    }
}

fn shift_of(h: f64, stride: f64) -> Result<usize> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidArgument(format!("shift h must lie in (0, 1), got {h}")));
    }
    let ratio = h / stride;
    let k = ratio.round();
    if k < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "shift h = {h} is below the save stride {stride}"
        )));
    }
    if (ratio - k).abs() > 1e-9 * ratio {
        return Err(Error::InvalidArgument(format!(
            "shift h = {h} is not a multiple of the save stride {stride}"
        )));
    }
    Ok(k as usize)
}

/// Moduli for every `h` in `h_list` (each a multiple of the save stride and
/// shorter than the trajectory), time integral by Simpson's rule.
pub fn time_modulus<H: FlowHistory>(traj: &H, field: ModulusField, h_list: &[f64]) -> Result<ModulusTable> {
    let times = traj.times();
    let stride = uniform_stride(times)?;
    let shifts = h_list
        .iter()
        .map(|&h| shift_of(h, stride))
        .collect::<Result<Vec<_>>>()?;
    let n = times.len();
    if let Some((h, _)) = h_list.iter().zip(&shifts).find(|(_, s)| **s >= n - 1) {
        return Err(Error::InvalidArgument(format!(
            "shift h = {h} leaves fewer than two samples"
        )));
    }
    let projected: Vec<VectorField> = match field {
        ModulusField::Pu => (0..n).map(|i| project_p(traj.velocity(i))).collect(),
        ModulusField::Theta => Vec::new(),
    };
    let diff_sqr = |i: usize, j: usize| -> f64 {
        match field {
            ModulusField::Theta => traj.temperature(j).sub(traj.temperature(i)).l2_norm_sqr(),
            ModulusField::Pu => projected[j].sub(&projected[i]).l2_norm_sqr(),
        }
    };
    let modulus: Vec<f64> = shifts
        .iter()
        .map(|&s| {
            let vals: Vec<f64> = (0..n - s).map(|i| diff_sqr(i, i + s)).collect();
            simpson(&vals, stride).max(0.0).sqrt()
        })
        .collect();
    let points: Vec<(f64, f64)> = h_list
        .iter()
        .zip(&modulus)
        .filter(|(_, m)| **m > 0.0)
        .map(|(h, m)| (*h, *m))
        .collect();
    let fit = if points.len() >= 2 { fit_power_law(&points).ok() } else { None };
    Ok(ModulusTable {
        field,
        h: h_list.to_vec(),
        modulus,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;
    use crate::grid::GridSpec;

    struct Synthetic {
        grid: GridSpec,
        times: Vec<f64>,
        u: Vec<VectorField>,
        theta: Vec<SpectralField>,
    }

    impl FlowHistory for Synthetic {
        fn grid(&self) -> GridSpec {
            self.grid
        }
        fn times(&self) -> &[f64] {
            &self.times
        }
        fn velocity(&self, i: usize) -> &VectorField {
            &self.u[i]
        }
        fn temperature(&self, i: usize) -> &SpectralField {
            &self.theta[i]
        }
        fn mu(&self) -> f64 {
            1.0
        }
        fn kappa(&self) -> f64 {
            1.0
        }
    }

    fn heat(n_steps: usize, t_final: f64) -> Synthetic {
        let g = GridSpec::periodic(3, 8).unwrap();
        let times: Vec<f64> = (0..=n_steps).map(|i| t_final * i as f64 / n_steps as f64).collect();
        let base = SpectralField::from_fn(g, |x| x[0].sin());
        Synthetic {
            grid: g,
            u: times.iter().map(|_| VectorField::zeros(g)).collect(),
            theta: times.iter().map(|t| base.scaled((-t).exp())).collect(),
            times,
        }
    }

    #[test]
    fn constant_history_has_zero_modulus() {
        let mut s = heat(10, 1.0);
        let first = s.theta[0].clone();
        s.theta.iter_mut().for_each(|t| *t = first.clone());
        let m = time_modulus(&s, ModulusField::Theta, &[0.1, 0.2]).unwrap();
        assert_eq!(m.modulus, vec![0.0, 0.0]);
        assert!(m.fit.is_none());
        let m = time_modulus(&s, ModulusField::Pu, &[0.1]).unwrap();
        assert_eq!(m.modulus, vec![0.0]);
    }

    #[test]
    fn heat_decay_matches_closed_form() {
        let t_final = 1.0;
        let s = heat(200, t_final);
        let hs = [0.05, 0.1, 0.2, 0.4];
        let m = time_modulus(&s, ModulusField::Theta, &hs).unwrap();
        let vol = (2.0 * std::f64::consts::PI).powi(3);
        for (h, got) in hs.iter().zip(&m.modulus) {
            let want = (1.0 - (-h).exp()) * ((1.0 - (-2.0 * (t_final - h)).exp()) / 2.0).sqrt() * (vol / 2.0).sqrt();
            assert!((got - want).abs() < 1e-8 * want, "h = {h}: {got} vs {want}");
        }
        assert!(m.exponent().unwrap() > 0.5);
    }

    #[test]
    fn shift_validation() {
        let s = heat(10, 1.0);
        assert!(time_modulus(&s, ModulusField::Theta, &[0.05]).is_err());
        assert!(time_modulus(&s, ModulusField::Theta, &[0.15]).is_err());
        assert!(time_modulus(&s, ModulusField::Theta, &[1.0]).is_err());
        assert!(time_modulus(&s, ModulusField::Theta, &[0.0]).is_err());
    }
}
