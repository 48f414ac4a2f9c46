//! Fixtures shared by the benchmarks.

use acflow_core::ac::{ACState, DataFamily, DataSpec, Physics};
use acflow_core::GridSpec;

/// Random solenoidal-plus-gradient data on a `2π` box.
pub fn random_state(dim: usize, n: usize, eps: f64) -> ACState {
    let grid = GridSpec::periodic(dim, n).expect("valid grid");
    let physics = Physics { eps, mu: 1.0, kappa: 1.0 };
    DataSpec::new(DataFamily::Random, 7).state(grid, physics).expect("valid data")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_is_finite() {
        let s = random_state(2, 16, 1e-2);
        assert!(s.is_finite());
        assert!(s.u.l2_norm() > 0.0);
    }
}
