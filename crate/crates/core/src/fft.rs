//! Multi-dimensional complex FFTs on cubic arrays, built from 1-D rustfft
//! plans applied axis by axis. Plans are cached per thread.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

struct PlanCache {
    planner: FftPlanner<f64>,
    plans: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
}

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(PlanCache {
        planner: FftPlanner::new(),
        plans: HashMap::new(),
    });
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut cache = cell.borrow_mut();
        let key = (n, dir == Direction::Forward);
        if let Some(p) = cache.plans.get(&key) {
            return Arc::clone(p);
        }
        let p = match dir {
            Direction::Forward => cache.planner.plan_fft_forward(n),
            Direction::Inverse => cache.planner.plan_fft_inverse(n),
        };
        cache.plans.insert(key, Arc::clone(&p));
        p
    })
}

/// Unnormalized in-place transform of a `dim`-dimensional array with `n`
/// points per axis (row-major, axis 0 slowest).
pub(crate) fn transform(data: &mut [Complex64], dim: usize, n: usize, dir: Direction) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, dir);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    // Contiguous last axis.
    fft.process_with_scratch(data, &mut scratch);

    // Strided axes: gather a block of lines, transform, scatter back.
    let total = data.len();
    let mut buf: Vec<Complex64> = Vec::new();
    for axis in (0..dim - 1).rev() {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = n * stride;
        buf.resize(block, Complex64::new(0.0, 0.0));
        for base in (0..total).step_by(block) {
            let chunk = &mut data[base..base + block];
            for j in 0..stride {
                for i in 0..n {
                    buf[j * n + i] = chunk[i * stride + j];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for j in 0..stride {
                for i in 0..n {
                    chunk[i * stride + j] = buf[j * n + i];
                }
            }
        }
    }
}

/// Forward transform of real data with the mean-normalized convention
/// (coefficient 0 equals the spatial mean).
pub(crate) fn forward_real(values: &[f64], dim: usize, n: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut data, dim, n, Direction::Forward);
    let scale = 1.0 / data.len() as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
    data
}

/// Inverse of [`forward_real`]; returns the real part.
pub(crate) fn inverse_real(coeffs: &[Complex64], dim: usize, n: usize) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    transform(&mut data, dim, n, Direction::Inverse);
    data.into_iter().map(|c| c.re).collect()
}
