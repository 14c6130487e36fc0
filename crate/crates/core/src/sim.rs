//! Synthetic regression data for demos and benchmarks.
//!
//! The generator draws three uniform features, a numeric 0/1 indicator,
//! a five-level categorical, and standard normal fillers, then builds
//! the target from an additive pair plus one interaction:
//!
//! ```text
//! y = 4 x1 + 4 x2 + 4 x4 x3^2 + eps,   eps ~ N(0, noise * max(f, 0))
//! ```
//!
//! The noise scale multiplies the positive part of the signal, so
//! `noise = 0` reproduces the signal exactly. Every column has its own
//! seeded stream, making output byte-identical per `(n, p, seed)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{make_task, Column, Frame, Task};
use crate::error::{Error, Result};
use crate::seed;

/// Declared level table of the categorical feature `x5`.
pub const SIM_LEVELS: [&str; 5] = ["a", "b", "c", "d", "e"];

/// Default relative noise scale.
pub const DEFAULT_NOISE: f64 = 0.1;

/// Signal value for one row.
fn signal(x1: f64, x2: f64, x3: f64, x4: f64) -> f64 {
    4.0 * x1 + 4.0 * x2 + 4.0 * x4 * (x3 * x3)
}

/// Generate a frame with features `x1..xp` and target `y`. Needs at
/// least 5 features (the named ones) and one row.
pub fn simulate(n: usize, p: usize, master_seed: u64, noise: f64) -> Result<Frame> {
    if p < 5 {
        return Err(Error::SimTooFewFeatures(p));
    }
    if n == 0 {
        return Err(Error::EmptyTask);
    }
    let mut columns = Vec::with_capacity(p + 1);
    let mut uniforms: Vec<Vec<f64>> = Vec::with_capacity(3);
    for j in 1..=p as u64 {
        let mut r = seed::rng(seed::derive_path(master_seed, &[seed::TAG_SIM, j]));
        let name = format!("x{j}");
        match j {
            1..=3 => {
                let values: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
                uniforms.push(values.clone());
                columns.push(Column::numeric(name, values));
            }
            4 => {
                let values: Vec<f64> = (0..n)
                    .map(|_| if r.random::<f64>() < 0.75 { 1.0 } else { 0.0 })
                    .collect();
                uniforms.push(values.clone());
                columns.push(Column::numeric(name, values));
            }
            5 => {
                let codes: Vec<u32> = (0..n).map(|_| r.random_range(0..5)).collect();
                let levels = SIM_LEVELS.iter().map(|s| s.to_string()).collect();
                columns.push(Column::categorical(name, codes, levels)?);
            }
            _ => {
                let values: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
                columns.push(Column::numeric(name, values));
            }
        }
    }
    let mut noise_rng = seed::rng(seed::derive_path(master_seed, &[seed::TAG_SIM, 0]));
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let f = signal(uniforms[0][i], uniforms[1][i], uniforms[2][i], uniforms[3][i]);
            let z: f64 = noise_rng.sample(StandardNormal);
            f + noise * f.max(0.0) * z
        })
        .collect();
    columns.push(Column::numeric("y", y));
    Frame::new(columns)
}

/// Simulate and bind into a regression task on `y`.
pub fn simulate_task(n: usize, p: usize, master_seed: u64, noise: f64) -> Result<Task> {
    make_task(simulate(n, p, master_seed, noise)?, "y", None, None)
}
