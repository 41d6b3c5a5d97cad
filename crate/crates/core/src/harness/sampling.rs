//! Collocation and observation sampling, and validation splits.
//!
//! Residual points live in the continuous space-time rectangle. The grid
//! strategy places them at the cell centers of the near-square lattice
//!
//! ```text
//! N_x = ceil(sqrt(N)),  N_t = ceil(N / N_x),  N_x N_t >= N
//! x_i = x0 + (i + 1/2) dx,  t_j = t0 + (j + 1/2) dt
//! ```
//!
//! so one requested point lands on the domain midpoint. Observations are
//! drawn from the solver lattice itself, without replacement, so values
//! attach exactly with no interpolation. The infection-weighted strategy
//! draws location `k` with probability
//!
//! ```text
//! p_k = I_k / sum_m I_m
//! ```
//!
//! updated after each draw (removal without replacement).

use crate::error::{Error, Result};
use crate::fv::SpaceTimeField;
use rand::seq::index::sample as index_sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualStrategy {
    UniformGrid,
    UniformRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataStrategy {
    UniformRandom,
    ProportionalToInfected,
    /// Equally spaced positions in snapshot-major lattice order.
    UniformStride,
}

/// One solver-lattice location an observation is attached to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSample {
    pub snapshot: usize,
    pub cell: usize,
    pub x: f64,
    pub t: f64,
}

pub fn sample_residual_points(
    domain: (f64, f64),
    t_range: (f64, f64),
    n: usize,
    strategy: ResidualStrategy,
    seed: u64,
) -> Result<Vec<[f64; 2]>> {
    if !(domain.0 < domain.1) || !(t_range.0 < t_range.1) {
        return Err(Error::InvalidConfig(format!(
            "empty sampling rectangle [{}, {}] x [{}, {}]",
            domain.0, domain.1, t_range.0, t_range.1
        )));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("requested zero residual points".into()));
    }
    let mut points = Vec::with_capacity(n);
    match strategy {
        ResidualStrategy::UniformGrid => {
            let nx = (n as f64).sqrt().ceil() as usize;
            let nt = n.div_ceil(nx);
            let dx = (domain.1 - domain.0) / nx as f64;
            let dt = (t_range.1 - t_range.0) / nt as f64;
            for j in 0..nt {
                let t = t_range.0 + (j as f64 + 0.5) * dt;
                for i in 0..nx {
                    points.push([domain.0 + (i as f64 + 0.5) * dx, t]);
                }
            }
        }
        ResidualStrategy::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..n {
                let x = domain.0 + rng.gen::<f64>() * (domain.1 - domain.0);
                let t = t_range.0 + rng.gen::<f64>() * (t_range.1 - t_range.0);
                points.push([x, t]);
            }
        }
    }
    Ok(points)
}

/// Draw `n` distinct lattice locations from the snapshots of `truth` whose
/// times fall inside `t_window` (inclusive).
pub fn sample_lattice_points(
    truth: &SpaceTimeField,
    n: usize,
    strategy: DataStrategy,
    t_window: (f64, f64),
    seed: u64,
) -> Result<Vec<LatticeSample>> {
    let snapshots: Vec<usize> = (0..truth.n_snapshots())
        .filter(|&s| truth.times[s] >= t_window.0 && truth.times[s] <= t_window.1)
        .collect();
    let n_cells = truth.grid.n_cells;
    let total = snapshots.len() * n_cells;
    if n == 0 || n > total {
        return Err(Error::Sampling(format!(
            "requested {n} observations from a lattice of {total} candidate locations"
        )));
    }
    let location = |flat: usize| -> LatticeSample {
        let snapshot = snapshots[flat / n_cells];
        let cell = flat % n_cells;
        LatticeSample { snapshot, cell, x: truth.grid.center(cell), t: truth.times[snapshot] }
    };

    match strategy {
        DataStrategy::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(index_sample(&mut rng, total, n).iter().map(location).collect())
        }
        DataStrategy::UniformStride => {
            Ok((0..n).map(|k| location(k * total / n)).collect())
        }
        DataStrategy::ProportionalToInfected => {
            let infected = truth.field_index("I")?;
            let mut weight: Vec<f64> = snapshots
                .iter()
                .flat_map(|&s| truth.at(s, infected).iter().copied())
                .collect();
            if let Some(&bad) = weight.iter().find(|w| !w.is_finite() || **w < 0.0) {
                return Err(Error::Sampling(format!(
                    "infection density {bad} cannot be used as a sampling weight"
                )));
            }
            let mut remaining: f64 = weight.iter().sum();
            if remaining <= 0.0 {
                return Err(Error::Sampling(
                    "infection density is identically zero; nothing to sample from".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picks = Vec::with_capacity(n);
            for _ in 0..n {
                let mut target = rng.gen::<f64>() * remaining;
                let mut chosen = weight.len() - 1;
                for (k, &w) in weight.iter().enumerate() {
                    if target < w {
                        chosen = k;
                        break;
                    }
                    target -= w;
                }
                // Roundoff can walk past the last positive weight; rescan.
                if weight[chosen] == 0.0 {
                    chosen = weight.iter().rposition(|&w| w > 0.0).ok_or_else(|| {
                        Error::Sampling("sampling weights exhausted".into())
                    })?;
                }
                picks.push(location(chosen));
                remaining -= weight[chosen];
                weight[chosen] = 0.0;
            }
            Ok(picks)
        }
    }
}

/// Split a pool into (train, validation) with a fixed one-fifth held out,
/// `floor(N/5)` points, selected uniformly by the seed. Order inside each
/// part follows the input pool.
pub fn split_validation<T: Clone>(pool: &[T], seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    let n = pool.len();
    if n < 5 {
        return Err(Error::InvalidConfig(format!(
            "pool of {n} points is too small to hold out one fifth"
        )));
    }
    let n_val = n / 5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_val = vec![false; n];
    for k in index_sample(&mut rng, n, n_val) {
        is_val[k] = true;
    }
    let mut train = Vec::with_capacity(n - n_val);
    let mut val = Vec::with_capacity(n_val);
    for (item, &v) in pool.iter().zip(&is_val) {
        if v {
            val.push(item.clone());
        } else {
            train.push(item.clone());
        }
    }
    Ok((train, val))
}
